"""Parameter-scale extraction from model identifiers.

Model ids frequently embed a size token such as ``14B`` or ``350M``. The
token must be bounded by non-alphanumeric characters (or the string edge)
so that version fragments like ``qwen2.5B`` or precision markers like
``F16`` are not misread as sizes. When several tokens appear, the last one
wins and the id is flagged ambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

SMALL_MAX = 1_000_000_000  # exclusive
LARGE_MIN = 10_000_000_000  # exclusive

# <number><M|B> bounded by non-alphanumerics; a leading dot also disqualifies
# (it means the digits are the tail of a version like "2.5B").
_TOKEN = re.compile(r"(?<![0-9A-Za-z.])(\d+(?:\.\d+)?)([MBmb])(?![0-9A-Za-z])")

_MULTIPLIER = {"m": 1_000_000, "b": 1_000_000_000}


@dataclass(frozen=True)
class ParamScale:
    """Parameter count parsed from an id, plus its size bucket.

    Buckets: small < 1B, 1B <= medium <= 10B, large > 10B, unknown when no
    token matched.
    """

    raw: Optional[int]
    bucket: str
    ambiguous: bool = False


def bucket_for(raw: Optional[int]) -> str:
    if raw is None:
        return "unknown"
    if raw < SMALL_MAX:
        return "small"
    if raw <= LARGE_MIN:
        return "medium"
    return "large"


def extract_param_scale(model_id: str) -> ParamScale:
    """Scan an id for size tokens; never fails.

    >>> extract_param_scale("Qwen/Qwen2.5-14B-Instruct").bucket
    'large'
    """
    matches = _TOKEN.findall(model_id or "")
    if not matches:
        return ParamScale(raw=None, bucket="unknown")
    number, unit = matches[-1]
    raw = int(round(float(number) * _MULTIPLIER[unit.lower()]))
    return ParamScale(raw=raw, bucket=bucket_for(raw), ambiguous=len(matches) > 1)
