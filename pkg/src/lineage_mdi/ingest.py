"""Model metadata acquisition: live hub API client and offline dump reader.

Both paths normalize raw metadata rows into :class:`ModelRecord` values and
assemble them into an immutable :class:`Snapshot`. The snapshot can be
persisted as newline-delimited JSON; the persisted file is itself a valid
dump, so write/read round-trips are identity.
"""

from __future__ import annotations

import json
import logging
import time as _time
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import requests

logger = logging.getLogger(__name__)

# Earliest creation time observed on the platform. Records before this are
# kept but counted as suspicious.
PLATFORM_FLOOR = int(datetime(2022, 3, 2, 23, 29, 4, tzinfo=timezone.utc).timestamp())

_ID_KEYS = ("model_id", "id", "modelId")
_CREATED_KEYS = ("created_at", "created", "createdAt")
_PEFT_KEY = "config_peft_base_model_name_or_path"


class RecordRejected(ValueError):
    """A raw metadata row cannot be normalized. Carries a reason code."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class DumpFormatError(ValueError):
    """Strict-mode dump parsing failure; message names the offending line."""


class FetchError(RuntimeError):
    """Live fetch aborted after exhausting retries. The checkpoint written so
    far remains on disk."""


def parse_timestamp(value) -> int:
    """Parse an ISO-8601 string or numeric epoch into UTC epoch seconds.

    Naive datetimes are taken as UTC. Sub-second precision is truncated.
    """
    if isinstance(value, bool):
        raise RecordRejected("bad_timestamp", repr(value))
    if isinstance(value, (int, float)):
        return int(value)
    if not isinstance(value, str):
        raise RecordRejected("bad_timestamp", repr(value))
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise RecordRejected("bad_timestamp", value) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ModelRecord:
    """One hub model's normalized metadata row.

    ``created_at`` is UTC epoch seconds. ``card_base_model`` and
    ``card_data_base_model`` are kept separate because downstream link
    extraction consults them in different phases; ``card_base`` exposes
    their union.
    """

    model_id: str
    created_at: int
    tags: tuple[str, ...] = ()
    peft_base: Optional[str] = None
    card_base_model: tuple[str, ...] = ()
    card_data_base_model: tuple[str, ...] = ()
    raw_field_count: int = 0

    @property
    def card_base(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.card_base_model)
        seen.update(dict.fromkeys(self.card_data_base_model))
        return tuple(seen)

    def to_json(self) -> dict:
        out = {
            "model_id": self.model_id,
            "created_at": format_timestamp(self.created_at),
            "tags": list(self.tags),
            "raw_field_count": self.raw_field_count,
        }
        if self.peft_base is not None:
            out[_PEFT_KEY] = self.peft_base
        if self.card_base_model:
            out["card_base_model"] = list(self.card_base_model)
        if self.card_data_base_model:
            out["card_data"] = {"base_model": list(self.card_data_base_model)}
        return out


@dataclass
class IngestStats:
    """Counters accumulated while assembling a snapshot."""

    duplicates: int = 0
    pre_floor: int = 0
    skipped: Counter = field(default_factory=Counter)
    pages_skipped: int = 0

    def to_json(self) -> dict:
        return {
            "duplicates": self.duplicates,
            "pre_floor": self.pre_floor,
            "skipped": dict(sorted(self.skipped.items())),
            "pages_skipped": self.pages_skipped,
        }


@dataclass
class Snapshot:
    """Immutable collection of ModelRecords keyed by model id."""

    records: dict[str, ModelRecord]
    retrieved_at: int
    source: str  # "live_api" or "offline_dump"
    stats: IngestStats = field(default_factory=IngestStats)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())


def _string_list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    if isinstance(value, list):
        return [v for v in value if isinstance(v, str)]
    return []


def normalize(record_json: dict) -> ModelRecord:
    """Normalize one raw metadata object into a :class:`ModelRecord`.

    Raises :class:`RecordRejected` with a reason code when the row is
    unusable (missing id, missing or unparseable timestamp). Idempotent:
    normalizing an already-normal row changes nothing.
    """
    if not isinstance(record_json, dict):
        raise RecordRejected("not_an_object", repr(record_json))

    model_id = next(
        (record_json[k] for k in _ID_KEYS if isinstance(record_json.get(k), str)), None
    )
    if model_id is None or not model_id.strip():
        raise RecordRejected("missing_model_id")
    model_id = model_id.strip()

    created_raw = next(
        (record_json[k] for k in _CREATED_KEYS if record_json.get(k) is not None), None
    )
    if created_raw is None:
        raise RecordRejected("missing_created_at", model_id)
    created_at = parse_timestamp(created_raw)

    tags: list[str] = []
    for tag in _string_list(record_json.get("tags")):
        tag = tag.strip()
        if tag and tag not in tags:
            tags.append(tag)

    peft = record_json.get(_PEFT_KEY)
    if not isinstance(peft, str):
        peft = None

    card_base_model = _string_list(record_json.get("card_base_model"))

    card_data_base: list[str] = []
    card_data = record_json.get("card_data")
    if isinstance(card_data, dict):
        card_data_base = _string_list(card_data.get("base_model"))
    # Some exports flatten the nested path into a dotted key.
    card_data_base += _string_list(record_json.get("card_data.base_model"))

    raw_count = record_json.get("raw_field_count")
    if not isinstance(raw_count, int) or isinstance(raw_count, bool):
        raw_count = len(record_json)

    return ModelRecord(
        model_id=model_id,
        created_at=created_at,
        tags=tuple(tags),
        peft_base=peft,
        card_base_model=tuple(card_base_model),
        card_data_base_model=tuple(card_data_base),
        raw_field_count=raw_count,
    )


def _assemble(
    records: Iterable[ModelRecord], source: str, stats: IngestStats
) -> Snapshot:
    merged: dict[str, ModelRecord] = {}
    for rec in records:
        if rec.model_id in merged:
            stats.duplicates += 1
        if rec.created_at < PLATFORM_FLOOR:
            stats.pre_floor += 1
        merged[rec.model_id] = rec  # last-seen wins
    if stats.duplicates:
        logger.warning("collapsed %d duplicate model ids", stats.duplicates)
    return Snapshot(
        records=merged,
        retrieved_at=int(_time.time()),
        source=source,
        stats=stats,
    )


def read_dump(
    path, strictness: str = "strict", max_records: Optional[int] = None
) -> Snapshot:
    """Read a newline-delimited JSON dump into a Snapshot.

    ``strict`` mode raises :class:`DumpFormatError` naming the first bad
    line; ``lenient`` mode skips bad lines and counts them by reason.
    """
    if strictness not in ("strict", "lenient"):
        raise ValueError(f"unknown strictness {strictness!r}")
    stats = IngestStats()
    records: list[ModelRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if max_records is not None and len(records) >= max_records:
                break
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(normalize(obj))
            except (json.JSONDecodeError, RecordRejected) as exc:
                reason = exc.reason if isinstance(exc, RecordRejected) else "bad_json"
                if strictness == "strict":
                    raise DumpFormatError(f"line {lineno}: {reason}") from exc
                stats.skipped[reason] += 1
                logger.debug("skipping line %d: %s", lineno, reason)
    return _assemble(records, "offline_dump", stats)


def write_snapshot(snapshot: Snapshot, path) -> None:
    """Persist records as NDJSON sorted by model id (byte-stable output)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for model_id in sorted(snapshot.records):
            fh.write(
                json.dumps(snapshot.records[model_id].to_json(), sort_keys=True) + "\n"
            )


class _Checkpoint:
    """Append-only fetch journal: record lines interleaved with cursor marks.

    Replaying the journal restores both the records fetched so far and the
    cursor of the next page, so an interrupted fetch never re-downloads a
    completed page.
    """

    def __init__(self, path):
        self.path = Path(path)

    def load(self) -> tuple[list[ModelRecord], Optional[str]]:
        records: list[ModelRecord] = []
        cursor: Optional[str] = None
        if not self.path.exists():
            return records, cursor
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if "__cursor__" in obj:
                    cursor = obj["__cursor__"]
                else:
                    records.append(normalize(obj))
        return records, cursor

    def append_page(self, records: list[ModelRecord], next_cursor: Optional[str]):
        with open(self.path, "a", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            fh.write(json.dumps({"__cursor__": next_cursor}) + "\n")

    def clear(self):
        if self.path.exists():
            self.path.unlink()


def fetch_live(
    endpoint_url: str,
    page_size: int = 100,
    rate_limit: Optional[float] = None,
    resume_cursor: Optional[str] = None,
    max_records: Optional[int] = None,
    max_retries: int = 3,
    retry_wait: float = 0.2,
    checkpoint_path=None,
    timeout: float = 30.0,
) -> Snapshot:
    """Fetch model metadata from a paginated hub endpoint.

    The endpoint is expected to answer
    ``GET {endpoint_url}?limit={page_size}&cursor={cursor}`` with a JSON
    object ``{"items": [...], "next_cursor": "..." | null}`` where the
    cursor is a stringified record offset. Pages that fail with HTTP errors
    are retried ``max_retries`` times; exhausting retries raises
    :class:`FetchError` with the checkpoint preserved. Pages with malformed
    JSON bodies are skipped (the cursor advances by ``page_size``) and
    counted.

    ``rate_limit`` caps requests per second. ``max_records`` stops the
    fetch once that many records have been accepted.
    """
    if page_size <= 0:
        raise ValueError("page_size must be positive")
    stats = IngestStats()
    records: list[ModelRecord] = []
    checkpoint = _Checkpoint(checkpoint_path) if checkpoint_path else None
    cursor: Optional[str] = resume_cursor
    if checkpoint is not None and resume_cursor is None:
        records, cursor = checkpoint.load()
        if records:
            logger.info("resuming fetch with %d checkpointed records", len(records))

    session = requests.Session()
    min_interval = 1.0 / rate_limit if rate_limit else 0.0
    last_request = 0.0

    while True:
        if max_records is not None and len(records) >= max_records:
            records = records[:max_records]
            break

        params = {"limit": page_size}
        if cursor is not None:
            params["cursor"] = cursor

        page = None
        for attempt in range(max_retries):
            wait = min_interval - (_time.monotonic() - last_request)
            if wait > 0:
                _time.sleep(wait)
            last_request = _time.monotonic()
            try:
                resp = session.get(endpoint_url, params=params, timeout=timeout)
                if resp.status_code >= 500:
                    raise requests.HTTPError(f"HTTP {resp.status_code}")
                resp.raise_for_status()
                page = resp
                break
            except requests.RequestException as exc:
                logger.warning(
                    "page fetch failed (cursor=%r attempt %d/%d): %s",
                    cursor,
                    attempt + 1,
                    max_retries,
                    exc,
                )
                if attempt + 1 == max_retries:
                    raise FetchError(
                        f"aborted at cursor {cursor!r} after {max_retries} attempts"
                    ) from exc
                _time.sleep(retry_wait)

        offset = int(cursor) if cursor is not None else 0
        try:
            body = page.json()
            items = body["items"]
            next_cursor = body.get("next_cursor")
        except (ValueError, KeyError, TypeError):
            stats.pages_skipped += 1
            logger.warning("malformed page at cursor %r skipped", cursor)
            cursor = str(offset + page_size)
            continue

        page_records = []
        for item in items:
            try:
                page_records.append(normalize(item))
            except RecordRejected as exc:
                stats.skipped[exc.reason] += 1
        records.extend(page_records)
        if checkpoint is not None:
            checkpoint.append_page(page_records, next_cursor)

        if next_cursor is None:
            break
        cursor = next_cursor

    return _assemble(records, "live_api", stats)


def record_cap(snapshot: Snapshot, n: int) -> Snapshot:
    """First ``n`` records in model-id order (testing convenience)."""
    kept = dict(sorted(snapshot.records.items())[:n])
    return replace(snapshot, records=kept)
