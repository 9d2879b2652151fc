import json
import os
import shutil
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
BUNDLE = FIXTURES / "bundle.json"

# mean absolute per-channel difference allowed against the golden image
PIXEL_TOLERANCE = 1.5


@pytest.fixture(scope="session")
def bundle_path() -> Path:
    return BUNDLE


@pytest.fixture(scope="session")
def bundle() -> dict:
    return json.loads(BUNDLE.read_text())


def assert_matches_golden(rendered: Path, name: str) -> None:
    """Compare against the committed golden image; regenerate with
    REGEN_GOLDENS=1."""
    golden_path = GOLDEN / name
    if os.environ.get("REGEN_GOLDENS") == "1":
        golden_path.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(rendered, golden_path)
        pytest.skip(f"regenerated golden {name}")
    assert golden_path.exists(), f"golden image {name} missing; run REGEN_GOLDENS=1"
    got = np.asarray(Image.open(rendered).convert("RGB"), dtype=np.float64)
    want = np.asarray(Image.open(golden_path).convert("RGB"), dtype=np.float64)
    assert got.shape == want.shape, f"{name}: size changed {got.shape} vs {want.shape}"
    diff = float(np.mean(np.abs(got - want)))
    assert diff <= PIXEL_TOLERANCE, f"{name}: mean pixel diff {diff:.3f}"
