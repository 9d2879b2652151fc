import matplotlib.pyplot as plt
import numpy as np
import pytest

from lineage_mdi_figures import FIGURE_KINDS, FigureSpec, draw, render
from lineage_mdi_figures.bundle import load_bundle

from conftest import FIXTURES


@pytest.fixture()
def fig():
    figure = plt.figure(figsize=(8, 5))
    yield figure
    plt.close(figure)


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_render_writes_image(kind, bundle_path, tmp_path):
    out = render(FigureSpec(kind=kind, bundle_path=bundle_path, out_path=tmp_path / f"{kind}.png"))
    assert out.exists()
    assert out.stat().st_size > 1_000


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_empty_tables_render_annotated_frame(kind, tmp_path):
    out = render(
        FigureSpec(
            kind=kind,
            bundle_path=FIXTURES / "empty_bundle.json",
            out_path=tmp_path / f"{kind}.png",
        )
    )
    assert out.exists() and out.stat().st_size > 0


def test_scatter_marks_zero_crossing(bundle, fig):
    crossing = bundle["trend"]["zero_crossing"]
    assert crossing is not None  # fixture bundle crosses zero by construction
    draw("scatter-lowess", bundle, fig)
    ax = fig.axes[0]
    vertical = [
        line for line in ax.lines
        if len(set(np.asarray(line.get_xdata(), dtype=float))) == 1
        and np.isclose(float(line.get_xdata()[0]), crossing)
    ]
    assert vertical, "no vertical marker at the zero crossing"


def test_scatter_without_crossing_has_no_marker(bundle, fig):
    modified = dict(bundle)
    modified["trend"] = dict(bundle["trend"], zero_crossing=None)
    draw("scatter-lowess", modified, fig)
    crossing = bundle["trend"]["zero_crossing"]
    ax = fig.axes[0]
    assert not any(
        np.isclose(float(line.get_xdata()[0]), crossing)
        for line in ax.lines
        if len(set(np.asarray(line.get_xdata(), dtype=float))) == 1
    )


def test_single_period_ridge(bundle, fig):
    modified = dict(bundle)
    modified["temporal"] = dict(bundle["temporal"], periods=bundle["temporal"]["periods"][:1])
    draw("period-ridge", modified, fig)
    assert len(fig.axes[0].get_yticks()) == 1


def test_monthly_trend_has_two_axes(bundle, fig):
    draw("monthly-trend", bundle, fig)
    assert len(fig.axes) == 2  # count axis + share axis


def test_render_is_deterministic(bundle_path, tmp_path):
    paths = []
    for name in ("one.png", "two.png"):
        paths.append(
            render(
                FigureSpec(
                    kind="strategy-raincloud",
                    bundle_path=bundle_path,
                    out_path=tmp_path / name,
                )
            )
        )
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_draw_rejects_unknown_kind(bundle, fig):
    with pytest.raises(KeyError):
        draw("sparkline", bundle, fig)


def test_load_bundle_round_trip(bundle_path, bundle):
    assert load_bundle(bundle_path) == bundle
