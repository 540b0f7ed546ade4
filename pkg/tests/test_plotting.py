import pytest
import numpy as np
from matplotlib import pyplot as plt
from tracest.plotting import HistogramPanel, HLine, LinePanel, Series, VLine, save_svg


@pytest.fixture
def ax():
    fig, ax = plt.subplots()
    yield ax
    plt.close(fig)


def test_statics_draw_reference_lines(ax):
    VLine(42, label="necessary N").draw(ax)
    HLine(0.9, label="1 - delta").draw(ax)
    vertical, horizontal = ax.get_lines()
    assert list(vertical.get_xdata()) == [42, 42]
    assert list(horizontal.get_ydata()) == [0.9, 0.9]
    assert vertical.get_label() == "necessary N"
    assert vertical.get_linestyle() == ":"


def test_line_panel_draws_statics_after_series(ax):
    panel = LinePanel([Series.for_method("gaussian", "Gaussian", [1, 2, 3], [0.5, 0.7, 0.95])],
                      statics=[VLine(2), HLine(0.9)], logx=True)
    panel.draw(ax)
    lines = ax.get_lines()
    assert len(lines) == 3
    assert lines[0].get_color() == "r"
    assert ax.get_xscale() == "log"
    assert ax.get_legend() is not None


def test_save_svg_is_reproducible(tmp_path):
    panels = [LinePanel([Series("a", [1, 2], [3, np.nan])], statics=[VLine(1.5)]),
              HistogramPanel(edges=[0.0, 1.0, 2.0], counts=[3, 1])]
    first = save_svg(panels, tmp_path / "a.svg")
    second = save_svg(panels, tmp_path / "b.svg")
    assert first.read_text().lstrip().startswith("<?xml")
    assert first.read_bytes() == second.read_bytes()
