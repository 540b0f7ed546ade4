"""
plotting.py
Deterministic SVG figures. Same data in, byte-identical file out.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib as mpl  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib import pyplot as plt  # noqa: E402

from .shortcuts.lines import METHOD_LINES  # noqa: E402

SVG_HASH_SALT = "tracest"
FIGURE_STYLE = "fivethirtyeight"


class Static(ABC):
    """A fixed reference drawn on top of the data."""

    @abstractmethod
    def draw(self, ax) -> None:
        pass


@dataclass
class VLine(Static):
    x: float
    label: Optional[str] = None
    params: Dict = field(default_factory=lambda: {"linestyle": ":", "linewidth": 1, "color": "k"})

    def draw(self, ax) -> None:
        ax.axvline(self.x, label=self.label, **self.params)


@dataclass
class HLine(Static):
    y: float
    label: Optional[str] = None
    params: Dict = field(default_factory=lambda: {"linestyle": ":", "linewidth": 1, "color": "k"})

    def draw(self, ax) -> None:
        ax.axhline(self.y, label=self.label, **self.params)


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    params: Dict = field(default_factory=dict)

    @classmethod
    def for_method(cls, method: str, label: str, x, y) -> "Series":
        return cls(label=label, x=x, y=y, params=dict(METHOD_LINES.get(method, {})))


@dataclass
class LinePanel:
    series: List[Series]
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    statics: List[Static] = field(default_factory=list)

    def draw(self, ax) -> None:
        for s in self.series:
            # Censored points arrive as NaN and are left as gaps
            ax.plot(np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float), label=s.label, **s.params)
        for static in self.statics:
            static.draw(ax)
        if self.logx:
            ax.set_xscale("log")
        if self.logy:
            ax.set_yscale("log")
        _label(ax, self.title, self.xlabel, self.ylabel)
        if self.series or any(getattr(s, "label", None) for s in self.statics):
            ax.legend(fontsize="small")


@dataclass
class HistogramPanel:
    edges: Sequence[float]
    counts: Sequence[float]
    title: str = ""
    xlabel: str = ""
    ylabel: str = "count"
    logy: bool = False

    def draw(self, ax) -> None:
        edges = np.asarray(self.edges, dtype=float)
        ax.bar(edges[:-1], np.asarray(self.counts, dtype=float), width=np.diff(edges), align="edge",
               color="b", alpha=0.6, edgecolor="k", linewidth=0.5)
        if self.logy:
            ax.set_yscale("log")
        _label(ax, self.title, self.xlabel, self.ylabel)


def _label(ax, title: str, xlabel: str, ylabel: str) -> None:
    ax.set_title(title, fontsize=10)
    ax.set_xlabel(xlabel, fontsize=9)
    ax.set_ylabel(ylabel, fontsize=9)
    ax.tick_params(labelsize=8)


def save_svg(panels: List, path, suptitle: str = "") -> Path:
    """Draw panels side by side (two per row) and write a reproducible SVG."""
    path = Path(path)
    ncols = min(2, len(panels))
    nrows = int(np.ceil(len(panels) / ncols))
    with mpl.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        with plt.style.context(FIGURE_STYLE):
            fig, axes = plt.subplots(nrows, ncols, figsize=(6 * ncols, 4.5 * nrows), squeeze=False)
            for ax, panel in zip(axes.flat, panels):
                panel.draw(ax)
            for ax in list(axes.flat)[len(panels):]:
                ax.set_visible(False)
            if suptitle:
                fig.suptitle(suptitle, fontsize=11)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
    return path
