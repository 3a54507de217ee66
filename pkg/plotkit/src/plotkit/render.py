"""Figure rendering for the sweep outputs.

Maps are drawn as quadrilateral meshes with singular (masked) cells in a
distinct hatched gray rather than interpolated over: degenerate regions are
data, not gaps to smooth across.  Ambiguity surfaces get the classic layout
with marginal cuts through the peak above and beside the surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

from .schema import GridData, load_bound_map, load_ratio_map, load_wbaf

KINDS = ("position_map", "doppler_map", "ratio_map", "wbaf")

MASKED_COLOR = "0.82"
MASKED_HATCH = "///"


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV, plot kind, color scale, output path."""

    input_csv: str
    kind: str
    output: str
    scale: str = "linear"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be 'linear' or 'log', got {self.scale!r}")


@dataclass(frozen=True, eq=False)
class RenderResult:
    """Rendered file path plus the exact data array that was drawn."""

    path: str
    grid: GridData


def _cell_edges(centers: np.ndarray) -> np.ndarray:
    if centers.size == 1:
        half = 0.5 if centers[0] == 0.0 else 0.5 * max(abs(centers[0]), 1.0)
        return np.array([centers[0] - half, centers[0] + half])
    mids = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _draw_map(ax, grid: GridData, scale: str, vmin=None):
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad(MASKED_COLOR)
    norm = None
    if scale == "log":
        positive = grid.values.compressed()
        positive = positive[positive > 0.0]
        if positive.size:
            norm = LogNorm(vmin=positive.min() if vmin is None else vmin,
                           vmax=positive.max())
    xs = _cell_edges(grid.xs)
    ys = _cell_edges(grid.ys)
    mesh = ax.pcolormesh(xs, ys, grid.values, cmap=cmap, norm=norm,
                         vmin=None if norm else vmin, shading="flat")
    if grid.values.mask.any():
        # hatch the singular cells so they cannot be mistaken for low values
        hatch = np.ma.masked_where(~grid.values.mask,
                                   np.ones_like(grid.values.data))
        ax.pcolor(xs, ys, hatch, hatch=MASKED_HATCH, alpha=0.0)
    return mesh


def _render_map(spec: PlotSpec, grid: GridData, title: str, cbar_label: str,
                vmin=None) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    mesh = _draw_map(ax, grid, spec.scale, vmin=vmin)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(title)
    cbar = fig.colorbar(mesh, ax=ax)
    cbar.set_label(cbar_label)
    if grid.values.mask.any():
        ax.set_title(title + "  (hatched: singular)")
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return RenderResult(path=str(spec.output), grid=grid)


def _render_wbaf(spec: PlotSpec, grid: GridData) -> RenderResult:
    values = np.asarray(grid.values.filled(0.0))
    floor_db = -60.0
    with np.errstate(divide="ignore"):
        level_db = 20.0 * np.log10(np.maximum(values / values.max(), 1e-12))
    level_db = np.maximum(level_db, floor_db)
    iy, ix = np.unravel_index(int(values.argmax()), values.shape)

    fig = plt.figure(figsize=(7.0, 6.0))
    gs = fig.add_gridspec(2, 2, width_ratios=(4, 1.3), height_ratios=(1.3, 4),
                          hspace=0.08, wspace=0.08)
    ax_main = fig.add_subplot(gs[1, 0])
    ax_top = fig.add_subplot(gs[0, 0], sharex=ax_main)
    ax_right = fig.add_subplot(gs[1, 1], sharey=ax_main)

    mesh = ax_main.pcolormesh(_cell_edges(grid.xs), _cell_edges(grid.ys),
                              level_db, cmap="viridis",
                              vmin=floor_db, vmax=0.0, shading="flat")
    ax_main.set_xlabel("delay [s]")
    ax_main.set_ylabel("doppler scale")
    ax_top.plot(grid.xs, level_db[iy, :], lw=1.0)
    ax_top.set_ylabel("dB")
    ax_top.tick_params(labelbottom=False)
    ax_right.plot(level_db[:, ix], grid.ys, lw=1.0)
    ax_right.set_xlabel("dB")
    ax_right.tick_params(labelleft=False)
    cbar = fig.colorbar(mesh, ax=(ax_main, ax_right), location="bottom",
                        shrink=0.8, pad=0.12)
    cbar.set_label("normalized magnitude [dB]")
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return RenderResult(path=str(spec.output), grid=grid)


def render(spec: PlotSpec) -> RenderResult:
    """Render one spec to its output image; returns the path and the parsed
    grid (tests sample it to confirm the drawn data equals the CSV)."""
    Path(spec.output).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "position_map":
        grid = load_bound_map(spec.input_csv, "position")
        return _render_map(spec, grid, "position bound", "sqrt CRLB position [m]")
    if spec.kind == "doppler_map":
        grid = load_bound_map(spec.input_csv, "doppler")
        return _render_map(spec, grid, "doppler-scale bound", "sqrt CRLB doppler scale")
    if spec.kind == "ratio_map":
        grid = load_ratio_map(spec.input_csv)
        # ratios are >= 1 by construction; clamp the scale accordingly
        return _render_map(spec, grid, "case 3 / case 2 ratio", "ratio", vmin=1.0)
    grid = load_wbaf(spec.input_csv)
    return _render_wbaf(spec, grid)
