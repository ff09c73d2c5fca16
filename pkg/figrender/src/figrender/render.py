"""Panel rendering.

Every figure is drawn from the CSV alone. The renderer never rescales or
resamples the payload: line plots carry the raw column values and density
plots hand the reshaped grid to imshow with nearest interpolation, so
colorbar samples round-trip to the CSV within colormap quantization.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import colormaps

from .panels import PanelSpec, Table, read_table, style_for

# output must not vary between identical runs
matplotlib.rcParams["svg.hashsalt"] = "figrender"

PANEL_IDS = (
    "fig2a",
    "fig2b",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig5a",
    "fig5b",
    "fig5c",
    "fig5d",
    "fig6a",
    "fig6b",
    "fig6c",
    "fig6d",
    "fig7a",
    "fig7b",
    "fig7c",
    "fig7d",
)

MONTAGE_PANELS = ("fig3a", "fig3b", "fig3c", "fig3d")
MONTAGE_STEM = "fig3_montage"


@dataclass(frozen=True)
class RenderReport:
    rendered: tuple[str, ...]
    missing: tuple[str, ...]
    warnings: tuple[str, ...]


def _metadata(image_format: str) -> dict:
    if image_format == "png":
        return {"Software": "figrender"}
    # svg stamps the wall clock unless the Date entry is suppressed
    return {"Date": None}


def _save(fig, out_path: Path, image_format: str) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format=image_format, metadata=_metadata(image_format))
    plt.close(fig)


def _column(table: Table, variant: str, quantity: str) -> np.ndarray:
    raw = table.values(variant, quantity)
    return np.array([np.nan if v is None else v for v in raw], dtype=float)


def _draw_line(ax, table: Table, warnings: list[str]) -> None:
    x = np.asarray(table.axes[0], dtype=float)
    styling = style_for(table.variants)
    for variant in table.variants:
        y = _column(table, variant, table.quantity_of(variant))
        if not np.isfinite(y).any():
            warnings.append(f"{table.panel_id}: variant {variant} has no finite values")
        ax.plot(x, y, color=styling[variant], label=variant)
    ax.set_xlabel(table.axis_labels[0])
    ax.set_ylabel(table.quantity_of(table.variants[0]) if table.variants else "")
    ax.legend(loc="best")


def _draw_hysteresis(ax, table: Table, warnings: list[str]) -> None:
    x = np.asarray(table.axes[0], dtype=float)
    styling = style_for(table.variants)
    for variant in table.variants:
        up = _column(table, variant, "M_up")
        down = _column(table, variant, "M_down")
        if not (np.isfinite(up).any() or np.isfinite(down).any()):
            warnings.append(f"{table.panel_id}: variant {variant} has no finite values")
        ax.plot(x, up, color=styling[variant], linestyle="-", label=f"{variant} up")
        ax.plot(x, down, color=styling[variant], linestyle="--", label=f"{variant} down")
    ax.set_xlabel(table.axis_labels[0])
    ax.set_ylabel("M")
    ax.legend(loc="best")


def _density_grid(table: Table, variant: str) -> np.ndarray:
    n0 = len(set(table.axes[0]))
    n1 = len(set(table.axes[1]))
    if n0 * n1 != len(table.axes[0]):
        raise ValueError(f"{table.panel_id}: grid is not a full cartesian product")
    values = _column(table, variant, table.quantity_of(variant))
    return values.reshape(n0, n1)


def _draw_density(ax, table: Table, warnings: list[str]):
    variant = table.variants[0]
    grid = _density_grid(table, variant)
    if not np.isfinite(grid).any():
        warnings.append(f"{table.panel_id}: variant {variant} has no finite values")
    cmap = colormaps["viridis"].copy()
    cmap.set_bad("lightgray")
    x = sorted(set(table.axes[0]))
    y = sorted(set(table.axes[1]))
    image = ax.imshow(
        np.ma.masked_invalid(grid).T,
        origin="lower",
        extent=(min(x), max(x), min(y), max(y)),
        cmap=cmap,
        aspect="auto",
        interpolation="nearest",
    )
    ax.set_xlabel(table.axis_labels[0])
    ax.set_ylabel(table.axis_labels[1])
    return image


def build_figure(table: Table, title: str | None = None):
    """One panel as a matplotlib figure. Returns (figure, warnings)."""
    warnings: list[str] = []
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    kind = table.kind
    if kind == "hysteresis":
        _draw_hysteresis(ax, table, warnings)
    elif kind == "density":
        image = _draw_density(ax, table, warnings)
        fig.colorbar(image, ax=ax, label=table.quantity_of(table.variants[0]))
    else:
        _draw_line(ax, table, warnings)
    ax.set_title(title or table.panel_id, fontsize="medium", loc="left")
    return fig, warnings


def build_montage(tables: dict[str, Table]):
    """The four density quadrants on one 2x2 grid. Returns (figure, warnings)."""
    warnings: list[str] = []
    fig, axes = plt.subplots(2, 2, figsize=(11.0, 8.5))
    for panel, ax in zip(MONTAGE_PANELS, axes.flat):
        table = tables[panel]
        image = _draw_density(ax, table, warnings)
        fig.colorbar(image, ax=ax)
        ax.set_title(panel, fontsize="medium", loc="left")
    return fig, warnings


def render(spec: PanelSpec, image_format: str = "png") -> list[str]:
    """Render one CSV panel to spec.out_path. Returns warnings."""
    table = read_table(spec.csv_path)
    fig, warnings = build_figure(table, spec.panel_id or table.panel_id)
    _save(fig, spec.out_path, image_format)
    return warnings


def render_all(
    csv_dir: str | Path, out_dir: str | Path, image_format: str = "png"
) -> RenderReport:
    """Render every recognized panel CSV found in csv_dir, sequentially."""
    csv_dir = Path(csv_dir)
    out_dir = Path(out_dir)
    rendered: list[str] = []
    missing: list[str] = []
    warnings: list[str] = []
    montage_tables: dict[str, Table] = {}
    for panel in PANEL_IDS:
        csv_path = csv_dir / f"{panel}.csv"
        if not csv_path.exists():
            missing.append(panel)
            continue
        table = read_table(csv_path)
        fig, panel_warnings = build_figure(table, panel)
        _save(fig, out_dir / f"{panel}.{image_format}", image_format)
        warnings.extend(panel_warnings)
        rendered.append(panel)
        if panel in MONTAGE_PANELS:
            montage_tables[panel] = table
    if len(montage_tables) == len(MONTAGE_PANELS):
        fig, montage_warnings = build_montage(montage_tables)
        _save(fig, out_dir / f"{MONTAGE_STEM}.{image_format}", image_format)
        warnings.extend(montage_warnings)
        rendered.append(MONTAGE_STEM)
    return RenderReport(
        rendered=tuple(rendered), missing=tuple(missing), warnings=tuple(warnings)
    )
