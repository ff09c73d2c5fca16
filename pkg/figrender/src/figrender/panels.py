"""CSV panel parsing.

The sweep CSV contract: leading axis columns carry plain labels, variant
columns are labeled ``<variant>:<quantity>``, masked cells are empty, and
every variant carries a ``stable`` column. Quantities are ``E_ab`` or
``delta_E_ab`` for entanglement panels and ``M_up``/``M_down`` plus branch
labels for hysteresis panels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path


class SchemaMismatch(Exception):
    """CSV does not follow the sweep column convention."""


_VALUE_QUANTITIES = ("E_ab", "delta_E_ab", "M_up", "M_down")
_TEXT_QUANTITIES = ("branch_up", "branch_down")
_KNOWN_QUANTITIES = _VALUE_QUANTITIES + _TEXT_QUANTITIES + ("stable",)


@dataclass(frozen=True)
class Table:
    path: Path
    panel_id: str
    axis_labels: tuple[str, ...]
    axes: tuple[tuple[float, ...], ...]
    variants: tuple[str, ...]
    series: dict  # (variant, quantity) -> tuple of float | str | None

    def values(self, variant: str, quantity: str):
        try:
            return self.series[(variant, quantity)]
        except KeyError:
            raise SchemaMismatch(f"missing column {variant}:{quantity}") from None

    @property
    def kind(self) -> str:
        if any(q == "M_up" for (_, q) in self.series):
            return "hysteresis"
        if len(self.axis_labels) == 2:
            return "density"
        return "line"

    def quantity_of(self, variant: str) -> str:
        for candidate in ("E_ab", "delta_E_ab"):
            if (variant, candidate) in self.series:
                return candidate
        raise SchemaMismatch(f"missing column {variant}:E_ab")


def _parse_number(cell: str, column: str) -> float | None:
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise SchemaMismatch(f"non-numeric cell {cell!r} in column {column}") from None


def read_table(path: str | Path) -> Table:
    path = Path(path)
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise SchemaMismatch("empty csv")
    header = rows[0]
    if len(set(header)) != len(header):
        raise SchemaMismatch("duplicate column labels")

    axis_labels: list[str] = []
    variant_order: list[str] = []
    columns: list[tuple[str, str]] = []  # (variant, quantity); axis -> ("", label)
    for label in header:
        if ":" not in label:
            if variant_order:
                raise SchemaMismatch(f"axis column {label} after variant columns")
            axis_labels.append(label)
            columns.append(("", label))
            continue
        variant, _, quantity = label.partition(":")
        if not variant or not quantity:
            raise SchemaMismatch(f"malformed column label {label}")
        if quantity not in _KNOWN_QUANTITIES:
            raise SchemaMismatch(f"unknown quantity in column {label}")
        if variant not in variant_order:
            variant_order.append(variant)
        columns.append((variant, quantity))
    if not axis_labels:
        raise SchemaMismatch("no axis columns")

    body = rows[1:]
    for row in body:
        if len(row) != len(header):
            raise SchemaMismatch(f"row width {len(row)} != header width {len(header)}")

    axes: list[tuple[float, ...]] = []
    series: dict = {}
    for index, (variant, quantity) in enumerate(columns):
        cells = [row[index] for row in body]
        label = header[index]
        if variant == "":
            parsed = tuple(_parse_number(c, label) for c in cells)
            if any(v is None for v in parsed):
                raise SchemaMismatch(f"empty cell in axis column {label}")
            axes.append(parsed)
        elif quantity in _TEXT_QUANTITIES:
            series[(variant, quantity)] = tuple(cells)
        elif quantity == "stable":
            parsed = tuple(_parse_number(c, label) for c in cells)
            if any(v not in (0.0, 1.0) for v in parsed):
                raise SchemaMismatch(f"non-flag cell in column {label}")
            series[(variant, quantity)] = tuple(int(v) for v in parsed)
        else:
            series[(variant, quantity)] = tuple(_parse_number(c, label) for c in cells)

    for variant in variant_order:
        if (variant, "stable") not in series:
            raise SchemaMismatch(f"missing column {variant}:stable")
        carried = [q for (v, q) in series if v == variant and q != "stable"]
        if not carried:
            raise SchemaMismatch(f"variant {variant} has only a stable column")

    return Table(
        path=path,
        panel_id=path.stem,
        axis_labels=tuple(axis_labels),
        axes=tuple(axes),
        variants=tuple(variant_order),
        series=series,
    )


DEFAULT_STYLE = {
    "cw": "tab:red",
    "ccw": "tab:blue",
    "kerr_pos": "tab:red",
    "kerr_zero": "black",
    "kerr_neg": "tab:blue",
    "sagnac_pos": "tab:red",
    "sagnac_neg": "tab:blue",
    "sagnac_zero": "black",
}

_FALLBACK_CYCLE = ("tab:green", "tab:orange", "tab:purple", "tab:brown", "tab:gray")


def style_for(variants: tuple[str, ...]) -> dict[str, str]:
    styling = {}
    spare = iter(_FALLBACK_CYCLE * (1 + len(variants) // len(_FALLBACK_CYCLE)))
    for name in variants:
        styling[name] = DEFAULT_STYLE.get(name) or next(spare)
    return styling


@dataclass(frozen=True)
class PanelSpec:
    """One render job: a CSV panel and where its image goes."""

    csv_path: Path
    out_path: Path
    panel_id: str = ""
    axis_labels: tuple[str, ...] = ()
    styling: dict = field(default_factory=dict)

    @classmethod
    def for_csv(cls, csv_path: str | Path, out_path: str | Path) -> "PanelSpec":
        csv_path = Path(csv_path)
        return cls(
            csv_path=csv_path, out_path=Path(out_path), panel_id=csv_path.stem
        )
