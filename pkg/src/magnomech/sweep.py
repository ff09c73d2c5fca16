"""Parameter-grid engine and figure pipelines emitting tabular panel data.

Grids are evaluated point-independently, so results are identical for any
worker count. Axis values are stored in display units (mechanical-frequency
multiples, ratios, or kelvin); metadata records the conversion.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import __version__
from .entanglement import delta_e_ab, entanglement_of
from .errors import SchemaError, SingularSystem, UnphysicalInput
from .linearized import EffectiveParams
from .model import (
    TWO_PI,
    SystemParams,
    ThermalOccupations,
    params_to_dict,
    thermal_occupation,
)
from .steady_state import ReducedCoefficients, critical_drive, hysteresis_sweep, mean_fields

__all__ = [
    "PANEL_IDS",
    "AxisSpec",
    "VariantSpec",
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "figure_spec",
    "figure_pipeline",
    "spec_from_dict",
    "spec_to_dict",
    "write_csv",
    "write_meta",
]

DEFAULT_RESOLUTION_1D = 201
DEFAULT_RESOLUTION_2D = 101

_BENCH_WB = TWO_PI * 1.0e7

# effective-parameter fields addressed in mechanical-frequency units
_PLAIN_FIELDS = frozenset(
    {
        "delta_a",
        "delta_f",
        "delta_m_shifted",
        "kerr_shift",
        "g_mb_enhanced",
        "g_ma",
        "kappa_a",
        "kappa_m",
        "kappa_b",
    }
)
_SPECIAL_FIELDS = frozenset(
    {"g_ratio", "kappa_ratio", "temperature_mech", "temperature_all"}
)
_HYSTERESIS_FIELDS = frozenset(
    {"kappa_a", "kappa_m", "kappa_b", "g_ma", "g_mb", "delta_f", "kerr_scale"}
)

_AXIS_UNITS = {
    "g_ratio": "g_mb_enhanced / g_ma",
    "kappa_ratio": "kappa_m / kappa_a",
    "temperature_mech": "K (mechanical bath only)",
    "temperature_all": "K (all baths)",
    "epsilon_d": "omega_b",
}


@dataclass(frozen=True)
class AxisSpec:
    """One swept coordinate; ``count`` evenly spaced values over [start, stop]."""

    field: str
    start: float
    stop: float
    count: int
    label: str = ""

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def column_label(self) -> str:
        return self.label or f"{self.field}_over_omega_b"

    def unit(self) -> str:
        return _AXIS_UNITS.get(self.field, "omega_b")


@dataclass(frozen=True)
class VariantSpec:
    """One curve or grid layer; overrides are applied on top of the base."""

    name: str
    mode: str = "entangle"
    overrides: tuple[tuple[str, float], ...] = ()
    pair: tuple[str, str] = ("cavity", "phonon")
    quantity: str = ""

    def column_quantity(self) -> str:
        if self.quantity:
            return self.quantity
        return "delta_E_ab" if self.mode == "delta" else "E_ab"


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[AxisSpec, ...]
    variants: tuple[VariantSpec, ...]
    mode: str = "effective"
    base: tuple[tuple[str, float], ...] = ()
    self_consistent: bool = False
    panel: str = ""
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepResult:
    """Column-ordered table plus the metadata echo that accompanies it."""

    spec: SweepSpec
    columns: tuple[tuple[str, tuple], ...]
    meta: dict

    def column(self, label: str) -> tuple:
        for name, cells in self.columns:
            if name == label:
                return cells
        raise KeyError(label)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)


def _validate_spec(spec: SweepSpec) -> None:
    if spec.mode not in ("effective", "hysteresis"):
        raise SchemaError(f"unknown sweep mode {spec.mode!r}")
    if not spec.variants:
        raise SchemaError("at least one variant is required")
    names = [v.name for v in spec.variants]
    if len(set(names)) != len(names):
        raise SchemaError("variant names must be unique")
    for name in names:
        if not name or "," in name or ":" in name:
            raise SchemaError(f"variant name {name!r} is not a valid column prefix")
    if spec.mode == "hysteresis":
        if len(spec.axes) != 1 or spec.axes[0].field != "epsilon_d":
            raise SchemaError("hysteresis sweeps take a single epsilon_d axis")
        if spec.axes[0].start < 0.0 or spec.axes[0].stop < spec.axes[0].start:
            raise SchemaError("epsilon_d axis must be ascending and nonnegative")
        allowed = _HYSTERESIS_FIELDS
    else:
        if not 1 <= len(spec.axes) <= 2:
            raise SchemaError("effective sweeps take one or two axes")
        allowed = _PLAIN_FIELDS | _SPECIAL_FIELDS
        fields = [ax.field for ax in spec.axes]
        if len(set(fields)) != len(fields):
            raise SchemaError("axes must sweep distinct fields")
        for ax in spec.axes:
            if ax.field not in allowed:
                raise SchemaError(f"unknown axis field {ax.field!r}")
    for ax in spec.axes:
        if ax.count < 1:
            raise SchemaError("axis count must be at least 1")
        if not (math.isfinite(ax.start) and math.isfinite(ax.stop)):
            raise SchemaError("axis bounds must be finite")
    for key, _ in spec.base:
        if key not in allowed:
            raise SchemaError(f"unknown base field {key!r}")
    for variant in spec.variants:
        if spec.mode == "effective" and variant.mode not in ("entangle", "delta"):
            raise SchemaError(f"unknown variant mode {variant.mode!r}")
        for key, _ in variant.overrides:
            if key not in allowed:
                raise SchemaError(f"unknown override field {key!r}")


def _apply_effective(assignments: dict[str, float]) -> EffectiveParams:
    eff = EffectiveParams.benchmark()
    wb = eff.omega_b
    plain = {k: v * wb for k, v in assignments.items() if k in _PLAIN_FIELDS}
    if plain:
        eff = eff.replace(**plain)
    if "g_ratio" in assignments:
        eff = eff.replace(g_mb_enhanced=assignments["g_ratio"] * eff.g_ma)
    if "kappa_ratio" in assignments:
        eff = eff.replace(kappa_m=assignments["kappa_ratio"] * eff.kappa_a)
    if "temperature_all" in assignments:
        eff = eff.replace(
            occupations=ThermalOccupations.from_temperature(
                TWO_PI * 1.0e10,
                TWO_PI * 1.0e10,
                wb,
                assignments["temperature_all"],
            )
        )
    if "temperature_mech" in assignments:
        occ = eff.occupations
        eff = eff.replace(
            occupations=ThermalOccupations(
                n_a=occ.n_a,
                n_m=occ.n_m,
                n_b=thermal_occupation(wb, assignments["temperature_mech"]),
            )
        )
    return eff


def _self_consistent(eff: EffectiveParams) -> EffectiveParams:
    """Realize the working point through a driven steady state, or fail.

    Inverts the enhanced coupling back to a drive level with the benchmark
    bare coupling, then re-derives the effective parameters from the solved
    root. Occupations are carried over unchanged so temperature axes keep
    their meaning.
    """
    g_mb = 1.0e-3 * eff.omega_b
    big_g = eff.g_mb_enhanced
    if big_g <= 0.0:
        if eff.kerr_shift != 0.0:
            raise UnphysicalInput("a Kerr shift requires a driven magnon occupation")
        return eff
    if eff.g_ma <= 0.0:
        raise UnphysicalInput("drive-level inversion needs a photon-magnon coupling")
    m_s = big_g / g_mb
    number = m_s * m_s
    b_s = -1j * g_mb * number / (eff.kappa_b + 1j * eff.omega_b)
    delta_m_bare = eff.delta_m_shifted - 2.0 * g_mb * b_s.real
    omega_a = TWO_PI * 1.0e10
    omega_d = omega_a - eff.delta_a
    a_s = (
        (eff.kappa_m + 1j * (eff.delta_m_shifted + eff.kerr_shift))
        * m_s
        / (-1j * eff.g_ma)
    )
    drive = (eff.kappa_a + 1j * (eff.delta_a - eff.delta_f)) * a_s + 1j * eff.g_ma * m_s
    params = SystemParams(
        omega_a=omega_a,
        omega_m=omega_d + delta_m_bare,
        omega_b=eff.omega_b,
        omega_d=omega_d,
        kappa_a=eff.kappa_a,
        kappa_m=eff.kappa_m,
        kappa_b=eff.kappa_b,
        g_ma=eff.g_ma,
        g_mb=g_mb,
        kerr_k0=eff.kerr_shift / (2.0 * number),
        delta_f=eff.delta_f,
        epsilon_d=abs(drive),
        temperature=0.010,
    )
    states = mean_fields(params)
    state = min(states, key=lambda s: abs(s.magnon_number - number))
    if abs(state.magnon_number - number) > 1e-6 * max(number, 1.0):
        raise SingularSystem("no drive-level root realizes the requested working point")
    derived = EffectiveParams.from_steady_state(params, state)
    return derived.replace(occupations=eff.occupations)


def _eval_point(
    spec: SweepSpec, variant: VariantSpec, assignments: dict[str, float]
) -> tuple[float | None, int]:
    try:
        eff = _apply_effective(assignments)
        if variant.mode == "delta":
            minus = eff.replace(kerr_shift=-eff.kerr_shift)
            if spec.self_consistent:
                plus_r = entanglement_of(_self_consistent(eff), variant.pair)
                minus_r = entanglement_of(_self_consistent(minus), variant.pair)
                if not (plus_r.stable and minus_r.stable):
                    return None, 0
                return abs(plus_r.value - minus_r.value), 1
            return float(delta_e_ab(eff, minus, variant.pair)), 1
        if spec.self_consistent:
            eff = _self_consistent(eff)
        result = entanglement_of(eff, variant.pair)
        if not result.stable:
            return None, 0
        return float(result.value), 1
    except (UnphysicalInput, ArithmeticError):
        return None, 0


def _eval_chunk(args: tuple[SweepSpec, int, int]) -> list[tuple[int, list]]:
    spec, start, stop = args
    grids = [ax.grid() for ax in spec.axes]
    inner = grids[1].size if len(grids) == 2 else 1
    out = []
    for flat in range(start, stop):
        assignments = dict(spec.base)
        if len(grids) == 2:
            assignments_axis = {
                spec.axes[0].field: float(grids[0][flat // inner]),
                spec.axes[1].field: float(grids[1][flat % inner]),
            }
        else:
            assignments_axis = {spec.axes[0].field: float(grids[0][flat])}
        row = []
        for variant in spec.variants:
            merged = dict(assignments)
            merged.update(variant.overrides)
            merged.update(assignments_axis)
            row.append(_eval_point(spec, variant, merged))
        out.append((flat, row))
    return out


def _chunk_bounds(total: int, jobs: int) -> list[tuple[int, int]]:
    pieces = max(1, min(total, jobs * 4))
    step = -(-total // pieces)
    return [(i, min(i + step, total)) for i in range(0, total, step)]


def _axis_columns(spec: SweepSpec) -> list[tuple[str, tuple]]:
    grids = [ax.grid() for ax in spec.axes]
    if len(grids) == 1:
        return [(spec.axes[0].column_label(), tuple(float(v) for v in grids[0]))]
    outer = np.repeat(grids[0], grids[1].size)
    inner = np.tile(grids[1], grids[0].size)
    return [
        (spec.axes[0].column_label(), tuple(float(v) for v in outer)),
        (spec.axes[1].column_label(), tuple(float(v) for v in inner)),
    ]


def _base_meta(spec: SweepSpec) -> dict:
    axes = [
        {
            "field": ax.field,
            "label": ax.column_label(),
            "start": ax.start,
            "stop": ax.stop,
            "count": ax.count,
            "unit": ax.unit(),
        }
        for ax in spec.axes
    ]
    variants = [
        {
            "name": v.name,
            "mode": v.mode,
            "quantity": v.column_quantity(),
            "pair": list(v.pair),
            "overrides": dict(v.overrides),
        }
        for v in spec.variants
    ]
    notes = [
        "floats are written with shortest round-trip formatting",
        "cells at working points without a steady covariance are empty with stable=0",
    ]
    if len(spec.axes) == 2:
        notes.append("rows are ordered with the first axis slowest (row-major)")
    notes.extend(spec.notes)
    return {
        "panel": spec.panel or None,
        "version": __version__,
        "mode": spec.mode,
        "self_consistent": spec.self_consistent,
        "axes": axes,
        "variants": variants,
        "base_overrides": dict(spec.base),
        "conventions": notes,
    }


def _effective_to_dict(eff: EffectiveParams) -> dict:
    return {
        "omega_b": eff.omega_b,
        "kappa_a": eff.kappa_a,
        "kappa_m": eff.kappa_m,
        "kappa_b": eff.kappa_b,
        "g_ma": eff.g_ma,
        "g_mb_enhanced": eff.g_mb_enhanced,
        "delta_a": eff.delta_a,
        "delta_f": eff.delta_f,
        "delta_m_shifted": eff.delta_m_shifted,
        "kerr_shift": eff.kerr_shift,
        "occupations": {
            "n_a": eff.occupations.n_a,
            "n_m": eff.occupations.n_m,
            "n_b": eff.occupations.n_b,
        },
    }


def _run_effective(spec: SweepSpec, jobs: int) -> SweepResult:
    total = 1
    for ax in spec.axes:
        total *= ax.count
    if jobs <= 1 or total == 1:
        chunks = [_eval_chunk((spec, 0, total))]
    else:
        args = [(spec, a, b) for a, b in _chunk_bounds(total, jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_eval_chunk, args))
    values: list[list] = [[None] * total for _ in spec.variants]
    flags: list[list] = [[0] * total for _ in spec.variants]
    for chunk in chunks:
        for flat, row in chunk:
            for k, (value, flag) in enumerate(row):
                values[k][flat] = value
                flags[k][flat] = flag
    columns = _axis_columns(spec)
    for k, variant in enumerate(spec.variants):
        columns.append((f"{variant.name}:{variant.column_quantity()}", tuple(values[k])))
        columns.append((f"{variant.name}:stable", tuple(flags[k])))
    meta = _base_meta(spec)
    meta["base_parameters"] = _effective_to_dict(
        _apply_effective(dict(spec.base))
    )
    return SweepResult(spec=spec, columns=tuple(columns), meta=meta)


def _hysteresis_params(
    base: Sequence[tuple[str, float]], overrides: Sequence[tuple[str, float]]
) -> SystemParams:
    fields = dict(base)
    fields.update(overrides)
    unknown = set(fields) - _HYSTERESIS_FIELDS
    if unknown:
        raise SchemaError(f"unknown drive-sweep fields {sorted(unknown)!r}")
    kerr_scale = fields.pop("kerr_scale", 1.0)
    params = SystemParams.defaults(
        **{key: value * _BENCH_WB for key, value in fields.items()}
    )
    if kerr_scale != 1.0:
        params = params.replace(kerr_k0=kerr_scale * params.kerr_k0)
    return params


@lru_cache(maxsize=1)
def fig2_drive_normalizer() -> float:
    """Critical drive of the co-rotating bistable configuration, in rad/s.

    Both drive panels share this x-axis normalizer; in the linear panel no
    critical drive exists, so the bistable panel's value is reused.
    """
    params = _hysteresis_params(
        (("kerr_scale", 0.1),), (("delta_f", 0.2),)
    )
    value = critical_drive(ReducedCoefficients.from_system(params))
    if value is None:
        raise SingularSystem("reference configuration has no critical drive")
    return value


def _run_hysteresis(spec: SweepSpec) -> SweepResult:
    axis = spec.axes[0]
    grid = axis.grid()
    reference = fig2_drive_normalizer()
    columns: list[tuple[str, tuple]] = [
        (axis.column_label(), tuple(float(v) for v in grid)),
        (
            "epsilon_d_normalized",
            tuple(float(v) for v in grid * _BENCH_WB / reference),
        ),
    ]
    echo = {}
    for variant in spec.variants:
        params = _hysteresis_params(spec.base, variant.overrides)
        trace = hysteresis_sweep(params, grid * params.omega_b)
        columns.append((f"{variant.name}:M_up", tuple(float(v) for v in trace.magnon_up)))
        columns.append(
            (f"{variant.name}:M_down", tuple(float(v) for v in trace.magnon_down))
        )
        columns.append((f"{variant.name}:branch_up", trace.branch_up))
        columns.append((f"{variant.name}:branch_down", trace.branch_down))
        columns.append((f"{variant.name}:stable", (1,) * grid.size))
        echo[variant.name] = params_to_dict(params)
    meta = _base_meta(spec)
    meta["base_parameters"] = echo
    meta["normalizer_epsilon_over_omega_b"] = reference / _BENCH_WB
    return SweepResult(spec=spec, columns=tuple(columns), meta=meta)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate the grid and return the assembled table.

    ``jobs`` > 1 distributes contiguous index ranges over worker processes;
    assembly is by index, so output does not depend on the worker count.
    """
    _validate_spec(spec)
    if spec.mode == "hysteresis":
        return _run_hysteresis(spec)
    return _run_effective(spec, jobs)


def _entangle_variants(
    field: str, values: Sequence[tuple[str, float]]
) -> tuple[VariantSpec, ...]:
    return tuple(
        VariantSpec(name=name, overrides=((field, value),)) for name, value in values
    )


_SAGNAC_VALUES = (("sagnac_pos", 0.1), ("sagnac_neg", -0.1), ("sagnac_zero", 0.0))
_KERR_VALUES = (("kerr_pos", 0.1), ("kerr_zero", 0.0), ("kerr_neg", -0.1))
_QUADRANTS = {
    "fig3a": ("kerr_pos_sagnac_pos", 0.1, 0.1),
    "fig3b": ("kerr_pos_sagnac_neg", 0.1, -0.1),
    "fig3c": ("kerr_neg_sagnac_pos", -0.1, 0.1),
    "fig3d": ("kerr_neg_sagnac_neg", -0.1, -0.1),
}
_FAMILY_AXES = {
    "fig5": ("g_ratio", 0.0, 2.0, "g_ratio"),
    "fig6": ("kappa_ratio", 0.1, 5.0, "kappa_ratio"),
    "fig7": ("temperature_mech", 0.0, 5.0, "temperature_k"),
}
_FAMILY_KERR = {"a": 0.0, "b": 0.1, "c": -0.1}

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


def figure_spec(
    panel: str, resolution: int | None = None, self_consistent: bool = False
) -> SweepSpec:
    """Baked-in grid definition for one panel id."""
    if panel not in PANEL_IDS:
        raise SchemaError(f"unknown panel id {panel!r}")
    n1 = resolution or DEFAULT_RESOLUTION_1D
    n2 = resolution or DEFAULT_RESOLUTION_2D
    if panel in ("fig2a", "fig2b"):
        stop = 5.0 * fig2_drive_normalizer() / _BENCH_WB
        return SweepSpec(
            axes=(
                AxisSpec(
                    field="epsilon_d",
                    start=0.0,
                    stop=stop,
                    count=n1,
                    label="epsilon_d_over_omega_b",
                ),
            ),
            variants=(
                VariantSpec(name="cw", overrides=(("delta_f", 0.2),)),
                VariantSpec(name="ccw", overrides=(("delta_f", -0.2),)),
            ),
            mode="hysteresis",
            base=(("kerr_scale", 1.0 if panel == "fig2a" else 0.1),),
            panel=panel,
            notes=(
                "drive axis normalized by the co-rotating critical drive of the bistable panel",
            ),
        )
    if panel in _QUADRANTS:
        name, kerr, sagnac = _QUADRANTS[panel]
        return SweepSpec(
            axes=(
                AxisSpec("delta_a", -2.0, 0.0, n2, "delta_a_over_omega_b"),
                AxisSpec("delta_m_shifted", 0.0, 2.0, n2, "delta_m_over_omega_b"),
            ),
            variants=(
                VariantSpec(
                    name=name,
                    overrides=(("kerr_shift", kerr), ("delta_f", sagnac)),
                ),
            ),
            self_consistent=self_consistent,
            panel=panel,
        )
    if panel in ("fig4a", "fig4b"):
        sagnac = 0.1 if panel == "fig4a" else -0.1
        return SweepSpec(
            axes=(AxisSpec("delta_m_shifted", 0.0, 2.0, n1, "delta_m_over_omega_b"),),
            variants=_entangle_variants("kerr_shift", _KERR_VALUES),
            base=(("delta_f", sagnac),),
            self_consistent=self_consistent,
            panel=panel,
        )
    if panel == "fig4c":
        return SweepSpec(
            axes=(
                AxisSpec("kerr_shift", -0.2, 0.2, n2, "kerr_shift_over_omega_b"),
                AxisSpec("delta_f", -0.2, 0.2, n2, "delta_f_over_omega_b"),
            ),
            variants=(VariantSpec(name="main"),),
            self_consistent=self_consistent,
            panel=panel,
            notes=("axis ranges are a documented assumption",),
        )
    family, letter = panel[:4], panel[4]
    field, start, stop, label = _FAMILY_AXES[family]
    notes: tuple[str, ...] = ()
    if field == "temperature_mech":
        notes = (
            "temperature heats the mechanical bath only; microwave baths stay at 10 mK",
        )
    if letter == "d":
        return SweepSpec(
            axes=(AxisSpec(field, start, stop, n1, label),),
            variants=tuple(
                VariantSpec(name=name, mode="delta", overrides=(("delta_f", value),))
                for name, value in _SAGNAC_VALUES
            ),
            base=(("kerr_shift", 0.1),),
            self_consistent=self_consistent,
            panel=panel,
            notes=notes,
        )
    return SweepSpec(
        axes=(AxisSpec(field, start, stop, n1, label),),
        variants=_entangle_variants("delta_f", _SAGNAC_VALUES),
        base=(("kerr_shift", _FAMILY_KERR[letter]),),
        self_consistent=self_consistent,
        panel=panel,
        notes=notes,
    )


def figure_pipeline(
    panel: str,
    resolution: int | None = None,
    self_consistent: bool = False,
    jobs: int = 1,
) -> SweepResult:
    return run_sweep(
        figure_spec(panel, resolution=resolution, self_consistent=self_consistent),
        jobs=jobs,
    )


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return repr(int(value))
    return repr(float(value))


def write_csv(result: SweepResult, path) -> None:
    rows = len(result.columns[0][1])
    lines = [",".join(result.labels)]
    for i in range(rows):
        lines.append(",".join(_cell_text(cells[i]) for _, cells in result.columns))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def write_meta(result: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(result.meta, indent=2, sort_keys=True) + "\n")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def spec_from_dict(payload: dict) -> SweepSpec:
    """Build a SweepSpec from parsed JSON, rejecting unknown structure."""
    _require(isinstance(payload, dict), "sweep spec must be a JSON object")
    known = {"axes", "variants", "mode", "base", "self_consistent", "panel", "notes"}
    unknown = set(payload) - known
    _require(not unknown, f"unknown sweep spec keys {sorted(unknown)!r}")
    _require(
        isinstance(payload.get("axes"), list) and payload["axes"],
        "spec needs a nonempty axes list",
    )
    _require(
        isinstance(payload.get("variants"), list) and payload["variants"],
        "spec needs a nonempty variants list",
    )
    axes = []
    for entry in payload["axes"]:
        _require(isinstance(entry, dict), "each axis must be an object")
        extra = set(entry) - {"field", "start", "stop", "count", "label"}
        _require(not extra, f"unknown axis keys {sorted(extra)!r}")
        try:
            axes.append(
                AxisSpec(
                    field=str(entry["field"]),
                    start=float(entry["start"]),
                    stop=float(entry["stop"]),
                    count=int(entry["count"]),
                    label=str(entry.get("label", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad axis entry: {exc}") from exc
    variants = []
    for entry in payload["variants"]:
        _require(isinstance(entry, dict), "each variant must be an object")
        extra = set(entry) - {"name", "mode", "overrides", "pair", "quantity"}
        _require(not extra, f"unknown variant keys {sorted(extra)!r}")
        overrides = entry.get("overrides", {})
        _require(isinstance(overrides, dict), "variant overrides must be an object")
        pair = entry.get("pair", ["cavity", "phonon"])
        _require(
            isinstance(pair, (list, tuple)) and len(pair) == 2,
            "variant pair must name two modes",
        )
        try:
            variants.append(
                VariantSpec(
                    name=str(entry["name"]),
                    mode=str(entry.get("mode", "entangle")),
                    overrides=tuple(
                        (str(k), float(v)) for k, v in sorted(overrides.items())
                    ),
                    pair=(str(pair[0]), str(pair[1])),
                    quantity=str(entry.get("quantity", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad variant entry: {exc}") from exc
    base = payload.get("base", {})
    _require(isinstance(base, dict), "base must be an object")
    notes = payload.get("notes", [])
    _require(isinstance(notes, list), "notes must be a list of strings")
    spec = SweepSpec(
        axes=tuple(axes),
        variants=tuple(variants),
        mode=str(payload.get("mode", "effective")),
        base=tuple((str(k), float(v)) for k, v in sorted(base.items())),
        self_consistent=bool(payload.get("self_consistent", False)),
        panel=str(payload.get("panel", "")),
        notes=tuple(str(n) for n in notes),
    )
    _validate_spec(spec)
    return spec


def spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "axes": [
            {
                "field": ax.field,
                "start": ax.start,
                "stop": ax.stop,
                "count": ax.count,
                "label": ax.label,
            }
            for ax in spec.axes
        ],
        "variants": [
            {
                "name": v.name,
                "mode": v.mode,
                "overrides": dict(v.overrides),
                "pair": list(v.pair),
                "quantity": v.quantity,
            }
            for v in spec.variants
        ],
        "mode": spec.mode,
        "base": dict(spec.base),
        "self_consistent": spec.self_consistent,
        "panel": spec.panel,
        "notes": list(spec.notes),
    }
