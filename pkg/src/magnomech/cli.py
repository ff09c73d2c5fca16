"""Command-line entry point.

Scalar results are printed as JSON on stdout; table-producing commands write
CSV plus a JSON metadata sidecar. Exit codes: 0 success, 1 domain failure
(no root, instability, non-convergence), 2 usage or malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .entanglement import MODE_INDEX, entanglement_of
from .errors import MagnomechError, SchemaError
from .linearized import (
    EffectiveParams,
    build_drift,
    is_stable,
    steady_covariance,
)
from .meanfield_ode import settle
from .model import ThermalOccupations, load_config, params_to_dict
from .steady_state import bistability_report, hysteresis_sweep, mean_fields
from .sweep import (
    PANEL_IDS,
    figure_pipeline,
    run_sweep,
    spec_from_dict,
    write_csv,
    write_meta,
)

OUT_DIR_ENV = "MAGNOMECH_OUT"

_CONVENTIONS = (
    "conventions: kappa values are half linewidths (amplitude decay rates);",
    "quadratures use vacuum variance 1/2; detunings are mode minus drive;",
    "positive delta_f corresponds to the co-rotating drive direction.",
)


def _version_text() -> str:
    return "\n".join((f"magnomech {__version__}",) + _CONVENTIONS)


def _json_default(value):
    import numpy as np

    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _print_json(payload: dict) -> None:
    sys.stdout.write(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    )


def _complex(value: complex) -> dict:
    return {"re": value.real, "im": value.imag}


def _load_params(path: str | None):
    if path is None:
        from .model import SystemParams

        return SystemParams.defaults()
    if not Path(path).is_file():
        raise SchemaError(f"config file not found: {path}")
    return load_config(path)


_EFFECTIVE_KEYS = (
    "omega_b",
    "kappa_a",
    "kappa_m",
    "kappa_b",
    "g_ma",
    "g_mb_enhanced",
    "delta_a",
    "delta_f",
    "delta_m_shifted",
    "kerr_shift",
)


def load_effective_config(source: str | dict) -> EffectiveParams:
    """Effective working-point JSON: plain rad/s, ``_hz``, or ``_over_omega_b``.

    ``temperature`` (kelvin) or an explicit ``occupations`` object sets the
    bath occupations; unspecified fields keep their benchmark values.
    """
    if isinstance(source, (str, Path)):
        if not Path(source).is_file():
            raise SchemaError(f"effective config file not found: {source}")
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"effective config is not valid JSON: {exc}") from exc
    else:
        raw = source
    if not isinstance(raw, dict):
        raise SchemaError("effective config root must be a JSON object")

    import math

    resolved: dict[str, tuple[str, float]] = {}
    temperature = None
    occupations = None
    for key, value in raw.items():
        if key == "temperature":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaError("temperature must be a number")
            temperature = float(value)
            continue
        if key == "occupations":
            if not isinstance(value, dict) or set(value) != {"n_a", "n_m", "n_b"}:
                raise SchemaError("occupations needs exactly n_a, n_m, n_b")
            occupations = ThermalOccupations(
                n_a=float(value["n_a"]),
                n_m=float(value["n_m"]),
                n_b=float(value["n_b"]),
            )
            continue
        base, spelling = key, "plain"
        if key.endswith("_over_omega_b"):
            base, spelling = key[: -len("_over_omega_b")], "ratio"
        elif key.endswith("_hz"):
            base, spelling = key[: -len("_hz")], "hz"
        if base not in _EFFECTIVE_KEYS:
            raise SchemaError(f"unknown effective config key: {key!r}")
        if base == "omega_b" and spelling == "ratio":
            raise SchemaError("omega_b cannot be given in units of itself")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"effective config value for {key!r} must be a number")
        if base in resolved:
            raise SchemaError(f"conflicting spellings for {base!r}")
        resolved[base] = (spelling, float(value))
    if temperature is not None and occupations is not None:
        raise SchemaError("give temperature or occupations, not both")

    two_pi = 2.0 * math.pi
    omega_b_spelling, omega_b_value = resolved.pop("omega_b", ("plain", two_pi * 1.0e7))
    omega_b = omega_b_value * (two_pi if omega_b_spelling == "hz" else 1.0)
    overrides: dict[str, float] = {"omega_b": omega_b}
    for base, (spelling, value) in resolved.items():
        if spelling == "ratio":
            overrides[base] = value * omega_b
        elif spelling == "hz":
            overrides[base] = value * two_pi
        else:
            overrides[base] = value
    if occupations is not None:
        overrides["occupations"] = occupations
    if temperature is not None:
        return EffectiveParams.benchmark(temperature=temperature, **overrides)
    return EffectiveParams.benchmark(**overrides)


def _effective_from_args(args) -> EffectiveParams:
    if getattr(args, "effective", None):
        return load_effective_config(args.effective)
    if getattr(args, "config", None):
        params = _load_params(args.config)
        states = mean_fields(params)
        index = args.branch
        if not -len(states) <= index < len(states):
            raise SchemaError(
                f"branch index {index} out of range for {len(states)} root(s)"
            )
        return EffectiveParams.from_steady_state(params, states[index])
    return EffectiveParams.benchmark()


def _state_payload(state) -> dict:
    return {
        "branch": state.branch,
        "magnon_number": state.magnon_number,
        "cavity": _complex(state.cavity),
        "magnon": _complex(state.magnon),
        "phonon": _complex(state.phonon),
        "delta_m_shifted": state.delta_m_shifted,
        "kerr_shift": state.kerr_shift,
        "drive_phase": state.drive_phase,
        "residual": state.residual,
        "stable": state.stable,
    }


def _cmd_steady(args) -> int:
    params = _load_params(args.config)
    states = mean_fields(params)
    _print_json({"count": len(states), "states": [_state_payload(s) for s in states]})
    return 0


def _cmd_bistability(args) -> int:
    report = bistability_report(_load_params(args.config))
    coeffs = report.coefficients
    _print_json(
        {
            "bistable": report.bistable,
            "epsilon_critical": report.epsilon_critical,
            "turning_points": list(report.turning_points) if report.turning_points else None,
            "window": list(report.window) if report.window else None,
            "coefficients": {
                "eta_a": coeffs.eta_a,
                "eta_b": coeffs.eta_b,
                "kappa_eff": coeffs.kappa_eff,
                "delta_eff": coeffs.delta_eff,
                "kerr_eff": coeffs.kerr_eff,
                "delta_cavity": coeffs.delta_cavity,
            },
        }
    )
    return 0


def _cmd_hysteresis(args) -> int:
    import numpy as np

    params = _load_params(args.config)
    eps_max = args.eps_max
    if eps_max is None:
        if params.epsilon_d <= 0.0:
            raise SchemaError("config has no drive; pass --eps-max")
        eps_max = 2.0 * params.epsilon_d / params.omega_b
    grid = np.linspace(0.0, eps_max * params.omega_b, args.points)
    trace = hysteresis_sweep(params, grid)
    _print_json(
        {
            "epsilon_over_omega_b": [e / params.omega_b for e in trace.epsilons],
            "magnon_up": list(trace.magnon_up),
            "magnon_down": list(trace.magnon_down),
            "branch_up": list(trace.branch_up),
            "branch_down": list(trace.branch_down),
        }
    )
    return 0


def _cmd_settle(args) -> int:
    params = _load_params(args.config)
    two_timescale = {"auto": None, "on": True, "off": False}[args.two_timescale]
    record = settle(params, two_timescale=two_timescale, t_max=args.t_max)
    _print_json(
        {
            "converged": record.converged,
            "magnon_number": record.final_magnon_number,
            "cavity": _complex(complex(record.cavity[-1])),
            "magnon": _complex(complex(record.magnon[-1])),
            "phonon": _complex(complex(record.phonon[-1])),
            "residual": record.residual,
            "steps": record.steps,
            "t_end": record.t_end,
        }
    )
    return 0


def _cmd_stability(args) -> int:
    if args.config and not args.effective:
        params = _load_params(args.config)
        states = mean_fields(params)
        rows = []
        for state in states:
            eff = EffectiveParams.from_steady_state(params, state)
            flag, abscissa = is_stable(build_drift(eff), eff.omega_b)
            rows.append(
                {
                    "branch": state.branch,
                    "magnon_number": state.magnon_number,
                    "stable": flag,
                    "abscissa_over_omega_b": abscissa / eff.omega_b,
                }
            )
        _print_json({"states": rows})
        return 0
    eff = _effective_from_args(args)
    flag, abscissa = is_stable(build_drift(eff), eff.omega_b)
    _print_json({"stable": flag, "abscissa_over_omega_b": abscissa / eff.omega_b})
    return 0


def _cmd_covariance(args) -> int:
    eff = _effective_from_args(args)
    matrix, stable, abscissa = steady_covariance(eff)
    if not stable or matrix is None:
        raise MagnomechError(
            f"no steady covariance: spectral abscissa {abscissa / eff.omega_b:.6g} omega_b"
        )
    _print_json(
        {
            "stable": True,
            "abscissa_over_omega_b": abscissa / eff.omega_b,
            "matrix": [[float(v) for v in row] for row in matrix],
        }
    )
    return 0


def _cmd_entangle(args) -> int:
    pair = tuple(args.pair.split(","))
    if len(pair) != 2 or any(p not in MODE_INDEX for p in pair):
        raise SchemaError(
            f"--pair must be two of {sorted(MODE_INDEX)} separated by a comma"
        )
    eff = _effective_from_args(args)
    result = entanglement_of(eff, pair)  # type: ignore[arg-type]
    _print_json(
        {
            "pair": list(pair),
            "value": result.value,
            "stable": result.stable,
            "eta_minus": result.eta_minus,
            "sigma": result.sigma,
            "det_v": result.det_v,
        }
    )
    return 0


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_result(result, out_dir: Path, stem: str) -> int:
    csv_path = out_dir / f"{stem}.csv"
    meta_path = out_dir / f"{stem}.meta.json"
    write_csv(result, csv_path)
    write_meta(result, meta_path)
    _print_json({"written": [str(csv_path), str(meta_path)]})
    return 0


def _cmd_figure(args) -> int:
    result = figure_pipeline(
        args.id,
        resolution=args.resolution,
        self_consistent=args.self_consistent,
        jobs=args.jobs,
    )
    return _write_result(result, _out_dir(args), args.id)


def _cmd_sweep(args) -> int:
    path = Path(args.spec)
    if not path.is_file():
        raise SchemaError(f"spec file not found: {args.spec}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"spec is not valid JSON: {exc}") from exc
    spec = spec_from_dict(payload)
    result = run_sweep(spec, jobs=args.jobs)
    stem = spec.panel or path.stem
    return _write_result(result, _out_dir(args), stem)


def _cmd_validate(args) -> int:
    params = _load_params(args.config)
    payload = {"ok": True, "params": params_to_dict(params)}
    if args.effective:
        eff = load_effective_config(args.effective)
        payload["effective"] = {
            "omega_b": eff.omega_b,
            "delta_a_over_omega_b": eff.delta_a / eff.omega_b,
            "delta_f_over_omega_b": eff.delta_f / eff.omega_b,
            "delta_m_over_omega_b": eff.delta_m_shifted / eff.omega_b,
            "kerr_over_omega_b": eff.kerr_shift / eff.omega_b,
        }
    _print_json(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnomech",
        description="Driven cavity-magnon-mechanics toolkit: steady states, "
        "stability, stationary entanglement, and figure-grade parameter sweeps.",
        epilog="exit codes: 0 success, 1 domain failure, 2 usage error",
    )
    parser.add_argument("--version", action="version", version=_version_text())
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="system parameter JSON file")

    def add_effective(p):
        add_config(p)
        p.add_argument("--effective", help="effective working-point JSON file")
        p.add_argument(
            "--branch",
            type=int,
            default=0,
            help="root index when deriving from --config (default 0, the lowest)",
        )

    p = sub.add_parser("steady", help="algebraic steady states of a configuration")
    add_config(p)
    p.set_defaults(func=_cmd_steady)

    p = sub.add_parser("bistability", help="drive window and critical drive report")
    add_config(p)
    p.set_defaults(func=_cmd_bistability)

    p = sub.add_parser("hysteresis", help="branch-followed drive ramp in both directions")
    add_config(p)
    p.add_argument(
        "--eps-max",
        type=float,
        default=None,
        help="ramp top in multiples of omega_b (default: twice the configured drive)",
    )
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=_cmd_hysteresis)

    p = sub.add_parser("settle", help="integrate the classical fields to a fixed point")
    add_config(p)
    p.add_argument(
        "--two-timescale",
        choices=("auto", "on", "off"),
        default="auto",
        help="alternate fast/slow settling for a far-slower mechanical decay",
    )
    p.add_argument("--t-max", type=float, default=None, help="horizon in seconds")
    p.set_defaults(func=_cmd_settle)

    p = sub.add_parser("stability", help="spectral abscissa of the fluctuation drift")
    add_effective(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("covariance", help="steady covariance of the fluctuations")
    add_effective(p)
    p.set_defaults(func=_cmd_covariance)

    p = sub.add_parser("entangle", help="logarithmic negativity of a mode pair")
    add_effective(p)
    p.add_argument("--pair", default="cavity,phonon")
    p.set_defaults(func=_cmd_entangle)

    p = sub.add_parser("sweep", help="run a sweep described by a JSON spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", help=f"output directory (or ${OUT_DIR_ENV})")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="write one panel's CSV and metadata")
    p.add_argument("id", choices=PANEL_IDS)
    p.add_argument("--out", help=f"output directory (or ${OUT_DIR_ENV})")
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "--self-consistent",
        action="store_true",
        help="realize each point through a driven steady state",
    )
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("validate", help="check configuration files and echo them")
    add_config(p)
    p.add_argument("--effective", help="effective working-point JSON file")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else (0 if exc.code is None else 2)
    try:
        return args.func(args)
    except SchemaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except MagnomechError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
