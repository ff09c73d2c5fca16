"""Steady-state mean fields of the driven system.

Eliminating the cavity and mechanical modes from the fixed-point conditions
leaves a cubic in the stationary magnon occupation M = |m_s|^2,

    K'^2 M^3 + 2 K' D' M^2 + (k'^2 + D'^2) M = eta_a epsilon_d^2,

with reduced coefficients defined in ``ReducedCoefficients``. Everything in
this module follows from that cubic and from the reconstruction of the three
mode amplitudes at each admissible root.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InconsistentRoot, NoPhysicalRoot, UnphysicalInput
from .model import SystemParams

__all__ = [
    "BRANCH_LOWER",
    "BRANCH_MIDDLE",
    "BRANCH_UPPER",
    "BRANCH_UNIQUE",
    "ReducedCoefficients",
    "SteadyState",
    "BistabilityReport",
    "HysteresisTrace",
    "solve_magnon_number",
    "critical_drive",
    "bistability_report",
    "mean_fields",
    "linearization_validity",
    "hysteresis_sweep",
]

BRANCH_LOWER = "lower"
BRANCH_MIDDLE = "middle"
BRANCH_UPPER = "upper"
BRANCH_UNIQUE = "unique"

_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ReducedCoefficients:
    """Coefficients of the magnon-occupation cubic.

    ``eta_a`` and ``eta_b`` are the dimensionless backaction weights of the
    cavity and mechanical modes, ``kappa_eff`` and ``delta_eff`` the cavity
    dressed magnon linewidth and detuning, and ``kerr_eff`` the net cubic
    shift per unit occupation (intrinsic self-interaction minus the
    mechanically induced part). ``delta_cavity`` is the drive-cavity
    detuning including the rotation shift.
    """

    eta_a: float
    eta_b: float
    kappa_eff: float
    delta_eff: float
    kerr_eff: float
    delta_cavity: float

    @classmethod
    def from_system(cls, params: SystemParams) -> "ReducedCoefficients":
        delta_bar = params.delta_a - params.delta_f
        eta_a = params.g_ma**2 / (params.kappa_a**2 + delta_bar**2)
        eta_b = params.g_mb**2 / (params.kappa_b**2 + params.omega_b**2)
        return cls(
            eta_a=eta_a,
            eta_b=eta_b,
            kappa_eff=params.kappa_m + eta_a * params.kappa_a,
            delta_eff=params.delta_m - eta_a * delta_bar,
            kerr_eff=2.0 * (params.kerr_k0 - eta_b * params.omega_b),
            delta_cavity=delta_bar,
        )

    def drive_squared_at(self, magnon_number: float) -> float:
        """Drive power (in amplitude-squared units) that places a root at M."""
        shifted = self.delta_eff + self.kerr_eff * magnon_number
        return magnon_number * (self.kappa_eff**2 + shifted**2) / self.eta_a


def _cubic_residual(coeffs: ReducedCoefficients, magnon_number: float, rhs: float) -> float:
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff
    value = ((kerr * magnon_number + 2.0 * dp) * kerr * magnon_number + kp**2 + dp**2) * magnon_number
    scale = max(
        abs(rhs),
        (kp**2 + dp**2) * magnon_number,
        kerr**2 * magnon_number**3,
    )
    return abs(value - rhs) / max(scale, 1e-300)


def _polish(coeffs: ReducedCoefficients, magnon_number: float, rhs: float) -> float:
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff
    m = magnon_number
    for _ in range(3):
        f = ((kerr * m + 2.0 * dp) * kerr * m + kp**2 + dp**2) * m - rhs
        df = 3.0 * kerr**2 * m**2 + 4.0 * kerr * dp * m + kp**2 + dp**2
        if df == 0.0:
            break
        step = f / df
        if not math.isfinite(step):
            break
        m -= step
        if abs(step) <= 1e-16 * abs(m):
            break
    return m


def _bisect_bracket(coeffs: ReducedCoefficients, rhs: float, lo: float, hi: float) -> float:
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff

    def f(m: float) -> float:
        return ((kerr * m + 2.0 * dp) * kerr * m + kp**2 + dp**2) * m - rhs

    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def _roots_by_bisection(coeffs: ReducedCoefficients, rhs: float) -> list[float]:
    """Bracketed bisection over the monotone pieces of the cubic."""
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff
    linear_scale = rhs / (kp**2 + dp**2)
    if kerr == 0.0:
        return [linear_scale]
    # stationary points of the cubic separate its monotone pieces
    disc = 4.0 * dp**2 - 3.0 * (kp**2 + dp**2)
    edges = [0.0]
    if disc > 0.0:
        s = math.sqrt(disc)
        for t in ((-2.0 * dp - s) / (3.0 * kerr), (-2.0 * dp + s) / (3.0 * kerr)):
            if t > 0.0:
                edges.append(t)
    hi = max(linear_scale, *edges) * 2.0 + linear_scale + 1.0
    while ((kerr * hi + 2.0 * dp) * kerr * hi + kp**2 + dp**2) * hi < rhs:
        hi *= 2.0
    edges.append(hi)
    edges = sorted(set(edges))

    def f(m: float) -> float:
        return ((kerr * m + 2.0 * dp) * kerr * m + kp**2 + dp**2) * m - rhs

    roots = []
    for lo, up in zip(edges[:-1], edges[1:]):
        if f(lo) == 0.0:
            roots.append(lo)
        if (f(lo) < 0.0) != (f(up) < 0.0):
            roots.append(_bisect_bracket(coeffs, rhs, lo, up))
    if f(edges[-1]) == 0.0:
        roots.append(edges[-1])
    return sorted(set(roots))


def solve_magnon_number(
    coeffs: ReducedCoefficients, epsilon_d: float, method: str = "closed"
) -> tuple[float, ...]:
    """All admissible stationary magnon occupations, ascending.

    ``method`` is "closed" for the cubic closed form with a Newton polish or
    "bisection" for bracketed bisection over the monotone pieces. The closed
    form falls back to bisection when its residual check fails.
    """
    if not math.isfinite(epsilon_d) or epsilon_d < 0.0:
        raise UnphysicalInput(f"epsilon_d must be finite and nonnegative, got {epsilon_d!r}")
    if epsilon_d == 0.0:
        return (0.0,)
    rhs = coeffs.eta_a * epsilon_d**2
    if rhs == 0.0:
        return (0.0,)
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff
    if kerr == 0.0:
        return (rhs / (kp**2 + dp**2),)
    if method == "bisection":
        raw = _roots_by_bisection(coeffs, rhs)
    elif method == "closed":
        # depressed form t^3 + p t + q with M = t - 2 dp / (3 kerr)
        p = (3.0 * kp**2 - dp**2) / (3.0 * kerr**2)
        q = (-2.0 * dp * (dp**2 + 9.0 * kp**2) - 27.0 * kerr * rhs) / (27.0 * kerr**3)
        shift = -2.0 * dp / (3.0 * kerr)
        raw = []
        if p < 0.0:
            u = math.sqrt(-p / 3.0)
            cosarg = -q / (2.0 * u**3)
            if abs(cosarg) <= 1.0 + 1e-12:
                theta = math.acos(max(-1.0, min(1.0, cosarg)))
                for k in range(3):
                    t = 2.0 * u * math.cos((theta - 2.0 * math.pi * k) / 3.0)
                    raw.append(t + shift)
        if not raw:
            half = math.sqrt(q**2 / 4.0 + p**3 / 27.0)
            t = math.copysign(abs(-q / 2.0 + half) ** (1.0 / 3.0), -q / 2.0 + half)
            t += math.copysign(abs(-q / 2.0 - half) ** (1.0 / 3.0), -q / 2.0 - half)
            raw.append(t + shift)
        raw = [_polish(coeffs, m, rhs) for m in raw if m > 0.0]
        if not all(_cubic_residual(coeffs, m, rhs) < 1e-9 for m in raw):
            raw = _roots_by_bisection(coeffs, rhs)
    else:
        raise ValueError(f"unknown method {method!r}")

    roots: list[float] = []
    for m in sorted(raw):
        if m <= 0.0:
            continue
        if roots and abs(m - roots[-1]) <= 1e-9 * abs(m):
            continue
        roots.append(m)
    if not roots:
        raise NoPhysicalRoot(f"no positive stationary occupation at epsilon_d={epsilon_d!r}")
    return tuple(roots)


def critical_drive(coeffs: ReducedCoefficients) -> float | None:
    """Drive amplitude at which the cubic first admits coincident roots.

    Defined only when the cubic shift opposes the effective detuning
    (kerr_eff * delta_eff < 0); returns None otherwise.
    """
    if coeffs.kerr_eff * coeffs.delta_eff >= 0.0:
        return None
    value = -8.0 * coeffs.kappa_eff**2 * coeffs.delta_eff / (9.0 * coeffs.eta_a * coeffs.kerr_eff)
    return math.sqrt(value)


@dataclass(frozen=True)
class BistabilityReport:
    """Multistability summary of a parameter set at varying drive."""

    coefficients: ReducedCoefficients
    bistable: bool
    turning_points: tuple[float, float] | None
    window: tuple[float, float] | None
    epsilon_critical: float | None


def bistability_report(params: SystemParams) -> BistabilityReport:
    coeffs = ReducedCoefficients.from_system(params)
    kp, dp, kerr = coeffs.kappa_eff, coeffs.delta_eff, coeffs.kerr_eff
    eps_c = critical_drive(coeffs)
    disc = dp**2 - 3.0 * kp**2
    if kerr == 0.0 or disc <= 0.0 or kerr * dp >= 0.0:
        return BistabilityReport(coeffs, False, None, None, eps_c)
    s = math.sqrt(disc)
    m_pair = sorted(((-2.0 * dp - s) / (3.0 * kerr), (-2.0 * dp + s) / (3.0 * kerr)))
    drives = sorted(math.sqrt(coeffs.drive_squared_at(m)) for m in m_pair)
    return BistabilityReport(coeffs, True, (m_pair[0], m_pair[1]), (drives[0], drives[1]), eps_c)


@dataclass(frozen=True)
class SteadyState:
    """Mean fields at one root of the occupation cubic.

    Amplitudes are reported in the gauge where the magnon field is real and
    nonnegative; ``drive_phase`` is the phase the physical drive carries in
    that gauge. ``delta_m_shifted`` is the magnon detuning including the
    static mechanical displacement, ``kerr_shift`` the occupation-induced
    detuning 2 K0 M. ``residual`` is the normalized fixed-point defect and
    ``stable`` reports the sign of the spectral abscissa of the linearized
    dynamics at this point.
    """

    cavity: complex
    magnon: complex
    phonon: complex
    magnon_number: float
    branch: str
    delta_m_shifted: float
    kerr_shift: float
    drive_phase: float
    residual: float
    stable: bool


def _branch_names(count: int) -> tuple[str, ...]:
    if count == 1:
        return (BRANCH_UNIQUE,)
    if count == 2:
        return (BRANCH_LOWER, BRANCH_UPPER)
    return (BRANCH_LOWER, BRANCH_MIDDLE, BRANCH_UPPER)


def _reconstruct(
    params: SystemParams, magnon_number: float, branch: str, epsilon_d: float
) -> SteadyState:
    m_s = math.sqrt(magnon_number)
    b_s = -1j * params.g_mb * magnon_number / (params.kappa_b + 1j * params.omega_b)
    delta_m_shifted = params.delta_m + 2.0 * params.g_mb * b_s.real
    kerr_shift = 2.0 * params.kerr_k0 * magnon_number
    delta_bar = params.delta_a - params.delta_f
    if params.g_ma == 0.0:
        # drive reaches the magnon only through the cavity
        if magnon_number != 0.0:
            raise InconsistentRoot("nonzero magnon occupation with no cavity coupling")
        drive = complex(epsilon_d)
        a_s = drive / (params.kappa_a + 1j * delta_bar)
    else:
        a_s = (params.kappa_m + 1j * (delta_m_shifted + kerr_shift)) * m_s / (-1j * params.g_ma)
        drive = (params.kappa_a + 1j * delta_bar) * a_s + 1j * params.g_ma * m_s
    phase = cmath.phase(drive) if abs(drive) > 0.0 else 0.0

    # the two auxiliary equations hold by construction; the cubic closure
    # reduces to the drive modulus matching the requested amplitude
    residual = abs(abs(drive) - epsilon_d) / max(epsilon_d, abs(drive), 1e-300)
    if residual > _RESIDUAL_TOL:
        raise InconsistentRoot(
            f"fixed point reconstruction failed on branch {branch}: residual {residual:.3e}"
        )

    state = SteadyState(
        cavity=a_s,
        magnon=complex(m_s),
        phonon=b_s,
        magnon_number=magnon_number,
        branch=branch,
        delta_m_shifted=delta_m_shifted,
        kerr_shift=kerr_shift,
        drive_phase=phase,
        residual=residual,
        stable=False,
    )
    from .linearized import EffectiveParams, build_drift, is_stable

    eff = EffectiveParams.from_steady_state(params, state)
    stable, _ = is_stable(build_drift(eff), eff.omega_b)
    return replace(state, stable=stable)


def mean_fields(params: SystemParams, epsilon_d: float | None = None) -> tuple[SteadyState, ...]:
    """Mean fields at every admissible root, ascending in magnon occupation."""
    eps = params.epsilon_d if epsilon_d is None else epsilon_d
    coeffs = ReducedCoefficients.from_system(params)
    roots = solve_magnon_number(coeffs, eps)
    names = _branch_names(len(roots))
    return tuple(
        _reconstruct(params, m, name, eps) for m, name in zip(roots, names)
    )


def linearization_validity(state: SteadyState) -> float:
    """Fluctuation-to-mean ratio; values well below one justify linearizing."""
    return 1.0 / max(state.magnon_number, 1e-300)


@dataclass(frozen=True)
class HysteresisTrace:
    """Branch-followed occupations over an up-then-down drive schedule."""

    epsilons: np.ndarray
    magnon_up: np.ndarray
    magnon_down: np.ndarray
    branch_up: tuple[str, ...]
    branch_down: tuple[str, ...]


def hysteresis_sweep(params: SystemParams, epsilons: np.ndarray) -> HysteresisTrace:
    """Follow the occupied root across a drive ramp in both directions.

    At each drive the tracker keeps the root nearest the previously occupied
    one, which reproduces the jump at either end of the bistable window.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise UnphysicalInput("epsilons must be a nonempty 1-d array")
    if np.any(np.diff(eps) < 0.0):
        raise UnphysicalInput("epsilons must be sorted ascending")
    coeffs = ReducedCoefficients.from_system(params)
    all_roots = [solve_magnon_number(coeffs, e) for e in eps]

    def follow(order: range) -> tuple[np.ndarray, list[str]]:
        values = np.empty(eps.size)
        labels: list[str] = [""] * eps.size
        prev: float | None = None
        for i in order:
            roots = all_roots[i]
            names = _branch_names(len(roots))
            if prev is None:
                j = 0 if order.step == 1 else len(roots) - 1
            else:
                j = min(range(len(roots)), key=lambda k: abs(roots[k] - prev))
            values[i] = roots[j]
            labels[i] = names[j]
            prev = roots[j]
        return values, labels

    up_vals, up_labels = follow(range(eps.size))
    down_vals, down_labels = follow(range(eps.size - 1, -1, -1))
    return HysteresisTrace(
        epsilons=eps,
        magnon_up=up_vals,
        magnon_down=down_vals,
        branch_up=tuple(up_labels),
        branch_down=tuple(down_labels),
    )
