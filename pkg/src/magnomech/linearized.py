"""Linearized quadrature dynamics around a working point.

Fluctuations are ordered (X_a, Y_a, X_m, Y_m, X_b, Y_b) with
X = (s + s†)/sqrt(2), Y = i(s† - s)/sqrt(2), so a vacuum quadrature has
variance 1/2. The covariance matrix V solves A V + V A^T = -D with the
drift A and diffusion D built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .errors import SingularSystem, UnphysicalInput
from .model import TWO_PI, SystemParams, ThermalOccupations

if TYPE_CHECKING:
    from .steady_state import SteadyState

__all__ = [
    "EffectiveParams",
    "build_drift",
    "build_diffusion",
    "is_stable",
    "solve_lyapunov",
    "steady_covariance",
]

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class EffectiveParams:
    """Inputs of the linearized dynamics.

    ``g_mb_enhanced`` is the mechanical coupling amplified by the stationary
    magnon field. ``delta_m_shifted`` includes the static mechanical
    displacement; ``kerr_shift`` is the occupation-induced detuning, which
    enters the two quadrature rows of the magnon with different weights.
    """

    omega_b: float
    kappa_a: float
    kappa_m: float
    kappa_b: float
    g_ma: float
    g_mb_enhanced: float
    delta_a: float
    delta_f: float
    delta_m_shifted: float
    kerr_shift: float
    occupations: ThermalOccupations

    def __post_init__(self) -> None:
        for name in ("omega_b", "kappa_a", "kappa_m", "kappa_b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise UnphysicalInput(f"{name} must be finite and positive, got {value!r}")
        for name in ("g_ma", "g_mb_enhanced"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise UnphysicalInput(f"{name} must be finite and nonnegative, got {value!r}")
        for name in ("delta_a", "delta_f", "delta_m_shifted", "kerr_shift"):
            if not math.isfinite(getattr(self, name)):
                raise UnphysicalInput(f"{name} must be finite")

    @classmethod
    def from_steady_state(cls, params: SystemParams, state: "SteadyState") -> "EffectiveParams":
        return cls(
            omega_b=params.omega_b,
            kappa_a=params.kappa_a,
            kappa_m=params.kappa_m,
            kappa_b=params.kappa_b,
            g_ma=params.g_ma,
            g_mb_enhanced=params.g_mb * state.magnon.real,
            delta_a=params.delta_a,
            delta_f=params.delta_f,
            delta_m_shifted=state.delta_m_shifted,
            kerr_shift=state.kerr_shift,
            occupations=params.occupations(),
        )

    @classmethod
    def benchmark(
        cls,
        temperature: float = 0.010,
        omega_a_absolute: float = TWO_PI * 1.0e10,
        omega_m_absolute: float = TWO_PI * 1.0e10,
        **overrides: float,
    ) -> "EffectiveParams":
        """Working point used throughout the figure pipelines.

        Strongly driven regime with the magnon-enhanced mechanical coupling
        set directly; occupations follow from the given temperature with the
        cavity and magnon in the microwave band.
        """
        omega_b = float(overrides.pop("omega_b", TWO_PI * 1.0e7))
        base = dict(
            omega_b=omega_b,
            kappa_a=0.1 * omega_b,
            kappa_m=0.1 * omega_b,
            kappa_b=1.0e-5 * omega_b,
            g_ma=0.2 * omega_b,
            g_mb_enhanced=0.2 * omega_b,
            delta_a=-omega_b,
            delta_f=0.1 * omega_b,
            delta_m_shifted=omega_b,
            kerr_shift=0.1 * omega_b,
        )
        base.update(overrides)
        if "occupations" not in base:
            base["occupations"] = ThermalOccupations.from_temperature(
                omega_a_absolute, omega_m_absolute, omega_b, temperature
            )
        return cls(**base)

    def replace(self, **changes) -> "EffectiveParams":
        return replace(self, **changes)


def build_drift(eff: EffectiveParams) -> np.ndarray:
    """Drift matrix of the quadrature fluctuations."""
    delta_bar = eff.delta_a - eff.delta_f
    delta_m = eff.delta_m_shifted
    kerr = eff.kerr_shift
    g = eff.g_ma
    big_g = eff.g_mb_enhanced
    ka, km, kb = eff.kappa_a, eff.kappa_m, eff.kappa_b
    wb = eff.omega_b
    return np.array(
        [
            [-ka, delta_bar, 0.0, g, 0.0, 0.0],
            [-delta_bar, -ka, -g, 0.0, 0.0, 0.0],
            [0.0, g, -km, delta_m + kerr, 0.0, 0.0],
            [-g, 0.0, -(delta_m + 3.0 * kerr), -km, -2.0 * big_g, 0.0],
            [0.0, 0.0, 0.0, 0.0, -kb, wb],
            [0.0, 0.0, -2.0 * big_g, 0.0, -wb, -kb],
        ]
    )


def build_diffusion(eff: EffectiveParams) -> np.ndarray:
    """Diffusion matrix of the input noises, in the variance-1/2 convention."""
    occ = eff.occupations
    return np.diag(
        [
            eff.kappa_a * (2.0 * occ.n_a + 1.0),
            eff.kappa_a * (2.0 * occ.n_a + 1.0),
            eff.kappa_m * (2.0 * occ.n_m + 1.0),
            eff.kappa_m * (2.0 * occ.n_m + 1.0),
            eff.kappa_b * (2.0 * occ.n_b + 1.0),
            eff.kappa_b * (2.0 * occ.n_b + 1.0),
        ]
    )


def is_stable(drift: np.ndarray, omega_b: float) -> tuple[bool, float]:
    """Spectral abscissa test with a margin of 1e-9 of the mechanical frequency."""
    abscissa = float(np.linalg.eigvals(drift).real.max())
    return abscissa < -STABILITY_MARGIN * omega_b, abscissa


def solve_lyapunov(drift: np.ndarray, diffusion: np.ndarray, omega_b: float) -> np.ndarray:
    """Steady covariance from A V + V A^T = -D.

    Solved as a dense Kronecker system after normalizing both matrices by
    the mechanical frequency, then symmetrized. Raises ``SingularSystem``
    when the drift admits no unique steady covariance.
    """
    a = np.asarray(drift, dtype=float) / omega_b
    d = np.asarray(diffusion, dtype=float) / omega_b
    n = a.shape[0]
    eye = np.eye(n)
    system = np.kron(a, eye) + np.kron(eye, a)
    try:
        flat = np.linalg.solve(system, -d.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"no unique steady covariance: {exc}") from exc
    v = flat.reshape(n, n)
    v = 0.5 * (v + v.T)
    residual = np.abs(a @ v + v @ a.T + d).max()
    if not np.isfinite(residual) or residual > 1e-8 * max(np.abs(d).max(), 1e-300):
        raise SingularSystem(f"steady covariance residual too large: {residual:.3e}")
    return v


def steady_covariance(eff: EffectiveParams) -> tuple[np.ndarray | None, bool, float]:
    """Covariance at the working point, or None with the abscissa if unstable."""
    drift = build_drift(eff)
    stable, abscissa = is_stable(drift, eff.omega_b)
    if not stable:
        return None, False, abscissa
    return solve_lyapunov(drift, build_diffusion(eff), eff.omega_b), True, abscissa
