"""Time integration of the classical mean-field equations.

The complex amplitudes (a, b, m) of the cavity, mechanical, and magnon modes
obey

    da/dt = -(kappa_a + i (delta_a - delta_f)) a - i g_ma m + epsilon_d
    db/dt = -(kappa_b + i omega_b) b - i g_mb |m|^2
    dm/dt = -(kappa_m + i delta_m) m - i g_ma a - 2 i g_mb Re(b) m
            - 2 i kerr_k0 |m|^2 m

in the frame rotating at the drive. The Jacobian of this flow at a fixed
point equals the drift matrix of the linearized quadrature dynamics, so
classical settling and fluctuation stability agree.

Integration is fixed-order Runge-Kutta with step doubling: each step is
compared against two half steps and the step size is halved until the local
error estimate passes ``local_tol``. A run counts as converged when the
normalized flow residual stays below ``residual_tol`` over a trailing window
of 5 percent of the requested horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonConvergence, UnphysicalInput
from .model import SystemParams

__all__ = [
    "TrajectoryRecord",
    "BatchSettleResult",
    "integrate_meanfield",
    "settle",
    "settle_batch",
]

_RESIDUAL_STRIDE = 16
_GROWTH_STRIDE = 8


@dataclass(frozen=True)
class TrajectoryRecord:
    """Decimated trajectory and final state of one integration run."""

    times: np.ndarray
    cavity: np.ndarray
    magnon: np.ndarray
    phonon: np.ndarray
    converged: bool
    residual: float
    steps: int
    t_end: float

    @property
    def final_magnon_number(self) -> float:
        return float(abs(self.magnon[-1]) ** 2)


@dataclass(frozen=True)
class BatchSettleResult:
    """Final fields of a batch integration, one row per configuration."""

    fields: np.ndarray
    converged: np.ndarray
    residuals: np.ndarray
    steps: int
    t_end: float

    @property
    def magnon_numbers(self) -> np.ndarray:
        return np.abs(self.fields[:, 2]) ** 2


class _Flow:
    """Vectorized right-hand side over a batch of configurations."""

    def __init__(self, params_seq: Sequence[SystemParams]):
        self.ca = np.array(
            [-(p.kappa_a + 1j * (p.delta_a - p.delta_f)) for p in params_seq]
        )
        self.cb = np.array([-(p.kappa_b + 1j * p.omega_b) for p in params_seq])
        self.cm = np.array([-(p.kappa_m + 1j * p.delta_m) for p in params_seq])
        self.g_ma = np.array([p.g_ma for p in params_seq])
        self.g_mb = np.array([p.g_mb for p in params_seq])
        self.kerr = np.array([p.kerr_k0 for p in params_seq])
        self.eps = np.array([p.epsilon_d for p in params_seq])
        self.max_rate = max(
            float(np.abs(self.ca).max()),
            float(np.abs(self.cb).max()),
            float(np.abs(self.cm).max()),
            float(self.g_ma.max()),
            float(self.eps.max()) ** (2.0 / 3.0) if self.eps.max() > 1.0 else 1.0,
        )

    def __call__(self, y: np.ndarray) -> np.ndarray:
        a, b, m = y[:, 0], y[:, 1], y[:, 2]
        number = m.real**2 + m.imag**2
        out = np.empty_like(y)
        out[:, 0] = self.ca * a - 1j * self.g_ma * m + self.eps
        out[:, 1] = self.cb * b - 1j * self.g_mb * number
        out[:, 2] = (
            self.cm * m
            - 1j * self.g_ma * a
            - 2j * self.g_mb * b.real * m
            - 2j * self.kerr * number * m
        )
        return out

    def residual(self, y: np.ndarray) -> np.ndarray:
        # dimensionless: field velocity per amplitude, relative to the fastest rate
        scale = np.maximum(1.0, np.abs(y).max(axis=1))
        return np.abs(self(y)).max(axis=1) / (scale * self.max_rate)


def _rk4(flow, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = flow(y)
    k2 = flow(y + (0.5 * dt) * k1)
    k3 = flow(y + (0.5 * dt) * k2)
    k4 = flow(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advance(
    flow,
    y: np.ndarray,
    t_max: float,
    dt_init: float,
    local_tol: float,
    residual_tol: float,
    on_sample=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, float]:
    """Shared-clock adaptive loop. Returns (y, converged, residuals, steps, t)."""
    dt_cap = dt_init
    dt = dt_init
    t = 0.0
    steps = 0
    n = y.shape[0]
    bad_until = np.zeros(n)
    last_residual = flow.residual(y)
    while t < t_max:
        dt = min(dt, t_max - t)
        if dt <= 1e-16 * t_max:
            break
        halvings = 0
        while True:
            full = _rk4(flow, y, dt)
            half = _rk4(flow, _rk4(flow, y, 0.5 * dt), 0.5 * dt)
            scale = np.maximum(1.0, np.abs(half).max(axis=1))
            err = float((np.abs(half - full).max(axis=1) / scale).max()) / 15.0
            if err <= local_tol or halvings >= 60:
                break
            dt *= 0.5
            halvings += 1
        y = half
        t += dt
        steps += 1
        if halvings == 0 and err < local_tol / 64.0 and steps % _GROWTH_STRIDE == 0:
            dt = min(2.0 * dt, dt_cap)
        if steps % _RESIDUAL_STRIDE == 0 or t >= t_max:
            last_residual = flow.residual(y)
            bad_until[last_residual >= residual_tol] = t
            window = 0.05 * t_max
            converged = (t - bad_until) >= window
            if on_sample is not None:
                on_sample(t, y)
            if converged.all() and t >= window:
                return y, converged, last_residual, steps, t
        elif on_sample is not None:
            on_sample(t, y)
    window = 0.05 * t_max
    converged = (t - bad_until) >= window
    return y, converged, last_residual, steps, t


def _default_horizon(params_seq: Sequence[SystemParams]) -> float:
    slowest = min(min(p.kappa_a, p.kappa_m, p.kappa_b) for p in params_seq)
    return 60.0 / slowest


def _default_step(flow: _Flow) -> float:
    return 0.08 / flow.max_rate


class _FrozenPhononFlow:
    """Cavity-magnon subsystem with the mechanical field held fixed."""

    def __init__(self, flow: _Flow, b_fixed: np.ndarray):
        self.flow = flow
        self.b = b_fixed

    def __call__(self, y: np.ndarray) -> np.ndarray:
        a, m = y[:, 0], y[:, 1]
        number = m.real**2 + m.imag**2
        out = np.empty_like(y)
        out[:, 0] = self.flow.ca * a - 1j * self.flow.g_ma * m + self.flow.eps
        out[:, 1] = (
            self.flow.cm * m
            - 1j * self.flow.g_ma * a
            - 2j * self.flow.g_mb * self.b.real * m
            - 2j * self.flow.kerr * number * m
        )
        return out

    def residual(self, y: np.ndarray) -> np.ndarray:
        scale = np.maximum(1.0, np.abs(y).max(axis=1))
        return np.abs(self(y)).max(axis=1) / (scale * self.flow.max_rate)


def _two_timescale_settle(
    flow: _Flow,
    y: np.ndarray,
    local_tol: float,
    residual_tol: float,
    t_fast: float,
    dt_init: float,
) -> tuple[np.ndarray, bool, float, int]:
    """Alternate fast-subsystem settling with exact mechanical pinning.

    Valid when the mechanical decay is far slower than every other rate, so
    the mechanical field only ever sees the settled magnon occupation.
    """
    b = y[:, 1].copy()
    steps = 0
    for _ in range(200):
        fast = np.stack([y[:, 0], y[:, 2]], axis=1)
        sub = _FrozenPhononFlow(flow, b)
        fast, conv, _, n_steps, _ = _advance(
            sub, fast, t_fast, dt_init, local_tol, residual_tol
        )
        steps += n_steps
        y = np.stack([fast[:, 0], b, fast[:, 1]], axis=1)
        if not conv.all():
            return y, False, float(flow.residual(y).max()), steps
        number = np.abs(y[:, 2]) ** 2
        b_next = -1j * flow.g_mb * number / (-flow.cb)
        shift = np.abs(b_next - b) / np.maximum(1.0, np.abs(b_next))
        b = b_next
        y[:, 1] = b
        if float(shift.max()) <= residual_tol:
            return y, True, float(flow.residual(y).max()), steps
    return y, False, float(flow.residual(y).max()), steps


def integrate_meanfield(
    params: SystemParams,
    t_max: float | None = None,
    dt_init: float | None = None,
    initial: tuple[complex, complex, complex] = (0.0, 0.0, 0.0),
    local_tol: float = 1e-10,
    residual_tol: float = 1e-10,
    max_samples: int = 512,
) -> TrajectoryRecord:
    """Integrate one configuration from ``initial``, recording a decimated trajectory."""
    if local_tol <= 0.0 or residual_tol <= 0.0:
        raise UnphysicalInput("tolerances must be positive")
    flow = _Flow([params])
    horizon = _default_horizon([params]) if t_max is None else float(t_max)
    if horizon <= 0.0:
        raise UnphysicalInput("t_max must be positive")
    dt0 = _default_step(flow) if dt_init is None else float(dt_init)
    y = np.array([initial], dtype=complex)

    times: list[float] = [0.0]
    samples: list[np.ndarray] = [y[0].copy()]
    stride = [1]
    count = [0]

    def on_sample(t: float, state: np.ndarray) -> None:
        count[0] += 1
        if count[0] % stride[0]:
            return
        times.append(t)
        samples.append(state[0].copy())
        if len(times) > 2 * max_samples:
            del times[1::2]
            del samples[1::2]
            stride[0] *= 2

    y, conv, res, steps, t_end = _advance(
        flow, y, horizon, dt0, local_tol, residual_tol, on_sample
    )
    if times[-1] != t_end:
        times.append(t_end)
        samples.append(y[0].copy())
    traj = np.array(samples)
    return TrajectoryRecord(
        times=np.array(times),
        cavity=traj[:, 0],
        magnon=traj[:, 2],
        phonon=traj[:, 1],
        converged=bool(conv[0]),
        residual=float(res[0]),
        steps=steps,
        t_end=t_end,
    )


def settle(
    params: SystemParams,
    initial: tuple[complex, complex, complex] = (0.0, 0.0, 0.0),
    local_tol: float = 1e-10,
    residual_tol: float = 1e-10,
    two_timescale: bool | None = None,
    t_max: float | None = None,
) -> TrajectoryRecord:
    """Integrate until the flow residual settles; raise ``NonConvergence`` otherwise.

    ``two_timescale=None`` enables the alternating scheme automatically when
    the mechanical decay is at least a factor 200 slower than every other
    dissipation rate. Pass False to force full integration.
    """
    fast_rate = min(params.kappa_a, params.kappa_m)
    if two_timescale is None:
        two_timescale = params.kappa_b * 200.0 < fast_rate
    if not two_timescale:
        record = integrate_meanfield(
            params,
            t_max=t_max,
            initial=initial,
            local_tol=local_tol,
            residual_tol=residual_tol,
        )
        if not record.converged:
            raise NonConvergence(
                f"no settled fixed point within t_max (residual {record.residual:.3e})"
            )
        return record

    flow = _Flow([params])
    y0 = np.array([initial], dtype=complex)
    t_fast = 60.0 / fast_rate if t_max is None else float(t_max)
    y, converged, residual, steps = _two_timescale_settle(
        flow, y0.copy(), local_tol, residual_tol, t_fast, _default_step(flow)
    )
    if not converged:
        raise NonConvergence(
            f"two-timescale settling did not close (residual {residual:.3e})"
        )
    # endpoints only; the alternating scheme has no single physical clock
    times = np.array([0.0, t_fast])
    return TrajectoryRecord(
        times=times,
        cavity=np.array([y0[0, 0], y[0, 0]]),
        magnon=np.array([y0[0, 2], y[0, 2]]),
        phonon=np.array([y0[0, 1], y[0, 1]]),
        converged=True,
        residual=residual,
        steps=steps,
        t_end=t_fast,
    )


def settle_batch(
    params_seq: Sequence[SystemParams],
    local_tol: float = 1e-10,
    residual_tol: float = 1e-10,
    t_max: float | None = None,
) -> BatchSettleResult:
    """Integrate many configurations on a shared clock, starting from rest.

    Intended for validation against the algebraic fixed points; the
    two-timescale shortcut is never used here.
    """
    if not params_seq:
        raise UnphysicalInput("params_seq must be nonempty")
    flow = _Flow(params_seq)
    horizon = _default_horizon(params_seq) if t_max is None else float(t_max)
    y = np.zeros((len(params_seq), 3), dtype=complex)
    y, conv, res, steps, t_end = _advance(
        flow, y, horizon, _default_step(flow), local_tol, residual_tol
    )
    return BatchSettleResult(
        fields=y, converged=conv, residuals=res, steps=steps, t_end=t_end
    )
