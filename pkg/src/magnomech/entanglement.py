"""Two-mode Gaussian entanglement from steady covariance matrices.

For a two-mode covariance V = [[A, C], [C^T, B]] in the variance-1/2
convention, the logarithmic negativity is E = max(0, -ln 2 eta), where eta
is the smaller symplectic eigenvalue of the partial transpose,

    eta^2 = (Sigma - sqrt(Sigma^2 - 4 det V)) / 2,
    Sigma = det A + det B - 2 det C.

``ppt_negativity`` computes the same quantity through an explicit
eigendecomposition of the transposed covariance and exists as an
independent cross-check path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedConfigs, UnphysicalInput, Unstable
from .linearized import EffectiveParams, steady_covariance

__all__ = [
    "MODE_INDEX",
    "NegativityResult",
    "extract_two_mode",
    "log_negativity",
    "ppt_negativity",
    "entanglement_of",
    "delta_e_ab",
    "two_mode_squeezed_covariance",
]

MODE_INDEX = {"cavity": 0, "magnon": 1, "phonon": 2}

# relative closeness of the two symplectic eigenvalues below which the
# closed form is replaced by the eigendecomposition route
_DEGENERACY_GUARD = 1e-8


@dataclass(frozen=True)
class NegativityResult:
    """Logarithmic negativity and its intermediate quantities.

    ``value`` is zero with ``stable=False`` and None intermediates when the
    working point has no steady covariance.
    """

    value: float
    eta_minus: float | None
    sigma: float | None
    det_v: float | None
    stable: bool


def extract_two_mode(covariance: np.ndarray, pair: tuple[str, str]) -> np.ndarray:
    """4x4 block of the full covariance for an ordered pair of mode names."""
    v = np.asarray(covariance, dtype=float)
    if v.shape != (6, 6):
        raise UnphysicalInput(f"expected a 6x6 covariance, got shape {v.shape}")
    try:
        i, j = MODE_INDEX[pair[0]], MODE_INDEX[pair[1]]
    except KeyError as exc:
        raise UnphysicalInput(f"unknown mode name in {pair!r}") from exc
    if i == j:
        raise UnphysicalInput("pair must name two distinct modes")
    rows = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    return v[np.ix_(rows, rows)]


def _validated(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (4, 4):
        raise UnphysicalInput(f"expected a 4x4 covariance, got shape {v.shape}")
    if not np.allclose(v, v.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(v).max())):
        raise UnphysicalInput("covariance must be symmetric")
    return 0.5 * (v + v.T)


def ppt_negativity(v4: np.ndarray) -> float:
    """Logarithmic negativity via symplectic eigenvalues of the partial transpose."""
    v = _validated(v4)
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = flip @ v @ flip
    omega = np.zeros((4, 4))
    omega[0, 1] = omega[2, 3] = 1.0
    omega[1, 0] = omega[3, 2] = -1.0
    spectrum = np.abs(np.linalg.eigvals(1j * omega @ transposed))
    eta = float(spectrum.min())
    return max(0.0, -math.log(2.0 * eta))


def log_negativity(v4: np.ndarray) -> NegativityResult:
    """Closed-form logarithmic negativity of a two-mode covariance."""
    v = _validated(v4)
    block_a = np.linalg.det(v[:2, :2])
    block_b = np.linalg.det(v[2:, 2:])
    block_c = np.linalg.det(v[:2, 2:])
    sigma = block_a + block_b - 2.0 * block_c
    det_v = np.linalg.det(v)
    disc = sigma**2 - 4.0 * det_v
    if disc < 0.0:
        if disc < -_DEGENERACY_GUARD * max(sigma**2, 1.0):
            raise UnphysicalInput("covariance has no real symplectic spectrum")
        disc = 0.0
    if disc < _DEGENERACY_GUARD * max(sigma**2, 1.0):
        # nearly coincident symplectic eigenvalues; the subtraction in the
        # closed form loses precision there
        value = ppt_negativity(v)
        eta = 0.5 * math.exp(-value) if value > 0.0 else math.sqrt(max(sigma, 0.0) / 2.0)
        return NegativityResult(value, eta, float(sigma), float(det_v), True)
    # conjugate form of (sigma - sqrt(disc))/2; avoids cancellation when the
    # smaller symplectic eigenvalue is far below the larger one
    eta_sq = 2.0 * det_v / (sigma + math.sqrt(disc))
    if eta_sq <= 0.0:
        raise UnphysicalInput("covariance is not a physical state")
    eta = math.sqrt(eta_sq)
    if block_c >= 0.0:
        # a nonnegative cross-block determinant guarantees separability, so
        # boundary roundoff in eta must not leak a spurious positive value
        value = 0.0
    else:
        value = max(0.0, -math.log(2.0 * eta))
    return NegativityResult(value, eta, float(sigma), float(det_v), True)


def entanglement_of(
    eff: EffectiveParams, pair: tuple[str, str] = ("cavity", "phonon")
) -> NegativityResult:
    """Stationary entanglement of a mode pair at a working point.

    An unstable working point yields value 0.0 flagged ``stable=False``.
    """
    covariance, stable, _ = steady_covariance(eff)
    if not stable:
        return NegativityResult(0.0, None, None, None, False)
    return log_negativity(extract_two_mode(covariance, pair))


def delta_e_ab(
    eff_plus: EffectiveParams,
    eff_minus: EffectiveParams,
    pair: tuple[str, str] = ("cavity", "phonon"),
) -> float:
    """Entanglement contrast between opposite signs of the occupation shift.

    The two working points must agree in every field except ``kerr_shift``,
    whose values must be opposite. Raises ``Unstable`` if either point has
    no steady covariance.
    """
    if eff_plus.replace(kerr_shift=0.0) != eff_minus.replace(kerr_shift=0.0):
        raise MismatchedConfigs("working points differ beyond kerr_shift")
    anti = abs(eff_plus.kerr_shift + eff_minus.kerr_shift)
    scale = max(abs(eff_plus.kerr_shift), abs(eff_minus.kerr_shift))
    if anti > 1e-12 * max(scale, 1e-300):
        raise MismatchedConfigs("kerr_shift values must be opposite")
    plus = entanglement_of(eff_plus, pair)
    minus = entanglement_of(eff_minus, pair)
    if not (plus.stable and minus.stable):
        raise Unstable("entanglement contrast undefined at an unstable working point")
    return abs(plus.value - minus.value)


def two_mode_squeezed_covariance(r: float, occupation: float = 0.0) -> np.ndarray:
    """Covariance of a symmetric two-mode squeezed thermal state."""
    if not math.isfinite(r) or r < 0.0:
        raise UnphysicalInput(f"squeezing must be finite and nonnegative, got {r!r}")
    if occupation < 0.0:
        raise UnphysicalInput("occupation must be nonnegative")
    c = (occupation + 0.5) * math.cosh(2.0 * r)
    s = (occupation + 0.5) * math.sinh(2.0 * r)
    return np.array(
        [
            [c, 0.0, s, 0.0],
            [0.0, c, 0.0, -s],
            [s, 0.0, c, 0.0],
            [0.0, -s, 0.0, c],
        ]
    )
