import math

import numpy as np
import pytest
import scipy.linalg

from magnomech.errors import SingularSystem, UnphysicalInput
from magnomech.linearized import (
    EffectiveParams,
    build_diffusion,
    build_drift,
    is_stable,
    solve_lyapunov,
    steady_covariance,
)
from magnomech.model import SystemParams, ThermalOccupations
from magnomech.steady_state import mean_fields

WB = 2.0 * math.pi * 1.0e7


def random_effective(rng) -> EffectiveParams:
    return EffectiveParams.benchmark(
        kappa_a=float(10 ** rng.uniform(-1.5, -0.5)) * WB,
        kappa_m=float(10 ** rng.uniform(-1.5, -0.5)) * WB,
        kappa_b=float(10 ** rng.uniform(-5, -2)) * WB,
        g_ma=float(rng.uniform(0.05, 0.3)) * WB,
        g_mb_enhanced=float(rng.uniform(0.0, 0.3)) * WB,
        delta_a=float(rng.uniform(-1.5, -0.5)) * WB,
        delta_f=float(rng.uniform(-0.2, 0.2)) * WB,
        delta_m_shifted=float(rng.uniform(0.5, 1.5)) * WB,
        kerr_shift=float(rng.uniform(-0.2, 0.2)) * WB,
        temperature=float(rng.uniform(0.0, 0.5)),
    )


class TestDriftStructure:
    def test_trace_counts_all_decay_channels(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            eff = random_effective(rng)
            drift = build_drift(eff)
            expected = -2.0 * (eff.kappa_a + eff.kappa_m + eff.kappa_b)
            assert np.trace(drift) == pytest.approx(expected, rel=1e-12)

    def test_uncoupled_blocks_are_zero(self):
        eff = EffectiveParams.benchmark()
        drift = build_drift(eff)
        # cavity and mechanics touch only through the magnon
        assert np.all(drift[:2, 4:] == 0.0)
        assert np.all(drift[4:, :2] == 0.0)

    def test_asymmetric_occupation_shift_between_quadratures(self):
        eff = EffectiveParams.benchmark()
        drift = build_drift(eff)
        base = eff.delta_m_shifted
        assert drift[2, 3] == pytest.approx(base + eff.kerr_shift)
        assert drift[3, 2] == pytest.approx(-(base + 3.0 * eff.kerr_shift))

    def test_matches_numerical_jacobian_of_the_flow(self):
        # linearize the classical flow at a reconstructed fixed point and
        # compare against the analytic generator in the quadrature basis
        base = SystemParams.defaults()
        params = base.replace(
            kerr_k0=0.1 * base.kerr_k0, epsilon_d=300.0 * base.omega_b, temperature=0.0
        )
        (state,) = mean_fields(params)
        eff = EffectiveParams.from_steady_state(params, state)
        drift = build_drift(eff)

        drive = params.epsilon_d * np.exp(1j * state.drive_phase)
        fixed = np.array([state.cavity, state.magnon, state.phonon], dtype=complex)

        def flow(fields: np.ndarray) -> np.ndarray:
            a, m, b = fields
            number = abs(m) ** 2
            da = (
                -(params.kappa_a + 1j * (params.delta_a - params.delta_f)) * a
                - 1j * params.g_ma * m
                + drive
            )
            dm = (
                -(params.kappa_m + 1j * params.delta_m) * m
                - 1j * params.g_ma * a
                - 2j * params.g_mb * b.real * m
                - 2j * params.kerr_k0 * number * m
            )
            db = -(params.kappa_b + 1j * params.omega_b) * b - 1j * params.g_mb * number
            return np.array([da, dm, db])

        def to_quadratures(fields: np.ndarray) -> np.ndarray:
            out = np.empty(6)
            out[0::2] = math.sqrt(2.0) * fields.real
            out[1::2] = math.sqrt(2.0) * fields.imag
            return out

        def from_quadratures(q: np.ndarray) -> np.ndarray:
            return (q[0::2] + 1j * q[1::2]) / math.sqrt(2.0)

        q0 = to_quadratures(fixed)
        h = 1e-4 * max(1.0, np.abs(q0).max())
        jac = np.empty((6, 6))
        for k in range(6):
            dq = np.zeros(6)
            dq[k] = h
            plus = to_quadratures(flow(from_quadratures(q0 + dq)))
            minus = to_quadratures(flow(from_quadratures(q0 - dq)))
            jac[:, k] = (plus - minus) / (2.0 * h)
        assert np.abs(jac - drift).max() <= 1e-6 * np.abs(drift).max()


class TestDiffusion:
    def test_diagonal_rates(self):
        occ = ThermalOccupations(n_a=0.5, n_m=1.5, n_b=20.0)
        eff = EffectiveParams.benchmark(occupations=occ)
        diffusion = build_diffusion(eff)
        assert np.all(diffusion == np.diag(np.diag(diffusion)))
        assert diffusion[0, 0] == pytest.approx(eff.kappa_a * 2.0)
        assert diffusion[2, 2] == pytest.approx(eff.kappa_m * 4.0)
        assert diffusion[4, 4] == pytest.approx(eff.kappa_b * 41.0)
        assert diffusion[5, 5] == diffusion[4, 4]


class TestStability:
    def test_benchmark_point_is_stable(self):
        eff = EffectiveParams.benchmark()
        stable, abscissa = is_stable(build_drift(eff), eff.omega_b)
        assert stable
        assert abscissa == pytest.approx(-0.0251 * WB, rel=0.05)

    def test_blue_detuned_magnon_is_unstable(self):
        eff = EffectiveParams.benchmark(delta_m_shifted=-WB)
        stable, abscissa = is_stable(build_drift(eff), eff.omega_b)
        assert not stable
        assert abscissa > 0.0

    def test_margin_threshold(self):
        assert is_stable(np.diag([-1.0, -2.0]), 1.0)[0]
        assert not is_stable(np.diag([-1e-10, -2.0]), 1.0)[0]


class TestLyapunov:
    def test_against_bartels_stewart_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            raw = rng.normal(size=(6, 6))
            drift = raw - (np.abs(np.linalg.eigvals(raw).real).max() + 0.5) * np.eye(6)
            diffusion = np.diag(rng.uniform(0.1, 10.0, size=6))
            got = solve_lyapunov(drift, diffusion, omega_b=1.0)
            want = scipy.linalg.solve_continuous_lyapunov(drift, -diffusion)
            assert np.abs(got - want).max() <= 1e-9 * np.abs(want).max()

    def test_residual_bound(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            eff = random_effective(rng)
            drift = build_drift(eff)
            if not is_stable(drift, eff.omega_b)[0]:
                continue
            diffusion = build_diffusion(eff)
            v = solve_lyapunov(drift, diffusion, eff.omega_b)
            lhs = drift / eff.omega_b
            rhs = diffusion / eff.omega_b
            residual = np.abs(lhs @ v + v @ lhs.T + rhs).max()
            assert residual <= 1e-10 * np.abs(rhs).max()

    def test_covariance_is_positive_definite(self):
        rng = np.random.default_rng(24)
        seen = 0
        for _ in range(60):
            eff = random_effective(rng)
            v, stable, _ = steady_covariance(eff)
            if not stable:
                continue
            seen += 1
            assert np.linalg.eigvalsh(v).min() > 0.0
        assert seen > 30

    def test_decoupled_modes_thermalize(self):
        # occupation shift must vanish too; it squeezes the magnon block
        occ = ThermalOccupations(n_a=0.25, n_m=2.0, n_b=17.5)
        eff = EffectiveParams.benchmark(
            g_ma=0.0, g_mb_enhanced=0.0, kerr_shift=0.0, occupations=occ
        )
        v, stable, _ = steady_covariance(eff)
        assert stable
        expected = np.diag([0.75, 0.75, 2.5, 2.5, 18.0, 18.0])
        assert np.abs(v - expected).max() <= 1e-12 * 18.0

    def test_marginal_drift_raises(self):
        drift = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(SingularSystem):
            solve_lyapunov(drift, np.eye(2), omega_b=1.0)

    def test_unstable_point_reports_unstable(self):
        eff = EffectiveParams.benchmark(delta_m_shifted=-WB)
        v, stable, abscissa = steady_covariance(eff)
        assert v is None
        assert not stable
        assert abscissa > 0.0


class TestMirrorSymmetry:
    # negating every detuning and the occupation shift, together with a
    # formal sign flip of the mechanical frequency, is a similarity of the
    # quadrature dynamics: conjugation plus a half-turn of the magnon phase
    SIGN = np.diag([1.0, -1.0, -1.0, 1.0, 1.0, -1.0])

    @staticmethod
    def mirrored_drift(eff: EffectiveParams) -> np.ndarray:
        flipped = build_drift(
            eff.replace(
                delta_a=-eff.delta_a,
                delta_f=-eff.delta_f,
                delta_m_shifted=-eff.delta_m_shifted,
                kerr_shift=-eff.kerr_shift,
            )
        )
        flipped[4, 5] = -flipped[4, 5]
        flipped[5, 4] = -flipped[5, 4]
        return flipped

    def test_joint_negation_conjugates_the_drift(self):
        rng = np.random.default_rng(25)
        for _ in range(20):
            eff = random_effective(rng)
            conjugated = self.SIGN @ self.mirrored_drift(eff) @ self.SIGN
            assert np.array_equal(conjugated, build_drift(eff))

    def test_mirrored_covariance_is_sign_conjugated(self):
        rng = np.random.default_rng(26)
        for _ in range(10):
            eff = random_effective(rng)
            drift = build_drift(eff)
            if not is_stable(drift, eff.omega_b)[0]:
                continue
            diffusion = build_diffusion(eff)
            v = solve_lyapunov(drift, diffusion, eff.omega_b)
            v_mirror = solve_lyapunov(self.mirrored_drift(eff), diffusion, eff.omega_b)
            assert np.abs(self.SIGN @ v_mirror @ self.SIGN - v).max() <= 1e-12 * np.abs(v).max()


class TestEffectiveParams:
    def test_from_steady_state_carries_shifts(self):
        base = SystemParams.defaults()
        params = base.replace(kerr_k0=0.1 * base.kerr_k0, epsilon_d=300.0 * base.omega_b)
        (state,) = mean_fields(params)
        eff = EffectiveParams.from_steady_state(params, state)
        assert eff.g_mb_enhanced == pytest.approx(params.g_mb * math.sqrt(state.magnon_number))
        assert eff.delta_m_shifted == state.delta_m_shifted
        assert eff.kerr_shift == state.kerr_shift
        assert eff.occupations == params.occupations()

    def test_benchmark_values(self):
        eff = EffectiveParams.benchmark()
        assert eff.g_mb_enhanced == pytest.approx(0.2 * WB)
        assert eff.delta_a == pytest.approx(-WB)
        assert eff.delta_m_shifted == pytest.approx(WB)
        assert eff.kerr_shift == pytest.approx(0.1 * WB)
        assert eff.delta_f == pytest.approx(0.1 * WB)
        assert eff.occupations.n_b == pytest.approx(20.34061833903644, rel=1e-9)

    def test_validation(self):
        with pytest.raises(UnphysicalInput):
            EffectiveParams.benchmark(kappa_a=0.0)
        with pytest.raises(UnphysicalInput):
            EffectiveParams.benchmark(g_ma=-1.0)
