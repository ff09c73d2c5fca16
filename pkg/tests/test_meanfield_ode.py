import cmath
import math

import numpy as np
import pytest

from magnomech.errors import NonConvergence, UnphysicalInput
from magnomech.linearized import EffectiveParams, build_drift, is_stable
from magnomech.meanfield_ode import integrate_meanfield, settle, settle_batch
from magnomech.model import SystemParams
from magnomech.steady_state import mean_fields

WB = 2.0 * math.pi * 1.0e7


def ode_gauge(state):
    """Rotate the real-gauge algebraic fields into the real-drive gauge."""
    rot = cmath.exp(-1j * state.drive_phase)
    return state.cavity * rot, state.phonon, state.magnon * rot


@pytest.fixture(scope="module")
def linear_case():
    # no phonon coupling and no Kerr: exactly solvable two-mode system
    params = SystemParams.defaults(
        g_mb=0.0, kerr_k0=0.0, kappa_b=0.1 * WB, epsilon_d=120.0 * WB
    )
    record = integrate_meanfield(params, t_max=250.0 / WB, max_samples=64)
    return params, record


@pytest.fixture(scope="module")
def moderate_case():
    base = SystemParams.defaults()
    params = SystemParams.defaults(
        kappa_b=0.1 * WB, kerr_k0=0.1 * base.kerr_k0, epsilon_d=300.0 * WB
    )
    record = settle(params, two_timescale=None, t_max=400.0 / WB)
    return params, record


@pytest.fixture(scope="module")
def stiff_case():
    # mechanical linewidth four orders below the others; bistable drive window
    base = SystemParams.defaults()
    params = base.replace(kerr_k0=0.1 * base.kerr_k0, epsilon_d=1151.0 * WB)
    states = mean_fields(params)
    assert len(states) == 3
    record = settle(
        params, residual_tol=1e-8, t_max=200.0 / WB, two_timescale=None
    )
    return params, states, record


class TestIntegrateMeanfield:
    def test_reaches_exact_linear_fixed_point(self, linear_case):
        params, record = linear_case
        (state,) = mean_fields(params)
        a_ref, b_ref, m_ref = ode_gauge(state)
        assert record.final_magnon_number == pytest.approx(
            state.magnon_number, rel=1e-8
        )
        assert record.cavity[-1] == pytest.approx(a_ref, rel=1e-6)
        assert record.magnon[-1] == pytest.approx(m_ref, rel=1e-6)
        assert abs(record.phonon[-1]) <= 1e-12

    def test_trajectory_decimation_bounds(self, linear_case):
        _, record = linear_case
        assert len(record.times) <= 2 * 64 + 2
        assert record.times[0] == 0.0
        assert np.all(np.diff(record.times) > 0.0)
        for field in (record.cavity, record.magnon, record.phonon):
            assert field.shape == record.times.shape

    def test_oversized_initial_step_is_halved_back(self, linear_case):
        params, reference = linear_case
        record = integrate_meanfield(params, t_max=250.0 / WB, dt_init=2e-6)
        assert record.final_magnon_number == pytest.approx(
            reference.final_magnon_number, rel=1e-6
        )

    def test_rejects_bad_arguments(self):
        params = SystemParams.defaults(kappa_b=0.1 * WB)
        with pytest.raises(UnphysicalInput):
            integrate_meanfield(params, t_max=100.0 / WB, local_tol=0.0)
        with pytest.raises(UnphysicalInput):
            integrate_meanfield(params, t_max=-1.0)


class TestSettle:
    def test_full_integration_matches_algebraic_root(self, moderate_case):
        params, record = moderate_case
        (state,) = mean_fields(params)
        assert record.converged
        assert record.final_magnon_number == pytest.approx(
            state.magnon_number, rel=1e-8
        )
        a_ref, b_ref, m_ref = ode_gauge(state)
        assert record.cavity[-1] == pytest.approx(a_ref, rel=1e-6)
        assert record.phonon[-1] == pytest.approx(b_ref, rel=1e-6)

    def test_moderate_damping_disables_shortcut(self, moderate_case):
        _, record = moderate_case
        assert len(record.times) > 2

    def test_two_timescale_selects_lower_branch_from_rest(self, stiff_case):
        params, states, record = stiff_case
        assert record.converged
        assert record.final_magnon_number == pytest.approx(
            states[0].magnon_number, rel=1e-6
        )
        # shortcut reports endpoints only
        assert len(record.times) == 2

    def test_two_timescale_holds_a_prepared_fixed_point(self, stiff_case):
        params, states, _ = stiff_case
        initial = ode_gauge(states[0])
        record = settle(
            params, initial=initial, residual_tol=1e-8, t_max=200.0 / WB
        )
        assert record.final_magnon_number == pytest.approx(
            states[0].magnon_number, rel=1e-6
        )

    def test_nonconvergence_on_short_horizon(self):
        params = SystemParams.defaults(epsilon_d=100.0 * WB)
        with pytest.raises(NonConvergence):
            settle(params, two_timescale=False, t_max=1e-8)


class TestSettleBatch:
    def test_matches_algebraic_roots(self):
        rng = np.random.default_rng(20240819)
        accepted = []
        oracle = []
        while len(accepted) < 10:
            kerr_scale = 1.0 if rng.uniform() < 0.5 else 0.1
            probe = SystemParams.defaults(
                kappa_a=float(rng.uniform(0.08, 0.2)) * WB,
                kappa_m=float(rng.uniform(0.08, 0.2)) * WB,
                kappa_b=float(rng.uniform(0.08, 0.15)) * WB,
                g_ma=float(rng.uniform(0.1, 0.3)) * WB,
                delta_f=float(rng.uniform(-0.2, 0.2)) * WB,
                epsilon_d=float(rng.uniform(50.0, 400.0)) * WB,
            )
            params = probe.replace(kerr_k0=kerr_scale * probe.kerr_k0)
            states = mean_fields(params)
            if len(states) != 1 or not states[0].stable:
                continue
            eff = EffectiveParams.from_steady_state(params, states[0])
            if is_stable(build_drift(eff), params.omega_b)[1] > -0.03 * WB:
                continue
            accepted.append(params)
            oracle.append(states[0].magnon_number)
        result = settle_batch(accepted)
        assert result.converged.all()
        assert result.magnon_numbers == pytest.approx(np.array(oracle), rel=1e-8)
        assert result.steps > 0
        assert result.t_end > 0.0

    def test_rejects_empty_batch(self):
        with pytest.raises(UnphysicalInput):
            settle_batch([])
