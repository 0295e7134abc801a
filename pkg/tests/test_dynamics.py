"""Vector field, coupling rules, and the fixed-step integrator."""

import numpy as np
import pytest

from phasesel.dynamics import (
    ChainConfig,
    DivergenceError,
    IntegrationConfig,
    LatticeField,
    LatticeParams,
    LatticeOperator,
    RosslerParams,
    chain_coupling,
    chain_coupling_vector,
    draw_initial_states,
    integrate_chain,
    integrate_lattice,
    integrate_oscillator,
    lattice_coupling,
    rk4_step,
    rossler_derivative,
)
from phasesel.grid import GateSet, NEIGHBOR_OFFSETS, neighbor_counts


class TestRosslerDerivative:
    def test_rest_state_leaves_only_constant_term(self):
        d = rossler_derivative(np.array([0.0, 0.0, 0.0]), 1.0, 0.0)
        assert np.allclose(d, [0.0, 0.0, 0.2])

    def test_hand_evaluated_unit_state(self):
        d = rossler_derivative(np.array([1.0, 1.0, 1.0]), 1.0, 0.0)
        assert np.allclose(d, [-2.0, 1.15, -8.8])

    def test_coupling_enters_only_x_equation(self):
        rng = np.random.default_rng(3)
        state = rng.uniform(-5, 5, 3)
        kappa = 0.37
        d0 = rossler_derivative(state, 1.01, 0.0)
        d1 = rossler_derivative(state, 1.01, kappa)
        assert d1[0] - d0[0] == pytest.approx(kappa, abs=1e-12)
        assert d1[1] == d0[1] and d1[2] == d0[2]

    def test_broadcasts_over_grids(self):
        rng = np.random.default_rng(4)
        states = rng.uniform(-5, 5, (4, 5, 3))
        omega = rng.uniform(0.9, 1.1, (4, 5))
        out = rossler_derivative(states, omega, 0.0)
        one = rossler_derivative(states[2, 3], omega[2, 3], 0.0)
        assert np.array_equal(out[2, 3], one)


class TestChainCoupling:
    def test_uniform_state_gives_zero_everywhere(self):
        x = np.full(7, 3.21)
        assert all(chain_coupling(x, 0.05, i) == 0.0 for i in range(7))

    def test_interior_hand_evaluation(self):
        assert chain_coupling([0.0, 1.0, 0.0], 0.05, 1) == pytest.approx(-0.1)

    def test_end_oscillator_single_neighbor(self):
        assert chain_coupling([0.0, 2.0], 0.1, 0) == pytest.approx(0.2)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-10, 10, 9)
        vec = chain_coupling_vector(x, 0.03)
        scalar = [chain_coupling(x, 0.03, i) for i in range(9)]
        assert np.allclose(vec, scalar, atol=1e-15)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            chain_coupling([0.0, 1.0], 0.1, 2)


def _lattice_params(shape, k_plus, k_minus, gates=None, omega=1.0):
    return LatticeParams(
        omega=np.full(shape, omega),
        k_plus=np.full(shape, k_plus),
        k_minus=np.full(shape, k_minus),
        gates=gates if gates is not None else GateSet.all_on(shape),
    )


def _field_from_x(x):
    x = np.asarray(x, dtype=np.float64)
    states = np.zeros(x.shape + (3,))
    states[..., 0] = x
    return LatticeField(states)


class TestLatticeCoupling:
    def test_uniform_field_gives_zero(self):
        field = _field_from_x(np.full((3, 4), 1.7))
        params = _lattice_params((3, 4), 0.05, 0.02)
        for i in range(3):
            for j in range(4):
                assert lattice_coupling(field, params, (i, j)) == 0.0

    def test_attractive_pair(self):
        field = _field_from_x([[0.0, 1.0]])
        params = _lattice_params((1, 2), 0.05, 0.0)
        assert lattice_coupling(field, params, (0, 0)) == pytest.approx(0.05)

    def test_repulsive_pair(self):
        field = _field_from_x([[0.0, 1.0]])
        params = _lattice_params((1, 2), 0.0, 0.02)
        assert lattice_coupling(field, params, (0, 0)) == pytest.approx(-0.02)

    def test_gates_apply_only_to_attractive_term(self):
        field = _field_from_x([[0.0, 1.0]])
        params = _lattice_params((1, 2), 0.05, 0.02, gates=GateSet.all_off((1, 2)))
        assert lattice_coupling(field, params, (0, 0)) == pytest.approx(-0.02)

    def test_operator_matches_scalar_rule(self):
        rng = np.random.default_rng(11)
        shape = (4, 5)
        x = rng.uniform(-8, 8, shape)
        planes = GateSet.all_on(shape).planes.copy()
        drop = rng.uniform(size=planes.shape) < 0.4
        planes &= ~drop
        # re-symmetrize
        gates = GateSet(planes)
        sym = np.zeros_like(planes)
        for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
            opp = NEIGHBOR_OFFSETS.index((-di, -dj))
            for i in range(shape[0]):
                for j in range(shape[1]):
                    p, q = i + di, j + dj
                    if 0 <= p < shape[0] and 0 <= q < shape[1]:
                        sym[d, i, j] = planes[d, i, j] and planes[opp, p, q]
        gates = GateSet(sym)
        assert gates.is_symmetric()
        kp, km = 0.04, 0.015
        params = _lattice_params(shape, kp, km, gates=gates)
        field = _field_from_x(x)
        op = LatticeOperator(gates)
        flat = x.ravel()
        vec = kp * op.delta_plus(flat) - km * op.delta_minus(flat)
        scal = [
            lattice_coupling(field, params, (i, j))
            for i in range(shape[0])
            for j in range(shape[1])
        ]
        assert np.allclose(vec, scal, atol=1e-12)

    def test_cell_out_of_bounds(self):
        field = _field_from_x([[0.0, 1.0]])
        params = _lattice_params((1, 2), 0.05, 0.02)
        with pytest.raises(IndexError):
            lattice_coupling(field, params, (1, 0))


class TestZeroSumCoupling:
    def test_neighbor_difference_operators_conserve(self):
        rng = np.random.default_rng(12)
        shape = (6, 7)
        planes = GateSet.all_on(shape).planes & (
            rng.uniform(size=(8,) + shape) < 0.8
        )
        sym = np.zeros_like(planes)
        for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
            opp = NEIGHBOR_OFFSETS.index((-di, -dj))
            rolled = np.zeros(shape, dtype=bool)
            n, m = shape
            for i in range(n):
                for j in range(m):
                    p, q = i + di, j + dj
                    if 0 <= p < n and 0 <= q < m:
                        rolled[i, j] = planes[d, i, j] and planes[opp, p, q]
            sym[d] = rolled
        gates = GateSet(sym)
        op = LatticeOperator(gates)
        x = rng.uniform(-20, 20, shape).ravel()
        assert abs(op.delta_plus(x).sum()) < 1e-9
        assert abs(op.delta_minus(x).sum()) < 1e-9


class TestRK4:
    def test_zero_derivative_leaves_state(self):
        y = np.array([1.0, -2.0, 3.0])
        out = rk4_step(lambda s: np.zeros_like(s), y, 0.1)
        assert np.array_equal(out, y)

    def test_exponential_oracle(self):
        out = rk4_step(lambda s: s, np.array(1.0), 0.1)
        assert out == pytest.approx(1.105170918, abs=1e-7)

    def test_convergence_order_on_rossler_segment(self):
        params = RosslerParams()
        y0 = np.array([1.0, 2.0, 0.1])

        def rhs(s):
            return rossler_derivative(s, 1.0, 0.0, params)

        def endpoint(dt):
            y = y0.copy()
            for _ in range(int(round(1.0 / dt))):
                y = rk4_step(rhs, y, dt)
            return y

        ref = endpoint(0.02 / 16)
        err1 = np.linalg.norm(endpoint(0.02) - ref)
        err2 = np.linalg.norm(endpoint(0.01) - ref)
        order = np.log2(err1 / err2)
        assert 3.5 <= order <= 4.5

    def test_divergence_signal(self):
        with pytest.raises(DivergenceError):
            rk4_step(lambda s: s * 1e7, np.array(1.0), 1.0, divergence_bound=1e6)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            rk4_step(lambda s: s, np.array(1.0), 0.0)


class TestIntegrateChain:
    def test_symmetry_identical_oscillators(self):
        integ = IntegrationConfig(dt=0.01, t_end=5.0, sample_stride=10, burn_in=0.0)
        init = np.tile([1.0, -1.0, 0.2], (3, 1))
        cfg = ChainConfig(3, 0.0, np.full(3, 1.0))
        traj = integrate_chain(cfg, integ, init)
        assert np.array_equal(traj.x[:, 0], traj.x[:, 1])
        assert np.array_equal(traj.x[:, 1], traj.x[:, 2])

    def test_samples_include_t0_and_stride(self):
        integ = IntegrationConfig(dt=0.01, t_end=1.0, sample_stride=25, burn_in=0.0)
        cfg = ChainConfig(2, 0.01, np.array([0.99, 1.01]))
        traj = integrate_chain(cfg, integ)
        assert traj.times[0] == 0.0
        assert np.allclose(np.diff(traj.times), 0.25)
        assert traj.x.shape == (5, 2)

    def test_deterministic_given_seed(self):
        integ = IntegrationConfig(dt=0.01, t_end=3.0, sample_stride=10, seed=7, burn_in=0.0)
        cfg = ChainConfig(4, 0.02, np.array([0.98, 1.0, 1.01, 1.02]))
        a = integrate_chain(cfg, integ)
        b = integrate_chain(cfg, integ)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z)

    def test_initial_shape_validation(self):
        cfg = ChainConfig(3, 0.02, np.full(3, 1.0))
        integ = IntegrationConfig(t_end=1.0, burn_in=0.0)
        with pytest.raises(ValueError):
            integrate_chain(cfg, integ, np.zeros((2, 3)))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ChainConfig(1, 0.05, np.array([1.0]))
        with pytest.raises(ValueError):
            ChainConfig(2, -0.1, np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            ChainConfig(2, 0.1, np.array([0.5, 1.0]))


class TestIntegrateLattice:
    def test_single_cell_equals_uncoupled_oscillator(self):
        integ = IntegrationConfig(dt=0.01, t_end=4.0, sample_stride=20, burn_in=0.0)
        init = np.array([2.0, -1.0, 0.3])
        a = integrate_oscillator(1.02, integ, init)
        field = LatticeField(init.reshape(1, 1, 3))
        params = _lattice_params((1, 1), 0.0, 0.0, gates=GateSet.all_off((1, 1)), omega=1.02)
        b = integrate_lattice(field, params, integ)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_decoupled_lattice_matches_per_cell_runs_bitwise(self):
        rng = np.random.default_rng(21)
        shape = (3, 3)
        integ = IntegrationConfig(dt=0.01, t_end=3.0, sample_stride=30, burn_in=0.0)
        states = draw_initial_states(rng, shape)
        omegas = rng.uniform(0.95, 1.05, shape)
        field = LatticeField(states)
        params = LatticeParams(
            omega=omegas,
            k_plus=np.zeros(shape),
            k_minus=np.zeros(shape),
            gates=GateSet.all_on(shape),
        )
        whole = integrate_lattice(field, params, integ)
        for i in range(3):
            for j in range(3):
                single = integrate_oscillator(omegas[i, j], integ, states[i, j])
                assert np.array_equal(whole.x[:, i, j], single.x[:, 0, 0])
                assert np.array_equal(whole.y[:, i, j], single.y[:, 0, 0])

    def test_decoupled_cells_drift_apart(self):
        shape = (1, 2)
        integ = IntegrationConfig(dt=0.01, t_end=60.0, sample_stride=50, burn_in=0.0)
        states = np.tile([1.0, 0.0, 0.1], (1, 2, 1))
        params = LatticeParams(
            omega=np.array([[0.95, 1.05]]),
            k_plus=np.zeros(shape),
            k_minus=np.zeros(shape),
            gates=GateSet.all_off(shape),
        )
        traj = integrate_lattice(LatticeField(states), params, integ)
        phi = np.unwrap(np.arctan2(traj.y, traj.x), axis=0)
        assert abs(phi[-1, 0, 0] - phi[-1, 0, 1]) > np.pi

    def test_shape_mismatch_rejected(self):
        field = LatticeField(np.zeros((2, 2, 3)))
        params = _lattice_params((3, 3), 0.01, 0.01)
        with pytest.raises(ValueError):
            integrate_lattice(field, params, IntegrationConfig(t_end=1.0, burn_in=0.0))

    def test_divergence_reports_time(self):
        field = LatticeField(np.full((1, 1, 3), 9.0e5))
        params = _lattice_params((1, 1), 0.0, 0.0, gates=GateSet.all_off((1, 1)))
        with pytest.raises(DivergenceError) as err:
            integrate_lattice(field, params, IntegrationConfig(t_end=1.0, burn_in=0.0))
        assert err.value.time == pytest.approx(0.01)

    def test_coupling_schedule_called_per_step(self):
        shape = (1, 2)
        calls = []

        def schedule(t):
            calls.append(t)
            return np.zeros(shape), np.zeros(shape)

        field = LatticeField(draw_initial_states(np.random.default_rng(0), shape))
        params = _lattice_params(shape, 0.05, 0.02)
        integ = IntegrationConfig(dt=0.1, t_end=1.0, sample_stride=5, burn_in=0.0)
        integrate_lattice(field, params, integ, coupling_schedule=schedule)
        assert len(calls) == 10
        assert calls[0] == 0.0 and calls[-1] == pytest.approx(0.9)


class TestBoundedness:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_uncoupled_oscillator_stays_on_attractor(self, seed):
        rng = np.random.default_rng(seed)
        init = draw_initial_states(rng, ()).reshape(3)
        integ = IntegrationConfig(dt=0.01, t_end=500.0, sample_stride=10, burn_in=0.0)
        traj = integrate_oscillator(1.0, integ, init, record_z=True)
        assert np.max(np.abs(traj.x)) <= 25.0
        assert np.max(np.abs(traj.y)) <= 25.0
        assert traj.z.min() >= 0.0 and traj.z.max() <= 50.0


class TestValidation:
    def test_integration_config_rejects_bad_values(self):
        with pytest.raises(ValueError):
            IntegrationConfig(dt=-0.01)
        with pytest.raises(ValueError):
            IntegrationConfig(dt=0.1, t_end=0.05)
        with pytest.raises(ValueError):
            IntegrationConfig(sample_stride=0)
        with pytest.raises(ValueError):
            IntegrationConfig(t_end=10.0, burn_in=10.0)

    def test_lattice_params_shape_checks(self):
        with pytest.raises(ValueError):
            LatticeParams(
                omega=np.ones((2, 2)),
                k_plus=np.zeros((2, 3)),
                k_minus=np.zeros((2, 2)),
                gates=GateSet.all_on((2, 2)),
            )
        with pytest.raises(ValueError):
            LatticeParams(
                omega=np.ones((2, 2)),
                k_plus=np.full((2, 2), -0.1),
                k_minus=np.zeros((2, 2)),
                gates=GateSet.all_on((2, 2)),
            )

    def test_rossler_params_must_be_finite(self):
        with pytest.raises(ValueError):
            RosslerParams(a=float("nan"))

    def test_field_rejects_divergent_state(self):
        with pytest.raises(ValueError):
            LatticeField(np.full((1, 1, 3), 2e6))

    def test_init_box_ranges(self):
        states = draw_initial_states(np.random.default_rng(0), (50, 50))
        assert np.all(np.abs(states[..., 0]) <= 5.0)
        assert np.all(np.abs(states[..., 1]) <= 5.0)
        assert np.all((states[..., 2] >= 0.0) & (states[..., 2] <= 0.5))


def test_gate_set_symmetry_helpers():
    gates = GateSet.all_on((4, 4))
    assert gates.is_symmetric()
    assert gates.count() == int(neighbor_counts((4, 4)).sum())
    off = GateSet.all_off((2, 2))
    assert off.count() == 0 and off.is_symmetric()
