"""Tests for the ACTM step map and the assembled state-space system."""

import itertools

import numpy as np
import pytest
from actm_oracle import oracle_step

from trafficobs_core.errors import DegenerateSplitWarning, ModelError
from trafficobs_core.models.config import LinearPart
from trafficobs_core.models.highway import ExogenousInput, HighwayTopology, TrafficState
from trafficobs_core.processors.actm import (
    ActmModel,
    assemble_system,
    demand,
    free_flow_matrix,
    interface_flow,
    measurement_matrix,
    onramp_flow,
    ramp_boundary_flows,
    step,
    supply,
)


def _grid(fd) -> list[float]:
    return [0.0, fd.rho_c / 2, fd.rho_c, (fd.rho_c + fd.rho_m) / 2, fd.rho_m]


def _ramp_layouts(n_sections: int):
    sections = range(1, n_sections + 1)
    subsets = [
        combo for k in range(n_sections + 1) for combo in itertools.combinations(sections, k)
    ]
    return itertools.product(subsets, subsets)


def _compare_with_oracle(topo, fd, states, inputs, beta) -> float:
    model = ActmModel(topo, fd)
    batched = model.advance(states, inputs, beta)
    worst = 0.0
    for k in range(states.shape[1]):
        expected = oracle_step(
            states[:, k].tolist(), inputs[:, k].tolist(), list(beta), topo, fd
        )
        worst = max(worst, float(np.max(np.abs(batched[:, k] - np.asarray(expected)))))
    return worst


def test_courant_number(fd, benchmark_topo):
    """The benchmark grid satisfies the CFL condition with v_f T / l = 0.14444."""
    assert benchmark_topo.courant(fd) == pytest.approx(0.144444, abs=1e-6)
    assert benchmark_topo.courant(fd) <= 1.0


def test_demand_examples(fd):
    """Demand of plain and off-ramp sections."""
    topo = HighwayTopology(n_sections=2, offramp_sections=(2,))
    inp = ExogenousInput(f_in=0.0, f_out=0.0, f_check=[0.0], beta=[0.1])

    assert demand(1, np.zeros(3), inp, topo, fd) == 0.0
    at_critical = np.array([fd.rho_c, fd.rho_c, 0.0])
    assert demand(1, at_critical, inp, topo, fd) == pytest.approx(fd.capacity)
    # off-ramp section: 0.9 v_f rho_c, the off-ramp supply term does not bind
    assert demand(2, at_critical, inp, topo, fd) == pytest.approx(0.6474, abs=1e-4)

    with pytest.raises(ModelError):
        demand(3, at_critical, inp, topo, fd)


def test_supply_examples(fd):
    """Supply of plain and on-ramp sections."""
    topo = HighwayTopology(n_sections=2, onramp_sections=(2,))
    inp = ExogenousInput(f_in=0.0, f_out=0.0, f_hat=[0.0])

    assert supply(1, [fd.rho_m, 0.0, 0.0], inp, topo, fd) == 0.0
    assert supply(1, [0.0, 0.0, 0.0], inp, topo, fd) == pytest.approx(0.7193, abs=1e-4)
    # jammed section with an empty on-ramp: nothing merges, nothing fits
    assert supply(2, [0.0, fd.rho_m, 0.0], inp, topo, fd) == 0.0


def test_supply_never_negative(fd):
    """A full on-ramp merging into a nearly jammed section leaves zero supply, not less."""
    topo = HighwayTopology(n_sections=1, onramp_sections=(1,))
    inp = ExogenousInput(f_in=0.0, f_out=0.0, f_hat=[0.0])
    for rho in np.linspace(0.0, fd.rho_m, 41):
        assert supply(1, [rho, fd.rho_m], inp, topo, fd) >= 0.0


def test_onramp_flow_examples(fd):
    """On-ramp merge flow."""
    topo = HighwayTopology(n_sections=1, onramp_sections=(1,))
    assert onramp_flow(1, [0.0, 0.0], topo, fd) == 0.0
    assert onramp_flow(1, [fd.rho_m, fd.rho_m], topo, fd) == 0.0
    assert onramp_flow(1, [0.0, fd.rho_m], topo, fd) == pytest.approx(0.7193, abs=1e-4)

    no_ramp = HighwayTopology(n_sections=1)
    with pytest.raises(ModelError):
        onramp_flow(1, [0.0], no_ramp, fd)


def test_onramp_flow_respects_occupancy_parameter(fd):
    """A smaller xi caps the merge at (xi / w_c) v_f rho_c."""
    topo = HighwayTopology(n_sections=1, onramp_sections=(1,), xi=(fd.w_c / 2,))
    assert onramp_flow(1, [0.0, fd.rho_m], topo, fd) == pytest.approx(fd.capacity / 2)


def test_interface_flow_examples(fd):
    """Boundary and interior interface flows."""
    topo = HighwayTopology(n_sections=3)
    empty = np.zeros(3)
    assert interface_flow(0, empty, ExogenousInput(f_in=0.0, f_out=1.0), topo, fd) == 0.0

    state = [0.0, fd.rho_c, 0.0]
    inp = ExogenousInput(f_in=0.0, f_out=0.0)
    assert interface_flow(2, state, inp, topo, fd) == pytest.approx(fd.capacity)
    assert interface_flow(3, [fd.rho_c] * 3, inp, topo, fd) == 0.0

    with pytest.raises(ModelError):
        interface_flow(4, state, inp, topo, fd)


def test_ramp_boundary_flows(fd):
    """Flows entering the on-ramp and leaving the off-ramp."""
    topo = HighwayTopology(n_sections=2, onramp_sections=(1,), offramp_sections=(2,))
    inp = ExogenousInput(f_in=0.0, f_out=0.0, f_hat=[10.0], f_check=[1.0], beta=[0.1])

    r_hat, s_check = ramp_boundary_flows(1, [0.0, 0.0, fd.rho_m, 0.0], inp, topo, fd)
    assert r_hat == 0.0
    assert s_check is None

    r_hat, _ = ramp_boundary_flows(1, [0.0, 0.0, 0.0, 0.0], inp, topo, fd)
    assert r_hat == pytest.approx(0.7193, abs=1e-4)

    r_hat, s_check = ramp_boundary_flows(2, [0.0, 0.0, 0.0, 0.0], inp, topo, fd)
    assert r_hat is None
    assert s_check == 0.0

    with pytest.raises(ModelError):
        ramp_boundary_flows(1, np.zeros(2), inp, HighwayTopology(n_sections=2), fd)


def test_step_zero_state_is_fixed_point(fd, small_topo):
    """Nothing in, nothing moves."""
    inp = ExogenousInput(f_in=0.0, f_out=0.0, f_hat=[0.0], f_check=[0.0], beta=[0.1])
    nxt = step(TrafficState.zeros(small_topo), inp, small_topo, fd)
    assert np.array_equal(nxt.densities, np.zeros(4))


def test_step_free_flow_equilibrium(fd):
    """Uniform free-flow density fed at its own flow stays put."""
    topo = HighwayTopology(n_sections=4)
    rho = 0.01
    inp = ExogenousInput(f_in=fd.v_f * rho, f_out=fd.capacity)
    nxt = step(np.full(4, rho), inp, topo, fd)
    np.testing.assert_allclose(nxt.densities, rho, atol=1e-15)


def test_step_matches_oracle_over_trajectory(fd):
    """Two sections with one on-ramp, five steps, against the case-by-case oracle."""
    topo = HighwayTopology(n_sections=2, onramp_sections=(1,))
    model = ActmModel(topo, fd)
    rng = np.random.default_rng(0)
    x = np.array([0.02, 0.1, 0.05])
    expected = x.tolist()
    for _ in range(5):
        u = rng.uniform(0.0, fd.capacity, size=topo.n_inputs)
        x = model.advance(x, u, np.zeros(0))
        expected = oracle_step(expected, u.tolist(), [], topo, fd)
        np.testing.assert_allclose(x, expected, rtol=0, atol=1e-12)


def test_step_matches_oracle_exhaustively_up_to_two_sections(fd):
    """Every ramp layout of one and two sections, every state on the 5-point grid."""
    rng = np.random.default_rng(1)
    grid = _grid(fd)
    for n_sections in (1, 2):
        for on, off in _ramp_layouts(n_sections):
            topo = HighwayTopology(n_sections=n_sections, onramp_sections=on,
                                   offramp_sections=off)
            states = np.array(list(itertools.product(grid, repeat=topo.n_states))).T
            inputs = rng.uniform(0.0, fd.capacity, size=(topo.n_inputs, states.shape[1]))
            beta = np.full(topo.n_offramps, 0.1)
            assert _compare_with_oracle(topo, fd, states, inputs, beta) <= 1e-12


def test_step_matches_oracle_on_three_sections(fd):
    """Every ramp layout of three sections, sampled grid states and mixed split ratios."""
    rng = np.random.default_rng(2)
    grid = np.asarray(_grid(fd))
    for on, off in _ramp_layouts(3):
        topo = HighwayTopology(n_sections=3, onramp_sections=on, offramp_sections=off)
        states = grid[rng.integers(0, len(grid), size=(topo.n_states, 300))]
        inputs = rng.uniform(0.0, fd.capacity, size=(topo.n_inputs, 300))
        beta = rng.choice([0.0, 0.1, 0.3], size=topo.n_offramps)
        assert _compare_with_oracle(topo, fd, states, inputs, beta) <= 1e-12


def test_step_matches_oracle_with_reduced_occupancy(fd):
    """Custom occupancy parameters go through the same merge formula."""
    rng = np.random.default_rng(3)
    topo = HighwayTopology(n_sections=2, onramp_sections=(1, 2), offramp_sections=(1,),
                           xi=(0.5 * fd.w_c, 0.0))
    grid = _grid(fd)
    states = np.array(list(itertools.product(grid, repeat=topo.n_states))).T
    inputs = rng.uniform(0.0, fd.capacity, size=(topo.n_inputs, states.shape[1]))
    assert _compare_with_oracle(topo, fd, states, inputs, np.array([0.2])) <= 1e-12


def test_step_stays_in_density_box(fd, benchmark_topo):
    """Random valid states and inputs never leave [0, rho_m]."""
    rng = np.random.default_rng(4)
    model = ActmModel(benchmark_topo, fd)
    for beta_value in (0.0, 0.1, 0.5):
        states = rng.uniform(0.0, fd.rho_m, size=(benchmark_topo.n_states, 5000))
        inputs = rng.uniform(0.0, fd.capacity, size=(benchmark_topo.n_inputs, 5000))
        nxt = model.advance(states, inputs, np.full(benchmark_topo.n_offramps, beta_value))
        assert nxt.min() >= 0.0
        assert nxt.max() <= fd.rho_m


def test_flows_are_bounded_by_capacity(fd, benchmark_topo):
    """Every flow lies in [0, v_f rho_c]."""
    rng = np.random.default_rng(5)
    model = ActmModel(benchmark_topo, fd)
    states = rng.uniform(0.0, fd.rho_m, size=(benchmark_topo.n_states, 2000))
    inputs = rng.uniform(0.0, fd.capacity, size=(benchmark_topo.n_inputs, 2000))
    flows = model.flows(states, inputs, np.full(benchmark_topo.n_offramps, 0.1))
    cap = fd.capacity * (1 + 1e-12)
    for name in ("demand", "supply", "onramp", "interface", "offramp", "onramp_inflow",
                 "offramp_outflow"):
        values = getattr(flows, name)
        assert values.min() >= 0.0, name
        assert values.max() <= cap, name


def test_vehicle_conservation_without_ramps(fd):
    """(l / T) times the change in total density equals q_0 - q_N."""
    rng = np.random.default_rng(6)
    topo = HighwayTopology(n_sections=5)
    model = ActmModel(topo, fd)
    states = rng.uniform(0.0, fd.rho_m, size=(5, 10_000))
    inputs = rng.uniform(0.0, fd.capacity, size=(2, 10_000))

    nxt = model.advance(states, inputs, np.zeros(0))
    q = model.flows(states, inputs, np.zeros(0)).interface
    balance = (nxt.sum(axis=0) - states.sum(axis=0)) / topo.ratio
    np.testing.assert_allclose(balance, q[0] - q[-1], rtol=0, atol=1e-12)


def test_supply_and_demand_are_monotone(fd):
    """Raising a density never raises supply and never lowers demand."""
    topo = HighwayTopology(n_sections=1)
    inp = ExogenousInput(f_in=0.0, f_out=0.0)
    densities = np.linspace(0.0, fd.rho_m, 101)
    supplies = [supply(1, [rho], inp, topo, fd) for rho in densities]
    demands = [demand(1, [rho], inp, topo, fd) for rho in densities]
    assert all(b <= a for a, b in zip(supplies, supplies[1:]))
    assert all(b >= a for a, b in zip(demands, demands[1:]))


def test_advance_rejects_wrong_shapes(fd, small_topo):
    model = ActmModel(small_topo, fd)
    with pytest.raises(ModelError):
        model.advance(np.zeros(3), np.zeros(small_topo.n_inputs), np.array([0.1]))
    with pytest.raises(ModelError):
        model.advance(np.zeros(4), np.zeros(2), np.array([0.1]))


def test_model_rejects_cfl_violation(fd):
    topo = HighwayTopology(n_sections=2, time_step=10.0)
    with pytest.raises(ModelError, match="CFL"):
        ActmModel(topo, fd)


def test_measurement_matrix_benchmark_layout(fd, benchmark_topo):
    """Thirteen sensors on thirty states, one selected entry per row."""
    C = measurement_matrix(benchmark_topo.sensors, benchmark_topo.n_states)
    assert C.shape == (13, 30)
    assert np.all(C.sum(axis=1) == 1.0)
    assert [int(np.flatnonzero(row)[0]) + 1 for row in C] == list(benchmark_topo.sensors)


def test_measurement_matrix_errors_and_full_sensing():
    with pytest.raises(ModelError):
        measurement_matrix([], 4)
    with pytest.raises(ModelError):
        measurement_matrix([1, 1], 4)
    with pytest.raises(ModelError):
        measurement_matrix([0, 2], 4)
    np.testing.assert_array_equal(measurement_matrix([1, 2, 3, 4], 4), np.eye(4))


def test_free_flow_matrix_entries(fd, small_topo):
    """Couplings of the free-flow Jacobian for a two-section highway."""
    c = small_topo.courant(fd)
    A = free_flow_matrix(small_topo, fd, [0.1])
    assert A[0, 0] == pytest.approx(1 - c)
    assert A[1, 0] == pytest.approx(c)
    assert A[0, small_topo.onramp_state(1)] == pytest.approx(c)
    assert A[small_topo.offramp_state(2), 1] == pytest.approx(0.1 * c)
    assert A[1, 1] == pytest.approx(1 - c)

    with pytest.raises(ModelError):
        free_flow_matrix(small_topo, fd, [0.1, 0.2])


def test_free_flow_matrix_is_step_difference_in_free_flow(fd, small_topo):
    """On light traffic with slack inputs the step map differs by exactly A (x - x')."""
    A = free_flow_matrix(small_topo, fd, [0.1])
    model = ActmModel(small_topo, fd)
    u = np.array([0.2, fd.capacity, 0.1, fd.capacity])
    x = np.array([0.004, 0.002, 0.003, 0.001])
    x_other = np.array([0.001, 0.005, 0.002, 0.004])
    gap = model.advance(x, u, [0.1]) - model.advance(x_other, u, [0.1])
    np.testing.assert_allclose(gap, A @ (x - x_other), atol=1e-15)


def test_assemble_system_identity_split(fd, benchmark_topo):
    system = assemble_system(benchmark_topo, fd, beta=np.full(10, 0.1))
    assert system.linear_part == LinearPart.IDENTITY
    np.testing.assert_array_equal(system.A, np.eye(30))
    assert system.C.shape == (13, 30)
    assert system.B_w.shape == (30, 43)
    assert system.D_w.shape == (13, 43)
    assert system.upper_bound == fd.rho_m


def test_assemble_system_nonlinearity(fd, small_topo):
    """f(x, u) is the step map minus A x."""
    system = assemble_system(small_topo, fd, linear_part=LinearPart.FREE_FLOW, beta=[0.1])
    inp = ExogenousInput(f_in=0.3, f_out=0.5, f_hat=[0.2], f_check=[0.1], beta=[0.1])
    x = np.array([0.02, 0.05, 0.01, 0.03])
    np.testing.assert_allclose(
        system.nonlinearity(x, inp) + system.A @ x, system.propagate(x, inp), atol=1e-15
    )


def test_assemble_system_warns_on_zero_split(fd, small_topo):
    with pytest.warns(DegenerateSplitWarning):
        assemble_system(small_topo, fd, beta=[0.0])


def test_assemble_system_rejects_bad_sensors(fd):
    topo = HighwayTopology(n_sections=2, sensors=(1, 5))
    with pytest.raises(ModelError):
        assemble_system(topo, fd)
