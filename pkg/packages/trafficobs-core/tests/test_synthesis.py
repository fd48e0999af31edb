"""Tests for the observer-gain semidefinite program."""

import numpy as np
import pytest

from trafficobs_core.errors import (
    DetectabilityError,
    InfeasibleSynthesisError,
    SynthesisError,
)
from trafficobs_core.models.config import LinearPart, SynthesisConfig
from trafficobs_core.processors import synthesis
from trafficobs_core.processors.actm import assemble_system
from trafficobs_core.processors.synthesis import (
    LmiSynthesizer,
    LmiValues,
    SynthesisProblem,
    alpha_sweep,
    assemble_lmi,
    check_detectability,
    evaluate_lmi_blocks,
    phase_one_margin,
    solve,
)
from trafficobs_core.utils.linalg import smat, svec


def _scalar_problem(gamma: float = 0.0, alpha: float = 0.5) -> SynthesisProblem:
    """x+ = 0.5 x measured directly, no process disturbance, Z = 1."""
    return SynthesisProblem(
        A=[[0.5]], C=[[1.0]], B_w=[[0.0]], D_w=[[1.0]], Z=[[1.0]],
        gamma=gamma, alpha=alpha, mu1=1.0,
    )


def test_problem_validation():
    """Out-of-range scalars and inconsistent shapes are rejected."""
    with pytest.raises(SynthesisError):
        _scalar_problem(alpha=1.0)
    with pytest.raises(SynthesisError):
        _scalar_problem(gamma=-0.1)
    with pytest.raises(SynthesisError):
        SynthesisProblem(A=np.eye(2), C=np.ones((1, 3)), B_w=np.zeros((2, 1)),
                         D_w=np.zeros((1, 1)), Z=np.eye(2), gamma=0.0, alpha=0.5, mu1=1.0)
    with pytest.raises(SynthesisError):
        SynthesisProblem(A=np.eye(2), C=np.ones((1, 2)), B_w=np.zeros((2, 1)),
                         D_w=np.zeros((1, 2)), Z=np.eye(2), gamma=0.0, alpha=0.5, mu1=1.0)


def test_lmi_blocks_scalar_hand_expansion():
    """Scalar case: 4x4 and 3x3 blocks match the hand expansion."""
    problem = SynthesisProblem(
        A=[[0.5]], C=[[1.0]], B_w=[[0.0]], D_w=[[1.0]], Z=[[1.0]],
        gamma=0.5, alpha=0.5, mu1=10.0,
    )
    values = LmiValues(P=np.array([[2.0]]), Y=np.array([[0.5]]), epsilon=3.0, mu0=4.0,
                       mu2=5.0)
    main, perf = evaluate_lmi_blocks(problem, values)

    # P A - Y C = 0.5 and P B_w - Y D_w = -0.5
    expected_main = np.array([
        [-0.25, 0.5, 0.0, 0.5],
        [0.5, -1.0, -0.5, 0.0],
        [0.0, -0.5, -2.0, -0.5],
        [0.5, 0.0, -0.5, -2.0],
    ])
    expected_perf = np.array([
        [-2.0, 0.0, 1.0],
        [0.0, -5.0, 0.0],
        [1.0, 0.0, -10.0],
    ])
    np.testing.assert_allclose(main, expected_main)
    np.testing.assert_allclose(perf, expected_perf)


def test_zero_gamma_drops_lipschitz_term():
    """With gamma = 0 epsilon only appears in the second diagonal block."""
    problem = _scalar_problem(gamma=0.0)
    base = LmiValues(P=np.array([[1.0]]), Y=np.array([[0.5]]), epsilon=0.0, mu0=1.0, mu2=1.0)
    moved = LmiValues(P=np.array([[1.0]]), Y=np.array([[0.5]]), epsilon=7.0, mu0=1.0, mu2=1.0)
    main_base, _ = evaluate_lmi_blocks(problem, base)
    main_moved, _ = evaluate_lmi_blocks(problem, moved)
    diff = main_moved - main_base
    assert diff[0, 0] == 0.0
    assert diff[1, 1] == -7.0
    assert np.count_nonzero(diff) == 1


def test_constraint_data_is_affine_in_decision_vector():
    """svec(block(x)) = offset + coefficients @ x for the documented variable order."""
    problem = SynthesisProblem(
        A=[[0.9, 0.1], [0.0, 0.8]], C=[[1.0, 0.0]], B_w=np.zeros((2, 1)), D_w=[[1.0]],
        Z=0.1 * np.eye(2), gamma=0.3, alpha=0.2, mu1=5.0,
    )
    data = assemble_lmi(problem).constraint_data()
    assert data.variables == ["P"] * 3 + ["Y"] * 2 + ["epsilon", "mu0", "mu2"]

    P = np.array([[2.0, 0.3], [0.3, 1.5]])
    Y = np.array([[0.4], [-0.2]])
    x = np.concatenate([svec(P), Y.reshape(-1), [0.7, 1.1, 0.9]])
    main, perf = evaluate_lmi_blocks(
        problem, LmiValues(P=P, Y=Y, epsilon=0.7, mu0=1.1, mu2=0.9)
    )
    np.testing.assert_allclose(data.offsets["main"] + data.coefficients["main"] @ x, svec(main),
                               atol=1e-12)
    np.testing.assert_allclose(data.offsets["perf"] + data.coefficients["perf"] @ x, svec(perf),
                               atol=1e-12)


def test_svec_inner_product_and_inverse(rng):
    """svec preserves the trace inner product and smat undoes it."""
    a = rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4))
    a, b = a + a.T, b + b.T
    assert svec(a) @ svec(b) == pytest.approx(np.trace(a @ b))
    np.testing.assert_allclose(smat(svec(a)), a)
    with pytest.raises(ValueError):
        smat(np.ones(4))


def test_solve_scalar_system_is_contractive():
    """A = 0.5, C = 1: the gain makes the error dynamics contract."""
    result = solve(_scalar_problem())
    assert result.status in ("optimal", "optimal_inaccurate")
    assert abs(0.5 - result.L[0, 0]) < 1.0
    assert result.P[0, 0] > 0
    assert result.mu == pytest.approx(np.sqrt(result.mu0 * result.mu1 + result.mu2))


def test_solve_certificate_checks():
    """Residuals are negative and the gain is recovered from P and Y."""
    result = solve(_scalar_problem(gamma=0.1))
    assert result.residuals["main"] <= 1e-7
    assert result.residuals["perf"] <= 1e-7
    assert result.residuals["P_min"] > 0
    assert np.linalg.norm(result.P @ result.L - result.Y) <= 1e-8 * np.linalg.norm(result.Y)
    assert result.z_scale == 1.0


def test_zero_gamma_never_worse():
    """Dropping the Lipschitz term cannot tighten the program."""
    relaxed = solve(_scalar_problem(gamma=0.0))
    tight = solve(_scalar_problem(gamma=0.2))
    assert relaxed.mu <= tight.mu * (1 + 1e-5) + 1e-7


def test_detectability_check():
    """An unobservable mode on the unit circle is reported before solving."""
    A = np.eye(2)
    C = np.array([[1.0, 0.0]])
    with pytest.raises(DetectabilityError) as excinfo:
        check_detectability(A, C)
    assert excinfo.value.status == "not_detectable"
    assert abs(excinfo.value.eigenvalue - 1.0) < 1e-9
    assert excinfo.value.rank_deficit == 1

    # stable unobservable modes are fine
    check_detectability(np.diag([1.0, 0.5]), C)


def test_solve_rejects_undetectable_pair():
    problem = SynthesisProblem(
        A=np.eye(2), C=[[1.0, 0.0]], B_w=np.zeros((2, 1)), D_w=[[1.0]], Z=np.eye(2),
        gamma=0.0, alpha=0.5, mu1=1.0,
    )
    with pytest.raises(InfeasibleSynthesisError):
        solve(problem)
    with pytest.raises(DetectabilityError):
        alpha_sweep(problem, [0.3, 0.6])


def test_phase_one_margin_sign():
    """gamma >= 1 forces eps > P and eps < P at once, so no strict point exists."""
    assert phase_one_margin(_scalar_problem(gamma=0.0)) > 1e-6
    assert phase_one_margin(_scalar_problem(gamma=2.0)) <= 1e-7


def test_solve_reports_infeasible_large_gamma():
    with pytest.raises(InfeasibleSynthesisError):
        solve(_scalar_problem(gamma=2.0))


def test_solver_failure_on_infeasible_problem_is_classified(monkeypatch):
    """A failed main solve is reclassified as infeasible when the phase-one margin says so."""

    def failing_solve(self, solver="CLARABEL", **options):
        raise SynthesisError(f"Solver {solver} failed: numerical trouble", status="solver_error")

    monkeypatch.setattr(synthesis.ConicProgram, "solve", failing_solve)

    with pytest.raises(InfeasibleSynthesisError) as excinfo:
        solve(_scalar_problem(gamma=2.0))
    assert excinfo.value.status == "infeasible"
    assert excinfo.value.certificate is not None
    assert excinfo.value.certificate <= SynthesisConfig().margin
    assert isinstance(excinfo.value.__cause__, SynthesisError)

    # a feasible problem keeps the original runtime failure
    with pytest.raises(SynthesisError) as excinfo:
        solve(_scalar_problem(gamma=0.0))
    assert not isinstance(excinfo.value, InfeasibleSynthesisError)
    assert excinfo.value.status == "solver_error"


def test_failed_recheck_on_infeasible_problem_is_classified(monkeypatch):
    """A certificate that fails the re-check is also passed through the phase-one program."""

    def failing_certify(problem, program, config):
        raise SynthesisError("Certificate re-check failed", status="optimal_inaccurate")

    monkeypatch.setattr(synthesis, "_certify", failing_certify)
    monkeypatch.setattr(synthesis.ConicProgram, "solve", lambda self, *a, **k: "optimal_inaccurate")

    with pytest.raises(InfeasibleSynthesisError):
        solve(_scalar_problem(gamma=2.0))
    with pytest.raises(SynthesisError, match="re-check"):
        solve(_scalar_problem(gamma=0.0))



def test_identity_split_with_partial_sensing_is_not_detectable(fd, benchmark_topo):
    """A = I with 13 of 30 states measured has unobservable modes at 1."""
    system = assemble_system(benchmark_topo, fd, beta=np.full(10, 0.1))
    with pytest.raises(DetectabilityError):
        LmiSynthesizer(SynthesisConfig()).synthesize(system)


def test_free_flow_split_is_detectable(fd, benchmark_topo):
    system = assemble_system(
        benchmark_topo, fd, linear_part=LinearPart.FREE_FLOW, beta=np.full(10, 0.1)
    )
    check_detectability(system.A, system.C)


def test_alpha_sweep_singleton_matches_solve():
    single = solve(_scalar_problem())
    swept = alpha_sweep(_scalar_problem(), [0.5])
    assert swept.mu == pytest.approx(single.mu, rel=1e-4)
    assert len(swept.sweep) == 1
    assert swept.sweep[0].feasible


def test_alpha_sweep_superset_never_worse():
    """The best point of a larger grid is at most the singleton result."""
    single = solve(_scalar_problem())
    swept = alpha_sweep(_scalar_problem(), [0.2, 0.5, 0.8], workers=2)
    assert [row.alpha for row in swept.sweep] == [0.2, 0.5, 0.8]
    assert swept.mu <= single.mu * (1 + 1e-4)
    assert swept.alpha in (0.2, 0.5, 0.8)


def test_alpha_sweep_rejects_bad_grid():
    with pytest.raises(SynthesisError):
        alpha_sweep(_scalar_problem(), [])
    with pytest.raises(SynthesisError):
        alpha_sweep(_scalar_problem(), [0.5, 1.5])


def test_alpha_sweep_all_infeasible():
    with pytest.raises(InfeasibleSynthesisError):
        alpha_sweep(_scalar_problem(gamma=2.0), [0.3, 0.6])


def test_synthesizer_on_small_highway(small_scenario):
    """Fully measured two-section highway: feasible, gain shaped (n, p)."""
    system = assemble_system(
        small_scenario.topo, small_scenario.fd, small_scenario.noise.disturbance,
        beta=small_scenario.beta,
    )
    result = LmiSynthesizer(small_scenario.synthesis).synthesize(system)
    assert result.L.shape == (4, 4)
    assert result.linear_part == "identity"
    assert result.sensors == (1, 2, 3, 4)
    assert result.residuals["main"] <= 1e-7
    assert np.isfinite(result.mu)
