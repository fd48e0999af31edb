"""L-infinity observer gain synthesis by semidefinite programming.

The gain L = P^-1 Y certifies V(e) = e^T P e along the error dynamics

    e+ = (A - L C) e + (f(x, u) - f(xhat, u)) + (B_w - L D_w) w

through two block inequalities in (P, Y, eps, mu0, mu2) with alpha and mu1 fixed:

    main  = [[(a-1)P + eps g^2 I, (PA-YC)^T,  0,          (PA-YC)^T],
             [PA-YC,              P - eps I,  Phi,        0        ],
             [0,                  Phi^T,      -a mu0 I,   Phi^T    ],
             [PA-YC,              0,          Phi,        -P       ]]  <= 0

    perf  = [[-P, 0,       Z^T    ],
             [0,  -mu2 I,  0      ],
             [Z,  0,       -mu1 I ]]                                  <= 0

with Phi = P B_w - Y D_w. The objective mu0 mu1 + mu2 is linear once mu1 is fixed,
and the performance level is mu = sqrt(mu0 mu1 + mu2).

Both inequalities are homogeneous in (P, Y, eps, mu0) apart from the mu1 I block, so the
program is solved in variables multiplied by mu1. This keeps the entries of P of order one
for the large mu1 values used in practice; results are mapped back before checking.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import cvxpy as cp
import numpy as np
from scipy import linalg

from trafficobs_core.errors import (
    DetectabilityError,
    InfeasibleSynthesisError,
    SynthesisError,
)
from trafficobs_core.models.config import SynthesisConfig
from trafficobs_core.models.results import SweepRow, SynthesisResult
from trafficobs_core.processors.actm import SystemMatrices
from trafficobs_core.utils.linalg import max_eig, min_eig, smat, svec, symmetrize

logger = logging.getLogger(__name__)

SOLVED = ("optimal", "optimal_inaccurate")
INFEASIBLE = ("infeasible", "infeasible_inaccurate")


@dataclass(eq=False)
class SynthesisProblem:
    """Data of one convexified synthesis problem."""

    A: np.ndarray
    C: np.ndarray
    B_w: np.ndarray
    D_w: np.ndarray
    Z: np.ndarray
    gamma: float
    alpha: float
    mu1: float

    def __post_init__(self) -> None:
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.B_w = np.atleast_2d(np.asarray(self.B_w, dtype=float))
        self.D_w = np.atleast_2d(np.asarray(self.D_w, dtype=float))
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=float))

        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise SynthesisError(f"A must be square, got shape {self.A.shape}")
        if self.C.shape[1] != n:
            raise SynthesisError(f"C has {self.C.shape[1]} columns, expected {n}")
        if self.B_w.shape[0] != n:
            raise SynthesisError(f"B_w has {self.B_w.shape[0]} rows, expected {n}")
        if self.D_w.shape != (self.C.shape[0], self.B_w.shape[1]):
            raise SynthesisError(
                f"D_w must have shape {(self.C.shape[0], self.B_w.shape[1])}, got {self.D_w.shape}"
            )
        if self.Z.shape[1] != n:
            raise SynthesisError(f"Z has {self.Z.shape[1]} columns, expected {n}")
        if not 0 < self.alpha < 1:
            raise SynthesisError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.gamma < 0:
            raise SynthesisError(f"gamma must be nonnegative, got {self.gamma}")
        if self.mu1 <= 0:
            raise SynthesisError(f"mu1 must be positive, got {self.mu1}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return self.B_w.shape[1]

    @property
    def nz(self) -> int:
        return self.Z.shape[0]

    @classmethod
    def from_system(cls, system: SystemMatrices, config: SynthesisConfig) -> "SynthesisProblem":
        """Problem for an assembled highway with Z = z_scale * I."""
        return cls(
            A=system.A,
            C=system.C,
            B_w=system.B_w,
            D_w=system.D_w,
            Z=config.z_scale * np.eye(system.n_states),
            gamma=config.gamma,
            alpha=config.alpha,
            mu1=config.mu1,
        )


@dataclass(eq=False)
class LmiValues:
    """A point in the decision space (unscaled)."""

    P: np.ndarray
    Y: np.ndarray
    epsilon: float
    mu0: float
    mu2: float


def _lmi_rows(problem: SynthesisProblem, P: Any, Y: Any, eps: Any, mu0: Any, mu2: Any,
              mu1: float) -> tuple[list[list[Any]], list[list[Any]]]:
    """Block rows of both inequalities; works for numpy arrays and cvxpy expressions."""
    n, q, nz = problem.n, problem.q, problem.nz
    A, C, B_w, D_w, Z = problem.A, problem.C, problem.B_w, problem.D_w, problem.Z
    alpha, gamma = problem.alpha, problem.gamma

    gain_term = P @ A - Y @ C
    phi = P @ B_w - Y @ D_w
    i_n, i_q, i_z = np.eye(n), np.eye(q), np.eye(nz)

    main = [
        [(alpha - 1) * P + eps * gamma**2 * i_n, gain_term.T, np.zeros((n, q)), gain_term.T],
        [gain_term, P - eps * i_n, phi, np.zeros((n, n))],
        [np.zeros((q, n)), phi.T, -alpha * mu0 * i_q, phi.T],
        [gain_term, np.zeros((n, n)), phi, -P],
    ]
    perf = [
        [-P, np.zeros((n, q)), Z.T],
        [np.zeros((q, n)), -mu2 * i_q, np.zeros((q, nz))],
        [Z, np.zeros((nz, q)), -mu1 * i_z],
    ]
    return main, perf


def evaluate_lmi_blocks(
    problem: SynthesisProblem, values: LmiValues
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate both block matrices numerically at ``values``.

    Returns:
        (main, perf) as symmetric numpy arrays
    """
    main, perf = _lmi_rows(
        problem, values.P, values.Y, values.epsilon, values.mu0, values.mu2, problem.mu1
    )
    return symmetrize(np.block(main)), symmetrize(np.block(perf))


@dataclass
class ConstraintData:
    """Affine data of the LMIs in svec coordinates.

    The decision vector stacks svec(P), Y row by row, eps, mu0 and mu2. Each block
    satisfies svec(M(x)) = offset + coefficients @ x.
    """

    variables: list[str]
    offsets: dict[str, np.ndarray]
    coefficients: dict[str, np.ndarray]


@dataclass(eq=False)
class ConicProgram:
    """The cvxpy problem for one synthesis instance, in mu1-scaled variables."""

    problem: SynthesisProblem
    cp_problem: cp.Problem
    variables: dict[str, cp.Variable]
    margin: float
    delta_p: float
    status: Optional[str] = None
    solve_time: float = 0.0
    solver: str = ""

    @property
    def scale(self) -> float:
        return self.problem.mu1

    def solve(self, solver: str = "CLARABEL", **solver_options: Any) -> str:
        """Run the conic solver and return its status string."""
        started = time.perf_counter()
        try:
            self.cp_problem.solve(solver=solver, **solver_options)
        except cp.SolverError as e:
            self.solve_time = time.perf_counter() - started
            raise SynthesisError(f"Solver {solver} failed: {e}", status="solver_error") from e
        self.solve_time = time.perf_counter() - started
        self.solver = solver
        self.status = str(self.cp_problem.status)
        logger.debug("Solver %s finished with status %s in %.3fs", solver, self.status,
                     self.solve_time)
        return self.status

    def values(self) -> LmiValues:
        """Solution mapped back to unscaled variables."""
        if self.status not in SOLVED:
            raise SynthesisError(f"No solution available (status {self.status})",
                                 status=self.status)
        s = self.scale
        v = self.variables
        return LmiValues(
            P=symmetrize(np.asarray(v["P"].value)) / s,
            Y=np.asarray(v["Y"].value).reshape(self.problem.n, self.problem.p) / s,
            epsilon=max(float(v["epsilon"].value), 0.0) / s,
            mu0=max(float(v["mu0"].value), 0.0) / s,
            mu2=max(float(v["mu2"].value), 0.0),
        )

    def constraint_data(self) -> ConstraintData:
        """Affine coefficients of both blocks, evaluated at each unit direction."""
        prob = self.problem
        n, p = prob.n, prob.p
        n_p = n * (n + 1) // 2
        n_vars = n_p + n * p + 3

        def unpack(x: np.ndarray) -> LmiValues:
            return LmiValues(
                P=smat(x[:n_p]),
                Y=x[n_p: n_p + n * p].reshape(n, p),
                epsilon=float(x[-3]),
                mu0=float(x[-2]),
                mu2=float(x[-1]),
            )

        base = [svec(block) for block in evaluate_lmi_blocks(prob, unpack(np.zeros(n_vars)))]
        columns: list[list[np.ndarray]] = [[], []]
        for j in range(n_vars):
            unit = np.zeros(n_vars)
            unit[j] = 1.0
            for k, block in enumerate(evaluate_lmi_blocks(prob, unpack(unit))):
                columns[k].append(svec(block) - base[k])

        names = ("main", "perf")
        return ConstraintData(
            variables=["P"] * n_p + ["Y"] * (n * p) + ["epsilon", "mu0", "mu2"],
            offsets=dict(zip(names, base)),
            coefficients={name: np.column_stack(cols) for name, cols in zip(names, columns)},
        )


def assemble_lmi(
    problem: SynthesisProblem, margin: float = 1e-7, delta_p: float = 1e-8
) -> ConicProgram:
    """Build the convex program for fixed alpha and mu1.

    Args:
        problem: Synthesis data
        margin: Strictness margin applied to both blocks in solver coordinates
        delta_p: Lower bound P >= delta_p * I in unscaled coordinates

    Returns:
        ConicProgram ready to solve
    """
    n, p = problem.n, problem.p
    P = cp.Variable((n, n), symmetric=True, name="P")
    Y = cp.Variable((n, p), name="Y")
    eps = cp.Variable(nonneg=True, name="epsilon")
    mu0 = cp.Variable(nonneg=True, name="mu0")
    mu2 = cp.Variable(nonneg=True, name="mu2")

    # In scaled variables the mu1 I block becomes I
    main, perf = _lmi_rows(problem, P, Y, eps, mu0, mu2, 1.0)
    main_block = cp.bmat(main)
    perf_block = cp.bmat(perf)

    constraints = [
        0.5 * (main_block + main_block.T) << -margin * np.eye(main_block.shape[0]),
        0.5 * (perf_block + perf_block.T) << -margin * np.eye(perf_block.shape[0]),
        P >> problem.mu1 * delta_p * np.eye(n),
    ]
    cp_problem = cp.Problem(cp.Minimize(mu0 + mu2), constraints)

    return ConicProgram(
        problem=problem,
        cp_problem=cp_problem,
        variables={"P": P, "Y": Y, "epsilon": eps, "mu0": mu0, "mu2": mu2},
        margin=margin,
        delta_p=delta_p,
    )


def check_detectability(A: np.ndarray, C: np.ndarray, tol: float = 1e-9) -> None:
    """Rank test on [lambda I - A; C] at every eigenvalue with |lambda| >= 1.

    Raises:
        DetectabilityError: Naming the first unobservable mode found
    """
    A = np.atleast_2d(A)
    n = A.shape[0]
    checked: list[complex] = []
    for lam in linalg.eigvals(A):
        if abs(lam) < 1 - tol:
            continue
        if any(abs(lam - seen) <= 1e-8 for seen in checked):
            continue
        checked.append(lam)
        pencil = np.vstack([lam * np.eye(n) - A, C])
        rank = np.linalg.matrix_rank(pencil, tol=max(tol, 1e-9) * max(1.0, np.abs(pencil).max()))
        if rank < n:
            raise DetectabilityError(
                f"(A, C) is not detectable: mode lambda={complex(lam):.6g} is unobservable "
                f"(rank deficit {n - rank}); add sensors or use another linear part",
                eigenvalue=complex(lam),
                rank_deficit=n - rank,
            )


def phase_one_margin(
    problem: SynthesisProblem, solver: str = "CLARABEL", **solver_options: Any
) -> Optional[float]:
    """Largest t with main <= -t I and P >= t I, normalized by trace(P) + eps + mu0 = 1.

    The main inequality is homogeneous in (P, Y, eps, mu0), and any strict solution of it
    can be scaled until the performance inequality holds as well. So t* > 0 exactly when
    the full program is feasible, and t* <= 0 certifies that no gain exists at this alpha
    and gamma.

    Returns:
        t*, or None when the solver cannot decide
    """
    n, p = problem.n, problem.p
    P = cp.Variable((n, n), symmetric=True, name="P")
    Y = cp.Variable((n, p), name="Y")
    eps = cp.Variable(nonneg=True, name="epsilon")
    mu0 = cp.Variable(nonneg=True, name="mu0")
    t = cp.Variable(name="t")

    main, _ = _lmi_rows(problem, P, Y, eps, mu0, 0.0, 1.0)
    main_block = cp.bmat(main)
    size = main_block.shape[0]
    cp_problem = cp.Problem(
        cp.Maximize(t),
        [
            0.5 * (main_block + main_block.T) << -t * np.eye(size),
            P >> t * np.eye(n),
            cp.trace(P) + eps + mu0 == 1,
        ],
    )
    try:
        cp_problem.solve(solver=solver, **solver_options)
    except cp.SolverError as e:
        logger.debug("Phase-one solve failed: %s", e)
        return None
    if cp_problem.status not in SOLVED or t.value is None:
        logger.debug("Phase-one solve ended with status %s", cp_problem.status)
        return None
    return float(t.value)


def _confirm_infeasible(
    problem: SynthesisProblem,
    config: SynthesisConfig,
    cause: SynthesisError,
    **solver_options: Any,
) -> None:
    """Raise InfeasibleSynthesisError when the phase-one margin is not positive."""
    margin = phase_one_margin(problem, config.solver_name, **solver_options)
    if margin is None or margin > config.margin:
        return
    raise InfeasibleSynthesisError(
        f"Synthesis is infeasible at alpha={problem.alpha}, gamma={problem.gamma}: "
        f"phase-one margin t* = {margin:.3e} <= {config.margin:.1e} ({cause})",
        status="infeasible",
        certificate=margin,
    ) from cause


def solve(
    problem: SynthesisProblem,
    config: Optional[SynthesisConfig] = None,
    **solver_options: Any,
) -> SynthesisResult:
    """Solve the convexified problem and verify the certificate independently.

    When the solve fails or its certificate does not survive the re-check, a phase-one
    program decides whether the problem is infeasible or the solver just failed.

    Args:
        problem: Synthesis data
        config: Solver, margins and tolerances (defaults from SynthesisConfig)
        **solver_options: Passed to the conic solver

    Returns:
        SynthesisResult

    Raises:
        DetectabilityError: If (A, C) fails the detectability pre-check
        InfeasibleSynthesisError: If the solver or the phase-one margin certifies
            infeasibility
        SynthesisError: On solver failure or a certificate that fails the re-check
    """
    config = config or SynthesisConfig()
    check_detectability(problem.A, problem.C)

    program = assemble_lmi(problem, margin=config.margin, delta_p=config.delta_p)
    try:
        status = program.solve(config.solver_name, **solver_options)
        if status in INFEASIBLE:
            raise InfeasibleSynthesisError(
                f"Synthesis is infeasible at alpha={problem.alpha}, gamma={problem.gamma} "
                f"(solver status {status})",
                status=status,
            )
        return _certify(problem, program, config)
    except InfeasibleSynthesisError:
        raise
    except SynthesisError as e:
        _confirm_infeasible(problem, config, e, **solver_options)
        raise


def _certify(
    problem: SynthesisProblem, program: ConicProgram, config: SynthesisConfig
) -> SynthesisResult:
    """Recover the gain from a solved program and re-check both blocks."""
    status = program.status or ""
    if status not in SOLVED:
        raise SynthesisError(f"Solver did not converge (status {status})", status=status)

    values = program.values()
    try:
        L = linalg.solve(values.P, values.Y, assume_a="pos")
    except linalg.LinAlgError as e:
        raise SynthesisError(f"Certificate P is singular: {e}", status=status) from e

    main, perf = evaluate_lmi_blocks(problem, values)
    residuals = {"main": max_eig(main), "perf": max_eig(perf), "P_min": min_eig(values.P)}
    if residuals["main"] > config.residual_tol or residuals["perf"] > config.residual_tol:
        raise SynthesisError(
            f"Certificate re-check failed: max eigenvalues {residuals['main']:.3e} (main) and "
            f"{residuals['perf']:.3e} (performance) exceed {config.residual_tol:.1e}",
            status=status,
        )
    if residuals["P_min"] <= 0:
        raise SynthesisError("Certificate P is not positive definite", status=status)

    y_norm = float(np.linalg.norm(values.Y))
    mismatch = float(np.linalg.norm(values.P @ L - values.Y))
    if mismatch > 1e-8 * max(y_norm, np.finfo(float).tiny):
        raise SynthesisError(f"Gain recovery is inaccurate: ||P L - Y||_F = {mismatch:.3e}")

    condition = float(np.linalg.cond(values.P))
    if condition > config.cond_limit:
        logger.warning("Certificate P is ill-conditioned (cond %.3e)", condition)

    result = SynthesisResult(
        L=L,
        P=values.P,
        Y=values.Y,
        epsilon=values.epsilon,
        mu0=values.mu0,
        mu1=problem.mu1,
        mu2=values.mu2,
        alpha=problem.alpha,
        gamma=problem.gamma,
        status=status,
        solver=program.solver,
        solve_time=program.solve_time,
        residuals=residuals,
        condition_number=condition,
        z_scale=float(problem.Z[0, 0]) if problem.Z.size else 0.0,
    )
    logger.info(
        "Synthesized gain at alpha=%.4g, gamma=%.4g: mu=%.6g (%s, %.2fs)",
        problem.alpha, problem.gamma, result.mu, status, program.solve_time,
    )
    return result


def _sweep_point(
    problem: SynthesisProblem, alpha: float, config: SynthesisConfig
) -> tuple[SweepRow, Optional[SynthesisResult]]:
    started = time.perf_counter()
    try:
        result = solve(replace(problem, alpha=alpha), config)
    except DetectabilityError:
        raise
    except SynthesisError as e:
        logger.info("alpha=%.4g: %s", alpha, e)
        return SweepRow(alpha, e.status or "failed", None, time.perf_counter() - started), None
    return SweepRow(alpha, result.status, result.mu, result.solve_time), result


def alpha_sweep(
    problem: SynthesisProblem,
    alpha_grid: Sequence[float],
    config: Optional[SynthesisConfig] = None,
    workers: int = 1,
) -> SynthesisResult:
    """Solve at every alpha of a grid and keep the smallest performance level.

    Args:
        problem: Synthesis data (its own alpha is ignored)
        alpha_grid: Candidate values in (0, 1)
        config: Solver settings
        workers: Grid points solved concurrently

    Returns:
        Best SynthesisResult, with the full sweep table attached

    Raises:
        InfeasibleSynthesisError: If every grid point is certified infeasible
        SynthesisError: If no point is feasible and some failed for other reasons
    """
    config = config or SynthesisConfig()
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise SynthesisError("alpha grid is empty")
    bad = [a for a in grid if not 0 < a < 1]
    if bad:
        raise SynthesisError(f"alpha grid values outside (0, 1): {bad}")

    check_detectability(problem.A, problem.C)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda a: _sweep_point(problem, a, config), grid))
    else:
        outcomes = [_sweep_point(problem, a, config) for a in grid]

    rows = [row for row, _ in outcomes]
    feasible = [result for _, result in outcomes if result is not None]
    if not feasible:
        message = f"No feasible point on the alpha grid ({len(grid)} values)"
        if all(row.status in INFEASIBLE for row in rows):
            raise InfeasibleSynthesisError(message, status="infeasible")
        raise SynthesisError(message, status="failed")

    best = min(feasible, key=lambda r: r.mu)
    best.sweep = rows
    logger.info("Alpha sweep: best alpha=%.4g with mu=%.6g", best.alpha, best.mu)
    return best


@dataclass
class LmiSynthesizer:
    """Synthesize observer gains for assembled highway systems.

    Args:
        config: Synthesis settings (alpha, gamma, mu1, Z scale, solver, grid)
    """

    config: SynthesisConfig = field(default_factory=SynthesisConfig)

    def problem_for(self, system: SystemMatrices) -> SynthesisProblem:
        return SynthesisProblem.from_system(system, self.config)

    def synthesize(self, system: SystemMatrices) -> SynthesisResult:
        """Solve at the configured alpha, or sweep when a grid is configured."""
        problem = self.problem_for(system)
        if self.config.alpha_grid:
            result = alpha_sweep(problem, self.config.alpha_grid, self.config,
                                 workers=self.config.workers)
        else:
            result = solve(problem, self.config)
        result.linear_part = system.linear_part.value
        result.sensors = system.sensors
        return result
