"""Monte-Carlo lower bounds on Lipschitz constants."""

import logging
import time
from typing import Callable, Optional, Sequence

import numpy as np

from trafficobs_core.errors import ModelError
from trafficobs_core.models.config import LinearPart
from trafficobs_core.models.highway import FundamentalDiagram, HighwayTopology
from trafficobs_core.models.results import LipschitzEstimate, SynthesisResult
from trafficobs_core.models.scenario import Scenario
from trafficobs_core.processors.actm import ActmModel, free_flow_matrix

logger = logging.getLogger(__name__)

# Rows drawn from the stream at a time; fixed so every sample count reads the same prefix.
CHUNK_ROWS = 4096

BatchMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
Bounds = tuple[np.ndarray, np.ndarray]


def _bounds(bounds: Bounds, name: str) -> Bounds:
    low = np.asarray(bounds[0], dtype=float).reshape(-1)
    high = np.asarray(bounds[1], dtype=float).reshape(-1)
    if low.shape != high.shape:
        raise ModelError(f"{name} bounds have mismatched shapes {low.shape} and {high.shape}")
    if np.any(high < low):
        raise ModelError(f"{name} bounds are inverted")
    return low, high


def sample_lipschitz(
    f: BatchMap,
    x_bounds: Bounds,
    u_bounds: Bounds,
    samples: int,
    seed: int = 0,
) -> LipschitzEstimate:
    """Largest ratio ||f(x, u) - f(x', u)|| / ||x - x'|| over random pairs.

    Pairs (x, x') and a shared input u are drawn uniformly from the boxes. Draws come in
    fixed-size chunks from one generator, so a larger sample count extends the same
    stream and never lowers the estimate.

    Args:
        f: Batched map taking (n, K) states and (m, K) inputs
        x_bounds: (low, high) of the state box
        u_bounds: (low, high) of the input box
        samples: Number of pairs (at least 2)
        seed: Stream seed

    Returns:
        LipschitzEstimate
    """
    if samples < 2:
        raise ModelError(f"At least two samples are needed, got {samples}")
    x_low, x_high = _bounds(x_bounds, "State")
    u_low, u_high = _bounds(u_bounds, "Input")

    n, m = len(x_low), len(u_low)
    width = 2 * n + m
    low = np.concatenate([x_low, x_low, u_low])
    span = np.concatenate([x_high - x_low, x_high - x_low, u_high - u_low])

    rng = np.random.default_rng(seed)
    best, skipped, drawn = 0.0, 0, 0
    started = time.perf_counter()
    while drawn < samples:
        block = low + span * rng.random((CHUNK_ROWS, width))
        block = block[: samples - drawn]
        drawn += len(block)

        x = block[:, :n].T
        x_other = block[:, n: 2 * n].T
        u = block[:, 2 * n:].T

        dist = np.linalg.norm(x - x_other, axis=0)
        keep = dist > 0
        skipped += int(np.count_nonzero(~keep))
        if not np.any(keep):
            continue
        gap = np.linalg.norm(f(x[:, keep], u[:, keep]) - f(x_other[:, keep], u[:, keep]), axis=0)
        best = max(best, float(np.max(gap / dist[keep])))

    return LipschitzEstimate(
        gamma_hat=best,
        samples=samples,
        skipped=skipped,
        seed=seed,
        elapsed=time.perf_counter() - started,
    )


def estimate_lipschitz(
    topo: HighwayTopology,
    fd: FundamentalDiagram,
    input_ranges: Optional[Bounds] = None,
    samples: int = 100_000,
    seed: int = 0,
    beta: Optional[Sequence[float]] = None,
    linear_part: LinearPart = LinearPart.IDENTITY,
) -> LipschitzEstimate:
    """Sampled Lipschitz level of the highway nonlinearity f(x, u) = step(x, u) - A x.

    States range over [0, rho_m]^n and inputs default to [0, v_f rho_c]^m.

    Args:
        topo: Highway topology
        fd: Fundamental diagram
        input_ranges: Optional (low, high) of the input box
        samples: Number of sampled pairs
        seed: Stream seed
        beta: Split ratios (default 0.1 on every off-ramp)
        linear_part: Which linear part is removed from the step map

    Returns:
        LipschitzEstimate
    """
    beta_arr = (
        np.full(topo.n_offramps, 0.1) if beta is None else np.asarray(beta, dtype=float)
    )
    model = ActmModel(topo, fd)
    a = free_flow_matrix(topo, fd, beta_arr) if linear_part == LinearPart.FREE_FLOW \
        else np.eye(topo.n_states)

    if input_ranges is None:
        input_ranges = (np.zeros(topo.n_inputs), np.full(topo.n_inputs, fd.capacity))

    estimate = sample_lipschitz(
        lambda x, u: model.advance(x, u, beta_arr) - a @ x,
        (np.zeros(topo.n_states), np.full(topo.n_states, fd.rho_m)),
        input_ranges,
        samples,
        seed,
    )
    estimate.linear_part = linear_part.value
    logger.info(
        "Sampled Lipschitz level %.6g over %d pairs (%s split)",
        estimate.gamma_hat, samples, linear_part.value,
    )
    return estimate


def check_lipschitz_level(
    result: SynthesisResult, scenario: Scenario
) -> Optional[LipschitzEstimate]:
    """Sample the level of the scenario's nonlinearity and record it on ``result``.

    The bound carried by the gain only holds when gamma covers the nonlinearity, so a
    gamma below the sampled level is logged as a warning.

    Returns:
        The estimate, or None when the scenario disables the check
    """
    samples = scenario.synthesis.lipschitz_samples
    if samples < 2:
        return None
    estimate = estimate_lipschitz(
        scenario.topo,
        scenario.fd,
        samples=samples,
        beta=scenario.beta,
        linear_part=scenario.synthesis.linear_part,
    )
    result.gamma_hat = estimate.gamma_hat
    if not result.bound_certified:
        logger.warning(
            "gamma=%.4g is below the sampled Lipschitz level %.4g; the performance bound "
            "mu=%.4g is not certified for this scenario",
            result.gamma, estimate.gamma_hat, result.mu,
        )
    return estimate
