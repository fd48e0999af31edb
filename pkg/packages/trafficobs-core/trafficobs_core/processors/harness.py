"""Random inputs, measurement noise and plant simulation for experiments."""

import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from trafficobs_core.models.config import NoiseConfig
from trafficobs_core.models.highway import FundamentalDiagram, HighwayTopology, InputSchedule
from trafficobs_core.models.results import PlantRun
from trafficobs_core.processors.actm import ActmModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamSeeds:
    """Independent child seeds derived from one scenario seed."""

    inputs: int
    initial: int
    noise: int
    process: int


def derive_seeds(seed: int) -> StreamSeeds:
    """Spawn one seed per random stream so the streams never overlap."""
    children = np.random.SeedSequence(seed).spawn(4)
    values = [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]
    return StreamSeeds(*values)


def generate_inputs(
    topo: HighwayTopology,
    fd: FundamentalDiagram,
    k_f: int,
    seed: int,
    hold_steps: int = 60,
    split_ratio: float = 0.1,
) -> InputSchedule:
    """Piecewise-constant random inputs.

    Every input channel is redrawn uniformly from [0, v_f rho_c] each ``hold_steps``
    steps; every off-ramp uses the same constant split ratio.

    Args:
        topo: Highway topology
        fd: Fundamental diagram
        k_f: Horizon in steps
        seed: Stream seed
        hold_steps: Steps between redraws
        split_ratio: Off-ramp split ratio

    Returns:
        InputSchedule of length k_f
    """
    if k_f < 1:
        raise ValueError(f"Horizon must be at least one step, got {k_f}")
    if hold_steps < 1:
        raise ValueError(f"Hold must be at least one step, got {hold_steps}")
    rng = np.random.default_rng(seed)
    segments = math.ceil(k_f / hold_steps)
    draws = rng.uniform(0.0, fd.capacity, size=(segments, topo.n_inputs))
    u = np.repeat(draws, hold_steps, axis=0)[:k_f]
    return InputSchedule(u=u, beta=np.full(topo.n_offramps, split_ratio), topo=topo)


def initial_state(topo: HighwayTopology, fd: FundamentalDiagram, seed: int) -> np.ndarray:
    """Uniform random densities in [0, rho_m]^n."""
    return np.random.default_rng(seed).uniform(0.0, fd.rho_m, size=topo.n_states)


def truncated_gaussian(
    shape: tuple[int, ...], variance: float, truncation: float, seed: int
) -> np.ndarray:
    """Zero-mean Gaussian samples cut at +/- truncation standard deviations."""
    if variance == 0 or 0 in shape:
        return np.zeros(shape)
    return stats.truncnorm.rvs(
        -truncation,
        truncation,
        loc=0.0,
        scale=math.sqrt(variance),
        size=shape,
        random_state=np.random.default_rng(seed),
    )


@dataclass(eq=False)
class NoiseRecord:
    """Realized measurement noise."""

    samples: np.ndarray  # v[k], (k_f, p)
    bound: float  # truncation * sqrt(p * r_meas)

    @property
    def linf(self) -> float:
        """max_k ||v[k]||_2."""
        if self.samples.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.samples, axis=1)))


def inject_noise(
    y_clean: np.ndarray, r_meas: float, seed: int, truncation: float = 3.0
) -> tuple[np.ndarray, NoiseRecord]:
    """Add i.i.d. truncated Gaussian noise of variance ``r_meas`` to every sensor.

    Returns:
        (noisy measurements, noise record)
    """
    if r_meas < 0:
        raise ValueError(f"Noise variance must be nonnegative, got {r_meas}")
    y_clean = np.asarray(y_clean, dtype=float)
    noise = truncated_gaussian(y_clean.shape, r_meas, truncation, seed)
    p = y_clean.shape[1] if y_clean.ndim == 2 else 1
    record = NoiseRecord(samples=noise, bound=truncation * math.sqrt(p * r_meas))
    logger.debug(
        "Measurement noise r=%.3g truncated at %.1f sigma: ||v||_Linf=%.4g (bound %.4g)",
        r_meas, truncation, record.linf, record.bound,
    )
    return y_clean + noise, record


def stream_digest(*arrays: np.ndarray) -> str:
    """SHA-256 of the raw bytes of the given arrays."""
    digest = hashlib.sha256()
    for array in arrays:
        contiguous = np.ascontiguousarray(array, dtype=float)
        digest.update(str(contiguous.shape).encode())
        digest.update(contiguous.tobytes())
    return digest.hexdigest()


def simulate_plant(
    model: ActmModel,
    schedule: InputSchedule,
    x0: np.ndarray,
    C: np.ndarray,
    noise: NoiseConfig,
    seed: int,
) -> PlantRun:
    """Simulate the true densities and the noisy measurement stream.

    Args:
        model: ACTM step map
        schedule: Inputs for every step
        x0: Initial densities
        C: Measurement matrix
        noise: Process and measurement noise settings
        seed: Scenario seed; child streams are derived from it

    Returns:
        PlantRun
    """
    seeds = derive_seeds(seed)
    horizon = len(schedule)
    n = model.n_states
    process = truncated_gaussian((max(horizon - 1, 0), n), noise.q_proc, noise.truncation,
                                 seeds.process)

    states = np.empty((horizon, n))
    states[0] = np.asarray(x0, dtype=float)
    for k in range(horizon - 1):
        nxt = model.advance(states[k], schedule.u[k], schedule.beta)
        if noise.q_proc > 0:
            nxt = np.clip(nxt + process[k], 0.0, model.fd.rho_m)
        states[k + 1] = nxt

    clean = states @ C.T
    measurements, record = inject_noise(clean, noise.r_meas, seeds.noise, noise.truncation)
    return PlantRun(
        states=states,
        clean=clean,
        measurements=measurements,
        noise=record.samples,
        schedule=schedule,
        digest=stream_digest(measurements, schedule.u),
        process_noise=process if noise.q_proc > 0 else None,
    )


def disturbance_linf(plant: PlantRun, noise: NoiseConfig) -> float:
    """Sup-norm of w[k] = [process / sqrt(q_proc) | v / sqrt(r_meas)].

    These are the coordinates of the lumped disturbance channels used in synthesis.
    Channels with zero variance contribute nothing.
    """
    horizon = plant.horizon
    squared = np.zeros(horizon)
    if noise.r_meas > 0:
        squared += np.sum(plant.noise**2, axis=1) / noise.r_meas
    if noise.q_proc > 0 and plant.process_noise is not None:
        squared[1:] += np.sum(plant.process_noise**2, axis=1) / noise.q_proc
    return float(np.sqrt(squared.max())) if horizon else 0.0


def resolve_initial_state(
    topo: HighwayTopology, fd: FundamentalDiagram, seed: int, x0: Optional[np.ndarray] = None
) -> np.ndarray:
    """Given initial densities, or a random draw from the scenario seed."""
    if x0 is not None:
        return np.asarray(x0, dtype=float)
    return initial_state(topo, fd, derive_seeds(seed).initial)
