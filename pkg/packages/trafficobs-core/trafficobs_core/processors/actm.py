"""Asymmetric cell transmission model of a ramp-connected highway.

All flow functions are evaluated on batches: densities have shape (n, K) and inputs
(m, K), so the same code path serves a single step, the 2n+1 sigma points of the
unscented filter and the Monte-Carlo pairs of the Lipschitz sampler.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from trafficobs_core.errors import DegenerateSplitWarning, ModelError
from trafficobs_core.models.config import DisturbanceConfig, LinearPart
from trafficobs_core.models.highway import (
    ExogenousInput,
    FundamentalDiagram,
    HighwayTopology,
    TrafficState,
)

logger = logging.getLogger(__name__)

# Round-off allowance (relative to rho_m) before a bound violation is a model error.
CLAMP_TOLERANCE = 1e-9

StateLike = Union[TrafficState, np.ndarray, Sequence[float]]


@dataclass
class CellFlows:
    """Every flow of one step, batched over K columns."""

    demand: np.ndarray  # delta, (N, K)
    supply: np.ndarray  # sigma, (N, K)
    onramp: np.ndarray  # r, (N_I, K)
    interface: np.ndarray  # q_0..q_N, (N + 1, K)
    offramp: np.ndarray  # s, (N_O, K)
    onramp_inflow: np.ndarray  # r_hat, (N_I, K)
    offramp_outflow: np.ndarray  # s_check, (N_O, K)


@dataclass(frozen=True)
class SplitTerms:
    """Constants of the off-ramp sections for one vector of split ratios, as columns."""

    beta: np.ndarray  # (N_O, 1)
    beta_bar: np.ndarray  # 1 - beta
    capped: np.ndarray  # beta_bar * capacity
    ratio: np.ndarray  # beta_bar / beta, 0 where beta = 0
    positive: np.ndarray  # beta > 0
    exit_share: np.ndarray  # beta / beta_bar

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.positive))

    @classmethod
    def build(cls, beta: np.ndarray, capacity: float) -> "SplitTerms":
        beta_bar = 1.0 - beta
        positive = beta > 0
        return cls(
            beta=beta,
            beta_bar=beta_bar,
            capped=beta_bar * capacity,
            ratio=np.divide(beta_bar, beta, out=np.zeros_like(beta), where=positive),
            positive=positive,
            exit_share=beta / beta_bar,
        )


def _min3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.minimum(np.minimum(a, b), c)


def _as_columns(values: np.ndarray, rows: int, name: str) -> tuple[np.ndarray, bool]:
    array = np.asarray(values, dtype=float)
    single = array.ndim == 1
    if single:
        array = array[:, None]
    if array.ndim != 2 or array.shape[0] != rows:
        raise ModelError(f"{name} must have {rows} rows, got shape {np.shape(values)}")
    return array, single


class ActmModel:
    """Batched ACTM step map for one highway.

    Args:
        topo: Highway topology (ramp sets, cell length, time step)
        fd: Triangular fundamental diagram
    """

    def __init__(self, topo: HighwayTopology, fd: FundamentalDiagram):
        topo.validate(fd)
        self.topo = topo
        self.fd = fd

        n_sec = topo.n_sections
        self._on = np.asarray(topo.onramp_sections, dtype=int) - 1
        self._off = np.asarray(topo.offramp_sections, dtype=int) - 1
        self._off_next = self._off + 1
        self._xi = topo.resolve_xi(fd)[:, None]
        self._merge_cap = self._xi / fd.w_c * fd.capacity
        self._hat = slice(n_sec, n_sec + topo.n_onramps)
        self._check = slice(n_sec + topo.n_onramps, topo.n_states)
        # (raw bytes of beta, terms); swapped as one tuple so concurrent arms never mix them
        self._split_cache: Optional[tuple[bytes, SplitTerms]] = None

    @property
    def n_states(self) -> int:
        return self.topo.n_states

    @property
    def n_inputs(self) -> int:
        return self.topo.n_inputs

    def split_terms(self, beta: np.ndarray) -> SplitTerms:
        """Off-ramp constants for ``beta``, cached for the last vector seen."""
        column = np.asarray(beta, dtype=float).reshape(-1, 1)
        key = column.tobytes()
        cached = self._split_cache
        if cached is None or cached[0] != key:
            if column.shape[0] != self.topo.n_offramps:
                raise ModelError(
                    f"Expected {self.topo.n_offramps} split ratios, got {column.shape[0]}"
                )
            cached = (key, SplitTerms.build(column, self.fd.capacity))
            self._split_cache = cached
        return cached[1]

    def flows(self, x: np.ndarray, u: np.ndarray, beta: np.ndarray) -> CellFlows:
        """Evaluate demand, supply, ramp and interface flows.

        Args:
            x: Densities, shape (n, K)
            u: Inputs, shape (m, K) or (m, 1)
            beta: Off-ramp split ratios, shape (N_O,)

        Returns:
            CellFlows with one column per batch entry
        """
        fd, topo = self.fd, self.topo
        cap = fd.capacity
        n_sec, n_on = topo.n_sections, topo.n_onramps
        split = self.split_terms(beta)

        rho = x[:n_sec]
        rho_hat = x[self._hat]
        rho_check = x[self._check]
        f_in, f_out = u[0], u[1]
        f_hat = u[2: 2 + n_on]
        f_check = u[2 + n_on:]
        room = fd.rho_m - rho

        # On-ramp merge, clamped at zero
        onramp = np.maximum(
            _min3(fd.v_f * rho_hat, self._xi * room[self._on], self._merge_cap), 0.0
        )

        supply = np.minimum(fd.w_c * room, cap)
        supply[self._on] -= onramp
        np.maximum(supply, 0.0, out=supply)

        demand = np.minimum(fd.v_f * rho, cap)
        if topo.n_offramps:
            offramp_supply = np.minimum(fd.w_c * (fd.rho_m - rho_check), cap)
            third = split.ratio * offramp_supply
            if not split.all_positive:
                # beta = 0 drops the off-ramp argument: nothing leaves through the ramp
                third = np.where(split.positive, third, np.inf)
            demand[self._off] = _min3(
                split.beta_bar * fd.v_f * rho[self._off], split.capped, third
            )

        interface = np.empty((n_sec + 1, x.shape[1]))
        interface[0] = np.minimum(f_in, supply[0])
        interface[1:n_sec] = np.minimum(demand[:-1], supply[1:])
        interface[n_sec] = np.minimum(demand[-1], f_out)

        offramp = split.exit_share * interface[self._off_next]
        onramp_inflow = _min3(fd.w_c * (fd.rho_m - rho_hat), cap, f_hat)
        offramp_outflow = _min3(fd.v_f * rho_check, cap, f_check)

        return CellFlows(
            demand=demand,
            supply=supply,
            onramp=onramp,
            interface=interface,
            offramp=offramp,
            onramp_inflow=onramp_inflow,
            offramp_outflow=offramp_outflow,
        )

    def advance(self, x: np.ndarray, u: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Apply one conservation step to a single state or a batch of states.

        Args:
            x: Densities, shape (n,) or (n, K)
            u: Inputs, shape (m,) or (m, K); a single input broadcasts over the batch
            beta: Off-ramp split ratios, shape (N_O,)

        Returns:
            Next densities with the shape of ``x``

        Raises:
            ModelError: If the update leaves [0, rho_m] by more than round-off
        """
        xs, single = _as_columns(x, self.n_states, "state")
        us, _ = _as_columns(u, self.n_inputs, "input")
        if us.shape[1] not in (1, xs.shape[1]):
            raise ModelError(f"{us.shape[1]} input columns do not match {xs.shape[1]} states")
        nxt = self.advance_columns(xs, us, beta)
        return nxt[:, 0] if single else nxt

    def advance_columns(self, xs: np.ndarray, us: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Step (n, K) states with (m, K) or (m, 1) inputs; shapes are not checked."""
        flows = self.flows(xs, us, beta)
        ratio = self.topo.ratio
        n_sec = self.topo.n_sections
        q = flows.interface

        nxt = np.empty_like(xs)
        nxt[:n_sec] = xs[:n_sec] + ratio * (q[:-1] - q[1:])
        nxt[self._off] -= ratio * flows.offramp
        nxt[self._on] += ratio * flows.onramp
        nxt[self._hat] = xs[self._hat] + ratio * (flows.onramp_inflow - flows.onramp)
        nxt[self._check] = xs[self._check] + ratio * (flows.offramp - flows.offramp_outflow)
        return self._clamp(nxt)

    def propagate(self, x: np.ndarray, inp: ExogenousInput) -> np.ndarray:
        """Step map x -> x+ for the estimators."""
        return self.advance(x, inp.as_vector(), inp.beta)

    def step(self, state: StateLike, inp: ExogenousInput) -> TrafficState:
        """Advance a single traffic state by one time step."""
        x = state.densities if isinstance(state, TrafficState) else np.asarray(state, dtype=float)
        return TrafficState(self.propagate(x, inp))

    def _clamp(self, x: np.ndarray) -> np.ndarray:
        rho_m = self.fd.rho_m
        tol = CLAMP_TOLERANCE * rho_m
        low, high = float(x.min()), float(x.max())
        if low < -tol or high > rho_m + tol:
            raise ModelError(
                f"Density update left [0, {rho_m}] beyond round-off (min={low:.3e}, max={high:.3e})"
            )
        return np.clip(x, 0.0, rho_m)


def _single_flows(
    state: StateLike,
    inp: Optional[ExogenousInput],
    topo: HighwayTopology,
    fd: FundamentalDiagram,
) -> CellFlows:
    model = ActmModel(topo, fd)
    x = state.densities if isinstance(state, TrafficState) else np.asarray(state, dtype=float)
    if len(x) != topo.n_states:
        raise ModelError(f"State has {len(x)} entries, expected {topo.n_states}")
    if inp is None:
        # The on-ramp merge does not depend on the exogenous inputs
        u, beta = np.zeros(topo.n_inputs), np.zeros(topo.n_offramps)
    else:
        u, beta = inp.as_vector(), inp.beta
    return model.flows(x[:, None], u[:, None], beta)


def demand(
    i: int, state: StateLike, inp: ExogenousInput, topo: HighwayTopology, fd: FundamentalDiagram
) -> float:
    """Flow section ``i`` can send downstream (1-based)."""
    topo.check_section(i)
    return float(_single_flows(state, inp, topo, fd).demand[i - 1, 0])


def supply(
    i: int, state: StateLike, inp: ExogenousInput, topo: HighwayTopology, fd: FundamentalDiagram
) -> float:
    """Flow section ``i`` can accept from upstream, net of its on-ramp merge."""
    topo.check_section(i)
    return float(_single_flows(state, inp, topo, fd).supply[i - 1, 0])


def onramp_flow(i: int, state: StateLike, topo: HighwayTopology, fd: FundamentalDiagram) -> float:
    """Flow merging from the on-ramp of section ``i`` into the mainline."""
    slot = topo.onramp_slot(i)
    return float(_single_flows(state, None, topo, fd).onramp[slot, 0])


def interface_flow(
    i: int, state: StateLike, inp: ExogenousInput, topo: HighwayTopology, fd: FundamentalDiagram
) -> float:
    """Flow across boundary ``i`` (0 is the upstream end, N the downstream end)."""
    if not 0 <= i <= topo.n_sections:
        raise ModelError(f"Boundary index {i} outside 0..{topo.n_sections}")
    return float(_single_flows(state, inp, topo, fd).interface[i, 0])


def ramp_boundary_flows(
    i: int, state: StateLike, inp: ExogenousInput, topo: HighwayTopology, fd: FundamentalDiagram
) -> tuple[Optional[float], Optional[float]]:
    """Outer ramp flows of section ``i``: (into the on-ramp, out of the off-ramp).

    Each entry is None when the section has no ramp of that kind.
    """
    has_on = i in topo.onramp_sections
    has_off = i in topo.offramp_sections
    if not (has_on or has_off):
        raise ModelError(f"Section {i} has neither an on-ramp nor an off-ramp")
    flows = _single_flows(state, inp, topo, fd)
    r_hat = float(flows.onramp_inflow[topo.onramp_slot(i), 0]) if has_on else None
    s_check = float(flows.offramp_outflow[topo.offramp_slot(i), 0]) if has_off else None
    return r_hat, s_check


def step(
    state: StateLike, inp: ExogenousInput, topo: HighwayTopology, fd: FundamentalDiagram
) -> TrafficState:
    """One ACTM step of the whole highway."""
    return ActmModel(topo, fd).step(state, inp)


def free_flow_matrix(
    topo: HighwayTopology, fd: FundamentalDiagram, beta: Optional[Sequence[float]] = None
) -> np.ndarray:
    """Jacobian of the step map when every cell and ramp is in free flow.

    Sections and on-ramps discharge at v_f; an off-ramp section sends (1 - beta) v_f rho
    downstream and beta v_f rho to its off-ramp.
    """
    beta_arr = np.zeros(topo.n_offramps) if beta is None else np.asarray(beta, dtype=float)
    if len(beta_arr) != topo.n_offramps:
        raise ModelError(f"Expected {topo.n_offramps} split ratios, got {len(beta_arr)}")

    c = topo.courant(fd)
    n = topo.n_states
    a = (1.0 - c) * np.eye(n)

    passing = np.ones(topo.n_sections)
    for slot, section in enumerate(topo.offramp_sections):
        passing[section - 1] = 1.0 - beta_arr[slot]
    for i in range(1, topo.n_sections):
        a[i, i - 1] = c * passing[i - 1]

    for section in topo.onramp_sections:
        a[section - 1, topo.onramp_state(section)] = c
    for slot, section in enumerate(topo.offramp_sections):
        a[topo.offramp_state(section), section - 1] = c * beta_arr[slot]
    return a


@dataclass
class SystemMatrices:
    """State-space split x+ = A x + f(x, u) with measurement y = C x + D_w w."""

    A: np.ndarray
    B_w: np.ndarray
    D_w: np.ndarray
    C: np.ndarray
    model: ActmModel
    linear_part: LinearPart = LinearPart.IDENTITY
    sensors: tuple[int, ...] = field(default_factory=tuple)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    @property
    def upper_bound(self) -> float:
        """Jam density; estimates are kept inside [0, upper_bound]."""
        return self.model.fd.rho_m

    def propagate(self, x: np.ndarray, inp: ExogenousInput) -> np.ndarray:
        """Full step map A x + f(x, u)."""
        return self.model.propagate(x, inp)

    def advance_columns(self, x: np.ndarray, u: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Full step map on (n, K) columns with raw input vectors, unchecked."""
        return self.model.advance_columns(x, u, beta)

    def nonlinearity(self, x: np.ndarray, inp: ExogenousInput) -> np.ndarray:
        """f(x, u) = step(x, u) - A x."""
        return self.model.propagate(x, inp) - self.A @ x

    def nonlinearity_batch(self, x: np.ndarray, u: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """f evaluated column-wise on (n, K) states and (m, K) inputs."""
        return self.model.advance(x, u, beta) - self.A @ x


def measurement_matrix(sensors: Sequence[int], n: int) -> np.ndarray:
    """Selection matrix with one row per 1-based sensor index."""
    if not sensors:
        raise ModelError("At least one sensor is required")
    if len(set(sensors)) != len(sensors):
        raise ModelError(f"Duplicate sensor indices: {list(sensors)}")
    bad = [s for s in sensors if not 1 <= s <= n]
    if bad:
        raise ModelError(f"Sensor indices outside 1..{n}: {bad}")
    c = np.zeros((len(sensors), n))
    c[np.arange(len(sensors)), np.asarray(sensors) - 1] = 1.0
    return c


def assemble_system(
    topo: HighwayTopology,
    fd: FundamentalDiagram,
    disturbance: Optional[DisturbanceConfig] = None,
    linear_part: LinearPart = LinearPart.IDENTITY,
    beta: Optional[Sequence[float]] = None,
) -> SystemMatrices:
    """Build (A, B_w, D_w, C) and the evaluable nonlinearity for a highway.

    Args:
        topo: Topology carrying the sensor placement
        fd: Fundamental diagram
        disturbance: Disturbance channels (defaults to measurement noise only)
        linear_part: Which linear part to split off the step map
        beta: Split ratios; needed for the free-flow split and checked for zeros

    Returns:
        SystemMatrices
    """
    model = ActmModel(topo, fd)
    n = topo.n_states
    c = measurement_matrix(topo.sensors, n)

    if beta is not None and np.any(np.asarray(beta, dtype=float) == 0.0):
        zero = [s for s, b in zip(topo.offramp_sections, beta) if b == 0.0]
        warnings.warn(
            f"Off-ramp sections {zero} have split ratio 0; their off-ramp flow is always zero",
            DegenerateSplitWarning,
            stacklevel=2,
        )

    match linear_part:
        case LinearPart.FREE_FLOW:
            a = free_flow_matrix(topo, fd, beta)
        case _:
            a = np.eye(n)

    b_w, d_w = (disturbance or DisturbanceConfig()).matrices(n, c.shape[0])
    logger.debug(
        "Assembled system: n=%d, p=%d, q=%d, linear part %s", n, c.shape[0], b_w.shape[1],
        linear_part.value,
    )
    return SystemMatrices(
        A=a,
        B_w=b_w,
        D_w=d_w,
        C=c,
        model=model,
        linear_part=linear_part,
        sensors=tuple(topo.sensors),
    )
