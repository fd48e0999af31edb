"""Highway model types: fundamental diagram, topology, state and exogenous inputs.

Units are SI throughout: metres, seconds, vehicles per metre and vehicles per second.
Section and ramp indices are 1-based, matching the way scenario files name them;
positions inside state vectors are 0-based.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from trafficobs_core.errors import ModelError

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class FundamentalDiagram:
    """Triangular flux map."""

    v_f: float  # free-flow speed (m/s)
    w_c: float  # congestion wave speed (m/s)
    rho_c: float  # critical density (veh/m)
    rho_m: float  # jam density (veh/m)
    tol_fd: float = 0.02  # relative continuity tolerance

    def __post_init__(self) -> None:
        if self.v_f <= 0 or self.w_c <= 0:
            raise ModelError(f"Wave speeds must be positive (v_f={self.v_f}, w_c={self.w_c})")
        if not 0 < self.rho_c < self.rho_m:
            raise ModelError(
                f"Densities must satisfy 0 < rho_c < rho_m (rho_c={self.rho_c}, rho_m={self.rho_m})"
            )
        mismatch = abs(self.capacity - self.w_c * (self.rho_m - self.rho_c))
        if mismatch > self.tol_fd * self.capacity:
            raise ModelError(
                f"Fundamental diagram is discontinuous at rho_c: |v_f*rho_c - w_c*(rho_m - rho_c)| "
                f"= {mismatch:.6g} exceeds {self.tol_fd:.1%} of capacity"
            )

    @property
    def capacity(self) -> float:
        """Maximum flow v_f * rho_c (veh/s)."""
        return self.v_f * self.rho_c

    def flux(self, rho: ArrayLike) -> Union[float, np.ndarray]:
        """Evaluate the triangular flux map at one or many densities."""
        values = np.clip(
            np.minimum(self.v_f * np.asarray(rho, dtype=float),
                       self.w_c * (self.rho_m - np.asarray(rho, dtype=float))),
            0.0,
            None,
        )
        return float(values) if values.ndim == 0 else values


def _as_index_tuple(values: Sequence[int], name: str) -> tuple[int, ...]:
    indices = tuple(int(v) for v in values)
    if len(set(indices)) != len(indices):
        raise ModelError(f"{name} contains duplicate indices: {list(values)}")
    return tuple(sorted(indices))


@dataclass(frozen=True)
class HighwayTopology:
    """A stretched highway split into equal cells with on- and off-ramps."""

    n_sections: int
    onramp_sections: tuple[int, ...] = ()
    offramp_sections: tuple[int, ...] = ()
    cell_length: float = 200.0  # l (m)
    time_step: float = 1.0  # T (s)
    xi: Optional[tuple[float, ...]] = None  # one per on-ramp, defaults to w_c
    sensors: tuple[int, ...] = ()  # 1-based state indices

    def __post_init__(self) -> None:
        if self.n_sections < 1:
            raise ModelError("A highway needs at least one section")
        if self.cell_length <= 0 or self.time_step <= 0:
            raise ModelError("Cell length and time step must be positive")

        onramps = _as_index_tuple(self.onramp_sections, "onramp_sections")
        offramps = _as_index_tuple(self.offramp_sections, "offramp_sections")
        for name, indices in (("onramp_sections", onramps), ("offramp_sections", offramps)):
            bad = [i for i in indices if not 1 <= i <= self.n_sections]
            if bad:
                raise ModelError(f"{name} outside 1..{self.n_sections}: {bad}")

        xi = None
        if self.xi is not None:
            xi = tuple(float(v) for v in self.xi)
            if len(xi) != len(onramps):
                raise ModelError(
                    f"Expected {len(onramps)} occupancy parameters (one per on-ramp), got {len(xi)}"
                )

        object.__setattr__(self, "onramp_sections", onramps)
        object.__setattr__(self, "offramp_sections", offramps)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "sensors", tuple(int(s) for s in self.sensors))

    @property
    def n_onramps(self) -> int:
        return len(self.onramp_sections)

    @property
    def n_offramps(self) -> int:
        return len(self.offramp_sections)

    @property
    def n_states(self) -> int:
        """State dimension n = N + N_I + N_O."""
        return self.n_sections + self.n_onramps + self.n_offramps

    @property
    def n_inputs(self) -> int:
        """Input dimension m = 2 + N_I + N_O."""
        return 2 + self.n_onramps + self.n_offramps

    @property
    def ratio(self) -> float:
        """T / l, the conservation-law step factor."""
        return self.time_step / self.cell_length

    def courant(self, fd: FundamentalDiagram) -> float:
        """CFL number v_f * T / l."""
        return fd.v_f * self.ratio

    def resolve_xi(self, fd: FundamentalDiagram) -> np.ndarray:
        """Occupancy parameters with the default xi_i = w_c filled in."""
        if self.xi is None:
            return np.full(self.n_onramps, fd.w_c)
        return np.asarray(self.xi, dtype=float)

    def validate(self, fd: FundamentalDiagram) -> None:
        """Check the invariants that depend on the fundamental diagram."""
        cfl = self.courant(fd)
        if cfl > 1.0:
            raise ModelError(f"CFL condition violated: v_f*T/l = {cfl:.6g} > 1")
        xi = self.resolve_xi(fd)
        if np.any(xi < 0) or np.any(xi > fd.w_c):
            raise ModelError(f"Occupancy parameters must lie in [0, w_c={fd.w_c}]: {xi.tolist()}")

    def onramp_slot(self, section: int) -> int:
        """Position of the on-ramp attached to ``section`` in the on-ramp list."""
        try:
            return self.onramp_sections.index(section)
        except ValueError:
            raise ModelError(f"Section {section} has no on-ramp") from None

    def offramp_slot(self, section: int) -> int:
        """Position of the off-ramp attached to ``section`` in the off-ramp list."""
        try:
            return self.offramp_sections.index(section)
        except ValueError:
            raise ModelError(f"Section {section} has no off-ramp") from None

    def onramp_state(self, section: int) -> int:
        """0-based state position of the on-ramp attached to ``section``."""
        return self.n_sections + self.onramp_slot(section)

    def offramp_state(self, section: int) -> int:
        """0-based state position of the off-ramp attached to ``section``."""
        return self.n_sections + self.n_onramps + self.offramp_slot(section)

    def check_section(self, section: int) -> None:
        if not 1 <= section <= self.n_sections:
            raise ModelError(f"Section index {section} outside 1..{self.n_sections}")

    def state_labels(self) -> list[str]:
        """Column labels for state vectors, in state order."""
        return (
            [f"section_{i}" for i in range(1, self.n_sections + 1)]
            + [f"onramp_{i}" for i in self.onramp_sections]
            + [f"offramp_{i}" for i in self.offramp_sections]
        )

    def input_labels(self) -> list[str]:
        """Column labels for input vectors, in input order."""
        return (
            ["f_in", "f_out"]
            + [f"onramp_demand_{i}" for i in self.onramp_sections]
            + [f"offramp_capacity_{i}" for i in self.offramp_sections]
        )


@dataclass(frozen=True, eq=False)
class TrafficState:
    """Stacked density vector [sections | on-ramps | off-ramps]."""

    densities: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.densities, dtype=float)
        if values.ndim != 1:
            raise ModelError("A traffic state is a one-dimensional density vector")
        values.setflags(write=False)
        object.__setattr__(self, "densities", values)

    def __len__(self) -> int:
        return len(self.densities)

    def sections(self, topo: HighwayTopology) -> np.ndarray:
        return self.densities[: topo.n_sections]

    def onramps(self, topo: HighwayTopology) -> np.ndarray:
        return self.densities[topo.n_sections: topo.n_sections + topo.n_onramps]

    def offramps(self, topo: HighwayTopology) -> np.ndarray:
        return self.densities[topo.n_sections + topo.n_onramps:]

    def validate(self, topo: HighwayTopology, fd: FundamentalDiagram) -> None:
        if len(self.densities) != topo.n_states:
            raise ModelError(f"State has {len(self.densities)} entries, expected {topo.n_states}")
        if np.any(self.densities < 0) or np.any(self.densities > fd.rho_m):
            raise ModelError(f"Densities must lie in [0, {fd.rho_m}]")

    @classmethod
    def zeros(cls, topo: HighwayTopology) -> "TrafficState":
        return cls(np.zeros(topo.n_states))


def _float_array(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ExogenousInput:
    """Boundary and ramp flows for one step, plus the off-ramp split ratios."""

    f_in: float  # mainline upstream demand (veh/s)
    f_out: float  # mainline downstream supply (veh/s)
    f_hat: np.ndarray = field(default_factory=lambda: np.zeros(0))  # on-ramp demands
    f_check: np.ndarray = field(default_factory=lambda: np.zeros(0))  # off-ramp capacities
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))  # off-ramp split ratios

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_in", float(self.f_in))
        object.__setattr__(self, "f_out", float(self.f_out))
        object.__setattr__(self, "f_hat", _float_array(self.f_hat))
        object.__setattr__(self, "f_check", _float_array(self.f_check))
        object.__setattr__(self, "beta", _float_array(self.beta))

    def as_vector(self) -> np.ndarray:
        """Input vector u = [f_in, f_out, f_hat..., f_check...]."""
        return np.concatenate(([self.f_in, self.f_out], self.f_hat, self.f_check))

    @classmethod
    def from_vector(cls, u: ArrayLike, topo: HighwayTopology, beta: ArrayLike) -> "ExogenousInput":
        u = np.asarray(u, dtype=float).reshape(-1)
        if len(u) != topo.n_inputs:
            raise ModelError(f"Input vector has {len(u)} entries, expected {topo.n_inputs}")
        split = 2 + topo.n_onramps
        return cls(f_in=u[0], f_out=u[1], f_hat=u[2:split], f_check=u[split:], beta=beta)

    def validate(self, topo: HighwayTopology, fd: FundamentalDiagram) -> None:
        if len(self.f_hat) != topo.n_onramps:
            raise ModelError(f"Expected {topo.n_onramps} on-ramp demands, got {len(self.f_hat)}")
        if len(self.f_check) != topo.n_offramps or len(self.beta) != topo.n_offramps:
            raise ModelError(
                f"Expected {topo.n_offramps} off-ramp capacities and split ratios, "
                f"got {len(self.f_check)} and {len(self.beta)}"
            )
        flows = self.as_vector()
        if np.any(flows < 0) or np.any(flows > fd.capacity * (1 + 1e-12)):
            raise ModelError(f"Input flows must lie in [0, {fd.capacity:.6g}]")
        if np.any(self.beta < 0) or np.any(self.beta >= 1):
            raise ModelError("Split ratios must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class InputSchedule:
    """Per-step input vectors for a whole run, with constant split ratios."""

    u: np.ndarray  # (k_f, m)
    beta: np.ndarray  # (N_O,)
    topo: HighwayTopology

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float)
        if u.ndim != 2 or u.shape[1] != self.topo.n_inputs:
            raise ModelError(f"Input schedule must have shape (k_f, {self.topo.n_inputs})")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "beta", _float_array(self.beta))

    def __len__(self) -> int:
        return self.u.shape[0]

    def __getitem__(self, k: int) -> ExogenousInput:
        return ExogenousInput.from_vector(self.u[k], self.topo, self.beta)

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]
