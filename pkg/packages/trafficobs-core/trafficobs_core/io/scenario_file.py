"""Scenario file schema, loading and overrides."""

import json
import logging
from importlib import resources
from pathlib import Path
from typing import Annotated, Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from trafficobs_core.errors import ModelError, ScenarioError
from trafficobs_core.models.config import (
    InputConfig,
    LinearPart,
    NoiseConfig,
    ObserverConfig,
    SolverName,
    SynthesisConfig,
    UkfConfig,
)
from trafficobs_core.models.highway import FundamentalDiagram, HighwayTopology
from trafficobs_core.models.scenario import Scenario

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO = "benchmark-10"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FundamentalDiagramSchema(_Section):
    """Triangular fundamental diagram (SI units)."""

    v_f: float = Field(..., gt=0, description="Free-flow speed (m/s)")
    w_c: float = Field(..., gt=0, description="Congestion wave speed (m/s)")
    rho_c: float = Field(..., gt=0, description="Critical density (veh/m)")
    rho_m: float = Field(..., gt=0, description="Jam density (veh/m)")
    tol_fd: float = Field(0.02, ge=0, description="Relative continuity tolerance")


class TopologySchema(_Section):
    """Highway layout."""

    sections: int = Field(..., ge=1, description="Number of highway sections N")
    onramps: list[int] = Field(default_factory=list, description="Sections with an on-ramp")
    offramps: list[int] = Field(default_factory=list, description="Sections with an off-ramp")
    cell_length: float = Field(200.0, gt=0, description="Cell length l (m)")
    time_step: float = Field(1.0, gt=0, description="Time step T (s)")
    xi: Optional[list[float]] = Field(None, description="Occupancy parameter per on-ramp")


class InputsSchema(_Section):
    hold_steps: int = Field(60, ge=1, description="Steps between random redraws")
    split_ratio: float = Field(0.1, ge=0, lt=1, description="Off-ramp split ratio")


class NoiseSchema(_Section):
    q_proc: float = Field(0.0, ge=0, description="Process noise variance")
    r_meas: float = Field(1e-3, ge=0, description="Measurement noise variance")
    truncation: float = Field(3.0, gt=0, description="Truncation in standard deviations")


class SynthesisSchema(_Section):
    alpha: float = Field(0.05, gt=0, lt=1)
    gamma: float = Field(0.5, ge=0, description="Lipschitz level used by the LMI")
    mu1: float = Field(1e4, gt=0)
    z_scale: float = Field(0.1, ge=0, description="Z = z_scale * I")
    linear_part: LinearPart = LinearPart.IDENTITY
    solver: SolverName = SolverName.CLARABEL
    alpha_grid: list[Annotated[float, Field(gt=0, lt=1)]] = Field(default_factory=list)
    workers: int = Field(1, ge=1, description="Concurrent grid points in an alpha sweep")
    lipschitz_samples: int = Field(
        20_000, ge=0, description="Pairs sampled to check gamma after synthesis; 0 skips"
    )


class UkfSchema(_Section):
    alpha: float = Field(0.01, gt=0)
    beta: float = 2.0
    kappa: float = -4.0
    q: float = Field(1e-3, ge=0, description="Q = q * I")
    r: float = Field(1e-3, gt=0, description="R = r * I")
    p0: float = Field(1e-4, gt=0, description="P_0 = p0 * I")


class ObserverSchema(_Section):
    initial_density: Optional[float] = Field(None, ge=0, description="Default rho_m / 2")


class ScenarioFile(_Section):
    """Top-level scenario document."""

    name: str
    description: str = ""
    fundamental_diagram: FundamentalDiagramSchema
    topology: TopologySchema
    sensors: list[int] = Field(..., min_length=1, description="1-based state indices")
    horizon: int = Field(3000, ge=1, description="Steps k_f")
    seed: int = Field(0, ge=0)
    inputs: InputsSchema = Field(default_factory=InputsSchema)
    noise: NoiseSchema = Field(default_factory=NoiseSchema)
    synthesis: SynthesisSchema = Field(default_factory=SynthesisSchema)
    ukf: UkfSchema = Field(default_factory=UkfSchema)
    observer: ObserverSchema = Field(default_factory=ObserverSchema)

    def to_scenario(self) -> Scenario:
        """Build the domain scenario; domain invariants raise ScenarioError."""
        fd_doc, topo_doc = self.fundamental_diagram, self.topology
        try:
            fd = FundamentalDiagram(**fd_doc.model_dump())
            topo = HighwayTopology(
                n_sections=topo_doc.sections,
                onramp_sections=tuple(topo_doc.onramps),
                offramp_sections=tuple(topo_doc.offramps),
                cell_length=topo_doc.cell_length,
                time_step=topo_doc.time_step,
                xi=tuple(topo_doc.xi) if topo_doc.xi is not None else None,
                sensors=tuple(self.sensors),
            )
            topo.validate(fd)
        except ModelError as e:
            raise ScenarioError(f"Scenario '{self.name}': {e}") from e

        bad = [s for s in self.sensors if not 1 <= s <= topo.n_states]
        if bad or len(set(self.sensors)) != len(self.sensors):
            raise ScenarioError(
                f"Scenario '{self.name}': sensors must be distinct indices in 1..{topo.n_states}"
            )

        return Scenario(
            name=self.name,
            description=self.description,
            topo=topo,
            fd=fd,
            horizon=self.horizon,
            seed=self.seed,
            inputs=InputConfig(**self.inputs.model_dump()),
            noise=NoiseConfig(**self.noise.model_dump()),
            synthesis=SynthesisConfig(**self.synthesis.model_dump()),
            ukf=UkfConfig(**self.ukf.model_dump()),
            observer=ObserverConfig(**self.observer.model_dump()),
        )


# CLI override name -> (section, key); None section means top level
OVERRIDES: dict[str, tuple[Optional[str], str]] = {
    "seed": (None, "seed"),
    "horizon": (None, "horizon"),
    "alpha": ("synthesis", "alpha"),
    "gamma": ("synthesis", "gamma"),
    "mu1": ("synthesis", "mu1"),
    "noise_r": ("noise", "r_meas"),
    "solver": ("synthesis", "solver"),
    "workers": ("synthesis", "workers"),
}


def apply_overrides(document: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Return a copy of a raw scenario document with overrides applied.

    None values are ignored; unknown override names raise ScenarioError.
    """
    updated = json.loads(json.dumps(document))
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in OVERRIDES:
            raise ScenarioError(f"Unknown override '{key}'")
        section, field_name = OVERRIDES[key]
        target = updated if section is None else updated.setdefault(section, {})
        target[field_name] = value
    return updated


def parse_scenario(document: dict[str, Any], overrides: Optional[dict[str, Any]] = None) -> Scenario:
    """Validate a raw document (plus overrides) and build the scenario."""
    try:
        parsed = ScenarioFile.model_validate(apply_overrides(document, overrides or {}))
    except ValidationError as e:
        raise ScenarioError(f"Invalid scenario: {e}") from e
    return parsed.to_scenario()


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    folder = resources.files("trafficobs_core") / "scenarios"
    return sorted(
        entry.name.removesuffix(".json")
        for entry in folder.iterdir()
        if entry.name.endswith(".json")
    )


def read_scenario_document(source: Union[str, Path]) -> dict[str, Any]:
    """Read a scenario document from a path or a bundled scenario name."""
    path = Path(source)
    try:
        if path.exists():
            text = path.read_text(encoding="utf-8")
        elif str(source) in bundled_scenarios():
            text = (resources.files("trafficobs_core") / "scenarios" / f"{source}.json").read_text(
                encoding="utf-8"
            )
        else:
            raise ScenarioError(
                f"Scenario '{source}' is neither a file nor a bundled scenario "
                f"({', '.join(bundled_scenarios())})"
            )
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Scenario '{source}' is not valid JSON: {e}") from e
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario '{source}': {e}") from e
    if not isinstance(document, dict):
        raise ScenarioError(f"Scenario '{source}' must be a JSON object")
    return document


def load_scenario(
    source: Union[str, Path] = DEFAULT_SCENARIO, overrides: Optional[dict[str, Any]] = None
) -> Scenario:
    """
    Load a scenario file or bundled scenario.

    Args:
        source: Path to a JSON scenario, or the name of a bundled scenario
        overrides: Optional CLI-style overrides (seed, horizon, alpha, gamma, mu1, noise_r)

    Returns:
        Scenario

    Raises:
        ScenarioError: On unreadable, malformed or invalid input
    """
    scenario = parse_scenario(read_scenario_document(source), overrides)
    logger.debug("Loaded scenario %s from %s", scenario.name, source)
    return scenario
