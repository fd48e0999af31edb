"""Simulate command."""

from typing import Optional

import typer

from trafficobs_core.io.reports import write_density_csv
from trafficobs_core.pipeline.experiment import simulate
from trafficobs_core.processors.harness import disturbance_linf
from trafficobs_cli.commands.common import (
    Overrides,
    exit_on_error,
    load_scenario_or_exit,
    prepare_out_dir,
)
from trafficobs_cli.output.json import write_json
from trafficobs_cli.output.table import fmt, print_table


def simulate_command(scenario_source: str, out: Optional[str], overrides: Overrides) -> None:
    """
    Simulate the true densities and the noisy measurement stream.

    Writes densities.csv, measurements.csv and simulation.json.

    Example:
        trafficobs simulate --scenario benchmark-10 --seed 3 -o ./runs/sim
    """
    scenario = load_scenario_or_exit(scenario_source, overrides)
    out_dir = prepare_out_dir(out)

    with exit_on_error():
        experiment = simulate(scenario)
        plant = experiment.plant
        assert plant is not None

        labels = scenario.topo.state_labels()
        sensor_labels = [labels[s - 1] for s in scenario.topo.sensors]
        write_density_csv(plant.states, out_dir / "densities.csv", labels)
        write_density_csv(plant.measurements, out_dir / "measurements.csv", sensor_labels)

        summary = {
            "scenario": scenario.name,
            "seed": scenario.seed,
            "horizon": plant.horizon,
            "n_states": plant.states.shape[1],
            "n_outputs": plant.measurements.shape[1],
            "digest": plant.digest,
            "v_linf": plant.noise_linf,
            "v_bound": scenario.noise.measurement_bound(plant.measurements.shape[1]),
            "w_linf": disturbance_linf(plant, scenario.noise),
            "courant": scenario.topo.courant(scenario.fd),
        }
        write_json(summary, out_dir / "simulation.json")

    print_table(
        ["Quantity", "Value"],
        [[key, fmt(value)] for key, value in summary.items()],
        title="Plant simulation",
    )
    typer.echo(f"Wrote densities.csv, measurements.csv and simulation.json to {out_dir}")
