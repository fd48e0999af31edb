"""Readers and writers for synthesis reports, traces and experiment reports."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from trafficobs_core.models.results import (
    EstimationTrace,
    ExperimentReport,
    LipschitzEstimate,
    ReplicationSummary,
    SweepRow,
    SynthesisResult,
)

logger = logging.getLogger(__name__)

REPORT_VERSION = 1


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def write_json(data: dict[str, Any], path: Path) -> Path:
    """Write a JSON document, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=_jsonable) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# Synthesis


def synthesis_to_dict(result: SynthesisResult) -> dict[str, Any]:
    """Every scalar of the certificate plus the gain, certificate and sweep table."""
    return {
        "version": REPORT_VERSION,
        "status": result.status,
        "solver": result.solver,
        "solve_time": result.solve_time,
        "alpha": result.alpha,
        "gamma": result.gamma,
        "gamma_hat": result.gamma_hat,
        "bound_certified": result.bound_certified,
        "epsilon": result.epsilon,
        "mu0": result.mu0,
        "mu1": result.mu1,
        "mu2": result.mu2,
        "mu": result.mu,
        "condition_number": result.condition_number,
        "linear_part": result.linear_part,
        "z_scale": result.z_scale,
        "sensors": list(result.sensors),
        "residuals": dict(result.residuals),
        "L": result.L,
        "P": result.P,
        "Y": result.Y,
        "sweep": [
            {"alpha": r.alpha, "status": r.status, "mu": r.mu, "solve_time": r.solve_time}
            for r in result.sweep
        ],
    }


def synthesis_from_dict(data: dict[str, Any]) -> SynthesisResult:
    return SynthesisResult(
        L=np.asarray(data["L"], dtype=float),
        P=np.asarray(data["P"], dtype=float),
        Y=np.asarray(data["Y"], dtype=float),
        epsilon=float(data["epsilon"]),
        mu0=float(data["mu0"]),
        mu1=float(data["mu1"]),
        mu2=float(data["mu2"]),
        alpha=float(data["alpha"]),
        gamma=float(data["gamma"]),
        status=data.get("status", "optimal"),
        solver=data.get("solver", ""),
        solve_time=float(data.get("solve_time", 0.0)),
        residuals={k: float(v) for k, v in data.get("residuals", {}).items()},
        condition_number=float(data.get("condition_number", 1.0)),
        linear_part=data.get("linear_part", "identity"),
        z_scale=float(data.get("z_scale", 0.0)),
        sensors=tuple(int(s) for s in data.get("sensors", ())),
        sweep=[SweepRow(**row) for row in data.get("sweep", [])],
        gamma_hat=None if data.get("gamma_hat") is None else float(data["gamma_hat"]),
    )


def write_synthesis_report(result: SynthesisResult, path: Path) -> Path:
    """Write a synthesis report (JSON)."""
    logger.info("Writing synthesis report to %s", path)
    return write_json(synthesis_to_dict(result), path)


def read_synthesis_report(path: Path) -> SynthesisResult:
    """
    Read a synthesis report written by write_synthesis_report.

    Raises:
        ValueError: If the file is not a synthesis report
    """
    data = read_json(path)
    missing = {"L", "P", "Y", "mu0", "mu1", "mu2"} - set(data)
    if missing:
        raise ValueError(f"{path} is not a synthesis report (missing {sorted(missing)})")
    return synthesis_from_dict(data)


# Traces


def trace_to_dict(trace: EstimationTrace) -> dict[str, Any]:
    return {
        "estimator": trace.estimator,
        "states": trace.states,
        "estimates": trace.estimates,
        "measurements": trace.measurements,
        "error_norms": trace.error_norms,
        "performance_norms": trace.performance_norms,
        "wall_time": trace.wall_time,
        "clamp_steps": trace.clamp_steps,
        "repairs": trace.repairs,
    }


def trace_from_dict(data: dict[str, Any]) -> EstimationTrace:
    return EstimationTrace(
        estimator=data["estimator"],
        states=np.asarray(data["states"], dtype=float),
        estimates=np.asarray(data["estimates"], dtype=float),
        measurements=np.asarray(data["measurements"], dtype=float),
        error_norms=np.asarray(data["error_norms"], dtype=float),
        performance_norms=np.asarray(data["performance_norms"], dtype=float),
        wall_time=float(data.get("wall_time", 0.0)),
        clamp_steps=int(data.get("clamp_steps", 0)),
        repairs=int(data.get("repairs", 0)),
    )


def _write_rows(path: Path, header: Sequence[str], rows: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trace_csv(
    trace: EstimationTrace, path: Path, labels: Optional[Sequence[str]] = None
) -> Path:
    """
    Write one estimator trace as CSV.

    Columns: k, true densities, estimates, ||e||, ||z||.

    Args:
        trace: Estimation trace
        path: Output file
        labels: State labels (defaults to x1..xn)
    """
    n = trace.states.shape[1]
    labels = list(labels) if labels is not None else [f"x{i + 1}" for i in range(n)]
    header = (
        ["k"]
        + [f"true_{label}" for label in labels]
        + [f"est_{label}" for label in labels]
        + ["error_norm", "performance_norm"]
    )
    rows = (
        [k, *trace.states[k], *trace.estimates[k], trace.error_norms[k],
         trace.performance_norms[k]]
        for k in range(len(trace))
    )
    return _write_rows(path, header, rows)


def write_density_csv(
    states: np.ndarray, path: Path, labels: Optional[Sequence[str]] = None
) -> Path:
    """Write a density trajectory (k_f, n) as CSV with a step column."""
    labels = list(labels) if labels is not None else [
        f"x{i + 1}" for i in range(states.shape[1])
    ]
    return _write_rows(path, ["k", *labels], ([k, *row] for k, row in enumerate(states)))


# Experiment reports


def report_to_dict(report: ExperimentReport, include_traces: bool = True) -> dict[str, Any]:
    """Summary of an experiment report; traces are embedded when asked for."""
    data: dict[str, Any] = {
        "version": REPORT_VERSION,
        "scenario": report.scenario,
        "seed": report.seed,
        "digest": report.digest,
        "mu": report.mu,
        "w_linf": report.w_linf,
        "v_linf": report.v_linf,
        "zeta": report.zeta,
        "settle_step": report.settle_step,
        "observer_rmse": report.observer_rmse,
        "ukf_rmse": report.ukf_rmse,
        "observer_rmse_components": list(report.observer_rmse_components),
        "ukf_rmse_components": list(report.ukf_rmse_components),
        "failures": dict(report.failures),
        "wall_times": dict(report.wall_times),
        "metadata": dict(report.metadata),
    }
    if include_traces:
        data["traces"] = {
            name: trace_to_dict(trace)
            for name, trace in (("observer", report.observer), ("ukf", report.ukf))
            if trace is not None
        }
    return data


def report_from_dict(data: dict[str, Any]) -> ExperimentReport:
    traces = {name: trace_from_dict(t) for name, t in data.get("traces", {}).items()}
    return ExperimentReport(
        scenario=data["scenario"],
        seed=int(data["seed"]),
        digest=data["digest"],
        observer=traces.get("observer"),
        ukf=traces.get("ukf"),
        mu=float(data["mu"]),
        w_linf=float(data["w_linf"]),
        v_linf=float(data["v_linf"]),
        settle_step=data.get("settle_step"),
        observer_rmse_components=[float(v) for v in data.get("observer_rmse_components", [])],
        ukf_rmse_components=[float(v) for v in data.get("ukf_rmse_components", [])],
        failures=dict(data.get("failures", {})),
        wall_times={k: float(v) for k, v in data.get("wall_times", {}).items()},
        metadata=dict(data.get("metadata", {})),
    )


def write_experiment_report(
    report: ExperimentReport, path: Path, include_traces: bool = True
) -> Path:
    """Write an experiment report (JSON)."""
    logger.info("Writing experiment report to %s", path)
    return write_json(report_to_dict(report, include_traces), path)


def read_experiment_report(path: Path) -> ExperimentReport:
    """Read an experiment report written by write_experiment_report."""
    return report_from_dict(read_json(path))


def write_replication_summary(summary: ReplicationSummary, path: Path) -> Path:
    """Per-seed summaries plus aggregate statistics (JSON)."""
    data = {
        "version": REPORT_VERSION,
        "seeds": summary.seeds,
        "observer_wins": summary.observer_wins,
        "aggregate": summary.aggregate(),
        "reports": [report_to_dict(r, include_traces=False) for r in summary.reports],
    }
    return write_json(data, path)


def write_lipschitz_report(estimate: LipschitzEstimate, path: Path) -> Path:
    data = {
        "version": REPORT_VERSION,
        "gamma_hat": estimate.gamma_hat,
        "samples": estimate.samples,
        "skipped": estimate.skipped,
        "seed": estimate.seed,
        "elapsed": estimate.elapsed,
        "linear_part": estimate.linear_part,
        "asserted": estimate.asserted,
        "within_asserted": estimate.within_asserted,
    }
    return write_json(data, path)


# Figure series


def write_figure_series(
    report: ExperimentReport, out_dir: Path, labels: Optional[Sequence[str]] = None
) -> list[Path]:
    """
    Write the plot-ready CSV series of an experiment.

    - performance.csv: k, ||z|| of the observer, zeta
    - densities.csv: k, true densities and both estimates
    - error_norms.csv: k, ||e|| of the observer and of the unscented filter
    - rmse_components.csv: per-state RMSE of each estimator

    Arms that failed are left out of the columns.

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    arms = [(name, t) for name, t in (("observer", report.observer), ("ukf", report.ukf))
            if t is not None]
    if not arms:
        return []
    reference = arms[0][1]
    horizon = len(reference)
    n = reference.states.shape[1]
    labels = list(labels) if labels is not None else [f"x{i + 1}" for i in range(n)]
    written = []

    if report.observer is not None:
        observer = report.observer
        written.append(_write_rows(
            out_dir / "performance.csv",
            ["k", "z_norm_observer", "zeta"],
            ([k, observer.performance_norms[k], report.zeta] for k in range(horizon)),
        ))

    header = ["k", *[f"true_{label}" for label in labels]]
    for name, _ in arms:
        header += [f"{name}_{label}" for label in labels]
    written.append(_write_rows(
        out_dir / "densities.csv",
        header,
        ([k, *reference.states[k], *np.concatenate([t.estimates[k] for _, t in arms])]
         for k in range(horizon)),
    ))

    written.append(_write_rows(
        out_dir / "error_norms.csv",
        ["k", *[f"error_norm_{name}" for name, _ in arms]],
        ([k, *[t.error_norms[k] for _, t in arms]] for k in range(horizon)),
    ))

    components = {
        "observer": report.observer_rmse_components,
        "ukf": report.ukf_rmse_components,
    }
    names = [name for name, _ in arms if components[name]]
    written.append(_write_rows(
        out_dir / "rmse_components.csv",
        ["state", *[f"rmse_{name}" for name in names]],
        ([labels[i], *[components[name][i] for name in names]] for i in range(n)),
    ))
    return written
