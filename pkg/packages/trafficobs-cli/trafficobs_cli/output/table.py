"""Table output formatting."""

from typing import Any, Optional

from rich.console import Console
from rich.table import Table as RichTable

console = Console()


def fmt(value: Any, digits: int = 4) -> str:
    """Compact rendering for table cells; None becomes a dash."""
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def print_table(headers: list[str], rows: list[list[str]], title: Optional[str] = None) -> None:
    """
    Print data as a formatted table.

    Args:
        headers: Column headers
        rows: Table rows
        title: Optional table title
    """
    table = RichTable(title=title)
    for header in headers:
        table.add_column(header)

    for row in rows:
        table.add_row(*row)

    console.print(table)


def print_synthesis(result: Any) -> None:
    """Print the scalars of a synthesis result."""
    rows = [
        ["Status", result.status],
        ["Solver", result.solver],
        ["Split", result.linear_part],
        ["alpha", fmt(result.alpha)],
        ["gamma", fmt(result.gamma)],
        ["Sampled gamma", fmt(result.gamma_hat)],
        ["mu", fmt(result.mu)],
        ["mu0", fmt(result.mu0)],
        ["mu1", fmt(result.mu1)],
        ["mu2", fmt(result.mu2)],
        ["epsilon", fmt(result.epsilon)],
        ["cond(P)", fmt(result.condition_number, 3)],
        ["Solve time", f"{result.solve_time:.2f}s"],
    ]
    rows += [[f"Residual {name}", fmt(value, 3)] for name, value in result.residuals.items()]
    print_table(["Quantity", "Value"], rows, title="Observer gain synthesis")

    if result.sweep:
        print_table(
            ["alpha", "Status", "mu", "Solve time"],
            [[fmt(r.alpha), r.status, fmt(r.mu), f"{r.solve_time:.2f}s"] for r in result.sweep],
            title="Alpha sweep",
        )


def print_report(report: Any) -> None:
    """Print the observer versus unscented-filter summary of one experiment."""
    rows = []
    for arm, trace, value in (
        ("observer", report.observer, report.observer_rmse),
        ("ukf", report.ukf, report.ukf_rmse),
    ):
        if arm in report.failures:
            rows.append([arm, "failed", "-", report.failures[arm][:60]])
        elif trace is not None:
            rows.append([arm, fmt(value), f"{report.wall_times.get(arm, 0.0):.3f}s", ""])
    print_table(["Estimator", "RMSE", "Wall time", "Note"], rows,
                title=f"{report.scenario} (seed {report.seed})")

    print_table(
        ["Quantity", "Value"],
        [
            ["mu", fmt(report.mu)],
            ["||w||_Linf", fmt(report.w_linf)],
            ["||v||_Linf", fmt(report.v_linf)],
            ["zeta", fmt(report.zeta)],
            ["Settles below zeta at k", fmt(report.settle_step)],
            ["Digest", report.digest[:16]],
        ],
    )


def print_replications(summary: Any) -> None:
    """Print per-seed RMSE and the aggregate statistics of a replication study."""
    print_table(
        ["Seed", "Observer RMSE", "UKF RMSE", "Observer time", "UKF time"],
        [
            [
                str(r.seed),
                fmt(r.observer_rmse),
                fmt(r.ukf_rmse),
                fmt(r.wall_times.get("observer")),
                fmt(r.wall_times.get("ukf")),
            ]
            for r in summary.reports
        ],
        title="Replications",
    )
    stats = summary.aggregate()
    print_table(
        ["Estimator", "RMSE mean", "RMSE std", "Time mean", "Time std"],
        [
            [arm, fmt(s["rmse_mean"]), fmt(s["rmse_std"]), fmt(s["time_mean"]),
             fmt(s["time_std"])]
            for arm, s in stats.items()
        ],
    )
    console.print(
        f"Observer beats the unscented filter on {summary.observer_wins}/{len(summary.reports)}"
        " seeds"
    )
