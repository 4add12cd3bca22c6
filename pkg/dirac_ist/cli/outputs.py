"""Report and timing files written by the commands."""

from pathlib import Path
from typing import List

from pydantic import BaseModel

from dirac_ist.core.instrumentation import RunContext
from dirac_ist.models.schemas import ComparisonReport, StageDiagnostics, TimingReport
from dirac_ist.utils.field_io import write_model

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
TIMINGS_JSON = "timings.json"


def write_report(directory: Path, report: BaseModel, text: str) -> Path:
    """Write ``report.json`` without timings and its text rendering ``report.txt``."""
    directory = Path(directory)
    write_model(directory / REPORT_JSON, report, exclude={"timings"})
    (directory / REPORT_TEXT).write_text(text, encoding="utf-8")
    return directory


def write_timings(directory: Path, context: RunContext, command: str, total_seconds: float) -> Path:
    """Write ``timings.json`` for one invocation."""
    report = TimingReport(
        run_id=context.run_id,
        command=command,
        stages={name: round(seconds, 6) for name, seconds in context.timings.items()},
        total_seconds=round(total_seconds, 6),
    )
    return write_model(Path(directory) / TIMINGS_JSON, report)


def render_diagnostics(diagnostics: StageDiagnostics) -> List[str]:
    lines = [
        f"kernel nodes m          {diagnostics.kernel_m}",
        f"kernel padding          {diagnostics.padding}",
        f"edge magnitude (t=0)    {diagnostics.edge_magnitude_initial:.3e}",
        f"edge magnitude (t)      {diagnostics.edge_magnitude_evolved:.3e}",
    ]
    cond = diagnostics.conditioning
    if cond is not None:
        lines += [
            f"solver                  {cond.method} ({cond.nodes} nodes)",
            f"condition min/med/max   {cond.cond_min:.3e} / {cond.cond_median:.3e} / {cond.cond_max:.3e}",
            f"solve residual max      {cond.residual_max:.3e}",
        ]
    return lines


def render_comparison(report: ComparisonReport) -> str:
    """Human-readable rendering of a comparison report."""
    status = "PASSED" if report.passed else "FAILED"
    lines = [
        f"comparison at t = {report.t_final:g} on n = {report.n}: {status}",
        f"b = ({report.b1:g}, {report.b2:g}, {report.b3:g}), direct dt = {report.dt:.4e} ({report.steps} steps)",
        "",
        f"{'field':>6}  {'rel_l2':>12}  {'max_abs':>12}",
    ]
    lines += [f"{e.field:>6}  {e.rel_l2:>12.4e}  {e.max_abs:>12.4e}" for e in report.fields]
    lines += [
        "",
        f"max rel_l2 {report.max_rel_l2:.4e} (tolerance {report.tolerance:.1e})",
        f"energy initial / direct / ist  {report.energy_initial:.6e} / {report.energy_direct:.6e} / "
        f"{report.energy_ist:.6e}",
        f"outflow max             {report.outflow_max:.3e}",
    ]
    lines += render_diagnostics(report.diagnostics)
    return "\n".join(lines) + "\n"
