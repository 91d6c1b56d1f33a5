"""Sweep execution, CSV output and the analytic-versus-simulation gate."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Optional

from .. import __version__
from ..analytic import ber, pout
from ..errors import HybridFsoError
from ..simulator import RunPlan, simulate
from .config import Metric, SweepSpec

__all__ = [
    "SweepRow", "CSV_SCHEMA", "run_sweep", "rows_to_csv", "write_outputs", "write_curves",
    "CellCheck", "VerifyReport", "verify", "MAX_FAIL_FRACTION",
]

CSV_SCHEMA = "hybridfso-sweep/1"
MAX_FAIL_FRACTION = 0.02
OK = "ok"


@dataclass(frozen=True)
class SweepRow:
    """One (cell, metric) result. ``status`` is ``ok`` or ``error:<kind>``."""

    scheme: str
    n_users: int
    alpha: float
    beta: float
    xi: float
    kappa: float
    gamma_th_db: float
    gamma_avg_db: float
    metric: str
    analytic_value: Optional[float] = None
    sim_value: Optional[float] = None
    sim_stderr: Optional[float] = None
    trials: Optional[int] = None
    status: str = OK

    @property
    def failed(self) -> bool:
        return self.status != OK


FIELDS = [f.name for f in fields(SweepRow)]


def _analytic_cell(task):
    cfg, metrics = task
    out = {}
    for metric in metrics:
        try:
            value = pout(cfg) if metric is Metric.OUTAGE else ber(cfg)
            out[metric] = (float(value), OK)
        except (HybridFsoError, ArithmeticError) as exc:
            out[metric] = (None, f"error:{type(exc).__name__}")
    return out


def run_sweep(spec: SweepSpec, *, workers: int = 1,
              analytic_hook: Optional[Callable[[int, Metric, float], float]] = None) -> list[SweepRow]:
    """Evaluate every cell of ``spec``; rows come out in cell order, then metric order.

    ``analytic_hook(cell, metric, value)`` may replace analytic values (used
    by tests as a negative control for the verify gate).
    """
    cells = list(spec.cells())
    analytic = [None] * len(cells)
    sims = [None] * len(cells)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        if spec.mode.analytic:
            tasks = [(base.config, spec.metrics) for _, base in cells]
            analytic = list(pool.map(_analytic_cell, tasks) if pool else map(_analytic_cell, tasks))
        if spec.mode.simulate:
            for i, base in cells:
                plan = RunPlan(base.config, spec.trials, spec.seed, stream=(i,))
                sims[i] = simulate(plan, workers, executor=pool)
    finally:
        if pool is not None:
            pool.shutdown()

    rows = []
    for i, base in cells:
        cfg, t = base.config, base.config.turbulence
        for metric in spec.metrics:
            row = dict(scheme=cfg.scheme.value, n_users=cfg.n_users, alpha=t.alpha, beta=t.beta,
                       xi=t.xi, kappa=t.kappa, gamma_th_db=base.gamma_th_db,
                       gamma_avg_db=base.gamma_avg_db, metric=metric.value)
            if analytic[i] is not None:
                value, status = analytic[i][metric]
                if value is not None and analytic_hook is not None:
                    value = analytic_hook(i, metric, value)
                row.update(analytic_value=value, status=status)
            if sims[i] is not None:
                est = sims[i][metric.value]
                row.update(sim_value=est.value, sim_stderr=est.stderr, trials=est.trials)
            rows.append(SweepRow(**row))
    return rows


# -- output ----------------------------------------------------------------------

def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, spec: SweepSpec) -> str:
    """CSV text: ``#`` comment lines (schema, preset notes), header, rows."""
    buf = io.StringIO()
    buf.write(f"# schema: {CSV_SCHEMA}\n")
    for note in spec.notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in rows:
        w.writerow([_cell_text(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def spec_metadata(spec: SweepSpec) -> dict:
    """The fully resolved sweep, as recorded in the sidecar file."""
    bases = []
    for b in spec.bases:
        c = b.config
        bases.append(dict(
            scheme=c.scheme.value, regime=b.regime, n_users=c.n_users,
            gamma_avg_db=b.gamma_avg_db, gamma_th_db=b.gamma_th_db,
            mean_snr_rf=c.mean_snr_rf, mean_snr_fso=c.mean_snr_fso, gamma_th=c.gamma_th,
            eta=c.eta, c_const=c.c_const,
            turbulence={k: v for k, v in asdict(c.turbulence).items() if v is not None},
        ))
    return dict(
        tool="hybridfso", version=__version__, schema=CSV_SCHEMA, preset=spec.preset,
        notes=list(spec.notes), sweep_variable=spec.sweep_variable.value,
        sweep_values=list(spec.sweep_values), metrics=[m.value for m in spec.metrics],
        mode=spec.mode.value, trials=spec.trials, seed=spec.seed, bases=bases,
    )


def write_outputs(rows, spec: SweepSpec, path) -> Path:
    """Write the CSV and its ``.meta.json`` sidecar atomically; returns the CSV path."""
    path = Path(path)
    _atomic_write(path, rows_to_csv(rows, spec))
    meta = json.dumps(spec_metadata(spec), indent=2, sort_keys=True) + "\n"
    _atomic_write(path.with_name(path.name + ".meta.json"), meta)
    return path


def write_curves(rows, directory, stem: str) -> list[Path]:
    """One whitespace-separated file per curve, in gnuplot column layout."""
    curves: dict = {}
    for r in rows:
        key = (r.scheme, r.alpha, r.beta, r.xi, r.n_users, r.metric)
        curves.setdefault(key, []).append(r)
    out = []
    for (scheme, a, b, xi, n, metric), rs in curves.items():
        name = f"{stem}_{scheme}_a{a:g}_b{b:g}_xi{xi:g}_N{n}_{metric}.dat"
        lines = [f"# {scheme} alpha={a!r} beta={b!r} xi={xi!r} N={n} metric={metric}",
                 "# gamma_avg_db analytic_value sim_value sim_stderr"]
        for r in rs:
            cols = [r.gamma_avg_db, r.analytic_value, r.sim_value, r.sim_stderr]
            lines.append(" ".join("nan" if v is None else repr(float(v)) for v in cols))
        p = Path(directory) / name
        _atomic_write(p, "\n".join(lines) + "\n")
        out.append(p)
    return out


# -- verification ----------------------------------------------------------------

@dataclass(frozen=True)
class CellCheck:
    row: SweepRow
    passed: bool
    deviation: Optional[float]     # |analytic - sim| / stderr, None if degenerate


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple
    stderr_mult: float
    numerical_failures: tuple

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    @property
    def fail_fraction(self) -> float:
        return len(self.failures) / len(self.checks) if self.checks else 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and self.fail_fraction <= MAX_FAIL_FRACTION

    def to_json(self) -> dict:
        return dict(
            passed=self.passed, stderr_mult=self.stderr_mult, cells=len(self.checks),
            failed=len(self.failures), fail_fraction=self.fail_fraction,
            max_fail_fraction=MAX_FAIL_FRACTION,
            numerical_failures=[asdict(r) for r in self.numerical_failures],
            checks=[dict(asdict(c.row), passed=c.passed, deviation=c.deviation) for c in self.checks],
        )


def _check(row: SweepRow, k: float) -> CellCheck:
    a, s, se, n = row.analytic_value, row.sim_value, row.sim_stderr, row.trials
    if row.metric == Metric.OUTAGE.value and s == 0.0:
        return CellCheck(row, a <= 3.0 / n, None)
    if row.metric == Metric.OUTAGE.value and s == 1.0:
        return CellCheck(row, 1.0 - a <= 3.0 / n, None)
    dev = abs(a - s) / se if se > 0 else (0.0 if a == s else float("inf"))
    return CellCheck(row, abs(a - s) <= k * se, dev)


def verify(rows, stderr_mult: float = 3.0) -> VerifyReport:
    """Per-cell |analytic - sim| <= k stderr; the gate passes if at most 2% of cells fail.

    A zero (or full) outage count is checked against the 3/trials bound.
    """
    checks, broken = [], []
    for r in rows:
        if r.failed or r.analytic_value is None:
            broken.append(r)
            continue
        if r.sim_value is None:
            continue
        checks.append(_check(r, stderr_mult))
    return VerifyReport(tuple(checks), stderr_mult, tuple(broken))
