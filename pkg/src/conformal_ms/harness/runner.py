"""Time-stepping driver, CSV output, restart and convergence studies.

Output layout of a run in ``<out>``::

    diagnostics.csv            one row per diagnostics_stride steps
    snapshots/snap_000000.csv  x plus state components, every snapshot_stride steps
    summary.json               maxima, Newton statistics, wall time, status

CSV files start with ``# schema_version: 1`` comment lines, then one header
line; floats use the shortest round-trip representation, so files are
byte-identical between runs of the same configuration.
"""

from __future__ import annotations

import json
import math
import os
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np

from ..errors import (ArgumentError, ConformalMSError, EvaluationError,
                      SolverError, StepError, StudyError)
from .config import SCHEMA_VERSION, RunConfig, config_to_dict
from .problems import build_problem

__all__ = [
    "RunSummary",
    "run",
    "read_snapshot",
    "ConvergenceRow",
    "convergence_study",
    "write_convergence",
]

_FAILURES = (StepError, SolverError, EvaluationError)


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write_rows(fh, rows):
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


@dataclass
class RunSummary:
    """Outcome of :func:`run`.

    ``maxima`` holds the largest absolute value of each diagnostic over all
    steps and ``totals`` the sum of absolute values. ``final_state`` and
    ``snapshots`` are not serialised.
    """

    status: str
    steps: int
    t_final: float
    maxima: dict
    totals: dict
    newton: dict
    wall_time: float
    error: Optional[str] = None
    out_dir: Optional[str] = None
    final_state: object = field(default=None, repr=False)
    snapshots: list = field(default_factory=list, repr=False)

    @property
    def ok(self):
        return self.status == "ok"

    def to_dict(self):
        keys = ("status", "steps", "t_final", "maxima", "totals", "newton", "wall_time",
                "error", "out_dir")
        return {k: getattr(self, k) for k in keys}


class _Writer:
    """Streams diagnostics and snapshots; a no-op when ``root`` is None."""

    def __init__(self, root, problem, columns):
        self.root = None if root is None else Path(root)
        self.problem = problem
        self.columns = columns
        self.fh = None
        if self.root is not None:
            (self.root / "snapshots").mkdir(parents=True, exist_ok=True)
            self.fh = open(self.root / "diagnostics.csv", "w", encoding="utf-8", newline="\n")
            self.fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
            self.fh.write(",".join(("step", "t") + columns) + "\n")

    def row(self, k, t, values):
        if self.fh is not None:
            _write_rows(self.fh, [[k, t] + [values[c] for c in self.columns]])

    def error(self, k, t, message):
        if self.fh is not None:
            self.fh.write(f"# error: step {k} t {t!r}: {message}\n")

    def snapshot(self, k, state):
        if self.root is None:
            return None
        path = self.root / "snapshots" / f"snap_{k:06d}.csv"
        data = np.column_stack([self.problem.grid.x, self.problem.snapshot(state)])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# schema_version: {SCHEMA_VERSION}\n# step: {k}\n# t: {state.t!r}\n")
            fh.write(",".join(("x",) + tuple(self.problem.components)) + "\n")
            _write_rows(fh, data)
        return path

    def close(self):
        if self.fh is not None:
            self.fh.close()


def read_snapshot(path):
    """Return ``(step, t, values)`` of a snapshot file; ``values`` excludes ``x``."""
    path = Path(path)
    meta = {}
    skip = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            skip += 1
            m = re.match(r"#\s*(\w+):\s*(\S+)", line)
            if m:
                meta[m.group(1)] = m.group(2)
    if "step" not in meta or "t" not in meta:
        raise ArgumentError(f"{path}: not a snapshot file")
    data = np.loadtxt(path, delimiter=",", skiprows=skip + 1, ndmin=2)
    return int(meta["step"]), float(meta["t"]), data[:, 1:]


def run(config: RunConfig, out: Union[str, os.PathLike, None] = "", resume_from=None,
        keep_snapshots=False, progress=None):
    """Advance ``config`` to ``t_end`` and stream the results.

    Parameters
    ----------
    config : RunConfig
    out : path, optional
        Output directory; ``""`` uses ``config.output.directory`` and
        ``None`` disables all file output.
    resume_from : path, optional
        Snapshot file of an earlier run of the same configuration; stepping
        resumes from its step index.
    keep_snapshots : bool
        Also keep ``(t, surface values)`` for each snapshot in memory.
    progress : callable, optional
        Called as ``progress(step, n_steps)`` after every step.

    Returns
    -------
    RunSummary
        ``status`` is ``"failed"`` when a step could not be completed; the
        last good state is then written as a snapshot and an ``# error``
        line closes the diagnostics file.
    """
    problem = build_problem(config)
    state = problem.start()
    k0 = 0
    if resume_from is not None:
        k0, t0, values = read_snapshot(resume_from)
        state = problem.restore(values, t0)
    out_dir = config.output.directory if out == "" else out
    writer = _Writer(out_dir, problem, problem.columns + ("newton_iterations", "newton_residual"))
    n_steps = config.n_steps
    dt = config.dt
    maxima = {c: 0.0 for c in writer.columns}
    totals = {c: 0.0 for c in problem.columns}
    iterations = []
    snapshots = []
    status, error = "ok", None
    start = time.perf_counter()

    def snap(k, s):
        writer.snapshot(k, s)
        if keep_snapshots:
            snapshots.append((s.t, np.array(problem.surface(s))))

    k = k0
    try:
        state = problem.at(state, k0 * dt)
        snap(k0, state)
        for k in range(k0, n_steps):
            info = {}
            try:
                nxt = problem.at(problem.advance(state, dt, info), (k + 1) * dt)
            except _FAILURES as exc:
                status, error = "failed", f"step {k + 1} (t = {(k + 1) * dt!r}): {exc}"
                writer.error(k + 1, (k + 1) * dt, str(exc).replace("\n", " "))
                writer.snapshot(k, state)
                break
            values = problem.diagnostics(state, nxt, dt)
            values["newton_iterations"] = info.get("iterations", 0)
            values["newton_residual"] = info.get("residual", 0.0)
            iterations.append(values["newton_iterations"])
            for c in writer.columns:
                maxima[c] = max(maxima[c], abs(values[c]))
            for c in totals:
                totals[c] += abs(values[c])
            if (k + 1) % config.output.diagnostics_stride == 0 or k + 1 == n_steps:
                writer.row(k + 1, nxt.t, values)
            if (k + 1) % config.output.snapshot_stride == 0 or k + 1 == n_steps:
                snap(k + 1, nxt)
            state = nxt
            if progress is not None:
                progress(k + 1, n_steps)
        else:
            k = n_steps
    finally:
        writer.close()
    it = np.array(iterations, dtype=float)
    summary = RunSummary(
        status=status,
        steps=k - k0,
        t_final=float(state.t),
        maxima=maxima,
        totals=totals,
        newton={"total": int(it.sum()), "max": int(it.max()) if it.size else 0,
                "mean": float(it.mean()) if it.size else 0.0},
        wall_time=time.perf_counter() - start,
        error=error,
        out_dir=None if out_dir is None else str(out_dir),
        final_state=state,
        snapshots=snapshots,
    )
    if out_dir is not None:
        with open(Path(out_dir) / "summary.json", "w", encoding="utf-8") as fh:
            json.dump({"config": config_to_dict(config), **summary.to_dict()}, fh, indent=2)
            fh.write("\n")
    return summary


# --- convergence -------------------------------------------------------------


class ConvergenceRow(NamedTuple):
    """One level of a study.

    ``error`` is the distance to the finest solution and ``order_vs_finest``
    the ratio-based order from it. ``self_difference`` is the distance to
    the next level and ``observed_order`` the order from successive
    self-differences, or ``"exact"`` when every level already matches to
    rounding.
    """

    dt: float
    error: float
    order_vs_finest: float
    self_difference: float
    observed_order: Union[float, str]


def convergence_study(config: RunConfig, levels=3):
    """Temporal self-convergence at fixed ``dx``.

    Runs ``dt / 2**j`` for ``j = 0..levels`` (the last one is the
    reference) and measures discrete ``L^2`` distances
    ``sqrt(dx * sum |z|^2)`` at ``t_end``.

    Raises
    ------
    StudyError
        A level failed; the error names it.
    """
    if int(levels) < 3:
        raise ArgumentError("a convergence study needs at least 3 levels")
    finals = []
    for j in range(levels + 1):
        cfg = replace(config, dt=config.dt / 2 ** j)
        try:
            s = run(cfg, out=None)
        except ConformalMSError as exc:
            raise StudyError(j, str(exc)) from exc
        if not s.ok:
            raise StudyError(j, s.error)
        problem = build_problem(cfg)
        finals.append(np.asarray(problem.vector(s.final_state), dtype=float))
    dx = build_problem(config).grid.dx

    def norm(v):
        return math.sqrt(dx * float(np.sum(v * v)))

    ref = finals[-1]
    errors = [norm(f - ref) for f in finals[:-1]]
    diffs = [norm(finals[j] - finals[j + 1]) for j in range(levels)]
    exact = max(diffs) <= 1e-13 * (1.0 + norm(ref))

    def orders(values):
        out = [math.log2(values[j] / values[j + 1]) if values[j + 1] > 0 else math.inf
               for j in range(len(values) - 1)]
        return out + [math.nan]

    order_f = orders(errors)
    order_s = ["exact"] * levels if exact else orders(diffs)
    return [ConvergenceRow(config.dt / 2 ** j, errors[j], order_f[j], diffs[j], order_s[j])
            for j in range(levels)]


def write_convergence(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write("dt,error,order_vs_finest,self_difference,observed_order\n")
        for r in rows:
            order = r.observed_order if isinstance(r.observed_order, str) else _fmt(r.observed_order)
            fh.write(",".join([_fmt(r.dt), _fmt(r.error), _fmt(r.order_vs_finest),
                               _fmt(r.self_difference), order]) + "\n")
