"""Plot-ready data for the three experiment figures.

For every preset ``<name>`` two files are written to the output directory:

``<name>_surface.csv``
    long form ``x,t,value`` with ``value = |psi|`` (Schrodinger) or ``u``
    (Camassa-Holm), one row per node and snapshot.
``<name>_residuals.csv``
    ``step,t`` plus the preset's diagnostic columns; the Schrodinger files
    carry both ``norm_error`` (factor 2) and ``paper_norm_error`` (factor 4).

``figures.csv`` maps figure labels to preset names.
"""

from __future__ import annotations

import shutil
from pathlib import Path

import numpy as np

from ..errors import ConformalMSError
from .config import SCHEMA_VERSION
from .presets import preset
from .problems import make_grid
from .runner import _write_rows, run

__all__ = ["FIGURES", "emit_figures_data"]

FIGURES = {
    "figure1": ("nls_dark", "nls_gaussian"),
    "figure2": ("nls_soliton_pair", "nls_soliton_pair_midpoint"),
    "figure3": ("ch_cosine", "ch_kink", "ch_cosine_preissmann", "ch_kink_preissmann"),
}


def emit_figures_data(names=None, out="figures", t_end=None):
    """Run presets and write their surface and residual series.

    Parameters
    ----------
    names : iterable of str, optional
        Preset names; all presets used by :data:`FIGURES` by default.
    out : path
    t_end : float, optional
        Truncate every preset.

    Returns
    -------
    dict
        ``name -> (surface_path, residual_path, RunSummary)``.
    """
    if names is None:
        names = [n for group in FIGURES.values() for n in group]
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror}") from exc
    results = {}
    for name in names:
        cfg = preset(name, t_end=t_end, out=out / name)
        summary = run(cfg, keep_snapshots=True)
        if not summary.ok:
            raise ConformalMSError(f"preset {name} failed: {summary.error}")
        x = make_grid(cfg.grid).x
        surface = out / f"{name}_surface.csv"
        with open(surface, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# schema_version: {SCHEMA_VERSION}\nx,t,value\n")
            for t, values in summary.snapshots:
                _write_rows(fh, np.column_stack([x, np.full_like(x, t), values]))
        residuals = out / f"{name}_residuals.csv"
        shutil.copyfile(out / name / "diagnostics.csv", residuals)
        results[name] = (surface, residuals, summary)
    with open(out / "figures.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\nfigure,preset\n")
        for fig, group in FIGURES.items():
            for name in group:
                if name in results:
                    fh.write(f"{fig},{name}\n")
    return results
