"""Named experiment setups.

Schrodinger presets: ``dx = 0.1`` on ``[-30, 30]`` (600 nodes), ``dt = 0.001``,
``t in [0, 10]``, ``beta(t) = 0.1 - 0.2 sin(pi t)`` and
``alpha(t) = -0.2 cos(pi t)``, cubic nonlinearity.

Camassa-Holm presets: ``[-pi, pi]`` with 90 nodes (``dx = 2 pi / 90 ~ 0.0698``,
the closest whole node count to 0.07), ``dt = 0.001``, ``t in [0, 10]``,
``gamma(t) = -0.2 sin(pi t)``, no forcing.
"""

from __future__ import annotations

import math
from dataclasses import replace

from ..errors import ArgumentError
from ..newton import NewtonConfig
from ..schemes import SchemeKind
from .config import GridSpec, OutputSpec, RunConfig, config_from_dict, config_to_dict

__all__ = ["PRESETS", "PRESET_TABLE", "preset"]

#: Numeric parameters shared by the presets of each model family.
PRESET_TABLE = {
    "nls": {"x_min": -30.0, "x_max": 30.0, "n_nodes": 600, "dt": 0.001, "t_end": 10.0,
            "gamma": 0.1, "c": -0.2, "omega": math.pi},
    "ch": {"x_min": -math.pi, "x_max": math.pi, "n_nodes": 90, "dt": 0.001, "t_end": 10.0,
           "offset": 0.0, "amplitude": -0.2, "frequency": math.pi},
}

_NEWTON = NewtonConfig(tol=1e-13, max_iter=50)

_NLS = {
    "nls_dark": ("tanh_dark", "anti-periodic", SchemeKind.EMBS),
    "nls_gaussian": ("gaussian", "periodic", SchemeKind.EMBS),
    "nls_soliton_pair": ("soliton_pair", "periodic", SchemeKind.EMBS),
    "nls_soliton_pair_midpoint": ("soliton_pair", "periodic", SchemeKind.MIXED_EULER_BASELINE),
}
_CH = {
    "ch_cosine": ("ch_cosine", SchemeKind.EXPBOX),
    "ch_kink": ("ch_kink", SchemeKind.EXPBOX),
    "ch_cosine_preissmann": ("ch_cosine", SchemeKind.MIDPOINT_BOX_BASELINE),
    "ch_kink_preissmann": ("ch_kink", SchemeKind.MIDPOINT_BOX_BASELINE),
}
PRESETS = tuple(_NLS) + tuple(_CH)


def _nls(name):
    ic, boundary, scheme = _NLS[name]
    p = PRESET_TABLE["nls"]
    beta = {"kind": "sinusoid", "offset": p["gamma"], "amplitude": p["c"],
            "frequency": p["omega"]}
    return RunConfig(
        model="nls", scheme=scheme,
        grid=GridSpec(p["x_min"], p["x_max"], p["n_nodes"], boundary),
        dt=p["dt"], t_end=p["t_end"], ic=ic,
        coefficients={"beta": beta, "potential": "cubic"},
        newton=_NEWTON, output=OutputSpec(f"runs/{name}", 100, 1),
    )


def _ch(name):
    ic, scheme = _CH[name]
    p = PRESET_TABLE["ch"]
    gamma = {"kind": "sinusoid", "offset": p["offset"], "amplitude": p["amplitude"],
             "frequency": p["frequency"]}
    return RunConfig(
        model="ch", scheme=scheme,
        grid=GridSpec(p["x_min"], p["x_max"], p["n_nodes"], "periodic"),
        dt=p["dt"], t_end=p["t_end"], ic=ic, coefficients={"gamma": gamma},
        newton=_NEWTON, output=OutputSpec(f"runs/{name}", 100, 1),
    )


def preset(name, t_end=None, out=None):
    """Full :class:`RunConfig` of a named preset, optionally truncated."""
    if name in _NLS:
        cfg = _nls(name)
    elif name in _CH:
        cfg = _ch(name)
    else:
        raise ArgumentError(f"unknown preset {name!r}; choose from {PRESETS}")
    if t_end is not None:
        cfg = replace(cfg, t_end=t_end)
    if out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=str(out)))
    # re-validate so that overrides obey the same rules as config files
    return config_from_dict(config_to_dict(cfg))
