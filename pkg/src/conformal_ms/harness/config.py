"""Run configuration: JSON schema, parsing with key paths, and serialisation.

A document looks like::

    {
      "model": "nls",
      "scheme": "embs",
      "grid": {"x_min": -30, "x_max": 30, "n_nodes": 600, "boundary": "anti-periodic"},
      "dt": 0.001,
      "t_end": 10,
      "ic": "tanh_dark",
      "coefficients": {
        "beta": {"kind": "sinusoid", "offset": 0.1, "amplitude": -0.2,
                 "frequency": 3.141592653589793},
        "potential": "cubic"
      },
      "newton": {"tol": 1e-13, "max_iter": 50, "jacobian": "analytic"},
      "output": {"directory": "runs/nls_dark", "snapshot_stride": 100,
                 "diagnostics_stride": 1},
      "seed": 0
    }

``newton``, ``output`` and ``seed`` are optional. Unknown keys anywhere are
rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from ..core import DampingCoefficient
from ..errors import ArgumentError, ParseError, ValidationError
from ..newton import NewtonConfig
from ..schemes import SchemeKind
from ..specialized import IC_NAMES
from .expressions import compile_expression

__all__ = [
    "GridSpec",
    "OutputSpec",
    "RunConfig",
    "MODELS",
    "parse_config",
    "load_config",
    "serialize_config",
    "config_to_dict",
    "coefficient_from_spec",
]

SCHEMA_VERSION = 1

#: Allowed coefficient keys per model (``True`` marks required keys).
MODELS = {
    "nls": {"beta": True, "potential": False},
    "nls_conjugate": {"gamma": True, "c": True, "omega": True, "potential": False},
    "ch": {"gamma": True},
    "kdv": {"k": True, "damping": True, "b": True},
    "decay": {"damping": True},
}
_SCHEMES = {
    "nls": tuple(SchemeKind),
    "nls_conjugate": tuple(SchemeKind),
    "ch": (SchemeKind.EXPBOX, SchemeKind.MIDPOINT_BOX_BASELINE),
    # the discrete gradient moves the cyclic potential phi, breaking the mass balance
    "kdv": tuple(k for k in SchemeKind if k is not SchemeKind.EXPDG),
    "decay": tuple(SchemeKind),
}
_MODEL_ICS = {
    "nls": ("tanh_dark", "gaussian", "soliton_pair"),
    "nls_conjugate": ("tanh_dark", "gaussian", "soliton_pair"),
    "ch": ("ch_cosine", "ch_kink"),
    "kdv": (),
    "decay": (),
}
_POTENTIALS = ("cubic", "free")


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_nodes: int
    boundary: str = "periodic"


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "runs"
    snapshot_stride: int = 100
    diagnostics_stride: int = 1


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one run."""

    model: str
    scheme: SchemeKind
    grid: GridSpec
    dt: float
    t_end: float
    ic: str
    coefficients: dict
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


# --- low-level readers -------------------------------------------------------


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _mapping(obj, path, allowed, required=()):
    if not isinstance(obj, dict):
        raise ParseError(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            raise ParseError(_join(path, key), "unknown key")
    for key in required:
        if key not in obj:
            raise ParseError(_join(path, key), "missing required key")
    return obj


def _number(obj, path):
    if obj == "pi":
        return math.pi
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ParseError(path, f"expected a number, got {obj!r}")
    if not math.isfinite(obj):
        raise ValidationError(path, "must be finite")
    return float(obj)


def _integer(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ParseError(path, f"expected an integer, got {obj!r}")
    return obj


def _string(obj, path):
    if not isinstance(obj, str):
        raise ParseError(path, f"expected a string, got {obj!r}")
    return obj


def _function_spec(obj, path):
    """``{"kind": "constant", "value"}`` or ``{"kind": "sinusoid", ...}``; bare numbers are constants."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        obj = {"kind": "constant", "value": obj}
    _mapping(obj, path, ("kind", "value", "offset", "amplitude", "frequency"), ("kind",))
    kind = _string(obj["kind"], _join(path, "kind"))
    if kind == "constant":
        _mapping(obj, path, ("kind", "value"), ("value",))
        return {"kind": "constant", "value": _number(obj["value"], _join(path, "value"))}
    if kind == "sinusoid":
        _mapping(obj, path, ("kind", "offset", "amplitude", "frequency"),
                 ("offset", "amplitude", "frequency"))
        return {"kind": "sinusoid",
                **{k: _number(obj[k], _join(path, k)) for k in ("offset", "amplitude", "frequency")}}
    raise ParseError(_join(path, "kind"), f"unknown function kind {kind!r}")


def coefficient_from_spec(spec):
    """Build a :class:`DampingCoefficient` from a parsed function spec."""
    if spec["kind"] == "constant":
        return DampingCoefficient.constant(spec["value"])
    return DampingCoefficient.sinusoid(spec["offset"], spec["amplitude"], spec["frequency"])


def _coefficients(model, obj, path):
    keys = MODELS[model]
    _mapping(obj, path, tuple(keys), tuple(k for k, req in keys.items() if req))
    out = {}
    for key, value in obj.items():
        p = _join(path, key)
        if key in ("beta", "gamma", "damping", "b") and not (model == "nls_conjugate"):
            out[key] = _function_spec(value, p)
        elif key == "potential":
            out[key] = _string(value, p)
            if out[key] not in _POTENTIALS:
                raise ValidationError(p, f"unknown potential {value!r}; choose from {_POTENTIALS}")
        elif key == "k":
            out[key] = _integer(value, p)
            if out[key] < 1:
                raise ValidationError(p, "must be a positive integer")
        else:
            out[key] = _number(value, p)
    if "b" in out and out["b"]["kind"] == "constant" and not out["b"]["value"] > 0:
        raise ValidationError(_join(path, "b"), "dispersion coefficient must be positive")
    return out


# --- public API --------------------------------------------------------------


def config_from_dict(doc):
    """Validate a decoded document; see the module docstring for the schema."""
    _mapping(doc, "", ("model", "scheme", "grid", "dt", "t_end", "ic", "coefficients",
                       "newton", "output", "seed"),
             ("model", "scheme", "grid", "dt", "t_end", "ic", "coefficients"))
    model = _string(doc["model"], "model")
    if model not in MODELS:
        raise ValidationError("model", f"unknown model {model!r}; choose from {tuple(MODELS)}")
    try:
        scheme = SchemeKind.parse(_string(doc["scheme"], "scheme"))
    except ArgumentError as exc:
        raise ValidationError("scheme", str(exc)) from None
    if scheme not in _SCHEMES[model]:
        raise ValidationError("scheme", f"{scheme.value} is not available for model {model}")

    g = _mapping(doc["grid"], "grid", ("x_min", "x_max", "n_nodes", "boundary"),
                 ("x_min", "x_max", "n_nodes"))
    grid = GridSpec(_number(g["x_min"], "grid.x_min"), _number(g["x_max"], "grid.x_max"),
                    _integer(g["n_nodes"], "grid.n_nodes"),
                    _string(g.get("boundary", "periodic"), "grid.boundary"))
    if grid.n_nodes < 3:
        raise ValidationError("grid.n_nodes", "need at least 3 nodes")
    if not grid.x_max > grid.x_min:
        raise ValidationError("grid.x_max", "must exceed grid.x_min")
    if grid.boundary not in ("periodic", "anti-periodic"):
        raise ValidationError("grid.boundary", f"unknown boundary {grid.boundary!r}")
    if model in ("ch", "kdv") and grid.boundary != "periodic":
        raise ValidationError("grid.boundary", f"model {model} requires a periodic grid")

    dt = _number(doc["dt"], "dt")
    if not dt > 0:
        raise ValidationError("dt", "must be positive")
    t_end = _number(doc["t_end"], "t_end")
    if not t_end > 0:
        raise ValidationError("t_end", "must be positive")
    n = round(t_end / dt)
    if n < 1 or abs(n * dt - t_end) > 1e-9 * t_end:
        raise ValidationError("t_end", f"must be a whole number of steps of dt = {dt!r}")

    ic = _string(doc["ic"], "ic")
    if ic in IC_NAMES:
        if ic not in _MODEL_ICS[model]:
            raise ValidationError("ic", f"{ic} is not an initial condition for model {model}")
    else:
        try:
            compile_expression(ic)
        except ArgumentError as exc:
            raise ValidationError("ic", str(exc)) from None

    coefficients = _coefficients(model, doc["coefficients"], "coefficients")

    newton = NewtonConfig()
    if "newton" in doc:
        nd = _mapping(doc["newton"], "newton", ("tol", "max_iter", "jacobian"))
        kw = {}
        if "tol" in nd:
            kw["tol"] = _number(nd["tol"], "newton.tol")
        if "max_iter" in nd:
            kw["max_iter"] = _integer(nd["max_iter"], "newton.max_iter")
        if "jacobian" in nd:
            kw["jacobian"] = _string(nd["jacobian"], "newton.jacobian")
        if "tol" in kw and not kw["tol"] > 0:
            raise ValidationError("newton.tol", "must be positive")
        if "max_iter" in kw and kw["max_iter"] < 1:
            raise ValidationError("newton.max_iter", "must be at least 1")
        if kw.get("jacobian", "analytic") not in ("analytic", "finite-difference"):
            raise ValidationError("newton.jacobian", "must be 'analytic' or 'finite-difference'")
        newton = NewtonConfig(**kw)

    output = OutputSpec()
    if "output" in doc:
        od = _mapping(doc["output"], "output", ("directory", "snapshot_stride", "diagnostics_stride"))
        output = OutputSpec(
            _string(od.get("directory", output.directory), "output.directory"),
            _integer(od.get("snapshot_stride", output.snapshot_stride), "output.snapshot_stride"),
            _integer(od.get("diagnostics_stride", output.diagnostics_stride),
                     "output.diagnostics_stride"),
        )
        for key in ("snapshot_stride", "diagnostics_stride"):
            if getattr(output, key) < 1:
                raise ValidationError(f"output.{key}", "must be at least 1")

    seed = _integer(doc.get("seed", 0), "seed")
    return RunConfig(model, scheme, grid, dt, t_end, ic, coefficients, newton, output, seed)


def parse_config(text):
    """Parse a JSON configuration document into a validated :class:`RunConfig`.

    Raises
    ------
    ParseError
        Malformed JSON or schema violation; the message starts with the key
        path.
    ValidationError
        Well-formed document with inadmissible values.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("", f"invalid JSON: {exc}") from None
    return config_from_dict(doc)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text)


def config_to_dict(cfg):
    out = {
        "model": cfg.model,
        "scheme": cfg.scheme.value,
        "grid": asdict(cfg.grid),
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "ic": cfg.ic,
        "coefficients": json.loads(json.dumps(cfg.coefficients)),
        "newton": asdict(cfg.newton),
        "output": asdict(cfg.output),
        "seed": cfg.seed,
    }
    return out


def serialize_config(cfg):
    """JSON text that :func:`parse_config` maps back to an equal config."""
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"
