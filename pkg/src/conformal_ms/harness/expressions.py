"""Inline initial-condition expressions such as ``"exp(-x**2) * (1 + 0.5j*sin(x))"``.

Only arithmetic, numeric literals, the variable ``x``, the constants
``pi`` and ``e`` and a fixed set of numpy functions are accepted; the
expression is validated by walking its syntax tree before it is compiled.
"""

from __future__ import annotations

import ast

import numpy as np

from ..errors import ArgumentError

FUNCTIONS = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sinh",
                 "cosh", "arctan", "real", "imag")
}
FUNCTIONS["sech"] = lambda x: 1.0 / np.cosh(x)
CONSTANTS = {"pi": np.pi, "e": np.e}

_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
          ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def compile_expression(text):
    """Return ``f(x)`` for a whitelisted expression in ``x``.

    Raises
    ------
    ArgumentError
        Syntax error or a construct outside the whitelist.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ArgumentError(f"invalid expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ArgumentError(f"{type(node).__name__} is not allowed in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise ArgumentError(f"non-numeric literal in {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS or node.keywords:
                raise ArgumentError(f"unsupported call in {text!r}")
        if isinstance(node, ast.Name) and node.id not in FUNCTIONS and node.id not in CONSTANTS \
                and node.id != "x":
            raise ArgumentError(f"unknown name {node.id!r} in {text!r}")
    code = compile(tree, "<ic>", "eval")
    env = {"__builtins__": {}, **FUNCTIONS, **CONSTANTS}

    def f(x):
        return np.asarray(eval(code, env, {"x": np.asarray(x, dtype=float)})) + 0.0 * x

    return f
