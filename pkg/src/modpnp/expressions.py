"""
Tiny arithmetic expression language for initial data and coefficient fields.

Grammar: numbers, ``x``, ``pi``, ``e``, ``+ - * / ^`` (``**`` also accepted),
parentheses, and ``cos``, ``sin``, ``exp``. Expressions are parsed with
:mod:`ast` and evaluated against a whitelist, never with ``eval``.
"""
from __future__ import annotations

import ast
import operator

import numpy as np

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}
_CONSTS = {"pi": np.pi, "e": np.e}


class ExpressionError(ValueError):
    pass


def parse_expression(text: str) -> ast.Expression:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    _check(tree.body, text)
    return tree


def _check(node, text):
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left, text)
        _check(node.right, text)
    elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        _check(node.operand, text)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) \
                or len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"unsupported call in {text!r}")
        _check(node.args[0], text)
    elif isinstance(node, ast.Name):
        if node.id != "x" and node.id not in _CONSTS:
            raise ExpressionError(f"unknown name {node.id!r} in {text!r}")
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported constant {node.value!r} in {text!r}")
    else:
        raise ExpressionError(f"unsupported syntax {type(node).__name__} in {text!r}")


def _eval(node, x):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, x))
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval(node.args[0], x))
    if isinstance(node, ast.Name):
        return x if node.id == "x" else _CONSTS[node.id]
    return float(node.value)


def evaluate(text: str, x) -> np.ndarray:
    """Evaluate ``text`` at the points ``x``; the result is broadcast to ``x``'s shape."""
    x = np.asarray(x, dtype=float)
    tree = parse_expression(text)
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(_eval(tree.body, x), dtype=float), x.shape).copy()
    if not np.all(np.isfinite(values)):
        raise ExpressionError(f"{text!r} produces non-finite values")
    return values
