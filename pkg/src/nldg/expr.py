"""Closed-form forcing expressions: numbers, ``x``, ``+ - * /``, powers and ``exp``."""

from __future__ import annotations

import ast

import numpy as np


class ExpressionError(ValueError):
    pass


_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_FUNCS = {"exp": np.exp}


def _check(node):
    if isinstance(node, ast.Expression):
        return _check(node.body)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        _check(node.operand)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        pass
    elif isinstance(node, ast.Name) and node.id == "x":
        pass
    elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
          and len(node.args) == 1 and not node.keywords):
        _check(node.args[0])
    else:
        raise ExpressionError(f"unsupported syntax in forcing expression: {ast.dump(node)}")


def _eval(node, x):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, x)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return x
    return _FUNCS[node.func.id](_eval(node.args[0], x))


def compile_expression(text: str):
    """Parse ``text`` into a vectorized callable of ``x``.

    ``^`` is accepted as a synonym for ``**``.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse forcing expression {text!r}: {exc.msg}") from None
    _check(tree)
    body = tree.body

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(_eval(body, x), dtype=float), x.shape)

    return f
