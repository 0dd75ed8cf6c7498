# expressions.py - Profile expression language
"""
Small closed expression language for variance and volatility profiles.

Profiles such as sigma(s, t) or gamma(s, r) are written as text in the model
configuration, for example ``"1 + s*indicator(r <= 0.5)"`` or
``"sqrt(2)*exp(-t)"``. The text is parsed once with Python's own parser and
checked against a whitelist; evaluation is vectorized over numpy arrays.

Supported: numbers, pi, variables s, t and r (r names the second argument,
like t), unary +/-, binary + - * / **, sqrt, exp, cos, sin, abs and
indicator(<comparison>) with <, <=, >, >=.
"""

import ast
import math
from typing import Callable

import numpy as np

from .errors import ExpressionError

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

FUNCTIONS = {
    'sqrt': np.sqrt,
    'exp': np.exp,
    'cos': np.cos,
    'sin': np.sin,
    'abs': np.abs
}

CONSTANTS = {
    'pi': math.pi
}

BINARY_OPERATORS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power
}

COMPARISONS = {
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal
}


def _compile(node: ast.AST) -> Evaluator:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported constant {node.value!r}")
        value = float(node.value)
        return lambda s, t: value

    if isinstance(node, ast.Name):
        if node.id == 's':
            return lambda s, t: s
        if node.id in ('t', 'r'):
            return lambda s, t: t
        if node.id in CONSTANTS:
            value = CONSTANTS[node.id]
            return lambda s, t: value
        raise ExpressionError(f"unknown name '{node.id}'")

    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        operand = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda s, t: np.negative(operand(s, t))
        return operand

    if isinstance(node, ast.BinOp) and type(node.op) in BINARY_OPERATORS:
        op = BINARY_OPERATORS[type(node.op)]
        left, right = _compile(node.left), _compile(node.right)
        return lambda s, t: op(left(s, t), right(s, t))

    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords or len(node.args) != 1:
            raise ExpressionError("functions take exactly one positional argument")
        name = node.func.id
        if name == 'indicator':
            return _compile_indicator(node.args[0])
        if name not in FUNCTIONS:
            raise ExpressionError(f"unknown function '{name}'")
        func, argument = FUNCTIONS[name], _compile(node.args[0])
        return lambda s, t: func(argument(s, t))

    raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


def _compile_indicator(node: ast.AST) -> Evaluator:
    if not isinstance(node, ast.Compare) or len(node.ops) != 1:
        raise ExpressionError("indicator() expects a single comparison such as s <= 0.5")
    op = type(node.ops[0])
    if op not in COMPARISONS:
        raise ExpressionError(f"unsupported comparison {op.__name__}")
    compare = COMPARISONS[op]
    left, right = _compile(node.left), _compile(node.comparators[0])
    return lambda s, t: compare(left(s, t), right(s, t)).astype(float)


class Expression:
    """A parsed profile f(s, t), evaluated with numpy broadcasting"""

    def __init__(self, text: str):
        if not isinstance(text, str) or not text.strip():
            raise ExpressionError("expression text must be a non-empty string")
        try:
            tree = ast.parse(text.strip(), mode='eval')
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {text!r}: {exc.msg}") from exc
        self.text = text.strip()
        self._evaluate = _compile(tree.body)

    def __call__(self, s, t) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            result = self._evaluate(s, t)
        return np.broadcast_to(np.asarray(result, dtype=float), np.broadcast(s, t).shape)

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"

    def __str__(self) -> str:
        return self.text

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and other.text == self.text

    def __hash__(self) -> int:
        return hash(self.text)


def parse_expression(text: str) -> Expression:
    return Expression(text)
