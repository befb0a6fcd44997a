"""Branch distances over dynamically typed operands.

``branch_distance`` gives the distance to the chosen outcome of a binary
predicate ``a <op> b``; the false branch uses the complementary operator.
Operands whose types make a distance meaningless get ``INF``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf

COMPLEMENT = {
    "==": "!=", "!=": "==",
    "<": ">=", ">=": "<",
    "<=": ">", ">": "<=",
    "in": "not in", "not in": "in",
    "is": "is not", "is not": "is",
}


@dataclass(frozen=True)
class DistanceConfig:
    k: float = 1.0

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")


DEFAULT_DISTANCE = DistanceConfig()


def is_numeric(z) -> bool:
    t = type(z)
    return t is int or t is float or t is bool


def is_string(z) -> bool:
    return type(z) is str


def levenshtein(x: str, y: str) -> int:
    """Edit distance with unit-cost insertion, deletion and substitution."""
    if len(x) < len(y):
        x, y = y, x
    if not y:
        return len(x)
    prev = list(range(len(y) + 1))
    for i, cx in enumerate(x, 1):
        cur = [i]
        for j, cy in enumerate(y, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (cx != cy)))
        prev = cur
    return prev[-1]


def truthy(v) -> bool:
    """Truthiness of a subject value: numbers nonzero, strings nonempty,
    None false, objects true."""
    t = type(v)
    if t is bool:
        return v
    if t is int or t is float:
        return v != 0
    if t is str:
        return len(v) > 0
    if v is None:
        return False
    return True


def subject_is(a, b) -> bool:
    """``is``: identity for objects, same-type value equality for primitives."""
    ta = type(a)
    if ta is not type(b):
        return False
    if ta in (int, float, bool, str) or a is None:
        return a == b
    return a is b


def subject_in(a, b) -> bool:
    """Substring test; raises TypeError unless both operands are strings."""
    if type(a) is not str or type(b) is not str:
        raise TypeError("'in' requires string operands")
    return a in b


def _holds(op: str, a, b) -> bool:
    """Whether ``a op b`` holds; type errors count as not holding."""
    try:
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "in":
            return subject_in(a, b)
        if op == "not in":
            return not subject_in(a, b)
        if op == "is":
            return subject_is(a, b)
        if op == "is not":
            return not subject_is(a, b)
    except TypeError:
        return False
    raise ValueError(f"unknown operator {op!r}")


def _safe_sum(a, b, k: float) -> float:
    try:
        return a - b + k
    except OverflowError:
        return INF


def _true_distance(op: str, a, b, k: float) -> float:
    if op == "==":
        if _holds("==", a, b):
            return 0.0
        if is_numeric(a) and is_numeric(b):
            try:
                return abs(a - b)
            except OverflowError:
                return INF
        if is_string(a) and is_string(b):
            return levenshtein(a, b)
        return INF
    if op in ("<", "<="):
        if _holds(op, a, b):
            return 0.0
        if is_numeric(a) and is_numeric(b) and _holds(">=" if op == "<" else ">", a, b):
            return _safe_sum(a, b, k)
        return INF
    if op == ">":
        return _true_distance("<", b, a, k)
    if op == ">=":
        return _true_distance("<=", b, a, k)
    return 0.0 if _holds(op, a, b) else k


def branch_distance(op: str, a, b, polarity: bool = True, cfg: DistanceConfig = DEFAULT_DISTANCE) -> float:
    """Distance of ``a op b`` from taking the given branch (0 means taken)."""
    if polarity:
        return _true_distance(op, a, b, cfg.k)
    return _true_distance(COMPLEMENT[op], a, b, cfg.k)


def truthiness_distance(v, polarity: bool = True, cfg: DistanceConfig = DEFAULT_DISTANCE) -> float:
    if truthy(v) == polarity:
        return 0.0
    return cfg.k
