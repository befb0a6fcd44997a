"""Independent reference implementations used as test oracles."""
import math
from functools import lru_cache

K = 1.0


def lev_recursive(x: str, y: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (x[i - 1] != y[j - 1]))

    return d(len(x), len(y))


def _num(v):
    return type(v) in (int, float, bool)


def _str(v):
    return type(v) is str


def _sat(op, a, b):
    # whether the comparison holds; mismatched types never satisfy ordering or membership
    if op in ("<", "<=", ">", ">="):
        if not ((_num(a) and _num(b)) or (_str(a) and _str(b))):
            return False
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op in ("in", "not in"):
        if not (_str(a) and _str(b)):
            return False
        return (a in b) == (op == "in")
    if op in ("is", "is not"):
        same = type(a) is type(b) and (a == b if type(a) in (int, float, bool, str) or a is None else a is b)
        return same == (op == "is")
    return (a == b) == (op == "==")


def delta(op, a, b, k=K):
    """True-branch distance, one arm per case of the piecewise definition."""
    if op == "==":
        if a == b:
            return 0
        if _num(a) and _num(b):
            return abs(a - b)
        if _str(a) and _str(b):
            return lev_recursive(a, b)
        return math.inf
    if op == "<":
        if _num(a) and _num(b):
            return 0 if a < b else a - b + k
        return 0 if _sat(op, a, b) else math.inf
    if op == "<=":
        if _num(a) and _num(b):
            return 0 if a <= b else a - b + k
        return 0 if _sat(op, a, b) else math.inf
    if op == ">":
        return delta("<", b, a, k)
    if op == ">=":
        return delta("<=", b, a, k)
    return 0 if _sat(op, a, b) else k


NEGATE = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", "<=": ">", ">": "<=",
          "in": "not in", "not in": "in", "is": "is not", "is not": "is"}


def distance(op, a, b, polarity, k=K):
    return delta(op if polarity else NEGATE[op], a, b, k)
