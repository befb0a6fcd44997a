"""Pretty-printer producing canonical subject-language source from an AST."""
from __future__ import annotations

import json
import math
from typing import List

from dyntest.lang import nodes as n

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ARITH, _PREC_TERM, _PREC_UNARY, _PREC_ATOM = range(1, 9)

_BIN_PREC = {"+": _PREC_ARITH, "-": _PREC_ARITH, "*": _PREC_TERM, "/": _PREC_TERM, "%": _PREC_TERM}


def render_literal(value) -> str:
    if value is None:
        return "None"
    if value is True:
        return "True"
    if value is False:
        return "False"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("NaN has no literal form")
        if math.isinf(value):
            return "1e999" if value > 0 else "-1e999"
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"not a literal: {value!r}")


def _prec(e: n.Expr) -> int:
    if isinstance(e, n.BoolOp):
        return _PREC_OR if e.op == "or" else _PREC_AND
    if isinstance(e, n.UnaryOp):
        return _PREC_NOT if e.op == "not" else _PREC_UNARY
    if isinstance(e, n.Compare):
        return _PREC_CMP
    if isinstance(e, n.BinOp):
        return _BIN_PREC[e.op]
    if isinstance(e, n.Const) and type(e.value) in (int, float) and str(e.value).startswith("-"):
        return _PREC_UNARY
    return _PREC_ATOM


def render_expr(e: n.Expr, min_prec: int = 0) -> str:
    text = _render_expr(e)
    if _prec(e) < min_prec:
        return f"({text})"
    return text


def _render_expr(e: n.Expr) -> str:
    if isinstance(e, n.Const):
        return render_literal(e.value)
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.SelfAttr):
        return f"self.{e.attr}"
    if isinstance(e, n.BinOp):
        p = _BIN_PREC[e.op]
        return f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
    if isinstance(e, n.BoolOp):
        p = _prec(e)
        return f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
    if isinstance(e, n.UnaryOp):
        if e.op == "not":
            return f"not {render_expr(e.operand, _PREC_NOT)}"
        inner = render_expr(e.operand, _PREC_UNARY)
        # keep "- -x" from lexing as something else and from folding into a literal
        sep = " " if inner.startswith("-") else ""
        if isinstance(e.operand, n.Const):
            inner = f"({inner})"
            sep = ""
        return f"-{sep}{inner}"
    if isinstance(e, n.Compare):
        return f"{render_expr(e.left, _PREC_ARITH)} {e.op} {render_expr(e.right, _PREC_ARITH)}"
    if isinstance(e, n.Call):
        return f"{e.func}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, n.MethodCall):
        recv = render_expr(e.receiver, _PREC_ATOM)
        return f"{recv}.{e.name}({', '.join(render_expr(a) for a in e.args)})"
    raise TypeError(f"unknown expression node {e!r}")


def _render_block(body, indent: int, out: List[str], head: str) -> None:
    pad = "    " * indent
    if not body:
        out.append(f"{pad}{head} {{ }}")
        return
    out.append(f"{pad}{head} {{")
    for s in body:
        _render_stmt(s, indent + 1, out)
    out.append(f"{pad}}}")


def _render_if(s: n.If, indent: int, out: List[str]) -> None:
    pad = "    " * indent
    line = f"{pad}if {render_expr(s.test)} {{"
    while True:
        out.append(line)
        for b in s.body:
            _render_stmt(b, indent + 1, out)
        if len(s.orelse) == 1 and isinstance(s.orelse[0], n.If):
            s = s.orelse[0]
            line = f"{pad}}} elif {render_expr(s.test)} {{"
            continue
        if s.orelse:
            out.append(f"{pad}}} else {{")
            for b in s.orelse:
                _render_stmt(b, indent + 1, out)
        out.append(f"{pad}}}")
        return


def _render_stmt(s: n.Stmt, indent: int, out: List[str]) -> None:
    pad = "    " * indent
    if isinstance(s, n.If):
        _render_if(s, indent, out)
        return
    if isinstance(s, n.While):
        _render_block(s.body, indent, out, f"while {render_expr(s.test)}")
        return
    if isinstance(s, n.Assign):
        out.append(f"{pad}{s.target} = {render_expr(s.value)}")
    elif isinstance(s, n.AttrAssign):
        out.append(f"{pad}self.{s.attr} = {render_expr(s.value)}")
    elif isinstance(s, n.ExprStmt):
        out.append(f"{pad}{render_expr(s.value)}")
    elif isinstance(s, n.Return):
        out.append(f"{pad}return" + ("" if s.value is None else f" {render_expr(s.value)}"))
    elif isinstance(s, n.Pass):
        out.append(f"{pad}pass")
    elif isinstance(s, n.Raise):
        msg = "" if s.message is None else f"({render_expr(s.message)})"
        out.append(f"{pad}raise {s.kind}{msg}")
    else:
        raise TypeError(f"unknown statement node {s!r}")


def _render_def(d: n.FunctionDef, indent: int, out: List[str]) -> None:
    params = ", ".join(p.name + (f": {p.annotation}" if p.annotation else "") for p in d.params)
    ret = f" -> {d.returns}" if d.returns else ""
    _render_block(d.body, indent, out, f"def {d.name}({params}){ret}")


def render_module(module: n.ModuleAST) -> str:
    """Render a module AST back to source; parsing the result yields an equal AST."""
    out: List[str] = []
    for item in module.top_level:
        if isinstance(item, n.FunctionDef):
            _render_def(item, 0, out)
        elif isinstance(item, n.ClassDef):
            out.append(f"class {item.name} {{")
            for m in item.methods:
                _render_def(m, 1, out)
            out.append("}")
        else:
            _render_stmt(item, 0, out)
    return "\n".join(out) + ("\n" if out else "")
