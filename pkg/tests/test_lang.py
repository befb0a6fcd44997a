import logging

import pytest
from hypothesis import given, settings, strategies as st

from dyntest.lang import (
    ANY, INT, STR, UNKNOWN, ParseError, class_type, collect_constants,
    collect_signatures, parse_module, render_module,
)
from dyntest.lang import nodes as n
from dyntest.lang.analysis import iter_literals
from dyntest.lang.parser import parse_expression
from dyntest.lang.render import render_expr

from conftest import CORPUS, corpus_paths


def test_minimal_program():
    m = parse_module("def f(x):\n  return x")
    assert [d.name for d in m.functions] == ["f"]
    (p,) = m.functions[0].params
    assert p.name == "x" and p.annotation is None


def test_empty_module():
    m = parse_module("")
    assert m.top_level == ()


def test_foo_bar_shape():
    m = parse_module((CORPUS / "foo_bar.dyn").read_text(), "foo_bar")
    classes = {c.name: c for c in m.classes}
    assert set(classes) == {"Foo", "Bar"}
    assert len(classes["Foo"].constructor.params) == 2  # self, b
    assert len(classes["Bar"].constructor.params) == 1
    assert "do_foo" in {d.name for d in classes["Foo"].methods}
    assert "do_bar" in {d.name for d in classes["Bar"].methods}


@pytest.mark.parametrize("src, where", [
    ("def f( {", (1, 8)),
    ("def f() {\n  return 1 +\n}", (2, 13)),
    ("x = @", (1, 5)),
    ('s = "unterminated', (1, 5)),
])
def test_parse_errors_carry_position(src, where):
    with pytest.raises(ParseError) as ei:
        parse_module(src)
    assert (ei.value.line, ei.value.col) == where


@pytest.mark.parametrize("src", [
    "def f() { }\ndef f() { }",
    "def f(a, a) { }",
    "class C { def m(self) { }\n def m(self) { } }",
    "def f(x) { if 1 < x < 3 { } }",
    "def f(x) { y = x.attr }",
    "class C { def m(x) { } }",
])
def test_rejected_programs(src):
    with pytest.raises(ParseError):
        parse_module(src)


def test_signatures_typed_and_untyped():
    m = parse_module((CORPUS / "foo_bar.dyn").read_text())
    typed = collect_signatures(m, True)
    assert typed.method("Foo", "do_foo").params == (("b", class_type("Bar")),)
    assert typed.constructor("Foo").returns == class_type("Foo")
    untyped = collect_signatures(m, False)
    assert all(t == UNKNOWN for e in untyped for _, t in e.params)
    assert untyped == typed.erased()


def test_any_annotation():
    m = parse_module((CORPUS / "truthiness.dyn").read_text())
    assert collect_signatures(m, True).function("describe").params == (("x", ANY),)


def test_private_callables_excluded():
    m = parse_module("def _h() { }\ndef g() { }\nclass _P { }\nclass Q { def _x(self) { }\n def y(self) { } }")
    names = {e.qualname for e in collect_signatures(m)}
    assert names == {"g", "Q", "Q.y"}


def test_unresolvable_annotation_warns(caplog):
    m = parse_module("def f(x: Widget) { }")
    with caplog.at_level(logging.WARNING):
        pool = collect_signatures(m)
    assert pool.function("f").params[0][1] == UNKNOWN
    assert "Widget" in caplog.text


def test_constants():
    m = parse_module('def f(x) { if x == 42 { return "abc" } }')
    c = collect_constants(m)
    assert c.ints == {42} and c.strings == {"abc"} and not c.floats
    assert not collect_constants(parse_module(""))


def test_string_rules_constants():
    c = collect_constants(parse_module((CORPUS / "string_rules.dyn").read_text()))
    assert "http://" in c.strings
    src = (CORPUS / "string_rules.dyn").read_text()
    assert src.count(" 8 ") + src.count(" 8\n") >= 2  # the literal 8 appears twice
    assert 8 in c.ints


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_constant_pool_equals_literals(path):
    m = parse_module(path.read_text())
    lits = {(type(v), v) for v in iter_literals(m) if type(v) in (int, float, str)}
    c = collect_constants(m)
    pool = {(int, v) for v in c.ints} | {(float, v) for v in c.floats} | {(str, v) for v in c.strings}
    assert pool == lits


@pytest.mark.parametrize("path", corpus_paths(), ids=lambda p: p.stem)
def test_round_trip_corpus(path):
    m = parse_module(path.read_text())
    assert parse_module(render_module(m)) == m


# random expression trees for the print/parse round trip
_names = st.sampled_from(["a", "b", "c"])
_leaf = st.one_of(
    st.integers(-1000, 1000).map(n.Const),
    st.floats(-1e6, 1e6, allow_nan=False).map(n.Const),
    st.text("abz \"\\\n", max_size=4).map(n.Const),
    st.sampled_from([True, False, None]).map(n.Const),
    _names.map(n.Name),
)


def _compound(sub):
    return st.one_of(
        st.builds(n.BinOp, st.sampled_from(["+", "-", "*", "/", "%"]), sub, sub),
        st.builds(n.UnaryOp, st.sampled_from(["-", "not"]), sub),
        st.builds(n.BoolOp, st.sampled_from(["and", "or"]), sub, sub),
        st.builds(n.Call, st.sampled_from(["len", "abs"]), st.tuples(sub)),
    )


_exprs = st.recursive(_leaf, _compound, max_leaves=12)


@settings(max_examples=300)
@given(_exprs)
def test_expression_round_trip(e):
    assert parse_expression(render_expr(e)) == e


@settings(max_examples=100)
@given(st.lists(st.tuples(_names, _exprs), min_size=1, max_size=5))
def test_module_round_trip(assigns):
    body = tuple(n.Assign(t, v) for t, v in assigns)
    fn = n.FunctionDef("f", (n.Param("a", "int"), n.Param("b"), n.Param("c")), "int",
                       body + (n.Return(n.Name("a")),))
    m = n.ModuleAST("m", (fn,))
    assert parse_module(render_module(m), "m") == m
