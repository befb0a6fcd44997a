"""The bundled dynamically typed subject language: parsing, rendering, and
static extraction of signatures and constants."""
from dyntest.lang.analysis import (
    ANY,
    BOOL,
    FLOAT,
    INT,
    NONE,
    STR,
    UNKNOWN,
    CallablePool,
    CallableSig,
    ConstantPool,
    TypeRef,
    class_type,
    collect_constants,
    collect_signatures,
    type_of_value,
)
from dyntest.lang.nodes import ModuleAST
from dyntest.lang.parser import ParseError, parse_module
from dyntest.lang.render import render_module

__all__ = [
    "ANY", "BOOL", "FLOAT", "INT", "NONE", "STR", "UNKNOWN",
    "CallablePool", "CallableSig", "ConstantPool", "ModuleAST", "ParseError",
    "TypeRef", "class_type", "collect_constants", "collect_signatures",
    "parse_module", "render_module", "type_of_value",
]
