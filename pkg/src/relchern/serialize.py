"""Text round-trip for polynomials and forms.

The printed format is a Python-style arithmetic expression, e.g.
``3/4*x1**2*y - dx1*dy``.  Parsing walks the ``ast`` of such an expression, so
parentheses and products of sums are also accepted on input.  Products of
forms are wedge products taken in the written order.
"""

from __future__ import annotations

import ast

from gmpy2 import mpq

from .exact import Poly, Ring
from .forms import Chart, Form, form_to_str


class ParseError(ValueError):
    pass


def _evaluate(text: str, leaf):
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return mpq(node.value)
        if isinstance(node, ast.Name):
            return leaf(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                if isinstance(a, mpq) and not isinstance(b, mpq):
                    return b * a
                return a * b
            if isinstance(node.op, ast.Div):
                if not isinstance(b, mpq):
                    raise ParseError("division only by rational constants")
                if not b:
                    raise ParseError("division by zero")
                return a * (1 / b)
            if isinstance(node.op, ast.Pow):
                if not isinstance(b, mpq) or b.denominator != 1 or b < 0:
                    raise ParseError("exponents must be non-negative integers")
                return a ** int(b)
        raise ParseError(f"unsupported syntax in {text!r}")

    return ev(tree)


def parse_poly(text: str, ring: Ring) -> Poly:
    def leaf(name):
        if name == "x0" or name in ring.names:
            return ring.var(name)
        raise ParseError(f"unknown variable {name!r}")

    v = _evaluate(text, leaf)
    return v if isinstance(v, Poly) else ring.const(v)


def parse_form(text: str, chart: Chart) -> Form:
    ring = chart.ring

    def leaf(name):
        if name.startswith("d") and len(name) > 1:
            base = name[1:]
            if base == "x0" or (base in ring.names and ring.index(base) < chart.ngens):
                return chart.d(base)
            raise ParseError(f"unknown differential {name!r}")
        if name == "x0" or name in ring.names:
            return chart.var(name)
        raise ParseError(f"unknown variable {name!r}")

    v = _evaluate(text, leaf)
    if isinstance(v, Form):
        return v
    return chart.const(v)


def poly_to_str(f: Poly) -> str:
    return str(f)


__all__ = ["ParseError", "parse_poly", "parse_form", "poly_to_str", "form_to_str"]
