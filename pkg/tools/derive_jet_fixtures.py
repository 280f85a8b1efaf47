#!/usr/bin/env python3
"""Generate frozen oracle values for univariate-composition jet tests.

Differentiates a catalog of compositions phi(p(x)) symbolically with sympy
and writes every partial derivative up to total order 4, together with the
partials of the inner polynomial itself, to tests/fixtures/jet_compositions.json.
The test suite rebuilds the inner jet from the frozen polynomial partials and
checks the composition against the frozen composed partials, so the oracle
never touches the jet arithmetic under test.

Run from the repository root:  python tools/derive_jet_fixtures.py
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import sympy as sp

ORDER = 4


def partials(expr, syms, point):
    vals = {}
    for alpha in itertools.product(range(ORDER + 1), repeat=len(syms)):
        if sum(alpha) > ORDER:
            continue
        d = expr
        for s, k in zip(syms, alpha):
            if k:
                d = sp.diff(d, s, k)
        v = d.subs(dict(zip(syms, point)))
        vals[",".join(map(str, alpha))] = float(sp.N(v, 30))
    return vals


def main() -> None:
    x, y = sp.symbols("x y")

    cases = []

    def add(name, phi, inner, syms, point):
        cases.append(
            {
                "name": name,
                "phi": phi,
                "dim": len(syms),
                "point": [float(p) for p in point],
                "inner_partials": partials(inner, syms, point),
                "composed_partials": partials(
                    {
                        "sin": sp.sin,
                        "cos": sp.cos,
                        "exp": sp.exp,
                        "log": sp.log,
                        "sqrt": sp.sqrt,
                        "tanh": sp.tanh,
                    }[phi](inner),
                    syms,
                    point,
                ),
            }
        )

    # sin/cos of polynomials
    add("sin_sq", "sin", x**2, (x,), (1.0,))
    add("sin_cubic", "sin", x**3 - 2 * x, (x,), (0.7,))
    add("cos_quad", "cos", 2 * x**2 + x, (x,), (-0.4,))
    add("sin_xy", "sin", x * y + y**2, (x, y), (0.5, -0.3))
    add("cos_mix", "cos", x**2 * y - y, (x, y), (0.8, 0.6))
    add("sin_shift", "sin", x + sp.Rational(1, 4), (x,), (0.2,))
    add("cos_poly4", "cos", x**4 - x**2, (x,), (1.1,))

    # exp of polynomials
    add("exp_lin", "exp", 3 * x - 1, (x,), (0.3,))
    add("exp_sq", "exp", -(x**2) / 2, (x,), (1.5,))
    add("exp_xy", "exp", x * y, (x, y), (0.4, 0.9))
    add("exp_poly3", "exp", x**3 / 3 - x, (x,), (-0.6,))
    add("exp_2d", "exp", x**2 + y**2 - x * y, (x, y), (0.2, 0.5))

    # log of 1 + polynomial (kept positive at the sample points)
    add("log_1p_sq", "log", 1 + x**2, (x,), (0.9,))
    add("log_1p_quartic", "log", 1 + x**4 / 4, (x,), (1.2,))
    add("log_1p_xy", "log", 1 + x**2 + y**2, (x, y), (0.3, -0.7))
    add("log_shift", "log", 2 + x, (x,), (0.5,))

    # sqrt / tanh round out the function library
    add("sqrt_1p_sq", "sqrt", 1 + x**2, (x,), (0.8,))
    add("sqrt_2d", "sqrt", 2 + x * y, (x, y), (0.6, 0.4))
    add("tanh_poly", "tanh", x**2 - x, (x,), (0.9,))
    add("tanh_2d", "tanh", x + y**3, (x, y), (0.1, 0.7))

    out = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "jet_compositions.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"order": ORDER, "cases": cases}, indent=1))
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
