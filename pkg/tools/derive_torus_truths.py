#!/usr/bin/env python3
"""Derive and freeze closed-form truth tensors for the conformal-torus entry.

The metric is g = exp(2*phi) * I on the flat 2-torus with
phi = 0.3 * sin(x1) * cos(x2).  This script computes the Christoffel symbols,
the Ricci tensor (via the 2-d conformal curvature formula K = -exp(-2 phi)
* laplacian(phi), cross-checked against the full Riemann contraction), and
the Laplace-Beltrami drift, entirely in sympy.  It verifies each derived
component against a tidy hand-written expression string in the coefficient
grammar and writes those strings to src/gammaforge/data/torus_conformal_truths.json.

Run from the repository root:  python tools/derive_torus_truths.py
"""

from __future__ import annotations

import json
from pathlib import Path

import sympy as sp

x1, x2 = sp.symbols("x1 x2")
X = (x1, x2)

phi = sp.Rational(3, 10) * sp.sin(x1) * sp.cos(x2)
g = sp.eye(2) * sp.exp(2 * phi)
ginv = g.inv()
n = 2


def christoffel(k, i, j):
    return sp.simplify(
        sum(
            ginv[k, l] * (sp.diff(g[j, l], X[i]) + sp.diff(g[i, l], X[j]) - sp.diff(g[i, j], X[l]))
            for l in range(n)
        )
        / 2
    )


Gamma = [[[christoffel(k, i, j) for j in range(n)] for i in range(n)] for k in range(n)]


def riemann(l, i, j, k):
    term = sp.diff(Gamma[l][j][k], X[i]) - sp.diff(Gamma[l][i][k], X[j])
    term += sum(Gamma[l][i][m] * Gamma[m][j][k] - Gamma[l][j][m] * Gamma[m][i][k] for m in range(n))
    return sp.simplify(term)


ricci = sp.Matrix(
    [[sp.simplify(sum(riemann(i, i, j, k) for i in range(n))) for k in range(n)] for j in range(n)]
)

# conformal 2-d cross-check: K = -exp(-2 phi) * laplacian(phi), Ric = K * g
K = sp.simplify(-sp.exp(-2 * phi) * (sp.diff(phi, x1, 2) + sp.diff(phi, x2, 2)))
assert sp.simplify(ricci - K * g) == sp.zeros(2, 2), "Riemann contraction disagrees with conformal formula"

# Laplace-Beltrami drift b^k = -g^{ij} Gamma^k_{ij} (vanishes for 2-d conformal metrics)
drift = [sp.simplify(-sum(ginv[i, j] * Gamma[k][i][j] for i in range(n) for j in range(n))) for k in range(n)]
assert drift == [0, 0], "conformal 2-d Laplace-Beltrami drift should vanish"


def check(expr, grammar_string):
    """Assert a grammar string matches the sympy derivation, then return it."""
    ref = sp.sympify(grammar_string.replace("^", "**"), locals={"x1": x1, "x2": x2})
    ref = sp.nsimplify(ref, rational=True)
    assert sp.simplify(sp.nsimplify(expr, rational=True) - ref) == 0, grammar_string
    return grammar_string


p1 = "0.3*cos(x1)*cos(x2)"      # d phi / d x1
p2 = "-0.3*sin(x1)*sin(x2)"     # d phi / d x2

payload = {
    "phi": check(phi, "0.3*sin(x1)*cos(x2)"),
    "metric": [
        [check(g[0, 0], "exp(0.6*sin(x1)*cos(x2))"), "0"],
        ["0", check(g[1, 1], "exp(0.6*sin(x1)*cos(x2))")],
    ],
    "cometric": [
        [check(ginv[0, 0], "exp(-0.6*sin(x1)*cos(x2))"), "0"],
        ["0", check(ginv[1, 1], "exp(-0.6*sin(x1)*cos(x2))")],
    ],
    "drift": ["0", "0"],
    "log_density": "0",
    "christoffels": [
        [
            [check(Gamma[0][0][0], p1), check(Gamma[0][0][1], p2)],
            [check(Gamma[0][1][0], p2), check(Gamma[0][1][1], "-0.3*cos(x1)*cos(x2)")],
        ],
        [
            [check(Gamma[1][0][0], "0.3*sin(x1)*sin(x2)"), check(Gamma[1][0][1], p1)],
            [check(Gamma[1][1][0], p1), check(Gamma[1][1][1], p2)],
        ],
    ],
    "ricci": [
        [check(ricci[0, 0], "0.6*sin(x1)*cos(x2)"), "0"],
        ["0", check(ricci[1, 1], "0.6*sin(x1)*cos(x2)")],
    ],
    "gauss_curvature": check(K, "0.6*sin(x1)*cos(x2)*exp(-0.6*sin(x1)*cos(x2))"),
}

out = Path(__file__).resolve().parents[1] / "src" / "gammaforge" / "data" / "torus_conformal_truths.json"
out.parent.mkdir(parents=True, exist_ok=True)
out.write_text(json.dumps(payload, indent=1))
print(f"verified and wrote {out}")
