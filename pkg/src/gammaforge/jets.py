"""Truncated multivariate Taylor jets: exact pointwise higher-order calculus.

A jet of order ``K`` at a base point ``x`` stores the raw partial derivatives
``d^a f(x)`` for every multi-index ``a`` with ``|a| <= K`` (not the Taylor
coefficients ``d^a f / a!``; downstream tensor formulas read raw partials).
Multiplication carries the binomial weights of the generalized Leibniz rule,
composition with a univariate function uses Taylor recomposition, and matrix
inversion corrects the value-part inverse order by order, so every operation
is exact at the stored truncation order.  Nothing here ever reads an entry
beyond the truncation order.

Storage is dense over the multi-indices in graded lexicographic order; with
dimension <= 4 and order <= 4 a jet holds at most 70 coefficients, so small
numpy arrays plus precomputed index tables are both the simplest and the
fastest representation.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import JetDomainError, JetShapeError, SingularJetMatrixError

# Nothing downstream needs derivatives beyond order 4 (third derivatives of a
# probe plus second derivatives of the coefficients is the deepest consumer).
MAX_ORDER = 4

MultiIndex = tuple  # exponents per axis, all >= 0

__all__ = [
    "MAX_ORDER",
    "Jet",
    "JetMatrix",
    "MultiIndex",
    "jet_add",
    "jet_compose_scalar",
    "jet_matrix_inverse",
    "jet_mul",
    "jet_space",
    "monomial_probe",
]


def _enumerate_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], slots: int, budget: int) -> None:
        if slots == 0:
            out.append(prefix)
            return
        for k in range(budget + 1):
            rec(prefix + (k,), slots - 1, budget - k)

    rec((), dim, order)
    out.sort(key=lambda a: (sum(a), a))
    return out


class JetSpace:
    """Index tables shared by all jets of a given (dimension, order).

    Holds the graded-lex multi-index enumeration, the position lookup, and
    lazily built tables for products and derivative shifts.  Instances are
    interned via :func:`jet_space`, so identity comparison is a valid
    same-shape check.
    """

    __slots__ = (
        "dim",
        "order",
        "indices",
        "index_of",
        "size",
        "grad_pos",
        "hess_pos",
        "_mul_table",
        "_shift_tables",
    )

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise JetShapeError(f"jet dimension must be >= 1, got {dim}")
        if not 0 <= order <= MAX_ORDER:
            raise JetShapeError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        self.dim = dim
        self.order = order
        self.indices = tuple(_enumerate_indices(dim, order))
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self.size = len(self.indices)
        unit = lambda i: tuple(1 if j == i else 0 for j in range(dim))
        self.grad_pos = (
            np.array([self.index_of[unit(i)] for i in range(dim)]) if order >= 1 else None
        )
        if order >= 2:
            hp = np.empty((dim, dim), dtype=int)
            for i in range(dim):
                for j in range(dim):
                    a = [0] * dim
                    a[i] += 1
                    a[j] += 1
                    hp[i, j] = self.index_of[tuple(a)]
            self.hess_pos = hp
        else:
            self.hess_pos = None
        self._mul_table = None
        self._shift_tables = {}

    def mul_table(self):
        """(out, ia, ib, coeff) arrays realizing d^g(fg) = sum C(g,a) d^a f d^(g-a) g."""
        if self._mul_table is None:
            outs, ias, ibs, coeffs = [], [], [], []
            for ia, a in enumerate(self.indices):
                da = sum(a)
                for ib, b in enumerate(self.indices):
                    if da + sum(b) > self.order:
                        continue
                    g = tuple(x + y for x, y in zip(a, b))
                    outs.append(self.index_of[g])
                    ias.append(ia)
                    ibs.append(ib)
                    c = 1.0
                    for x, y in zip(a, b):
                        c *= math.comb(x + y, x)
                    coeffs.append(c)
            self._mul_table = (
                np.array(outs, dtype=np.intp),
                np.array(ias, dtype=np.intp),
                np.array(ibs, dtype=np.intp),
                np.array(coeffs, dtype=float),
            )
        return self._mul_table

    def shift_table(self, axis: int) -> np.ndarray:
        """Positions in this space of a + e_axis for every a of the order-1-lower space."""
        tab = self._shift_tables.get(axis)
        if tab is None:
            lower = jet_space(self.dim, self.order - 1)
            tab = np.array(
                [
                    self.index_of[tuple(v + (1 if j == axis else 0) for j, v in enumerate(a))]
                    for a in lower.indices
                ],
                dtype=np.intp,
            )
            self._shift_tables[axis] = tab
        return tab


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


def _mul_coeffs(space: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out_idx, ia, ib, c = space.mul_table()
    return np.bincount(out_idx, weights=c * a[ia] * b[ib], minlength=space.size)


class Jet:
    """Raw partial derivatives of one smooth function at one base point."""

    __slots__ = ("space", "point", "coeffs")

    def __init__(self, space: JetSpace, point: tuple, coeffs: np.ndarray):
        self.space = space
        self.point = point
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, point, order: int) -> "Jet":
        point = tuple(float(p) for p in point)
        space = jet_space(len(point), order)
        coeffs = np.zeros(space.size)
        coeffs[0] = value
        return cls(space, point, coeffs)

    @classmethod
    def coordinate(cls, axis: int, point, order: int) -> "Jet":
        """Jet of the coordinate function x[axis] (zero-based axis)."""
        point = tuple(float(p) for p in point)
        space = jet_space(len(point), order)
        if not 0 <= axis < space.dim:
            raise JetShapeError(f"coordinate axis {axis} out of range for dim {space.dim}")
        if order < 1:
            raise JetShapeError("coordinate jets need order >= 1")
        coeffs = np.zeros(space.size)
        coeffs[0] = point[axis]
        coeffs[space.grad_pos[axis]] = 1.0
        return cls(space, point, coeffs)

    @classmethod
    def from_partials(cls, point, order: int, partials: dict) -> "Jet":
        """Build a jet from a {multi-index: value} map; unlisted entries are 0."""
        point = tuple(float(p) for p in point)
        space = jet_space(len(point), order)
        coeffs = np.zeros(space.size)
        for a, v in partials.items():
            a = tuple(int(k) for k in a)
            if a not in space.index_of:
                raise JetShapeError(f"multi-index {a} outside (dim={space.dim}, order={order})")
            coeffs[space.index_of[a]] = float(v)
        return cls(space, point, coeffs)

    # -- inspection --------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise JetShapeError("gradient needs order >= 1")
        return self.coeffs[self.space.grad_pos].copy()

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise JetShapeError("hessian needs order >= 2")
        return self.coeffs[self.space.hess_pos].copy()

    def deriv(self, alpha) -> float:
        """Partial derivative d^alpha at the base point."""
        a = tuple(int(k) for k in alpha)
        try:
            return float(self.coeffs[self.space.index_of[a]])
        except KeyError:
            raise JetShapeError(
                f"multi-index {a} outside (dim={self.dim}, order={self.order})"
            ) from None

    def partials(self) -> dict:
        return {a: float(v) for a, v in zip(self.space.indices, self.coeffs)}

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, point={self.point}, value={self.value:.6g})"

    # -- arithmetic --------------------------------------------------------

    def _require_same(self, other: "Jet") -> None:
        if self.space is not other.space or self.point != other.point:
            raise JetShapeError(
                f"jet mismatch: (dim={self.dim}, order={self.order}, point={self.point}) vs "
                f"(dim={other.dim}, order={other.order}, point={other.point})"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._require_same(other)
            return Jet(self.space, self.point, self.coeffs + other.coeffs)
        return Jet(self.space, self.point, _add_const(self.coeffs, float(other)))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._require_same(other)
            return Jet(self.space, self.point, self.coeffs - other.coeffs)
        return Jet(self.space, self.point, _add_const(self.coeffs, -float(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(self.space, self.point, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._require_same(other)
            return Jet(self.space, self.point, _mul_coeffs(self.space, self.coeffs, other.coeffs))
        return Jet(self.space, self.point, self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._require_same(other)
            return self * jet_compose_scalar("recip", other)
        return Jet(self.space, self.point, self.coeffs / float(other))

    def __rtruediv__(self, other):
        return jet_compose_scalar("recip", self) * float(other)

    def truncated(self, order: int) -> "Jet":
        """Copy of this jet truncated to a lower (or equal) order."""
        if order == self.order:
            return Jet(self.space, self.point, self.coeffs.copy())
        if order > self.order:
            raise JetShapeError(f"cannot extend order {self.order} jet to order {order}")
        space = jet_space(self.dim, order)
        return Jet(space, self.point, self.coeffs[: space.size].copy())

    def derivative(self, axis: int) -> "Jet":
        """Jet of d f / d x[axis], one order lower."""
        if self.order < 1:
            raise JetShapeError("derivative needs order >= 1")
        if not 0 <= axis < self.dim:
            raise JetShapeError(f"axis {axis} out of range for dim {self.dim}")
        lower = jet_space(self.dim, self.order - 1)
        return Jet(lower, self.point, self.coeffs[self.space.shift_table(axis)].copy())


def _add_const(coeffs: np.ndarray, c: float) -> np.ndarray:
    out = coeffs.copy()
    out[0] += c
    return out


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def monomial_probe(x, v, order: int) -> Jet:
    """Jet of the affine function y -> sum v[i] * (y[i] - x[i]).

    Value 0, coordinate gradient v, every higher coefficient 0.  Callers that
    need a vanishing *covariant* Hessian in a curved chart overwrite the
    second-order coefficients afterwards.
    """
    x = tuple(float(p) for p in x)
    v = np.asarray(v, dtype=float)
    if v.shape != (len(x),):
        raise JetShapeError(f"direction shape {v.shape} does not match point dim {len(x)}")
    if order < 2:
        raise JetShapeError("probe jets need order >= 2")
    space = jet_space(len(x), order)
    coeffs = np.zeros(space.size)
    coeffs[space.grad_pos] = v
    return Jet(space, x, coeffs)


# -- composition with univariate functions ----------------------------------

def _poly_eval(c, u):
    return sum(ck * u**k for k, ck in enumerate(c))


def _fn_derivative_values(name: str, u: float, order: int, exponent=None) -> list[float]:
    """[phi(u), phi'(u), ..., phi^(order)(u)] with domain checks."""
    if name == "sin":
        cycle = [math.sin(u), math.cos(u), -math.sin(u), -math.cos(u)]
        return [cycle[k % 4] for k in range(order + 1)]
    if name == "cos":
        cycle = [math.cos(u), -math.sin(u), -math.cos(u), math.sin(u)]
        return [cycle[k % 4] for k in range(order + 1)]
    if name == "exp":
        e = math.exp(u)
        return [e] * (order + 1)
    if name == "log":
        if u <= 0.0:
            raise JetDomainError(f"log of non-positive value {u}")
        out = [math.log(u)]
        for k in range(1, order + 1):
            out.append((-1.0) ** (k - 1) * math.factorial(k - 1) / u**k)
        return out
    if name == "sqrt":
        if u < 0.0 or (u == 0.0 and order >= 1):
            raise JetDomainError(f"sqrt of non-positive value {u} in a differentiated context")
        out = [math.sqrt(u)]
        c = 0.5
        for k in range(1, order + 1):
            out.append(c * u ** (0.5 - k))
            c *= 0.5 - k
        return out
    if name == "recip":
        if u == 0.0:
            raise JetDomainError("reciprocal of zero")
        return [(-1.0) ** k * math.factorial(k) / u ** (k + 1) for k in range(order + 1)]
    if name == "tanh":
        t = math.tanh(u)
        # d/du = (1 - t^2) d/dt applied to polynomials in t
        polys = [[0.0, 1.0]]  # t
        for _ in range(order):
            p = polys[-1]
            dp = [k * p[k] for k in range(1, len(p))]
            # multiply dp by (1 - t^2)
            q = [0.0] * (len(dp) + 2)
            for k, ck in enumerate(dp):
                q[k] += ck
                q[k + 2] -= ck
            polys.append(q)
        return [_poly_eval(p, t) for p in polys]
    if name == "pow_const":
        if exponent is None:
            raise JetShapeError("pow_const needs an exponent")
        c = float(exponent)
        if u <= 0.0 and not (c.is_integer() and u != 0.0):
            raise JetDomainError(f"pow_const base {u} outside smooth domain for exponent {c}")
        out = []
        fac = 1.0
        for k in range(order + 1):
            out.append(fac * u ** (c - k))
            fac *= c - k
        return out
    raise JetShapeError(f"unknown univariate function {name!r}")


UNIVARIATE_FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "tanh", "pow_const", "recip")


def jet_compose_scalar(phi: str, a: Jet, exponent=None) -> Jet:
    """Jet of phi(f) from the jet of f, exact to the truncation order.

    Taylor recomposition: with u the zero-value perturbation part of ``a``
    (so u^m contributes nothing below total degree m), the result is
    ``sum_m phi^(m)(a.value)/m! * u^m`` truncated at the jet order, which is
    the Faa di Bruno expansion assembled by jet products.
    """
    d = _fn_derivative_values(phi, a.value, a.order, exponent=exponent)
    space = a.space
    out = np.zeros(space.size)
    out[0] = d[0]
    if a.order == 0:
        return Jet(space, a.point, out)
    u = a.coeffs.copy()
    u[0] = 0.0
    power = u
    fact = 1.0
    for m in range(1, a.order + 1):
        fact *= m
        out = out + (d[m] / fact) * power
        if m < a.order:
            power = _mul_coeffs(space, power, u)
    return Jet(space, a.point, out)


# -- jet matrices ------------------------------------------------------------

class JetMatrix:
    """Dense matrix whose entries are jets sharing one space and base point."""

    __slots__ = ("entries", "rows", "cols", "space", "point")

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise JetShapeError("jet matrix must be non-empty")
        first = rows[0][0]
        for r in rows:
            if len(r) != len(rows[0]):
                raise JetShapeError("ragged jet matrix")
            for e in r:
                first._require_same(e)
        self.entries = rows
        self.rows = len(rows)
        self.cols = len(rows[0])
        self.space = first.space
        self.point = first.point

    @classmethod
    def identity(cls, n: int, point, order: int) -> "JetMatrix":
        one = Jet.constant(1.0, point, order)
        zero = Jet.constant(0.0, point, order)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    def value(self) -> np.ndarray:
        return np.array([[e.value for e in r] for r in self.entries])

    def __matmul__(self, other: "JetMatrix") -> "JetMatrix":
        if self.cols != other.rows:
            raise JetShapeError("jet matrix shape mismatch in product")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                s = self.entries[i][0] * other.entries[0][j]
                for k in range(1, self.cols):
                    s = s + self.entries[i][k] * other.entries[k][j]
                row.append(s)
            out.append(row)
        return JetMatrix(out)

    def __add__(self, other: "JetMatrix") -> "JetMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise JetShapeError("jet matrix shape mismatch in sum")
        return JetMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "JetMatrix") -> "JetMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise JetShapeError("jet matrix shape mismatch in difference")
        return JetMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def max_abs_coeff(self) -> float:
        return max(float(np.max(np.abs(e.coeffs))) for r in self.entries for e in r)


def jet_matrix_inverse(m: JetMatrix, singularity_tol: float = 1e-12) -> JetMatrix:
    """Inverse jet matrix, exact to the truncation order.

    Inverts the value part numerically, then applies the truncated Neumann
    correction ``inv(M) = sum_k (-B0 D)^k B0`` with ``B0 = inv(M0)`` and
    ``D = M - M0``.  Each D factor raises the minimal total degree by one, so
    ``order + 1`` terms reproduce the inverse exactly at the stored order.
    """
    if m.rows != m.cols:
        raise JetShapeError("cannot invert a non-square jet matrix")
    a0 = m.value()
    sing = np.linalg.svd(a0, compute_uv=False)
    if sing[-1] <= singularity_tol:
        raise SingularJetMatrixError("jet matrix value part is singular", float(sing[-1]))
    b0_val = np.linalg.inv(a0)
    order = m.space.order
    point = m.point
    n = m.rows
    b0 = JetMatrix(
        [[Jet.constant(b0_val[i, j], point, order) for j in range(n)] for i in range(n)]
    )
    if order == 0:
        return b0
    delta = m - JetMatrix(
        [[Jet.constant(a0[i, j], point, order) for j in range(n)] for i in range(n)]
    )
    step = b0 @ delta  # minimal degree 1
    out = b0
    term = b0
    for _ in range(order):
        term = step @ term
        term = JetMatrix([[-e for e in r] for r in term.entries])
        out = out + term
    return out
