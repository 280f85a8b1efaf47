"""Diffusion generators in coefficient form and their first/second-order calculus.

A generator is ``L f = sum_ij G^ij d_i d_j f + sum_i b^i d_i f`` with a
symmetric positive-definite co-metric field ``G`` and a drift field ``b``,
both given as parsed coefficient expressions.  The carre du champ is computed
by the exact coordinate contraction

    gamma(f, g) = sum_ij (d_i f) (d_j g) G^ij,

which has fewer cancellations than the generator combination
``(L(fg) - f Lg - g Lf) / 2``; the latter is provided as a cross-check mode
and the two are asserted equal in the test suite.  The iterated form is

    gamma2(f) = L(gamma(f, f)) / 2 - gamma(f, Lf),

evaluated through jets so that no finite-difference error enters: gamma(f, f)
is itself assembled as a jet from the co-metric jets, then fed back to L.
All operations are pure; a spec is immutable after construction and caches
coefficient jets per (point, order) internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateMetricError, JetShapeError, SpecFormatError
from .exprs import CoefficientField
from .jets import Jet, jet_space

__all__ = [
    "GeneratorSpec",
    "ProbeFunction",
    "WeightedForm",
    "apply_L",
    "chain_rule_residual",
    "gamma",
    "gamma2",
    "gamma2_polarized",
    "gamma_via_generator",
]

# a co-metric value matrix counts as degenerate below this eigenvalue
SPD_MIN_EIGENVALUE = 1e-10

# local representatives of smooth test functions are plain jets
ProbeFunction = Jet


@dataclass(frozen=True)
class WeightedForm:
    """Declared weighted-manifold truth a spec was generated from (if any)."""

    metric: CoefficientField       # symmetric matrix g_ij
    log_density: CoefficientField  # scalar log rho


class GeneratorSpec:
    """Immutable coefficient-form generator with per-point jet caches."""

    __slots__ = ("dim", "cometric", "drift", "chart", "weighted_form", "_cache")

    def __init__(
        self,
        dim: int,
        cometric: CoefficientField,
        drift: CoefficientField,
        chart: str = "",
        weighted_form: WeightedForm | None = None,
    ):
        if cometric.kind != "matrix" or cometric.dim != dim:
            raise SpecFormatError("cometric must be a symmetric matrix field of the spec dimension")
        if drift.kind != "vector" or drift.dim != dim:
            raise SpecFormatError("drift must be a vector field of the spec dimension")
        self.dim = dim
        self.cometric = cometric
        self.drift = drift
        self.chart = chart
        self.weighted_form = weighted_form
        self._cache = {}

    # -- construction / serialization --------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        try:
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError):
            raise SpecFormatError("spec needs an integer 'dim'") from None
        if not 1 <= dim <= 9:
            raise SpecFormatError(f"spec dimension must be in [1, 9], got {dim}")
        for key in ("cometric", "drift"):
            if key not in data:
                raise SpecFormatError(f"spec is missing {key!r}")
        cometric = CoefficientField.symmetric_matrix(data["cometric"], dim)
        drift = CoefficientField.vector(data["drift"], dim)
        wf_data = data.get("weighted_form")
        weighted_form = None
        if wf_data is not None:
            if "metric" not in wf_data or "log_density" not in wf_data:
                raise SpecFormatError("weighted_form needs 'metric' and 'log_density'")
            weighted_form = WeightedForm(
                metric=CoefficientField.symmetric_matrix(wf_data["metric"], dim),
                log_density=CoefficientField.scalar(wf_data["log_density"], dim),
            )
        return cls(dim, cometric, drift, str(data.get("chart", "")), weighted_form)

    @classmethod
    def load(cls, path) -> "GeneratorSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as err:
            raise SpecFormatError(f"invalid JSON in {path}: {err}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "chart": self.chart,
            "cometric": [list(row) for row in self.cometric.sources],
            "drift": list(self.drift.sources),
            "weighted_form": None,
        }
        if self.weighted_form is not None:
            out["weighted_form"] = {
                "metric": [list(row) for row in self.weighted_form.metric.sources],
                "log_density": self.weighted_form.log_density.sources,
            }
        return out

    # -- coefficient evaluation ---------------------------------------------

    def _jets(self, x, order: int):
        """(cometric jets, drift jets) at a point, cached and SPD-checked."""
        key = (tuple(float(p) for p in x), order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        g_jets = self.cometric.jets(key[0], order)
        values = np.array([[e.value for e in row] for row in g_jets])
        min_eig = float(np.linalg.eigvalsh(values)[0])
        if min_eig <= SPD_MIN_EIGENVALUE:
            raise DegenerateMetricError("co-metric not positive definite", min_eig, key[0])
        b_jets = self.drift.jets(key[0], order)
        if len(self._cache) > 8192:
            self._cache.clear()
        entry = (g_jets, b_jets, values, min_eig)
        self._cache[key] = entry
        return entry

    def cometric_jets(self, x, order: int):
        return self._jets(x, order)[0]

    def drift_jets(self, x, order: int):
        return self._jets(x, order)[1]

    def cometric_matrix(self, x) -> np.ndarray:
        return self._jets(x, 0)[2].copy()

    def min_eigenvalue(self, x) -> float:
        return self._jets(x, 0)[3]

    def cometric_values_grid(self, coords) -> np.ndarray:
        """Vectorized co-metric values over points; coords shape (dim, m).

        Batch counterpart of evaluating ``gamma`` on coordinate probes: for
        coordinate functions the contraction collapses to the co-metric
        entries themselves, which is what makes a vectorized path possible.
        """
        vals = self.cometric.values_grid(coords)  # (n, n, m)
        stacked = np.moveaxis(vals, -1, 0)  # (m, n, n)
        min_eigs = np.linalg.eigvalsh(stacked)[:, 0]
        worst = int(np.argmin(min_eigs))
        if min_eigs[worst] <= SPD_MIN_EIGENVALUE:
            raise DegenerateMetricError(
                "co-metric not positive definite",
                float(min_eigs[worst]),
                np.asarray(coords)[:, worst],
            )
        return stacked

    def coordinate_jets(self, x, order: int) -> list[Jet]:
        return [Jet.coordinate(i, tuple(float(p) for p in x), order) for i in range(self.dim)]


# -- calculus operations -------------------------------------------------------

def _shared_point(*jets: Jet):
    first = jets[0]
    for other in jets[1:]:
        if other.dim != first.dim or other.point != first.point:
            raise JetShapeError("jets must share dimension and base point")
    return first.point


def apply_L(spec: GeneratorSpec, f: Jet) -> Jet:
    """Jet of L f, two orders lower than f."""
    if f.order < 2:
        raise JetShapeError(f"apply_L needs a jet of order >= 2, got {f.order}")
    if f.dim != spec.dim:
        raise JetShapeError(f"jet dimension {f.dim} does not match spec dimension {spec.dim}")
    m = f.order - 2
    g_jets = spec.cometric_jets(f.point, m)
    b_jets = spec.drift_jets(f.point, m)
    n = spec.dim
    df = [f.derivative(i) for i in range(n)]
    out = Jet(jet_space(n, m), f.point, np.zeros(jet_space(n, m).size))
    for i in range(n):
        for j in range(i, n):
            w = 1.0 if i == j else 2.0
            out = out + (w * g_jets[i][j]) * df[i].derivative(j)
        out = out + b_jets[i] * df[i].truncated(m)
    return out


def gamma(spec: GeneratorSpec, f: Jet, g: Jet) -> Jet:
    """Carre du champ as the exact co-metric contraction, one order lower."""
    _shared_point(f, g)
    if f.order < 1 or g.order < 1:
        raise JetShapeError("gamma needs jets of order >= 1")
    if f.dim != spec.dim:
        raise JetShapeError(f"jet dimension {f.dim} does not match spec dimension {spec.dim}")
    m = min(f.order, g.order) - 1
    g_jets = spec.cometric_jets(f.point, m)
    n = spec.dim
    df = [f.derivative(i).truncated(m) for i in range(n)]
    dg = [g.derivative(i).truncated(m) for i in range(n)]
    out = Jet(jet_space(n, m), f.point, np.zeros(jet_space(n, m).size))
    for i in range(n):
        out = out + g_jets[i][i] * (df[i] * dg[i])
        for j in range(i + 1, n):
            out = out + g_jets[i][j] * (df[i] * dg[j] + df[j] * dg[i])
    return out


def gamma_via_generator(spec: GeneratorSpec, f: Jet, g: Jet) -> Jet:
    """Cross-check mode: (L(fg) - f Lg - g Lf) / 2, two orders lower."""
    _shared_point(f, g)
    m0 = min(f.order, g.order)
    if m0 < 2:
        raise JetShapeError("generator-form gamma needs jets of order >= 2")
    ft, gt = f.truncated(m0), g.truncated(m0)
    lfg = apply_L(spec, ft * gt)
    m = m0 - 2
    return 0.5 * (lfg - ft.truncated(m) * apply_L(spec, gt) - gt.truncated(m) * apply_L(spec, ft))


def gamma2(spec: GeneratorSpec, f: Jet) -> float:
    """Iterated carre du champ L(gamma(f))/2 - gamma(f, Lf) at the base point."""
    if f.order < 3:
        raise JetShapeError(f"gamma2 needs a jet of order >= 3, got {f.order}")
    carre = gamma(spec, f, f)
    half_l_carre = 0.5 * apply_L(spec, carre).value
    return half_l_carre - gamma(spec, f, apply_L(spec, f)).value


def gamma2_polarized(spec: GeneratorSpec, f: Jet, g: Jet) -> float:
    """Symmetric bilinear form (gamma2(f+g) - gamma2(f-g)) / 4."""
    _shared_point(f, g)
    if f.order != g.order:
        raise JetShapeError("polarization needs jets of equal order")
    return 0.25 * (gamma2(spec, f + g) - gamma2(spec, f - g))


def chain_rule_residual(
    spec: GeneratorSpec,
    composed: Jet,
    phi_grad,
    parts: list[Jet],
    g: Jet,
) -> float:
    """|gamma(composed, g) - sum_a phi_grad[a] * gamma(parts[a], g)| at the point.

    ``composed`` is the jet of the outer function applied to the tuple
    ``parts`` (built by the caller with jet arithmetic) and ``phi_grad`` holds
    the outer partial derivatives evaluated at the parts' values.
    """
    phi_grad = np.asarray(phi_grad, dtype=float)
    if phi_grad.shape != (len(parts),):
        raise JetShapeError("phi_grad length must match the number of inner functions")
    _shared_point(composed, g, *parts)
    lhs = gamma(spec, composed, g).value
    rhs = sum(w * gamma(spec, p, g).value for w, p in zip(phi_grad, parts))
    return abs(lhs - rhs)
