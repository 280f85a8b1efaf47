"""Ground-truth manifold catalog for oracle and acceptance testing.

Each entry pairs a generator spec with closed-form truth tensors (metric,
Christoffel symbols, Ricci tensor of the metric, log-density).  The truths are
classical textbook values for the homogeneous entries; the conformal-torus
truths were derived symbolically offline (tools/derive_torus_truths.py) and
frozen into data/torus_conformal_truths.json so that a non-homogeneous test
case exists without trusting the code under test.

Every entry satisfies the regeneration identity: its (cometric, drift) pair
equals what the weighted Laplacian of (truth_metric, truth_log_rho) produces,
which the test suite checks numerically at random sample points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import SpecFormatError
from .exprs import CoefficientField, eval_jet, eval_scalar, parse_expr
from .generator import GeneratorSpec, WeightedForm

__all__ = [
    "CATALOG_NAMES",
    "ManifoldTruth",
    "flat_torus_with_density",
    "get_manifold",
    "sample_points",
    "spherical_to_stereographic_map",
]

CATALOG_NAMES = (
    "euclidean2",
    "euclidean3",
    "sphere2_spherical",
    "sphere2_stereographic",
    "hyperbolic_halfplane",
    "ou_gaussian1",
    "ou_gaussian2",
    "torus_conformal",
)


@dataclass(frozen=True)
class ManifoldTruth:
    """A named generator spec plus closed-form truth tensors on a chart box."""

    name: str
    spec: GeneratorSpec
    truth_metric: CoefficientField
    truth_christoffels: tuple  # asts indexed [k][i][j]
    christoffel_sources: tuple  # grammar strings, same indexing
    truth_ricci: CoefficientField  # Ricci tensor of the metric alone
    truth_log_rho: CoefficientField
    sample_box: tuple  # (lo, hi) per axis
    notes: str = ""

    @property
    def dim(self) -> int:
        return self.spec.dim

    def metric_at(self, x) -> np.ndarray:
        return self.truth_metric.values(x)

    def christoffels_at(self, x) -> np.ndarray:
        n = self.dim
        out = np.empty((n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    out[k, i, j] = eval_scalar(self.truth_christoffels[k][i][j], x)
        return out

    def ricci_at(self, x) -> np.ndarray:
        return self.truth_ricci.values(x)

    def log_rho_at(self, x) -> float:
        return self.truth_log_rho.values(x)

    def log_rho_hessian_at(self, x) -> np.ndarray:
        """Covariant Hessian of the log-density w.r.t. the truth connection."""
        jet = self.truth_log_rho.jets(x, 2)
        gam = self.christoffels_at(x)
        grad = jet.gradient()
        return jet.hessian() - np.einsum("kij,k->ij", gam, grad)

    def ricci_mu_at(self, x, sign: int) -> np.ndarray:
        """Ricci of the metric plus sign * covariant Hessian of log rho."""
        return self.ricci_at(x) + sign * self.log_rho_hessian_at(x)

    def metric_jets(self, x, order: int):
        return self.truth_metric.jets(x, order)

    def log_rho_jet(self, x, order: int):
        return eval_jet(self.truth_log_rho.asts, x, order)

    def to_dict(self) -> dict:
        out = self.spec.to_dict()
        out["truth"] = {
            "metric": [list(r) for r in self.truth_metric.sources],
            "christoffels": [[list(r) for r in m] for m in self.christoffel_sources],
            "ricci": [list(r) for r in self.truth_ricci.sources],
            "log_rho": self.truth_log_rho.sources,
            "sample_box": [list(b) for b in self.sample_box],
            "notes": self.notes,
        }
        return out


def _truth(name, spec, metric, christoffels, ricci, log_rho, box, notes=""):
    dim = spec.dim
    parsed = tuple(
        tuple(tuple(parse_expr(str(s), dim) for s in row) for row in mat) for mat in christoffels
    )
    return ManifoldTruth(
        name=name,
        spec=spec,
        truth_metric=CoefficientField.symmetric_matrix(metric, dim),
        truth_christoffels=parsed,
        christoffel_sources=tuple(tuple(tuple(str(s) for s in row) for row in m) for m in christoffels),
        truth_ricci=CoefficientField.symmetric_matrix(ricci, dim),
        truth_log_rho=CoefficientField.scalar(log_rho, dim),
        sample_box=tuple((float(a), float(b)) for a, b in box),
        notes=notes,
    )


def _spec(dim, cometric, drift, chart, metric, log_rho):
    return GeneratorSpec(
        dim,
        CoefficientField.symmetric_matrix(cometric, dim),
        CoefficientField.vector(drift, dim),
        chart=chart,
        weighted_form=WeightedForm(
            metric=CoefficientField.symmetric_matrix(metric, dim),
            log_density=CoefficientField.scalar(log_rho, dim),
        ),
    )


def _zeros(n):
    return [[["0"] * n for _ in range(n)] for _ in range(n)]


def _euclidean(name, n, box):
    eye = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    zero_mat = [["0"] * n for _ in range(n)]
    spec = _spec(n, eye, ["0"] * n, f"standard chart on R^{n}", eye, "0")
    return _truth(name, spec, eye, _zeros(n), zero_mat, "0", box, "flat, unweighted")


def _sphere_spherical():
    cometric = [["1", "0"], ["0", "1/sin(x1)^2"]]
    metric = [["1", "0"], ["0", "sin(x1)^2"]]
    spec = _spec(
        2, cometric, ["cos(x1)/sin(x1)", "0"],
        "unit sphere, x1=polar in (0, pi), x2=azimuth", metric, "0",
    )
    christoffels = [
        [["0", "0"], ["0", "-sin(x1)*cos(x1)"]],
        [["0", "cos(x1)/sin(x1)"], ["cos(x1)/sin(x1)", "0"]],
    ]
    return _truth(
        "sphere2_spherical", spec, metric, christoffels, metric, "0",
        [(0.3, np.pi - 0.3), (0.2, 6.0)],
        "constant curvature +1; Ricci equals the metric",
    )


def _sphere_stereographic():
    lam2 = "4/(1 + x1^2 + x2^2)^2"
    cometric = [["(1 + x1^2 + x2^2)^2/4", "0"], ["0", "(1 + x1^2 + x2^2)^2/4"]]
    metric = [[lam2, "0"], ["0", lam2]]
    spec = _spec(
        2, cometric, ["0", "0"],
        "unit sphere, stereographic from the north pole", metric, "0",
    )
    p1 = "-2*x1/(1 + x1^2 + x2^2)"
    p2 = "-2*x2/(1 + x1^2 + x2^2)"
    christoffels = [
        [[p1, p2], [p2, f"-({p1})"]],
        [[f"-({p2})", p1], [p1, p2]],
    ]
    return _truth(
        "sphere2_stereographic", spec, metric, christoffels, metric, "0",
        [(-1.2, 1.2), (-1.2, 1.2)],
        "same sphere in a second chart; feeds the tensoriality test",
    )


def _halfplane():
    cometric = [["x2^2", "0"], ["0", "x2^2"]]
    metric = [["1/x2^2", "0"], ["0", "1/x2^2"]]
    spec = _spec(2, cometric, ["0", "0"], "hyperbolic half-plane, x2 > 0", metric, "0")
    christoffels = [
        [["0", "-1/x2"], ["-1/x2", "0"]],
        [["1/x2", "0"], ["0", "-1/x2"]],
    ]
    ricci = [["-1/x2^2", "0"], ["0", "-1/x2^2"]]
    return _truth(
        "hyperbolic_halfplane", spec, metric, christoffels, ricci, "0",
        [(-2.0, 2.0), (0.5, 4.0)],
        "constant curvature -1; Ricci equals minus the metric",
    )


def _ou(name, n, box):
    eye = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    zero_mat = [["0"] * n for _ in range(n)]
    drift = [f"-x{i + 1}" for i in range(n)]
    log_rho = "-(" + " + ".join(f"x{i + 1}^2" for i in range(n)) + ")/2"
    spec = _spec(n, eye, drift, f"Ornstein-Uhlenbeck on R^{n}", eye, log_rho)
    return _truth(
        name, spec, eye, _zeros(n), zero_mat, log_rho, box,
        "flat metric with Gaussian weight",
    )


def _torus_conformal():
    data = json.loads(
        resources.files("gammaforge.data").joinpath("torus_conformal_truths.json").read_text()
    )
    spec = _spec(
        2, data["cometric"], data["drift"],
        "conformally flat 2-torus, coordinates modulo 2*pi", data["metric"], data["log_density"],
    )
    return _truth(
        "torus_conformal", spec, data["metric"], data["christoffels"], data["ricci"],
        data["log_density"], [(0.2, 6.1), (0.2, 6.1)],
        "non-constant curvature; truths frozen from the offline symbolic derivation",
    )


@lru_cache(maxsize=None)
def get_manifold(name: str) -> ManifoldTruth:
    builders = {
        "euclidean2": lambda: _euclidean("euclidean2", 2, [(-1.5, 1.5)] * 2),
        "euclidean3": lambda: _euclidean("euclidean3", 3, [(-1.5, 1.5)] * 3),
        "sphere2_spherical": _sphere_spherical,
        "sphere2_stereographic": _sphere_stereographic,
        "hyperbolic_halfplane": _halfplane,
        "ou_gaussian1": lambda: _ou("ou_gaussian1", 1, [(-2.0, 2.0)]),
        "ou_gaussian2": lambda: _ou("ou_gaussian2", 2, [(-2.0, 2.0)] * 2),
        "torus_conformal": _torus_conformal,
    }
    if name not in builders:
        raise SpecFormatError(f"unknown catalog manifold {name!r}; known: {', '.join(CATALOG_NAMES)}")
    return builders[name]()


def sample_points(truth: ManifoldTruth, count: int, seed: int) -> np.ndarray:
    """Seeded uniform sample of chart points inside the entry's box."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in truth.sample_box])
    hi = np.array([b[1] for b in truth.sample_box])
    return lo + (hi - lo) * rng.random((count, truth.dim))


def spherical_to_stereographic_map() -> CoefficientField:
    """Chart transition (polar, azimuth) -> stereographic plane coordinates."""
    return CoefficientField.vector(
        ["cos(0.5*x1)*cos(x2)/sin(0.5*x1)", "cos(0.5*x1)*sin(x2)/sin(0.5*x1)"], 2
    )


def flat_torus_with_density() -> ManifoldTruth:
    """Flat 2-torus carrying a non-constant weight; not part of the named catalog.

    Used by the measure-recovery and grid experiments, which need a spec whose
    drift is a genuine gradient of a non-trivial log-density.
    """
    eye = [["1", "0"], ["0", "1"]]
    zero_mat = [["0", "0"], ["0", "0"]]
    log_rho = "0.4*sin(x1)*cos(x2)"
    drift = ["0.4*cos(x1)*cos(x2)", "-0.4*sin(x1)*sin(x2)"]
    spec = _spec(2, eye, drift, "flat 2-torus with weight, coordinates modulo 2*pi", eye, log_rho)
    return _truth(
        "flat_torus_density", spec, eye, _zeros(2), zero_mat, log_rho,
        [(0.2, 6.1), (0.2, 6.1)], "flat metric, gradient drift from a periodic weight",
    )
