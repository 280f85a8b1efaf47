"""Classical differential-geometry oracle.

Everything here is computed from declared metric/log-density fields through
textbook coordinate formulas (Koszul Christoffels from metric derivatives,
Riemann from Christoffel derivatives, Ricci by contraction, covariant
Hessians, weighted Laplacian).  It deliberately never calls the carre du
champ reconstruction pipeline: each side of every comparison stays
independent, and the oracle reads a spec's declared weighted form, never the
pipeline's recovered tensors.

Index and sign conventions, pinned by the constant-curvature catalog entries
rather than any external source:

    R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
                + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    Ric_{jk}  = R^i_{ijk}

which yields Ric = +g on the unit sphere and Ric = -g on the hyperbolic
half-plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError, JetShapeError, UnsupportedSpecError
from .exprs import CoefficientField, eval_jet
from .generator import SPD_MIN_EIGENVALUE, GeneratorSpec, gamma2
from .jets import Jet, JetMatrix, jet_matrix_inverse

__all__ = [
    "ConnectionPoint",
    "MetricFieldJets",
    "RiemannPoint",
    "bochner_residual",
    "christoffel_jets",
    "christoffels_classical",
    "covariant_hessian",
    "hilbert_schmidt_sq",
    "resolve_bochner_sign",
    "ricci_from_riemann",
    "ricci_mu_matrix",
    "riemann_tensor",
    "weighted_laplacian",
]


@dataclass(frozen=True)
class ConnectionPoint:
    """Christoffel symbols at one point, indexed [k, i, j] (upper index first)."""

    point: tuple
    christoffels: np.ndarray
    raw_asymmetry: float = 0.0     # antisymmetric defect before symmetrization
    condition_number: float = 1.0  # of the co-metric value matrix in the solve


@dataclass(frozen=True)
class RiemannPoint:
    """Curvature components R^l_{ijk}, stored as components[l, i, j, k]."""

    point: tuple
    components: np.ndarray


class MetricFieldJets:
    """Jets of the metric components g_ij at one point (symmetric per order)."""

    __slots__ = ("entries", "point", "order", "dim")

    def __init__(self, entries):
        self.entries = [list(r) for r in entries]
        first = self.entries[0][0]
        self.point = first.point
        self.order = first.order
        self.dim = len(self.entries)
        for row in self.entries:
            for e in row:
                first._require_same(e)

    @classmethod
    def from_field(cls, field: CoefficientField, x, order: int) -> "MetricFieldJets":
        return cls(field.jets(x, order))

    @classmethod
    def from_cometric_jets(cls, cometric_entries) -> "MetricFieldJets":
        """Invert co-metric jets so that dg and d^2 g become available."""
        inv = jet_matrix_inverse(JetMatrix(cometric_entries))
        return cls(inv.entries)

    def value(self) -> np.ndarray:
        return np.array([[e.value for e in row] for row in self.entries])

    def inverse_value(self) -> np.ndarray:
        g = self.value()
        min_eig = float(np.linalg.eigvalsh(g)[0])
        if min_eig <= SPD_MIN_EIGENVALUE:
            raise DegenerateMetricError("metric not positive definite", min_eig, self.point)
        return np.linalg.inv(g)

    def partials(self) -> np.ndarray:
        """D[p, i, j] = d_p g_ij from the first-order jet data."""
        if self.order < 1:
            raise JetShapeError("metric jets of order >= 1 required")
        n = self.dim
        out = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                out[:, i, j] = self.entries[i][j].gradient()
        return out


def christoffels_classical(gjets: MetricFieldJets) -> ConnectionPoint:
    """Koszul formula Gamma^k_ij = g^{kl}(d_i g_jl + d_j g_il - d_l g_ij) / 2."""
    ginv = gjets.inverse_value()
    d = gjets.partials()
    # t[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    t = np.einsum("ijl->lij", d) + np.einsum("jil->lij", d) - d
    gam = 0.5 * np.einsum("kl,lij->kij", ginv, t)
    return ConnectionPoint(
        point=gjets.point,
        christoffels=gam,
        condition_number=float(np.linalg.cond(gjets.value())),
    )


def christoffel_jets(gjets: MetricFieldJets):
    """Christoffel symbols as jets one order below the metric jets."""
    if gjets.order < 1:
        raise JetShapeError("metric jets of order >= 1 required")
    m = gjets.order - 1
    ginv = jet_matrix_inverse(JetMatrix(gjets.entries)).entries
    n = gjets.dim
    dg = [[[gjets.entries[i][j].derivative(p) for j in range(n)] for i in range(n)] for p in range(n)]
    out = []
    for k in range(n):
        mat = []
        for i in range(n):
            row = []
            for j in range(n):
                s = None
                for l in range(n):
                    term = dg[i][j][l] + dg[j][i][l] - dg[l][i][j]
                    term = ginv[k][l].truncated(m) * term
                    s = term if s is None else s + term
                row.append(0.5 * s)
            mat.append(row)
        out.append(mat)
    return out


def riemann_tensor(gjets: MetricFieldJets) -> RiemannPoint:
    """Curvature from Christoffel jets; needs second metric derivatives."""
    if gjets.order < 2:
        raise JetShapeError("metric jets of order >= 2 required for curvature")
    n = gjets.dim
    gj = christoffel_jets(gjets)
    gam = np.array([[[gj[k][i][j].value for j in range(n)] for i in range(n)] for k in range(n)])
    dgam = np.empty((n, n, n, n))  # dgam[p, k, i, j] = d_p Gamma^k_ij
    for k in range(n):
        for i in range(n):
            for j in range(n):
                dgam[:, k, i, j] = gj[k][i][j].gradient()
    r = np.empty((n, n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    r[l, i, j, k] = (
                        dgam[i, l, j, k]
                        - dgam[j, l, i, k]
                        + gam[l, i, :] @ gam[:, j, k]
                        - gam[l, j, :] @ gam[:, i, k]
                    )
    return RiemannPoint(point=gjets.point, components=r)


def ricci_from_riemann(riemann: RiemannPoint) -> np.ndarray:
    """Contract the upper index against the first lower index."""
    return np.einsum("iijk->jk", riemann.components)


def covariant_hessian(f: Jet, connection) -> np.ndarray:
    """(d_i d_j f - Gamma^k_ij d_k f) at the base point."""
    gam = connection.christoffels if isinstance(connection, ConnectionPoint) else np.asarray(connection)
    if f.order < 2:
        raise JetShapeError("covariant Hessian needs a jet of order >= 2")
    return f.hessian() - np.einsum("kij,k->ij", gam, f.gradient())


def weighted_laplacian(gjets: MetricFieldJets, log_rho: Jet, f: Jet) -> float:
    """trace_g of the covariant Hessian plus the log-density drift term."""
    conn = christoffels_classical(gjets)
    ginv = gjets.inverse_value()
    hess = covariant_hessian(f, conn)
    return float(
        np.einsum("ij,ij->", ginv, hess)
        + np.einsum("ij,i,j->", ginv, log_rho.gradient(), f.gradient())
    )


def hilbert_schmidt_sq(ginv: np.ndarray, a: np.ndarray, b: np.ndarray | None = None) -> float:
    """g^{ia} g^{jb} A_ij B_ab, the metric Hilbert-Schmidt pairing."""
    b = a if b is None else b
    return float(np.einsum("ia,jb,ij,ab->", ginv, ginv, a, b))


def ricci_mu_matrix(gjets: MetricFieldJets, log_rho: Jet, sign: int) -> np.ndarray:
    """Ricci of the metric plus sign times the covariant Hessian of log rho."""
    ric = ricci_from_riemann(riemann_tensor(gjets))
    conn = christoffels_classical(gjets)
    return ric + sign * covariant_hessian(log_rho, conn)


def _require_weighted_form(spec: GeneratorSpec):
    if spec.weighted_form is None:
        raise UnsupportedSpecError(
            "bochner residual needs a spec with a declared weighted form"
        )
    return spec.weighted_form


def bochner_residual(spec: GeneratorSpec, f: Jet, sign: int) -> float:
    """gamma2(f) - |covariant Hessian|^2_HS - (Ric + sign * Hess(log rho))(grad f, grad f).

    The sign argument selects the orientation of the log-density Hessian term;
    exactly one choice makes the residual vanish for every probe, which is how
    the convention is resolved empirically.
    """
    wf = _require_weighted_form(spec)
    if f.order < 3:
        raise JetShapeError("bochner residual needs a jet of order >= 3")
    gjets = MetricFieldJets.from_field(wf.metric, f.point, 2)
    log_rho = eval_jet(wf.log_density.asts, f.point, 2)
    conn = christoffels_classical(gjets)
    ginv = gjets.inverse_value()
    hess_f = covariant_hessian(f, conn)
    grad_up = ginv @ f.gradient()
    ric_mu = ricci_mu_matrix(gjets, log_rho, sign)
    value = gamma2(spec, f)
    return float(value - hilbert_schmidt_sq(ginv, hess_f) - grad_up @ ric_mu @ grad_up)


@dataclass(frozen=True)
class BochnerSignResolution:
    sign: int
    max_abs_residual: dict  # sign -> worst |residual| over the probe set


def resolve_bochner_sign(
    spec: GeneratorSpec,
    sample_box,
    count: int = 100,
    seed: int = 0,
    threshold: float = 1e-8,
) -> BochnerSignResolution:
    """Pick the log-density Hessian sign that zeroes the Bochner residual.

    Draws seeded random order-3 jets (coefficients bounded away from zero so
    the discriminating term cannot vanish by accident) and evaluates the
    residual for both signs; the winner must pass ``threshold`` everywhere.
    """
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in sample_box], dtype=float)
    hi = np.array([b[1] for b in sample_box], dtype=float)
    worst = {1: 0.0, -1: 0.0}
    for _ in range(count):
        x = tuple(lo + (hi - lo) * rng.random(spec.dim))
        f = Jet.constant(0.0, x, 3)
        coeffs = rng.uniform(0.3, 1.0, f.coeffs.shape) * rng.choice([-1.0, 1.0], f.coeffs.shape)
        f.coeffs[:] = coeffs
        for sign in (1, -1):
            worst[sign] = max(worst[sign], abs(bochner_residual(spec, f, sign)))
    resolved = min(worst, key=worst.get)
    if worst[resolved] > threshold:
        raise UnsupportedSpecError(
            f"no sign convention satisfies the Bochner identity (best residual {worst[resolved]:.3e})"
        )
    return BochnerSignResolution(sign=resolved, max_abs_residual=worst)
