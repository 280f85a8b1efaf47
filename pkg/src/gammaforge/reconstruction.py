"""Recovery of the weighted Riemannian structure from a generator alone.

Every quantity here is produced by applying the carre du champ (and its
iterated form) to probe jets, never by reading a spec's declared metric or
density: the co-metric is gamma on coordinate probes, the connection comes
out of the nested-gamma Koszul identity

    (gamma(f, gamma(g, h)) + gamma(g, gamma(f, h)) - gamma(h, gamma(f, g))) / 2
        = Hess(h)(grad f, grad g),

the Bakry-Emery Ricci form comes from iterated-gamma probes whose covariant
Hessian vanishes, the drift vector solves <Z, grad h> = L h - Lap_g h on
coordinate functions, and the log-density is a line integral of the lowered
drift.  The classical-formula oracle lives in a separate module and is only
ever used to check these reconstructions, not to produce them.

On coordinate triples the nested-gamma identity reads

    S[i, j, m] := rhs[i, j, m] - G^{ip} d_p G^{jm} = G^{ip} G^{mq} C^j_{pq}

with C the Christoffel symbols, so each C^j is obtained from the positive
definite sandwich ``G X G = S^j`` (solved here by multiplying with the
recovered metric, the factored inverse of G, on both sides).  The solve is
done on jets so that first derivatives of the Christoffel symbols - needed
for the closedness check of the lowered drift - come out exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import dijkstra

from .errors import (
    DegenerateMetricError,
    JetShapeError,
    NonSymmetricGeneratorError,
    SingularMapError,
    UnsupportedSpecError,
)
from .exprs import CoefficientField, eval_jet
from .generator import SPD_MIN_EIGENVALUE, GeneratorSpec, apply_L, gamma, gamma2, gamma2_polarized
from .jets import Jet, JetMatrix, jet_matrix_inverse, jet_space, monomial_probe
from .oracle import ConnectionPoint, MetricFieldJets, christoffels_classical, covariant_hessian, hilbert_schmidt_sq

__all__ = [
    "ConjugacyReport",
    "DensityReport",
    "MetricPoint",
    "RicciPoint",
    "check_conjugacy",
    "closedness_residual",
    "drift_one_form_jets",
    "geometry_report",
    "intrinsic_distance",
    "recover_christoffels_intrinsic",
    "recover_cometric",
    "recover_drift",
    "recover_log_density",
    "recover_metric",
    "recover_ricci_mu",
]

CLOSEDNESS_TOL = 1e-6


@dataclass(frozen=True)
class MetricPoint:
    point: tuple
    cometric: np.ndarray
    metric: np.ndarray
    min_eigenvalue: float


@dataclass(frozen=True)
class RicciPoint:
    point: tuple
    ric_mu: np.ndarray
    convention_sign: int  # orientation of the log-density Hessian when compared classically


@dataclass(frozen=True)
class DensityReport:
    base: tuple
    targets: tuple
    drift_Z: np.ndarray                 # recovered Z at base and targets, rows aligned
    one_form_closedness: float          # max |d_i Zb_j - d_j Zb_i| over path samples
    log_rho: np.ndarray                 # log rho(target) - log rho(base), per target
    path_independence_residual: float   # straight vs axis-parallel path discrepancy


@dataclass(frozen=True)
class ConjugacyReport:
    samples: tuple
    gamma_residuals: np.ndarray
    metric_pullback_residuals: np.ndarray
    measure_ratio_variation: float

    def max_residual(self) -> float:
        return float(
            max(
                float(np.max(self.gamma_residuals)),
                float(np.max(self.metric_pullback_residuals)),
                self.measure_ratio_variation,
            )
        )


# -- pointwise frames ------------------------------------------------------------

class _Frame:
    """All gamma-derived pointwise data at one point, to one derivative depth."""

    __slots__ = (
        "point",
        "n",
        "depth",
        "cometric_jets",
        "cometric",
        "metric",
        "min_eigenvalue",
        "metric_jets",
        "christoffel_jets",
        "christoffels",
        "raw_asymmetry",
        "condition_number",
    )


def _frame(spec: GeneratorSpec, x, depth: int) -> _Frame:
    """Recover co-metric, metric and connection jets of order ``depth`` at x.

    At depth 0 every jet in the nested-gamma solve carries only its value, so
    the identical algebra is run directly on the gamma-jet values and
    gradients with numpy; depth 1 keeps full jet arithmetic so that first
    derivatives of the Christoffel symbols come out exactly.
    """
    key = ("reconstruction-frame", tuple(float(p) for p in x), depth)
    cached = spec._cache.get(key)
    if cached is not None:
        return cached

    n = spec.dim
    fr = _Frame()
    fr.point = key[1]
    fr.n = n
    fr.depth = depth
    coords = spec.coordinate_jets(fr.point, depth + 2)

    gj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            gj[i][j] = gj[j][i] = gamma(spec, coords[i], coords[j])  # order depth + 1
    fr.cometric_jets = gj
    fr.cometric = np.array([[e.value for e in row] for row in gj])
    eigs = np.linalg.eigvalsh(fr.cometric)
    fr.min_eigenvalue = float(eigs[0])
    if fr.min_eigenvalue <= SPD_MIN_EIGENVALUE:
        raise DegenerateMetricError(
            "recovered co-metric not positive definite", fr.min_eigenvalue, fr.point
        )
    fr.condition_number = float(eigs[-1] / eigs[0])

    if depth == 0:
        _solve_connection_values(fr, gj)
    else:
        _solve_connection_jets(fr, gj, depth)

    if len(spec._cache) > 8192:
        spec._cache.clear()
    spec._cache[key] = fr
    return fr


def _solve_connection_values(fr: _Frame, gj) -> None:
    """Depth-0 connection solve on gamma-jet values and gradients."""
    n = fr.n
    big_g = fr.cometric
    d = np.empty((n, n, n))  # d[p, j, m] = d_p G^jm
    for j in range(n):
        for m in range(j, n):
            d[:, j, m] = d[:, m, j] = gj[j][m].gradient()
    metric = np.linalg.inv(big_g)
    fr.metric = 0.5 * (metric + metric.T)
    fr.metric_jets = None

    # rhs[i,j,m] = (gamma(x^i, G^jm) + gamma(x^j, G^im) - gamma(x^m, G^ij)) / 2,
    # with gamma on a coordinate probe collapsing to G^{aq} d_q(.)
    gd = np.einsum("aq,qjm->ajm", big_g, d)
    # index maps: gd[j,i,m] -> axes (1,0,2); gd[m,i,j] -> axes (1,2,0)
    rhs = 0.5 * (gd + np.transpose(gd, (1, 0, 2)) - np.transpose(gd, (1, 2, 0)))
    s = rhs - gd  # s[i,j,m] = (G C^j G)[i,m]

    christoffels = np.empty((n, n, n))
    raw_asym = 0.0
    for j in range(n):
        raw = fr.metric @ s[:, j, :] @ fr.metric
        raw_asym = max(raw_asym, float(np.max(np.abs(raw - raw.T))))
        christoffels[j] = 0.5 * (raw + raw.T)
    fr.christoffels = christoffels
    fr.christoffel_jets = None
    fr.raw_asymmetry = raw_asym


def _solve_connection_jets(fr: _Frame, gj, depth: int) -> None:
    """Jet-valued connection solve; same algebra with truncated jet products."""
    n = fr.n
    g_trunc = [[gj[i][j].truncated(depth) for j in range(n)] for i in range(n)]
    metric_jets = jet_matrix_inverse(JetMatrix(g_trunc))
    fr.metric_jets = metric_jets.entries
    fr.metric = metric_jets.value()

    dg = [[[gj[j][m].derivative(p) for m in range(n)] for j in range(n)] for p in range(n)]

    def coord_gamma(a: int, j: int, m: int) -> Jet:
        # gamma(x^a, G^jm) collapses to sum_q G^{aq} d_q G^{jm} on a coordinate probe
        out = g_trunc[a][0] * dg[0][j][m]
        for q in range(1, n):
            out = out + g_trunc[a][q] * dg[q][j][m]
        return out

    rhs = [[[None] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            for m in range(n):
                r = 0.5 * (coord_gamma(i, j, m) + coord_gamma(j, i, m) - coord_gamma(m, i, j))
                rhs[i][j][m] = rhs[j][i][m] = r

    christoffel_jets = []
    raw_asym = 0.0
    for j in range(n):
        sj = JetMatrix(
            [[rhs[i][j][m] - coord_gamma(i, j, m) for m in range(n)] for i in range(n)]
        )
        cj = (metric_jets @ sj) @ metric_jets
        vals = cj.value()
        raw_asym = max(raw_asym, float(np.max(np.abs(vals - vals.T))))
        sym = [
            [0.5 * (cj.entries[p][q] + cj.entries[q][p]) for q in range(n)]
            for p in range(n)
        ]
        christoffel_jets.append(sym)
    fr.christoffel_jets = christoffel_jets
    fr.raw_asymmetry = raw_asym
    fr.christoffels = np.array(
        [[[christoffel_jets[k][p][q].value for q in range(n)] for p in range(n)] for k in range(n)]
    )


# -- metric ------------------------------------------------------------------------

def recover_cometric(spec: GeneratorSpec, x) -> np.ndarray:
    """Co-metric as gamma on coordinate probes (the generator is never read directly)."""
    coords = spec.coordinate_jets(x, 2)
    n = spec.dim
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = gamma(spec, coords[i], coords[j]).value
    min_eig = float(np.linalg.eigvalsh(out)[0])
    if min_eig <= SPD_MIN_EIGENVALUE:
        raise DegenerateMetricError("recovered co-metric not positive definite", min_eig, x)
    return out


def recover_metric(spec: GeneratorSpec, x) -> MetricPoint:
    """Invert the recovered co-metric by symmetric positive-definite factorization."""
    cometric = recover_cometric(spec, x)
    cho = scipy.linalg.cho_factor(cometric)
    metric = scipy.linalg.cho_solve(cho, np.eye(spec.dim))
    metric = 0.5 * (metric + metric.T)
    return MetricPoint(
        point=tuple(float(p) for p in x),
        cometric=cometric,
        metric=metric,
        min_eigenvalue=float(np.linalg.eigvalsh(cometric)[0]),
    )


# -- connection ----------------------------------------------------------------------

def recover_christoffels_intrinsic(spec: GeneratorSpec, x) -> ConnectionPoint:
    """Christoffel symbols from nested gamma alone (values from the jet solve)."""
    fr = _frame(spec, x, depth=0)
    return ConnectionPoint(
        point=fr.point,
        christoffels=fr.christoffels,
        raw_asymmetry=fr.raw_asymmetry,
        condition_number=fr.condition_number,
    )


# -- Bakry-Emery Ricci form ------------------------------------------------------------

def _ricci_probe(fr: _Frame, direction: int) -> Jet:
    """Order-3 probe with grad = e_direction and vanishing covariant Hessian."""
    w = fr.metric[:, direction]  # coordinate differential that raises to e_direction
    probe = monomial_probe(fr.point, w, 3)
    hess = np.einsum("kpq,k->pq", fr.christoffels, w)
    space = probe.space
    for p in range(fr.n):
        for q in range(p, fr.n):
            probe.coeffs[space.hess_pos[p, q]] = hess[p, q]
    return probe


def recover_ricci_mu(spec: GeneratorSpec, x, convention_sign: int = -1) -> RicciPoint:
    """Bakry-Emery Ricci form from iterated-gamma probes plus polarization.

    Probes are affine in the coordinates corrected so their covariant Hessian
    vanishes at x (the chart-free substitute for normal coordinates); on such
    probes the iterated carre du champ evaluates the Ricci form directly.
    """
    fr = _frame(spec, x, depth=0)
    n = fr.n
    probes = [_ricci_probe(fr, i) for i in range(n)]
    ric = np.empty((n, n))
    for i in range(n):
        ric[i, i] = gamma2(spec, probes[i])
        for j in range(i + 1, n):
            ric[i, j] = ric[j, i] = gamma2_polarized(spec, probes[i], probes[j])
    return RicciPoint(point=fr.point, ric_mu=ric, convention_sign=convention_sign)


# -- drift and density ------------------------------------------------------------------

def recover_drift(spec: GeneratorSpec, x) -> np.ndarray:
    """Drift vector Z with <Z, grad h>_g = L h - Lap_g h on coordinate probes.

    On h = x^j this is Z^j = L x^j + G^{ik} C^j_{ik}; the Laplace-Beltrami
    part is assembled from the recovered metric and connection.
    """
    fr = _frame(spec, x, depth=0)
    coords = spec.coordinate_jets(fr.point, 2)
    laplace_correction = np.einsum("ik,jik->j", fr.cometric, fr.christoffels)
    b = np.array([apply_L(spec, c).value for c in coords])
    return b + laplace_correction


def drift_one_form_jets(spec: GeneratorSpec, x) -> list:
    """Order-1 jets of the lowered drift Zb_q = g_qj Z^j (exact derivatives)."""
    fr = _frame(spec, x, depth=1)
    n = fr.n
    coords = spec.coordinate_jets(fr.point, 3)
    z = []
    for j in range(n):
        zj = apply_L(spec, coords[j])  # order 1
        for i in range(n):
            for k in range(n):
                zj = zj + fr.cometric_jets[i][k].truncated(1) * fr.christoffel_jets[j][i][k]
        z.append(zj)
    return [
        sum((fr.metric_jets[q][j] * z[j] for j in range(1, n)), fr.metric_jets[q][0] * z[0])
        for q in range(n)
    ]


def closedness_residual(spec: GeneratorSpec, x) -> float:
    """max |d_i Zb_j - d_j Zb_i| of the lowered drift at one point."""
    zb = drift_one_form_jets(spec, x)
    n = spec.dim
    worst = 0.0
    grads = [j.gradient() for j in zb]
    for i in range(n):
        for j in range(i + 1, n):
            worst = max(worst, abs(grads[i][j] - grads[j][i]))
    return worst


def _gauss_legendre_line(spec, a, b, segments, nodes):
    """Line integral of the lowered drift along the straight segment a -> b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for s in range(segments):
        lo = a + (b - a) * (s / segments)
        hi = a + (b - a) * ((s + 1) / segments)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for t, w in zip(xs, ws):
            p = mid + t * half
            zb = _lowered_drift_value(spec, p)
            total += w * float(zb @ half)
    return total


def _lowered_drift_value(spec, x) -> np.ndarray:
    fr = _frame(spec, x, depth=0)
    z = recover_drift(spec, x)
    return fr.metric @ z


def recover_log_density(
    spec: GeneratorSpec,
    base,
    targets,
    segments: int = 32,
    nodes: int = 16,
    closedness_samples: int = 9,
    closedness_tol: float = CLOSEDNESS_TOL,
) -> DensityReport:
    """Log-density differences by line-integrating the lowered drift.

    Straight chart segments with composite Gauss-Legendre quadrature; the
    closedness of the lowered drift is sampled along each segment first and a
    violation aborts with the no-invariant-density error.  A second,
    axis-parallel path per target measures path independence.  All points
    must lie in one simply connected chart region.
    """
    base = np.asarray(base, dtype=float)
    targets = [np.asarray(t, dtype=float) for t in targets]
    worst_closedness = closedness_residual(spec, base)
    for t in targets:
        for lam in np.linspace(0.0, 1.0, closedness_samples):
            worst_closedness = max(
                worst_closedness, closedness_residual(spec, base + lam * (t - base))
            )
    if worst_closedness > closedness_tol:
        raise NonSymmetricGeneratorError(worst_closedness)

    deltas = np.array([_gauss_legendre_line(spec, base, t, segments, nodes) for t in targets])

    path_residual = 0.0
    for t, straight in zip(targets, deltas):
        bent = 0.0
        corner_from = base.copy()
        for axis in range(spec.dim):
            corner_to = corner_from.copy()
            corner_to[axis] = t[axis]
            if abs(corner_to[axis] - corner_from[axis]) > 0:
                bent += _gauss_legendre_line(spec, corner_from, corner_to, segments, nodes)
            corner_from = corner_to
        path_residual = max(path_residual, abs(bent - straight))

    drift_rows = np.array([recover_drift(spec, base)] + [recover_drift(spec, t) for t in targets])
    return DensityReport(
        base=tuple(base),
        targets=tuple(tuple(t) for t in targets),
        drift_Z=drift_rows,
        one_form_closedness=float(worst_closedness),
        log_rho=deltas,
        path_independence_residual=float(path_residual),
    )


# -- intrinsic distance -------------------------------------------------------------------

def intrinsic_distance(spec: GeneratorSpec, box, resolution: int, x, y) -> float:
    """Graph-geodesic realization of the diffusion distance on a chart box.

    The recovered metric weighs the edges of a regular grid graph
    (8-neighbor in 2 dimensions) by the Riemannian length of the straight
    edge, with the metric sampled at the edge midpoint; endpoints snap to the
    nearest grid node.  This approximates the variational distance from
    below/above only up to the directional bias of the edge set, so callers
    should treat it as a documented approximation and check refinement
    convergence rather than an exact dual value.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    n = spec.dim
    if len(box) != n:
        raise JetShapeError(f"box has {len(box)} axes for a dimension-{n} spec")
    if n not in (1, 2):
        raise UnsupportedSpecError("grid distance supports 1- and 2-dimensional charts")
    if resolution < 2:
        raise UnsupportedSpecError("resolution must be at least 2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    for p in (x, y):
        if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
            raise UnsupportedSpecError(f"point {tuple(p)} outside the chart box")

    axes = [np.linspace(b[0], b[1], resolution + 1) for b in box]
    if n == 1:
        nodes = axes[0][:, None]
        shape = (resolution + 1,)
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])
        shape = (resolution + 1, resolution + 1)

    def node_index(p):
        idx = [int(round((p[d] - lo[d]) / (hi[d] - lo[d]) * resolution)) for d in range(n)]
        return int(np.ravel_multi_index(idx, shape))

    if n == 1:
        directions = [(1,)]
    else:
        directions = [(1, 0), (0, 1), (1, 1), (1, -1)]

    idx_grid = np.arange(nodes.shape[0]).reshape(shape)
    rows, cols, mids, deltas = [], [], [], []
    for d in directions:
        src = idx_grid
        dst = idx_grid
        for axis, step in enumerate(d):
            if step == 1:
                src = np.take(src, range(0, src.shape[axis] - 1), axis=axis)
                dst = np.take(dst, range(1, dst.shape[axis]), axis=axis)
            elif step == -1:
                src = np.take(src, range(1, src.shape[axis]), axis=axis)
                dst = np.take(dst, range(0, dst.shape[axis] - 1), axis=axis)
        src = src.ravel()
        dst = dst.ravel()
        rows.append(src)
        cols.append(dst)
        mids.append(0.5 * (nodes[src] + nodes[dst]))
        deltas.append(nodes[dst] - nodes[src])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    mids = np.concatenate(mids)
    deltas = np.concatenate(deltas)

    cometric = spec.cometric_values_grid(mids.T)  # (edges, n, n), SPD-checked
    metric = np.linalg.inv(cometric)
    lengths = np.sqrt(np.einsum("ei,eij,ej->e", deltas, metric, deltas))

    graph = scipy.sparse.csr_matrix(
        (lengths, (rows, cols)), shape=(nodes.shape[0], nodes.shape[0])
    )
    dist = dijkstra(graph, directed=False, indices=node_index(x))
    return float(dist[node_index(y)])


# -- conjugacy / isometry ---------------------------------------------------------------------

def check_conjugacy(
    spec_a: GeneratorSpec,
    spec_b: GeneratorSpec,
    chart_map: CoefficientField,
    samples,
    jacobian_tol: float = 1e-12,
    with_density: bool = True,
) -> ConjugacyReport:
    """Residuals of gamma-conjugacy, metric pullback, and measure matching.

    For each sample x with image y = Phi(x): (i) gamma_A on the pulled-back
    coordinate probes versus the recovered co-metric of B at y, (ii) the
    recovered metric of A versus the Jacobian pullback of the recovered
    metric of B, and (iii) the variation over samples of the log ratio
    between the recovered reference densities after pullback (a true
    conjugacy matches measures up to one global constant).
    """
    if chart_map.kind != "vector" or chart_map.dim != spec_a.dim:
        raise JetShapeError("chart map must be a vector field over the source chart")
    samples = [tuple(float(v) for v in s) for s in samples]
    if not samples:
        raise JetShapeError("need at least one sample point")

    gamma_res, metric_res = [], []
    images, log_jac = [], []
    for x in samples:
        jets = [eval_jet(a, x, 1) for a in chart_map.asts]
        y = tuple(j.value for j in jets)
        jac = np.array([j.gradient() for j in jets])  # jac[a, i] = d Phi^a / d x^i
        det = float(np.linalg.det(jac))
        if abs(det) < jacobian_tol:
            raise SingularMapError(f"chart map Jacobian singular at {x} (det {det:.3e})")
        images.append(y)
        log_jac.append(np.log(abs(det)))

        n = spec_b.dim
        g_b_point = recover_metric(spec_b, y)
        worst = 0.0
        for a_i in range(n):
            for b_i in range(a_i, n):
                pulled = gamma(spec_a, jets[a_i].truncated(1), jets[b_i].truncated(1)).value
                worst = max(worst, abs(pulled - g_b_point.cometric[a_i, b_i]))
        gamma_res.append(worst)

        g_a = recover_metric(spec_a, x).metric
        pullback = jac.T @ g_b_point.metric @ jac
        metric_res.append(float(np.max(np.abs(g_a - pullback))))

    variation = 0.0
    if with_density:
        base, rest = samples[0], samples[1:]
        d_a = recover_log_density(spec_a, base, rest) if rest else None
        d_b = recover_log_density(spec_b, images[0], images[1:]) if rest else None
        ratios = []
        for k, x in enumerate(samples):
            da = 0.0 if k == 0 else float(d_a.log_rho[k - 1])
            db = 0.0 if k == 0 else float(d_b.log_rho[k - 1])
            half_logdet_a = 0.5 * np.log(np.linalg.det(recover_metric(spec_a, x).metric))
            half_logdet_b = 0.5 * np.log(np.linalg.det(recover_metric(spec_b, images[k]).metric))
            ratios.append((db + half_logdet_b + log_jac[k]) - (da + half_logdet_a))
        variation = float(np.max(ratios) - np.min(ratios)) if len(ratios) > 1 else 0.0

    return ConjugacyReport(
        samples=tuple(samples),
        gamma_residuals=np.array(gamma_res),
        metric_pullback_residuals=np.array(metric_res),
        measure_ratio_variation=variation,
    )


# -- full per-point report ---------------------------------------------------------------------

def geometry_report(
    spec: GeneratorSpec,
    points,
    convention_sign: int = -1,
    seed: int = 0,
    probe_order: int = 3,
) -> dict:
    """Per-point reconstruction output with self-consistency diagnostics.

    Diagnostics: the smallest recovered co-metric eigenvalue, the gap between
    the nested-gamma connection and the classical formula applied to the
    recovered metric jets, and the defect of the curvature identity
    gamma2 = |Hess|^2 + Ric(grad, grad) on a seeded random probe evaluated
    entirely with recovered tensors.
    """
    if not 2 <= probe_order <= 4:
        raise JetShapeError("probe order must lie in [2, 4]")
    rng = np.random.default_rng(seed)
    records = []
    worst_closedness = 0.0
    for x in points:
        fr = _frame(spec, x, depth=0)
        conn = recover_christoffels_intrinsic(spec, x)
        ric = recover_ricci_mu(spec, x, convention_sign=convention_sign)
        drift = recover_drift(spec, x)
        worst_closedness = max(worst_closedness, closedness_residual(spec, x))

        gjets = MetricFieldJets(
            jet_matrix_inverse(JetMatrix(fr.cometric_jets)).entries
        )
        classical = christoffels_classical(gjets)
        koszul_gap = float(np.max(np.abs(conn.christoffels - classical.christoffels)))

        probe = Jet.constant(0.0, fr.point, max(3, probe_order))
        probe.coeffs[:] = rng.uniform(-1.0, 1.0, probe.coeffs.shape)
        hess = covariant_hessian(probe, conn)
        grad_up = fr.cometric @ probe.gradient()
        bochner_gap = abs(
            gamma2(spec, probe)
            - hilbert_schmidt_sq(fr.cometric, hess)
            - float(grad_up @ ric.ric_mu @ grad_up)
        )

        records.append(
            {
                "point": list(fr.point),
                "cometric": fr.cometric.tolist(),
                "metric": fr.metric.tolist(),
                "christoffels": conn.christoffels.tolist(),
                "ric_mu": ric.ric_mu.tolist(),
                "drift_Z": drift.tolist(),
                "diagnostics": {
                    "min_eig": fr.min_eigenvalue,
                    "koszul_crosscheck": koszul_gap,
                    "bochner_residual": bochner_gap,
                },
            }
        )
    return {
        "points": records,
        "metadata": {
            "convention_sign": convention_sign,
            "seed": seed,
            "probe_order": probe_order,
            "max_drift_closedness": worst_closedness,
        },
    }
