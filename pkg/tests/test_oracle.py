"""Classical-geometry oracle against constant-curvature and frozen truths."""

import math

import numpy as np
import pytest

from gammaforge.catalog import get_manifold, sample_points
from gammaforge.generator import apply_L
from gammaforge.jets import Jet
from gammaforge.oracle import (
    MetricFieldJets,
    bochner_residual,
    christoffels_classical,
    covariant_hessian,
    resolve_bochner_sign,
    ricci_from_riemann,
    ricci_mu_matrix,
    riemann_tensor,
    weighted_laplacian,
)

SPHERE = get_manifold("sphere2_spherical")
HALFPLANE = get_manifold("hyperbolic_halfplane")
EUC2 = get_manifold("euclidean2")
EUC3 = get_manifold("euclidean3")
OU1 = get_manifold("ou_gaussian1")
OU2 = get_manifold("ou_gaussian2")
TORUS = get_manifold("torus_conformal")

CURVED = [SPHERE, HALFPLANE, TORUS, get_manifold("sphere2_stereographic")]
ALL = CURVED + [EUC2, EUC3, OU1, OU2]


def metric_jets(truth, x, order=2):
    return MetricFieldJets.from_field(truth.truth_metric, x, order)


def random_jet_at(rng, dim, x, order=3):
    j = Jet.constant(0.0, tuple(x), order)
    j.coeffs[:] = rng.uniform(-1, 1, j.coeffs.shape)
    return j


# -- Christoffel symbols -------------------------------------------------------

def test_christoffels_flat_zero():
    conn = christoffels_classical(metric_jets(EUC3, (0.1, -0.4, 0.8)))
    assert np.max(np.abs(conn.christoffels)) == 0.0


def test_christoffels_sphere_values():
    theta = math.pi / 3
    conn = christoffels_classical(metric_jets(SPHERE, (theta, 1.0)))
    gam = conn.christoffels
    assert gam[0, 1, 1] == pytest.approx(-math.sin(theta) * math.cos(theta), abs=1e-12)
    assert gam[0, 1, 1] == pytest.approx(-math.sqrt(3) / 4, abs=1e-12)
    assert gam[1, 0, 1] == pytest.approx(1 / math.tan(theta), abs=1e-12)
    assert gam[1, 0, 1] == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_christoffels_halfplane_values():
    conn = christoffels_classical(metric_jets(HALFPLANE, (0.0, 2.0)))
    gam = conn.christoffels
    assert gam[0, 0, 1] == pytest.approx(-0.5)
    assert gam[1, 0, 0] == pytest.approx(0.5)
    assert gam[1, 1, 1] == pytest.approx(-0.5)


def test_christoffels_match_catalog_truths():
    rng_points = {t.name: sample_points(t, 25, seed=41) for t in ALL}
    for truth in ALL:
        for x in rng_points[truth.name]:
            conn = christoffels_classical(metric_jets(truth, x))
            assert np.max(np.abs(conn.christoffels - truth.christoffels_at(x))) < 1e-10, truth.name


def test_metric_compatibility():
    # d_k g_ij - Gamma^m_ki g_mj - Gamma^m_kj g_im = 0
    for truth in CURVED:
        for x in sample_points(truth, 10, seed=42):
            gj = metric_jets(truth, x)
            conn = christoffels_classical(gj)
            g = gj.value()
            dg = gj.partials()
            defect = (
                dg
                - np.einsum("mki,mj->kij", conn.christoffels, g)
                - np.einsum("mkj,im->kij", conn.christoffels, g)
            )
            assert np.max(np.abs(defect)) < 1e-9, truth.name


# -- Riemann and Ricci ----------------------------------------------------------

def test_riemann_flat_zero():
    r = riemann_tensor(metric_jets(EUC2, (0.3, 0.4)))
    assert np.max(np.abs(r.components)) == 0.0


@pytest.mark.parametrize("truth,expected_k", [(SPHERE, 1.0), (HALFPLANE, -1.0)])
def test_constant_sectional_curvature(truth, expected_k):
    for x in sample_points(truth, 10, seed=43):
        gj = metric_jets(truth, x)
        r = riemann_tensor(gj)
        g = gj.value()
        r_1212 = g[0] @ r.components[:, 0, 1, 1]  # lower the first index
        k = r_1212 / np.linalg.det(g)
        assert k == pytest.approx(expected_k, abs=1e-9), truth.name


def test_riemann_antisymmetry_and_bianchi():
    for truth in CURVED + [EUC3]:
        for x in sample_points(truth, 10, seed=44):
            r = riemann_tensor(metric_jets(truth, x)).components
            assert np.max(np.abs(r + np.transpose(r, (0, 2, 1, 3)))) < 1e-9
            bianchi = r + np.transpose(r, (0, 2, 3, 1)) + np.transpose(r, (0, 3, 1, 2))
            assert np.max(np.abs(bianchi)) < 1e-9, truth.name


def test_ricci_values_and_catalog_truths():
    theta = math.pi / 3
    ric = ricci_from_riemann(riemann_tensor(metric_jets(SPHERE, (theta, 1.0))))
    assert np.allclose(ric, np.diag([1.0, math.sin(theta) ** 2]), atol=1e-10)
    assert np.allclose(ric, np.diag([1.0, 0.75]), atol=1e-10)

    ric = ricci_from_riemann(riemann_tensor(metric_jets(HALFPLANE, (0.0, 2.0))))
    assert np.allclose(ric, -np.diag([0.25, 0.25]), atol=1e-10)

    # the frozen conformal-torus Ricci agrees with the runtime Riemann contraction
    for truth in ALL:
        for x in sample_points(truth, 15, seed=45):
            ric = ricci_from_riemann(riemann_tensor(metric_jets(truth, x)))
            assert np.max(np.abs(ric - truth.ricci_at(x))) < 1e-9, truth.name


# -- covariant Hessian and weighted Laplacian --------------------------------------

def test_covariant_hessian_examples():
    conn = christoffels_classical(metric_jets(EUC2, (0.0, 0.0)))
    affine = Jet.from_partials((0.0, 0.0), 2, {(1, 0): 2.0, (0, 1): -1.0})
    assert np.max(np.abs(covariant_hessian(affine, conn))) == 0.0

    theta = math.pi / 3
    f = Jet.from_partials(
        (theta, 1.0), 2,
        {(0, 0): math.cos(theta), (1, 0): -math.sin(theta), (2, 0): -math.cos(theta)},
    )
    conn = christoffels_classical(metric_jets(SPHERE, (theta, 1.0)))
    hess = covariant_hessian(f, conn)
    expected = np.diag([-0.5, -math.sin(theta) ** 2 * math.cos(theta)])
    assert np.allclose(hess, expected, atol=1e-12)
    assert hess[1, 1] == pytest.approx(-3.0 / 8.0)


def test_weighted_laplacian_examples():
    x = Jet.coordinate(0, (0.0,), 2)
    sq = x * x
    flat1 = MetricFieldJets.from_field(get_manifold("ou_gaussian1").truth_metric, (0.0,), 2)
    rho_const = Jet.constant(0.0, (0.0,), 2)
    assert weighted_laplacian(flat1, rho_const, sq) == pytest.approx(2.0)

    # Gaussian weight turns the flat Laplacian into the OU generator
    f = Jet.coordinate(0, (1.5,), 2)
    log_rho = OU1.log_rho_jet((1.5,), 2)
    flat_at = MetricFieldJets.from_field(OU1.truth_metric, (1.5,), 2)
    assert weighted_laplacian(flat_at, log_rho, f) == pytest.approx(-1.5)

    theta = math.pi / 3
    eig = Jet.from_partials(
        (theta, 1.0), 2,
        {(0, 0): math.cos(theta), (1, 0): -math.sin(theta), (2, 0): -math.cos(theta)},
    )
    gj = metric_jets(SPHERE, (theta, 1.0))
    assert weighted_laplacian(gj, Jet.constant(0.0, (theta, 1.0), 2), eig) == pytest.approx(-1.0)


def test_weighted_laplacian_matches_generator_for_catalog_specs():
    rng = np.random.default_rng(46)
    for truth in ALL:
        for x in sample_points(truth, 10, seed=47):
            f = random_jet_at(rng, truth.dim, x, order=3)
            gj = metric_jets(truth, x)
            lr = truth.log_rho_jet(x, 2)
            assert weighted_laplacian(gj, lr, f.truncated(2)) == pytest.approx(
                apply_L(truth.spec, f.truncated(2)).value, abs=1e-10
            ), truth.name


# -- Bochner identity and sign resolution --------------------------------------------

def test_bochner_flat_constant_density_any_sign():
    rng = np.random.default_rng(48)
    for _ in range(10):
        f = random_jet_at(rng, 2, rng.uniform(-1, 1, 2))
        for sign in (1, -1):
            assert abs(bochner_residual(EUC2.spec, f, sign)) < 1e-10


def test_bochner_ou_affine_probe_discriminates():
    from gammaforge.jets import monomial_probe

    p = monomial_probe((0.6,), (1.0,), 3)
    assert abs(bochner_residual(OU1.spec, p, -1)) < 1e-10
    assert bochner_residual(OU1.spec, p, +1) == pytest.approx(2.0, abs=1e-10)


def test_bochner_sphere_random_jets():
    rng = np.random.default_rng(49)
    for x in sample_points(SPHERE, 10, seed=50):
        f = random_jet_at(rng, 2, x)
        assert abs(bochner_residual(SPHERE.spec, f, -1)) < 1e-8


def test_bochner_holds_for_all_catalog_entries_with_resolved_sign():
    rng = np.random.default_rng(51)
    for truth in ALL:
        for x in sample_points(truth, 8, seed=52):
            f = random_jet_at(rng, truth.dim, x)
            assert abs(bochner_residual(truth.spec, f, -1)) < 1e-8, truth.name


def test_resolve_bochner_sign_on_ou():
    for truth in (OU1, OU2):
        res = resolve_bochner_sign(truth.spec, truth.sample_box, count=100, seed=0)
        assert res.sign == -1
        assert res.max_abs_residual[-1] <= 1e-8
        assert res.max_abs_residual[1] >= 1e-2


def test_ricci_mu_matrix_ou_identity():
    x = (0.4, -1.1)
    gj = metric_jets(OU2, x)
    ric_mu = ricci_mu_matrix(gj, OU2.log_rho_jet(x, 2), sign=-1)
    assert np.allclose(ric_mu, np.eye(2), atol=1e-12)
