import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import beta as beta_fn, hyp2f1

from jacobi_riesz.errors import AccuracyError, DiagonalError, DomainError, UnsupportedRangeError
from jacobi_riesz.kernels import (
    SWEEP_MODES,
    IntegrandGeometry,
    aux_inequalities_check,
    ball_measure,
    dz_dtheta,
    dz_dvarphi,
    jacobi_identity_check,
    kernel_moments,
    lemma0_check,
    lemma0_constant,
    potential_kernel,
    potential_kernel_gradient,
    riesz_kernel,
    riesz_kernel_gradient,
    sweep_grid,
    t_hypotheses_hold,
    t_kernel,
    t_kernel_gradient,
    weighted_kernel_sweep,
)
from jacobi_riesz.special import JacobiParams, OffsetScheme, measure_density
from jacobi_riesz.transforms import ManifoldParams, Spectrum, synthesize

angles = st.floats(0.05, math.pi - 0.05)
unit = st.floats(-1, 1)


# --- integrand geometry ---------------------------------------------------------------

def test_geometry_corner():
    g = IntegrandGeometry(1.0, 1.0, 0.8, 0.8)
    assert g.z == pytest.approx(1.0, rel=1e-15)
    assert g.one_minus_z == 0.0


@settings(max_examples=200)
@given(unit, unit, angles, angles)
def test_one_minus_z_consistent(u, v, th, ph):
    g = IntegrandGeometry(u, v, th, ph)
    assert g.one_minus_z == pytest.approx(1 - g.z, abs=1e-14)
    assert g.one_minus_z >= 0


@settings(max_examples=200)
@given(unit, unit, angles, angles)
def test_dz_derivatives_match_finite_differences(u, v, th, ph):
    g = IntegrandGeometry(u, v, th, ph)
    h = 1e-6
    fd_t = (IntegrandGeometry(u, v, th + h, ph).one_minus_z - IntegrandGeometry(u, v, th - h, ph).one_minus_z) / (2 * h)
    fd_p = (IntegrandGeometry(u, v, th, ph + h).one_minus_z - IntegrandGeometry(u, v, th, ph - h).one_minus_z) / (2 * h)
    assert dz_dtheta(g) == pytest.approx(fd_t, abs=1e-9)
    assert dz_dvarphi(g) == pytest.approx(fd_p, abs=1e-9)


def test_geometry_rejects_out_of_range():
    with pytest.raises(DomainError):
        IntegrandGeometry(1.5, 0.0, 1.0, 2.0)


# --- kernel values ------------------------------------------------------------------------

# 30-digit mpmath evaluation of the double integrals
@pytest.mark.parametrize(
    "a, b, theta, varphi, expected",
    [
        (0.0, 0.0, 1.0, 2.0, 0.49685364179624693697),
        (1.0, 1.0, 0.7, 2.5, 0.40091859623203398566),
    ],
)
def test_riesz_kernel_oracle(a, b, theta, varphi, expected):
    assert riesz_kernel(JacobiParams(a, b), theta, varphi) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize(
    "a, b, theta, varphi, expected",
    [
        (0.0, 0.0, 1.0, 2.0, 1.3989799567070409853),
        (1.0, 1.0, 0.7, 2.5, 0.70972495513913579258),
    ],
)
def test_potential_kernel_oracle(a, b, theta, varphi, expected):
    assert potential_kernel(JacobiParams(a, b), theta, varphi) == pytest.approx(expected, rel=1e-7)


def test_potential_kernel_reproduces_inverse_square_root():
    # int W(theta, .) f dmu equals J^{-1/2} f, computed from the spectrum
    p = JacobiParams(0.5, 1.0)
    s = Spectrum(p, [0.3, -1.0, 0.5, 0.25])
    inv = Spectrum(p, s.coeffs / (np.arange(4) + p.shift))
    theta = 1.3

    def integrand(ph):
        return potential_kernel(p, theta, ph) * synthesize(s, ph) * measure_density(p, ph)

    lhs = sum(integrate.quad(integrand, lo, hi, epsabs=1e-11, epsrel=1e-9, limit=200)[0]
              for lo, hi in [(1e-9, theta), (theta, math.pi - 1e-9)])
    assert lhs == pytest.approx(synthesize(inv, theta), rel=2e-6)


@pytest.mark.parametrize("a, b", [(0.0, 0.0), (0.5, 1.5), (3.0, 0.2), (-0.3, 2.0)])
@pytest.mark.parametrize("theta, varphi", [(0.4, 1.9), (2.5, 0.9), (1.2, 1.35)])
def test_riesz_kernel_is_theta_derivative_of_potential(a, b, theta, varphi):
    p = JacobiParams(a, b)
    h = 1e-5
    fd = (potential_kernel(p, theta + h, varphi, tol=1e-11) - potential_kernel(p, theta - h, varphi, tol=1e-11)) / (2 * h)
    assert riesz_kernel(p, theta, varphi) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize("a, b", [(0.0, 0.0), (1.0, 0.5)])
@pytest.mark.parametrize("theta, varphi", [(0.6, 2.0), (2.2, 1.1)])
def test_kernel_gradients_match_finite_differences(a, b, theta, varphi):
    p = JacobiParams(a, b)
    h = 1e-5
    kw = dict(tol=1e-11)
    gt, gp = riesz_kernel_gradient(p, theta, varphi)
    fd_t = (riesz_kernel(p, theta + h, varphi, **kw) - riesz_kernel(p, theta - h, varphi, **kw)) / (2 * h)
    fd_p = (riesz_kernel(p, theta, varphi + h, **kw) - riesz_kernel(p, theta, varphi - h, **kw)) / (2 * h)
    assert gt == pytest.approx(fd_t, rel=1e-5)
    assert gp == pytest.approx(fd_p, rel=1e-5)
    wt, wp = potential_kernel_gradient(p, theta, varphi)
    fd_p = (potential_kernel(p, theta, varphi + h, **kw) - potential_kernel(p, theta, varphi - h, **kw)) / (2 * h)
    assert wt == pytest.approx(riesz_kernel(p, theta, varphi), rel=1e-12)
    assert wp == pytest.approx(fd_p, rel=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.45, 4), angles, angles)
def test_equal_parameter_reflection(a, th, ph):
    if abs(th - ph) < 1e-3:
        return
    p = JacobiParams(a, a)
    k = riesz_kernel(p, th, ph)
    assert riesz_kernel(p, math.pi - th, math.pi - ph) == pytest.approx(-k, rel=1e-6, abs=1e-10)
    w = potential_kernel(p, th, ph)
    assert w > 0
    assert potential_kernel(p, ph, th) == pytest.approx(w, rel=1e-7)


def test_t_kernel():
    p = JacobiParams(1.0, 0.0)
    mp = ManifoldParams.real_projective(2)
    assert t_kernel(p, mp, 0.8, 2.0) == pytest.approx(potential_kernel(p, 0.8, 2.0) / math.sin(0.4), rel=1e-12)
    assert t_kernel(p, mp, 0.8, 2.0) > 0
    h = 1e-5
    gt, gp = t_kernel_gradient(p, mp, 0.8, 2.0)
    fd_t = (t_kernel(p, mp, 0.8 + h, 2.0, tol=1e-11) - t_kernel(p, mp, 0.8 - h, 2.0, tol=1e-11)) / (2 * h)
    assert gt == pytest.approx(fd_t, rel=1e-5)


def test_kernel_errors():
    p = JacobiParams(0.0, 0.0)
    with pytest.raises(DiagonalError):
        riesz_kernel(p, 1.0, 1.0)
    with pytest.raises(UnsupportedRangeError):
        riesz_kernel(JacobiParams(-0.6, 0.0), 1.0, 2.0)
    with pytest.raises(DomainError):
        riesz_kernel(p, 0.0, 2.0)
    with pytest.raises(AccuracyError) as err:
        riesz_kernel(p, 1.0, 1.0 + 1e-9, tol=1e-14, max_level=1)
    assert "relative_change" in err.value.diagnostics


def test_non_strict_mode_reports_levels():
    m = kernel_moments(JacobiParams(0.0, 0.0), [1.0, 0.5], [2.0, 0.5 + 1e-9], tol=1e-14, max_level=1, strict=False)
    assert m.changes.shape == (2,) and m.changes[1] > 1e-14


# --- ball measure ----------------------------------------------------------------------------------

def test_ball_measure_examples():
    p = JacobiParams(0.0, 0.0)
    assert ball_measure(p, 1.0, 1.0).exact == 0.0
    # closed form: (cos(pi/2 - 0.1) - cos(pi/2 + 0.1)) / 2 = sin(0.1)
    assert ball_measure(p, math.pi / 2, math.pi / 2 + 0.1).exact == pytest.approx(0.09983341664682815783, rel=1e-13)
    # the ball is clipped to (0, 3)
    assert ball_measure(p, 0.5, 3.0).exact == pytest.approx((1 - math.cos(3.0)) / 2, rel=1e-14)


@settings(max_examples=60)
@given(st.floats(-0.45, 4), st.floats(-0.45, 4), angles, angles)
def test_ball_measure_matches_quadrature(a, b, th, ph):
    p = JacobiParams(a, b)
    r = abs(th - ph)
    lo, hi = max(th - r, 0.0), min(th + r, math.pi)
    brute, _ = integrate.quad(lambda t: measure_density(p, t), lo, hi, epsabs=0, epsrel=1e-11, limit=200)
    assert ball_measure(p, th, ph).exact == pytest.approx(brute, rel=1e-8, abs=1e-300)


@pytest.mark.parametrize("a, b, C", [(0.0, 0.0, 3.0), (1.0, 0.0, 8.0), (0.5, 1.5, 12.0)])
def test_ball_measure_comparable_up_to_scale(a, b, C):
    th, ph = sweep_grid(40, 0.05)
    bm = ball_measure(JacobiParams(a, b), th, ph)
    q = bm.exact / bm.surrogate
    # best single constant after fitting the overall scale
    assert math.sqrt(q.max() / q.min()) <= C


def test_sweep_grid():
    th, ph = sweep_grid(40, 0.05)
    assert th.size == 1560
    assert np.all(np.abs(th - ph) >= 0.05)
    with pytest.raises(DomainError):
        sweep_grid(10, 0.0)


# --- weighted sweep ------------------------------------------------------------------------------------

def test_sweep_at_zero_index_is_plain_kernel(tmp_path):
    base = JacobiParams(0.5, 0.0)
    r = weighted_kernel_sweep(OffsetScheme(1, 1), base, J=1, n=8, eps=0.1)
    sel = (r.j == 0) & (r.mode == "riesz_growth")
    k0 = r.kernel[sel]
    for th, ph, k in list(zip(r.theta[sel], r.varphi[sel], k0))[:5]:
        assert k == pytest.approx(riesz_kernel(base, th, ph), rel=1e-12)
    assert not np.any((r.j == 0) & (r.mode == "t_growth"))
    assert set(np.unique(r.mode)) == set(SWEEP_MODES)
    r.write_csv(tmp_path / "rows.csv")
    r.write_summary_csv(tmp_path / "sup.csv")
    assert (tmp_path / "rows.csv").read_text().splitlines()[0] == "j,theta,varphi,mode,kernel,ball,ratio"
    assert (tmp_path / "sup.csv").read_text().splitlines()[0] == "j,mode,sup_ratio"


def test_sweep_weighted_kernel_matches_direct_evaluation():
    base = JacobiParams(0.0, 0.5)
    scheme = OffsetScheme(2, 1)
    r = weighted_kernel_sweep(scheme, base, J=3, which=("riesz_growth",), n=8, eps=0.1)
    sel = r.j == 3
    s3 = scheme.with_j(3)
    th, ph = r.theta[sel][4], r.varphi[sel][4]
    direct = s3.weight(th) * s3.weight(ph) * riesz_kernel(s3.params(base), th, ph)
    assert r.kernel[sel][4] == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("a, b, alpha, beta", [(1, 1, 0.5, 1.5), (2, 0, 1.0, 0.0)])
def test_weighted_suprema_bounded_by_unweighted(a, b, alpha, beta):
    r = weighted_kernel_sweep(OffsetScheme(a, b), JacobiParams(alpha, beta), J=6,
                              which=("riesz_growth", "riesz_smooth"), n=20, eps=0.05)
    for mode in ("riesz_growth", "riesz_smooth"):
        _, sups = r.sup_sequence(mode)
        assert sups.max() <= 1.05 * sups[0]


def test_sweep_rejects_bad_mode():
    with pytest.raises(DomainError):
        weighted_kernel_sweep(OffsetScheme(1, 1), JacobiParams(0, 0), J=0, which=("nope",), n=4)


def test_t_hypotheses():
    base = JacobiParams(0.5, 0.0)
    assert t_hypotheses_hold(OffsetScheme(1, 0), base, ManifoldParams.real_projective(3))
    assert not t_hypotheses_hold(OffsetScheme(1, 1), base, ManifoldParams.sphere(3))
    assert t_hypotheses_hold(OffsetScheme(1, 1), JacobiParams(0.5, 0.5), ManifoldParams.sphere(3))
    assert not t_hypotheses_hold(OffsetScheme(1.5, 1), base, ManifoldParams.real_projective(3))


# --- integral lemma ------------------------------------------------------------------------------------------

def test_lemma_closed_form_example():
    r = lemma0_check(0.5, 1.0, 1.0, 2.0, 1.0)
    assert r.integral == pytest.approx(0.125, rel=1e-12)
    assert r.bound == pytest.approx(0.5, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.45, 4), st.floats(0.01, 6), st.floats(0.05, 4), st.floats(0.1, 5), st.floats(0.01, 0.99))
def test_lemma_integral_matches_hypergeometric(c, d, lam, A, frac):
    B = A * frac
    e = c + d - 0.5
    q = c + d + lam + 0.5
    oracle = A ** (-q) * beta_fn(1, e + 1) * hyp2f1(q, 1, e + 2, B / A)
    r = lemma0_check(c, d, lam, A, B)
    assert r.integral == pytest.approx(oracle, rel=1e-8)
    assert r.integral <= r.bound


def test_lemma_zero_d_constant_is_finite():
    C = lemma0_constant(0.5)
    assert 0 < C < 100


@pytest.mark.parametrize("args", [(-0.5, 1, 1, 2, 1), (0, -1, 1, 2, 1), (0, 1, 0, 2, 1), (0, 1, 1, 1, 1)])
def test_lemma_rejects_invalid(args):
    with pytest.raises(DomainError):
        lemma0_check(*args)


# --- auxiliary identities ---------------------------------------------------------------------------------

def test_auxiliary_inequalities():
    out = aux_inequalities_check(100)
    assert out["h_bound_max_ratio"] <= 1 + 1e-12
    assert max(out["identity_residuals"].values()) <= 1e-14
    for lo, hi in out["comparability"].values():
        assert 0 < lo <= hi < np.inf


def test_jacobi_identity_at_endpoint():
    out = jacobi_identity_check(5, JacobiParams(1.5, 0.5), 1.0)
    assert max(out.values()) <= 1e-14


@settings(max_examples=100)
@given(st.integers(1, 30), st.floats(0.01, 5), st.floats(-0.45, 5), st.floats(-1, 1))
def test_jacobi_identity_random(n, a, b, x):
    assert max(jacobi_identity_check(n, JacobiParams(a, b), x).values()) <= 1e-10


def test_jacobi_identity_errors():
    with pytest.raises(DomainError):
        jacobi_identity_check(0, JacobiParams(1, 1), 0.2)
    with pytest.raises(DomainError):
        jacobi_identity_check(3, JacobiParams(-0.2, 1), 0.2)


@pytest.mark.parametrize("th, ph", [(1.0, 2.0), (0.3, 2.9), (2.0, 2.0)])
def test_dz_at_the_corner(th, ph):
    assert dz_dtheta(IntegrandGeometry(1.0, 1.0, th, ph)) == pytest.approx(0.5 * math.sin((th - ph) / 2), abs=1e-16)
    # on the diagonal with u = v the two correction terms cancel
    assert dz_dtheta(IntegrandGeometry(0.3, 0.3, th, th)) == pytest.approx(0.0, abs=1e-16)


def test_gradient_at_reference_point():
    p = JacobiParams(0.0, 0.0)
    h = 1e-5
    gt, _ = riesz_kernel_gradient(p, 1.0, 2.2)
    fd = (riesz_kernel(p, 1.0 + h, 2.2, tol=1e-11) - riesz_kernel(p, 1.0 - h, 2.2, tol=1e-11)) / (2 * h)
    assert gt == pytest.approx(fd, rel=1e-4)


@pytest.mark.parametrize("a, th", [(0.0, 0.6), (1.5, 1.2)])
def test_gradient_reflection_symmetry(a, th):
    # K(t, f) = -K(pi - t, pi - f) at equal parameters, so d_theta K agrees at (t, pi - t) and (pi - t, t)
    p = JacobiParams(a, a)
    g1 = riesz_kernel_gradient(p, th, math.pi - th)
    g2 = riesz_kernel_gradient(p, math.pi - th, th)
    assert g1[0] == pytest.approx(g2[0], rel=1e-7)
    assert g1[1] == pytest.approx(g2[1], rel=1e-7)


def test_jacobi_identity_reference_point():
    assert max(jacobi_identity_check(2, JacobiParams(1.0, 0.5), 0.4).values()) <= 1e-12


def test_comparability_constant_range():
    lo, hi = aux_inequalities_check(200)["comparability"]["one_minus_cos_cos"]
    assert 0.05 <= lo and hi <= 1.3
