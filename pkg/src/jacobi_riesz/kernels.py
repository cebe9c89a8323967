"""Explicit Riesz and T_M kernels, ball measures, and the uniform-in-j sweeps.

Every kernel here is a double integral over ``(u, v) in [-1, 1]^2`` against
``(1-u^2)^(A-1/2) (1-v^2)^(B-1/2)`` of a power of ``1 - z`` with

    z = u sin(theta/2) sin(varphi/2) + v cos(theta/2) cos(varphi/2).

Integrating the Poisson kernel in time gives the potential kernel

    W(theta, varphi) = Gamma(A+B+1) / (pi 2^(A+B) Gamma(A+1/2) Gamma(B+1/2))
                       * int int (1-u^2)^(A-1/2) (1-v^2)^(B-1/2) (1-z)^-(A+B+1),

which is the kernel of ``J^{-1/2}``.  The Riesz kernel is ``d/dtheta`` of it:

    K(theta, varphi) = -Gamma(A+B+2) / (pi 2^(A+B) Gamma(A+1/2) Gamma(B+1/2))
                       * int int (...) d_theta(1-z) (1-z)^-(A+B+2).

Both are evaluated, along with their gradients, by differentiating under the
integral sign and running the tanh-sinh engine in :mod:`jacobi_riesz._de`.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import betainc, betaincc, betaln, gammaln

from ._de import kernel_moments_batch, truncation_radius
from .errors import AccuracyError, DiagonalError, DomainError
from .special import JacobiParams, OffsetScheme, jacobi_poly, normalizer
from .transforms import ManifoldParams

__all__ = [
    "IntegrandGeometry",
    "KernelPoint",
    "KernelMoments",
    "BallMeasure",
    "Lemma0Result",
    "SweepReport",
    "SWEEP_MODES",
    "dz_dtheta",
    "dz_dvarphi",
    "kernel_moments",
    "riesz_kernel",
    "riesz_kernel_gradient",
    "potential_kernel",
    "potential_kernel_gradient",
    "t_kernel",
    "t_kernel_gradient",
    "ball_measure",
    "sweep_grid",
    "t_hypotheses_hold",
    "weighted_kernel_sweep",
    "lemma0_check",
    "lemma0_constant",
    "aux_inequalities_check",
    "jacobi_identity_check",
    "THREADS_ENV",
]

THREADS_ENV = "JACOBI_RIESZ_THREADS"
SWEEP_MODES = ("riesz_growth", "riesz_smooth", "t_growth", "t_smooth")
DEFAULT_TOL = 1e-8
DEFAULT_MAX_LEVEL = 8


@dataclass(frozen=True)
class IntegrandGeometry:
    u: float
    v: float
    theta: float
    varphi: float

    def __post_init__(self):
        if not (-1 <= self.u <= 1 and -1 <= self.v <= 1):
            raise DomainError("u and v must lie in [-1, 1]")

    @property
    def z(self) -> float:
        t2, p2 = self.theta / 2, self.varphi / 2
        return self.u * math.sin(t2) * math.sin(p2) + self.v * math.cos(t2) * math.cos(p2)

    @property
    def one_minus_z(self) -> float:
        """``1 - z`` without cancellation near the corner ``u = v = 1``."""
        t2, p2 = self.theta / 2, self.varphi / 2
        return (
            2 * math.sin((self.theta - self.varphi) / 4) ** 2
            + (1 - self.u) * math.sin(t2) * math.sin(p2)
            + (1 - self.v) * math.cos(t2) * math.cos(p2)
        )


def dz_dtheta(g: IntegrandGeometry) -> float:
    """``d/dtheta (1 - z)``."""
    t2, p2 = g.theta / 2, g.varphi / 2
    return (
        0.5 * math.sin((g.theta - g.varphi) / 2)
        + 0.5 * (1 - g.u) * math.cos(t2) * math.sin(p2)
        - 0.5 * (1 - g.v) * math.sin(t2) * math.cos(p2)
    )


def dz_dvarphi(g: IntegrandGeometry) -> float:
    """``d/dvarphi (1 - z)``."""
    t2, p2 = g.theta / 2, g.varphi / 2
    return (
        -0.5 * math.sin((g.theta - g.varphi) / 2)
        + 0.5 * (1 - g.u) * math.sin(t2) * math.cos(p2)
        - 0.5 * (1 - g.v) * math.cos(t2) * math.sin(p2)
    )


@dataclass(frozen=True)
class KernelPoint:
    theta: float
    varphi: float
    kernel_value: float
    ball_measure: float
    bound_rhs: float
    ratio: float


class BallMeasure(NamedTuple):
    exact: float
    surrogate: float


class Lemma0Result(NamedTuple):
    integral: float
    bound: float


def _log_base(p: JacobiParams) -> float:
    A, B = p.alpha, p.beta
    return -math.log(math.pi) - (A + B) * math.log(2) - gammaln(A + 0.5) - gammaln(B + 0.5)


@dataclass(frozen=True, eq=False)
class KernelMoments:
    """Raw integrals for a batch of points, kept in scaled form.

    Column ``r`` of ``moments`` times ``exp(shifts)`` is the ``r``-th integral
    listed in :mod:`jacobi_riesz._de`.  The accessors accept an additive
    ``log_weight`` (per point) so that multiplicative factors such as
    ``u_j(theta) u_j(varphi)`` are folded in before exponentiation.
    """

    params: JacobiParams
    theta: np.ndarray
    varphi: np.ndarray
    moments: np.ndarray
    shifts: np.ndarray
    levels: np.ndarray
    changes: np.ndarray

    def _scale(self, log_gamma, log_weight):
        return np.exp(self.shifts + _log_base(self.params) + log_gamma + log_weight)

    def _lg(self, k):
        return gammaln(self.params.alpha + self.params.beta + k)

    def potential(self, log_weight=0.0):
        return self.moments[:, 0] * self._scale(self._lg(1), log_weight)

    def potential_gradient(self, log_weight=0.0):
        s = self._scale(self._lg(2), log_weight)
        return -self.moments[:, 1] * s, -self.moments[:, 2] * s

    def riesz(self, log_weight=0.0):
        return -self.moments[:, 1] * self._scale(self._lg(2), log_weight)

    def riesz_gradient(self, log_weight=0.0):
        s = self._scale(self._lg(2), log_weight)
        return -self.moments[:, 3] * s, -self.moments[:, 4] * s


def kernel_moments(
    p: JacobiParams,
    theta,
    varphi,
    *,
    tol: float = DEFAULT_TOL,
    max_level: int = DEFAULT_MAX_LEVEL,
    h0: float = 0.5,
    strict: bool = True,
) -> KernelMoments:
    """Evaluate all kernel integrals at the points ``(theta[i], varphi[i])``.

    Raises :class:`DiagonalError` on ``theta == varphi`` and, when ``strict``,
    :class:`AccuracyError` if some point did not converge to ``tol``.
    """
    p.require_kernel_range()
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    varphi = np.atleast_1d(np.asarray(varphi, dtype=float))
    theta, varphi = np.broadcast_arrays(theta, varphi)
    theta, varphi = theta.ravel().copy(), varphi.ravel().copy()
    if np.any(theta <= 0) or np.any(theta >= np.pi) or np.any(varphi <= 0) or np.any(varphi >= np.pi):
        raise DomainError("theta and varphi must lie in (0, pi)")
    if np.any(theta == varphi):
        raise DiagonalError("kernels are singular on the diagonal theta == varphi")
    tmax = max(truncation_radius(p.alpha - 0.5), truncation_radius(p.beta - 0.5))
    mom, shifts, levels, changes = kernel_moments_batch(
        p.alpha, p.beta, theta, varphi, h0, max_level, tol, tmax
    )
    if strict and np.any(changes >= tol):
        bad = int(np.argmax(changes))
        raise AccuracyError(
            f"kernel quadrature did not converge at theta={theta[bad]}, varphi={varphi[bad]}",
            {
                "alpha": p.alpha,
                "beta": p.beta,
                "theta": float(theta[bad]),
                "varphi": float(varphi[bad]),
                "level": int(levels[bad]),
                "relative_change": float(changes[bad]),
            },
        )
    return KernelMoments(p, theta, varphi, mom, shifts, levels, changes)


def _scalar(x):
    return float(x[0])


def riesz_kernel(p: JacobiParams, theta: float, varphi: float, **opts) -> float:
    """Kernel of ``d/dtheta J^{-1/2}`` off the diagonal."""
    return _scalar(kernel_moments(p, theta, varphi, **opts).riesz())


def riesz_kernel_gradient(p: JacobiParams, theta: float, varphi: float, **opts) -> tuple[float, float]:
    """``(d_theta K, d_varphi K)`` differentiated under the integral sign.

    Uses ``d_theta^2 (1-z) = z/4`` and
    ``d_theta d_varphi (1-z) = -(u cos(theta/2) cos(varphi/2) + v sin(theta/2) sin(varphi/2))/4``.
    """
    gt, gp = kernel_moments(p, theta, varphi, **opts).riesz_gradient()
    return _scalar(gt), _scalar(gp)


def potential_kernel(p: JacobiParams, theta: float, varphi: float, **opts) -> float:
    """Time integral over ``(0, inf)`` of the Poisson kernel, i.e. the kernel of ``J^{-1/2}``."""
    return _scalar(kernel_moments(p, theta, varphi, **opts).potential())


def potential_kernel_gradient(p: JacobiParams, theta: float, varphi: float, **opts) -> tuple[float, float]:
    gt, gp = kernel_moments(p, theta, varphi, **opts).potential_gradient()
    return _scalar(gt), _scalar(gp)


def t_kernel(p: JacobiParams, mp: ManifoldParams, theta: float, varphi: float, **opts) -> float:
    """Kernel of ``T_M = sqrt(rho_M) J^{-1/2}``."""
    return float(mp.sqrt_rho(theta)) * potential_kernel(p, theta, varphi, **opts)


def t_kernel_gradient(p: JacobiParams, mp: ManifoldParams, theta: float, varphi: float, **opts) -> tuple[float, float]:
    m = kernel_moments(p, theta, varphi, **opts)
    w = _scalar(m.potential())
    gt, gp = (_scalar(g) for g in m.potential_gradient())
    sr = float(mp.sqrt_rho(theta))
    return sr * (gt + w * float(mp.log_sqrt_rho_derivative(theta))), sr * gp


def _ball_exact(p: JacobiParams, lo, hi):
    a, b = p.alpha + 1, p.beta + 1
    ylo = np.sin(lo / 2) ** 2
    yhi = np.sin(hi / 2) ** 2
    # pick the tail that avoids subtracting two numbers close to the total mass
    left = betainc(a, b, yhi) - betainc(a, b, ylo)
    right = betaincc(a, b, ylo) - betaincc(a, b, yhi)
    return np.exp(betaln(a, b)) * np.where(yhi <= 0.5, left, right)


def ball_measure(p: JacobiParams, theta, varphi) -> BallMeasure:
    """Measure of ``B(theta, |theta - varphi|)`` and its closed-form surrogate.

    ``exact`` is ``mu_{alpha,beta}`` of the interval, via the incomplete beta
    function; ``surrogate`` is ``|theta-varphi| (theta+varphi)^(2 alpha+1)
    (2 pi - theta - varphi)^(2 beta+1)``.
    """
    theta = np.asarray(theta, dtype=float)
    varphi = np.asarray(varphi, dtype=float)
    r = np.abs(theta - varphi)
    exact = _ball_exact(p, np.maximum(theta - r, 0.0), np.minimum(theta + r, np.pi))
    exact = np.where(r == 0, 0.0, exact)
    surrogate = (
        r * (theta + varphi) ** (2 * p.alpha + 1) * (2 * np.pi - theta - varphi) ** (2 * p.beta + 1)
    )
    if exact.ndim == 0:
        return BallMeasure(float(exact), float(surrogate))
    return BallMeasure(exact, surrogate)


def sweep_grid(n: int = 40, eps: float = 0.05):
    """Cell midpoints of an ``n x n`` grid on ``(0, pi)^2`` with ``|theta - varphi| >= eps``."""
    if eps <= 0:
        raise DomainError("the diagonal band eps must be positive")
    pts = (np.arange(n) + 0.5) * np.pi / n
    th, ph = np.meshgrid(pts, pts, indexing="ij")
    keep = np.abs(th - ph) >= eps
    return th[keep], ph[keep]


def t_hypotheses_hold(scheme: OffsetScheme, base: JacobiParams, mp: ManifoldParams) -> bool:
    """Whether the uniform bounds for the weighted T_M kernels are claimed.

    Needs ``a = 1`` or ``a >= 2`` and, on spheres, ``beta > 0`` and ``b >= 1``.
    """
    if not (scheme.a == 1 or scheme.a >= 2):
        return False
    if mp.is_sphere:
        return base.beta > 0 and scheme.b >= 1
    return True


@dataclass
class SweepReport:
    """Rows of a weighted-kernel sweep and their per-``j`` suprema."""

    a: float
    b: float
    base: JacobiParams
    eps: float
    j: np.ndarray
    mode: np.ndarray
    theta: np.ndarray
    varphi: np.ndarray
    kernel: np.ndarray
    ball: np.ndarray
    ratio: np.ndarray
    sup: dict = field(default_factory=dict)

    def sup_sequence(self, mode: str):
        """``(js, sups)`` for one mode, ordered by ``j``."""
        items = sorted((j, s) for (j, m), s in self.sup.items() if m == mode)
        return np.array([j for j, _ in items]), np.array([s for _, s in items])

    def global_sup(self, mode: str) -> float:
        return float(self.sup_sequence(mode)[1].max())

    def max_over_median(self, mode: str) -> float:
        s = self.sup_sequence(mode)[1]
        return float(s.max() / np.median(s))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "theta", "varphi", "mode", "kernel", "ball", "ratio"])
            for row in zip(self.j, self.theta, self.varphi, self.mode, self.kernel, self.ball, self.ratio):
                w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])), row[3],
                            repr(float(row[4])), repr(float(row[5])), repr(float(row[6]))])

    def write_summary_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "mode", "sup_ratio"])
            for mode in SWEEP_MODES:
                for j, s in zip(*self.sup_sequence(mode)):
                    w.writerow([int(j), mode, repr(float(s))])


def _sweep_one_j(args):
    a, b, j, alpha, beta, modes, theta, varphi, rho_mp, opts = args
    base = JacobiParams(alpha, beta)
    scheme = OffsetScheme(a, b, j)
    p = scheme.params(base)
    try:
        m = kernel_moments(p, theta, varphi, **opts)
    except AccuracyError as err:
        diag = dict(err.diagnostics, j=j)
        raise AccuracyError(f"sweep at j={j}: {err}", diag) from None
    ball = ball_measure(base, theta, varphi).exact
    sep = np.abs(theta - varphi)
    lw = scheme.log_weight(theta) + scheme.log_weight(varphi)
    dt = scheme.log_weight_derivative(theta)
    dp = scheme.log_weight_derivative(varphi)
    out = {}
    if "riesz_growth" in modes or "riesz_smooth" in modes:
        k = m.riesz(lw)
        if "riesz_growth" in modes:
            out["riesz_growth"] = (k, np.abs(k) * ball)
        if "riesz_smooth" in modes:
            kt, kp = m.riesz_gradient(lw)
            g = np.hypot(kt + k * dt, kp + k * dp)
            out["riesz_smooth"] = (g, g * sep * ball)
    if j >= 1 and ("t_growth" in modes or "t_smooth" in modes):
        lw_t = lw + np.log(rho_mp.sqrt_rho(theta))
        w = m.potential(lw_t)
        if "t_growth" in modes:
            out["t_growth"] = (j * w, j * np.abs(w) * ball)
        if "t_smooth" in modes:
            wt, wp = m.potential_gradient(lw_t)
            g = j * np.hypot(wt + w * (dt + rho_mp.log_sqrt_rho_derivative(theta)), wp + w * dp)
            out["t_smooth"] = (g, g * sep * ball)
    return j, out, ball


def _default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def weighted_kernel_sweep(
    scheme: OffsetScheme,
    base: JacobiParams,
    J: int = 20,
    which=SWEEP_MODES,
    n: int = 40,
    eps: float = 0.05,
    mp: ManifoldParams | None = None,
    workers: int | None = None,
    **opts,
) -> SweepReport:
    """Ratios of weighted kernels to their claimed bounds for ``j = 0..J``.

    For each ``j`` the kernels carry parameters ``(alpha + a j, beta + b j)``
    and the weight ``u_j(theta) u_j(varphi)``; the T_M modes carry an extra
    factor ``j`` and are computed for ``j >= 1`` only.  Bounds always use the
    base measure ``mu_{alpha,beta}``.  Growth ratios are ``|G| mu(B)`` and
    smoothness ratios ``|grad G| |theta - varphi| mu(B)``, with the
    derivatives of ``u_j`` included in ``grad G``.

    ``mp`` selects ``rho_M`` for the T_M modes (default: ``1/sin^2(theta/2)``).
    """
    modes = tuple(which)
    for mode in modes:
        if mode not in SWEEP_MODES:
            raise DomainError(f"unknown sweep mode {mode!r}")
    if J < 0:
        raise DomainError("J must be nonnegative")
    base.require_kernel_range()
    if mp is None:
        mp = ManifoldParams.real_projective(2)
    theta, varphi = sweep_grid(n, eps)
    tasks = [(scheme.a, scheme.b, j, base.alpha, base.beta, modes, theta, varphi, mp, opts)
             for j in range(J + 1)]
    workers = _default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one_j, tasks))
    else:
        results = [_sweep_one_j(t) for t in tasks]

    cols = {k: [] for k in ("j", "mode", "theta", "varphi", "kernel", "ball", "ratio")}
    sup = {}
    for j, out, ball in results:
        for mode in SWEEP_MODES:
            if mode not in out:
                continue
            kern, ratio = out[mode]
            cols["j"].append(np.full(len(theta), j))
            cols["mode"].append(np.full(len(theta), mode, dtype=object))
            cols["theta"].append(theta)
            cols["varphi"].append(varphi)
            cols["kernel"].append(kern)
            cols["ball"].append(ball)
            cols["ratio"].append(ratio)
            sup[(j, mode)] = float(np.max(ratio))
    arrays = {k: (np.concatenate(v) if v else np.array([])) for k, v in cols.items()}
    return SweepReport(scheme.a, scheme.b, base, eps, sup=sup, **arrays)


def _check_lemma_args(c, d, lam, A, B):
    if not (c > -0.5 and d >= 0 and lam > 0 and 0 < B < A):
        raise DomainError("need c > -1/2, d >= 0, lambda > 0 and 0 < B < A")


def _lemma_integral(c, d, lam, A, B):
    # substitute t = 1 - s; the integrand t^e (A - B + B t)^-q peaks at t = 0
    # with width (A-B)/B, so the range is cut geometrically from there
    e = c + d - 0.5
    q = c + d + lam + 0.5
    gap = (A - B) / A
    beta = B / A
    f = lambda t: (gap + beta * t) ** (-q)
    tau = min(1.0, gap / beta)
    total, _ = integrate.quad(f, 0.0, tau, weight="alg", wvar=(e, 0.0), epsabs=0, epsrel=1e-12, limit=200)
    lo = tau
    while lo < 1.0:
        hi = min(1.0, 10 * lo)
        piece, _ = integrate.quad(lambda t: t**e * f(t), lo, hi, epsabs=0, epsrel=1e-12, limit=200)
        total += piece
        lo = hi
    return total * A ** (-q)


def lemma0_check(c: float, d: float, lam: float, A: float, B: float) -> Lemma0Result:
    """``int_0^1 (1-s)^(c+d-1/2) (A-Bs)^-(c+d+lambda+1/2) ds`` and its bound.

    For ``d > 0`` the bound is ``Gamma(d) Gamma(lambda)/Gamma(d+lambda)
    / (A^(c+1/2) B^d (A-B)^lambda)``.  For ``d = 0`` the constant is not
    explicit; the returned bound omits it, so ``integral/bound`` measures it
    (see :func:`lemma0_constant`).
    """
    _check_lemma_args(c, d, lam, A, B)
    integral = _lemma_integral(c, d, lam, A, B)
    log_rhs = -(c + 0.5) * math.log(A) - lam * math.log(A - B)
    if d > 0:
        log_rhs += gammaln(d) + gammaln(lam) - gammaln(d + lam) - d * math.log(B)
    return Lemma0Result(integral, math.exp(log_rhs))


def lemma0_constant(c: float, lams=(0.25, 0.5, 1.0, 2.0, 4.0), n_ab: int = 12) -> float:
    """Largest ``integral/bound`` at ``d = 0`` over a grid of ``(lambda, A, B)``."""
    worst = 0.0
    for lam in lams:
        for A in np.geomspace(0.05, 20.0, n_ab):
            for frac in np.geomspace(1e-6, 1 - 1e-6, n_ab):
                r = lemma0_check(c, 0.0, lam, A, A * frac)
                worst = max(worst, r.integral / r.bound)
    return worst


def aux_inequalities_check(n: int = 200) -> dict:
    """Numerical certificate for the elementary inequalities used with the kernels.

    Returns a dict with ``h_bound_max_ratio`` (sup of lhs/rhs of
    ``(1-r)^eta r^(gamma-1/2) <= (eta/(eta+gamma-1/2))^eta``, should be
    ``<= 1``), ``identity_residuals`` for the three half-angle identities, and
    ``comparability`` giving empirical ``(lower, upper)`` constants for each
    identity against ``theta^2+varphi^2``, ``(pi-theta)^2+(pi-varphi)^2`` and
    ``(theta-varphi)^2`` on the interior of ``(0, pi)^2``.
    """
    r = np.linspace(0, 1, 4001)[1:-1]
    worst = 0.0
    for eta in (0.25, 0.5, 1.0, 1.5, 2.0, 5.0):
        for gam in (0.5, 0.75, 1.0, 2.0, 5.0, 20.0):
            lhs = (1 - r) ** eta * r ** (gam - 0.5)
            rhs = (eta / (eta + gam - 0.5)) ** eta
            worst = max(worst, float(lhs.max() / rhs))

    pts = (np.arange(n) + 0.5) * np.pi / n
    th, ph = np.meshgrid(pts, pts, indexing="ij")
    sm, sp = np.sin((th - ph) / 4), np.sin((th + ph) / 4)
    cp = np.cos((th + ph) / 4)
    f1 = 1 - np.cos(th / 2) * np.cos(ph / 2)
    f2 = 1 - np.sin(th / 2) * np.sin(ph / 2)
    f3 = 1 - np.cos(th / 2) * np.cos(ph / 2) - np.sin(th / 2) * np.sin(ph / 2)
    residuals = {
        "one_minus_cos_cos": float(np.max(np.abs(f1 - (sm**2 + sp**2)))),
        "one_minus_sin_sin": float(np.max(np.abs(f2 - (sm**2 + cp**2)))),
        "one_minus_cos_difference": float(np.max(np.abs(f3 - 2 * sm**2))),
    }
    off = th != ph
    q1 = f1 / (th**2 + ph**2)
    q2 = f2 / ((np.pi - th) ** 2 + (np.pi - ph) ** 2)
    q3 = (2 * sm**2)[off] / ((th - ph) ** 2)[off]
    comparability = {
        "one_minus_cos_cos": (float(q1.min()), float(q1.max())),
        "one_minus_sin_sin": (float(q2.min()), float(q2.max())),
        "one_minus_cos_difference": (float(q3.min()), float(q3.max())),
    }
    return {
        "h_bound_max_ratio": worst,
        "identity_residuals": residuals,
        "comparability": comparability,
    }


def jacobi_identity_check(n: int, p: JacobiParams, x: float) -> dict:
    """Residuals of the contiguous relation lowering ``alpha`` and of the normaliser ratios.

    ``identity`` is ``|alpha P_n^{(a,b)} - (n+a) P_n^{(a-1,b)} - (n+b)/2 (1-x) P_{n-1}^{(a+1,b)}|``
    divided by the sum of the absolute values of the three terms;
    ``A_n`` and ``B_n`` are relative residuals of
    ``d_n^{(a-1,b)} = A_n d_n^{(a,b)}`` and ``d_{n-1}^{(a+1,b)} = B_n d_n^{(a,b)}``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if p.alpha <= 0:
        raise DomainError("alpha must be positive so that alpha - 1 > -1")
    a, b = p.alpha, p.beta
    lower = p.shifted(-1, 0)
    upper = p.shifted(1, 0)
    t1 = a * jacobi_poly(n, p, x)
    t2 = (n + a) * jacobi_poly(n, lower, x)
    t3 = 0.5 * (n + b) * (1 - x) * jacobi_poly(n - 1, upper, x)
    scale = abs(t1) + abs(t2) + abs(t3)
    ident = abs(t1 - t2 - t3) / scale if scale > 0 else 0.0
    common = (2 * n + a + b) / (2 * n + a + b + 1)
    A_n = math.sqrt(common * (n + a) / (n + a + b))
    B_n = math.sqrt(common * (n + b) / n)
    dn = float(normalizer(n, p))
    res_a = abs(float(normalizer(n, lower)) - A_n * dn) / (A_n * dn)
    res_b = abs(float(normalizer(n - 1, upper)) - B_n * dn) / (B_n * dn)
    return {"identity": float(ident), "A_n": float(res_a), "B_n": float(res_b)}
