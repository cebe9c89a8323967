"""Jacobi polynomials, their trigonometric normalisation, and Gauss--Jacobi rules.

Conventions
-----------
``P_n^{(a,b)}(x)`` is the classical Jacobi polynomial on ``[-1, 1]``.  The
trigonometric polynomial ``TP_n(theta) = d_n P_n(cos theta)`` is orthonormal in
``L^2((0, pi), dmu_{a,b})`` with

    dmu_{a,b}(theta) = sin(theta/2)^(2a+1) cos(theta/2)^(2b+1) dtheta.

The substitution ``x = cos(theta)`` turns ``dmu_{a,b}`` into
``2^-(a+b+1) (1-x)^a (1+x)^b dx``, which is how every theta-rule below is built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln, gammaln, poch

from .errors import DomainError, UnsupportedRangeError

__all__ = [
    "JacobiParams",
    "OffsetScheme",
    "QuadratureRule",
    "gamma_ln",
    "jacobi_poly",
    "jacobi_table",
    "normalizer",
    "trig_poly",
    "trig_table",
    "trig_poly_derivative",
    "trig_poly_second_derivative",
    "apply_jacobi_operator",
    "eigenvalue",
    "measure_density",
    "measure_cdf",
    "gauss_jacobi_rule",
    "theta_rule",
    "gamma_ratio_check",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 128


@dataclass(frozen=True)
class JacobiParams:
    """Type parameters ``(alpha, beta)`` of a Jacobi system, both ``> -1``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(f"Jacobi parameters must exceed -1, got ({self.alpha}, {self.beta})")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def kernel_supported(self) -> bool:
        """True when both parameters exceed -1/2, the range where the kernel formulas apply."""
        return self.alpha > -0.5 and self.beta > -0.5

    def require_kernel_range(self) -> "JacobiParams":
        if not self.kernel_supported:
            raise UnsupportedRangeError(
                f"operation needs alpha, beta > -1/2, got ({self.alpha}, {self.beta})"
            )
        return self

    @property
    def shift(self) -> float:
        """``(alpha + beta + 1) / 2``, the square root of the bottom eigenvalue."""
        return 0.5 * (self.alpha + self.beta + 1.0)

    def shifted(self, da: float, db: float) -> "JacobiParams":
        return JacobiParams(self.alpha + da, self.beta + db)


@dataclass(frozen=True)
class OffsetScheme:
    """Parameter shift ``(alpha + a*j, beta + b*j)`` with weight ``u_j``.

    ``u_j(theta) = sin(theta/2)^(a*j) cos(theta/2)^(b*j)`` takes values in ``[0, 1]``.
    """

    a: float
    b: float
    j: int = 0

    def __post_init__(self):
        if self.a < 1:
            raise DomainError(f"offset a must be >= 1, got {self.a}")
        if not (self.b == 0 or self.b >= 1):
            raise DomainError(f"offset b must be 0 or >= 1, got {self.b}")
        if int(self.j) != self.j or self.j < 0:
            raise DomainError(f"j must be a nonnegative integer, got {self.j}")

    def with_j(self, j: int) -> "OffsetScheme":
        return OffsetScheme(self.a, self.b, j)

    def params(self, base: JacobiParams) -> JacobiParams:
        return base.shifted(self.a * self.j, self.b * self.j)

    def log_weight(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        if self.a * self.j:
            out = out + self.a * self.j * np.log(np.sin(theta / 2))
        if self.b * self.j:
            out = out + self.b * self.j * np.log(np.cos(theta / 2))
        return out

    def weight(self, theta):
        return np.exp(self.log_weight(theta))

    def log_weight_derivative(self, theta):
        """d/dtheta of ``log u_j``."""
        theta = np.asarray(theta, dtype=float)
        return 0.5 * self.j * (self.a / np.tan(theta / 2) - self.b * np.tan(theta / 2))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights for one target measure.

    ``target`` is ``("interval", gamma_left, gamma_right)`` for the weight
    ``(1-u)^gamma_left (1+u)^gamma_right`` on ``[-1, 1]``, or
    ``("dmu", alpha, beta)`` for ``dmu_{alpha,beta}`` on ``(0, pi)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    target: tuple

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _check_theta_open(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise DomainError("theta must lie in the open interval (0, pi)")
    return theta


def gamma_ln(x):
    """``log Gamma(x)`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("gamma_ln requires x > 0")
    out = gammaln(x)
    return float(out) if out.ndim == 0 else out


def jacobi_table(n_max: int, p: JacobiParams, x) -> np.ndarray:
    """Rows ``P_0 .. P_{n_max}`` evaluated at ``x`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1]")
    a, b = p.alpha, p.beta
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (a + 1) + 0.5 * (a + b + 2) * (x - 1)
    for n in range(2, n_max + 1):
        s = 2 * n + a + b
        c1 = 2 * n * (n + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c3 = 2 * (n + a - 1) * (n + b - 1) * s
        out[n] = (c2 * out[n - 1] - c3 * out[n - 2]) / c1
    return out


def jacobi_poly(n: int, p: JacobiParams, x):
    """``P_n^{(alpha,beta)}(x)``."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    val = jacobi_table(n, p, x)[n]
    return float(val) if val.ndim == 0 else val


def _log_normalizer(n, a, b):
    n = np.asarray(n, dtype=float)
    # n = 0 with a + b + 1 = 0 would give 0 * Gamma(0); use (s) Gamma(s) = Gamma(s + 1).
    head = np.where(
        n == 0,
        gammaln(a + b + 2),
        np.log(np.maximum(2 * n + a + b + 1, 1e-300)) + gammaln(np.maximum(n + a + b + 1, 1e-300)),
    )
    return 0.5 * (head + gammaln(n + 1) - gammaln(n + a + 1) - gammaln(n + b + 1))


def normalizer(n, p: JacobiParams):
    """``d_n^{alpha,beta}``, computed in log space."""
    if np.any(np.asarray(n) < 0):
        raise DomainError("degree must be nonnegative")
    out = np.exp(_log_normalizer(n, p.alpha, p.beta))
    return float(out) if np.ndim(out) == 0 else out


def trig_table(n_max: int, p: JacobiParams, theta) -> np.ndarray:
    """Rows ``TP_0 .. TP_{n_max}`` at ``theta``; no endpoint check (internal use)."""
    theta = np.asarray(theta, dtype=float)
    tab = jacobi_table(n_max, p, np.clip(np.cos(theta), -1.0, 1.0))
    d = normalizer(np.arange(n_max + 1), p)
    return tab * d.reshape((-1,) + (1,) * theta.ndim)


def trig_poly(n: int, p: JacobiParams, theta):
    """Normalised trigonometric Jacobi polynomial ``d_n P_n(cos theta)``."""
    theta = _check_theta_open(theta)
    val = normalizer(n, p) * jacobi_table(n, p, np.cos(theta))[n]
    return float(val) if val.ndim == 0 else val


def _derivative_table(n_max, p, theta):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros((n_max + 1,) + theta.shape)
    if n_max == 0:
        return out
    inner = trig_table(n_max - 1, p.shifted(1, 1), theta)
    n = np.arange(1, n_max + 1, dtype=float)
    c = -0.5 * np.sqrt(n * (n + p.alpha + p.beta + 1))
    out[1:] = c.reshape((-1,) + (1,) * theta.ndim) * np.sin(theta) * inner
    return out


def trig_poly_derivative(n: int, p: JacobiParams, theta):
    """``d/dtheta TP_n`` through the shifted-parameter identity.

    ``TP_n' = -1/2 sqrt(n (n+alpha+beta+1)) sin(theta) TP_{n-1}^{(alpha+1,beta+1)}``;
    zero for ``n = 0``.
    """
    theta = _check_theta_open(theta)
    val = _derivative_table(n, p, theta)[n]
    return float(val) if val.ndim == 0 else val


def trig_poly_second_derivative(n: int, p: JacobiParams, theta):
    """Second theta-derivative, applying the identity twice."""
    theta = _check_theta_open(theta)
    if n == 0:
        return np.zeros_like(theta) if theta.ndim else 0.0
    q = p.shifted(1, 1)
    c = -0.5 * np.sqrt(n * (n + p.alpha + p.beta + 1))
    inner = trig_table(n - 1, q, theta)[n - 1]
    dinner = _derivative_table(n - 1, q, theta)[n - 1]
    val = c * (np.cos(theta) * inner + np.sin(theta) * dinner)
    return float(val) if val.ndim == 0 else val


def apply_jacobi_operator(n: int, p: JacobiParams, theta):
    """The Jacobi differential operator applied to ``TP_n`` with analytic derivatives."""
    theta = _check_theta_open(theta)
    a, b = p.alpha, p.beta
    f = trig_poly(n, p, theta)
    f1 = trig_poly_derivative(n, p, theta)
    f2 = trig_poly_second_derivative(n, p, theta)
    drift = (a - b + (a + b + 1) * np.cos(theta)) / np.sin(theta)
    return -f2 - drift * f1 + p.shift**2 * f


def eigenvalue(n: int, p: JacobiParams) -> float:
    if n < 0:
        raise DomainError("degree must be nonnegative")
    return (n + p.shift) ** 2


def measure_density(p: JacobiParams, theta):
    """Density of ``dmu_{alpha,beta}`` with respect to ``dtheta``.

    Accepts the closed interval; an endpoint where the relevant exponent is
    negative raises.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise DomainError("theta must lie in [0, pi]")
    ea, eb = 2 * p.alpha + 1, 2 * p.beta + 1
    if (ea < 0 and np.any(theta == 0)) or (eb < 0 and np.any(theta == np.pi)):
        raise DomainError("measure density is infinite at this endpoint")
    with np.errstate(divide="ignore"):
        s = np.sin(theta / 2)
        c = np.where(theta == np.pi, 0.0, np.cos(theta / 2))
        val = np.power(s, ea) * np.power(c, eb)
    return float(val) if val.ndim == 0 else val


def measure_cdf(p: JacobiParams, theta):
    """``mu_{alpha,beta}((0, theta))`` in closed form.

    With ``y = sin^2(theta/2)`` the measure becomes ``y^alpha (1-y)^beta dy``, so
    the distribution function is an incomplete beta function.
    """
    from scipy.special import betainc

    theta = np.clip(np.asarray(theta, dtype=float), 0.0, np.pi)
    y = np.sin(theta / 2) ** 2
    val = np.exp(betaln(p.alpha + 1, p.beta + 1)) * betainc(p.alpha + 1, p.beta + 1, y)
    return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=256)
def _golub_welsch(order, gl, gr):
    a, b = gl, gr
    i = np.arange(order, dtype=float)
    s = 2 * i + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    k = np.arange(1, order, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s * s - 1))
    if order > 1:
        # closed form of the k = 1 entry, finite when a + b = -1
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    nodes, vecs = eigh_tridiagonal(diag, np.sqrt(off2))
    mu0 = np.exp((a + b + 1) * np.log(2.0) + betaln(a + 1, b + 1))
    weights = mu0 * vecs[0] ** 2
    return nodes, weights


def gauss_jacobi_rule(order: int, gamma_left: float, gamma_right: float) -> QuadratureRule:
    """Gauss rule for ``int f(u) (1-u)^gamma_left (1+u)^gamma_right du`` on ``[-1, 1]``.

    Golub--Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
    matrix; weights come from the first eigenvector components.  Exact for
    polynomials of degree ``<= 2 * order - 1``.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    if not (gamma_left > -1 and gamma_right > -1):
        raise DomainError("exponents must exceed -1")
    nodes, weights = _golub_welsch(int(order), float(gamma_left), float(gamma_right))
    return QuadratureRule(
        nodes.copy(), weights.copy(), int(order), ("interval", float(gamma_left), float(gamma_right))
    )


def theta_rule(p: JacobiParams, order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Gauss rule for ``dmu_{alpha,beta}`` on ``(0, pi)``, nodes increasing."""
    x, w = _golub_welsch(int(order), p.alpha, p.beta)
    theta = np.arccos(x)[::-1].copy()
    weights = (w * 2.0 ** (-(p.alpha + p.beta + 1)))[::-1].copy()
    return QuadratureRule(theta, weights, int(order), ("dmu", p.alpha, p.beta))


def gamma_ratio_check(z, r, t):
    """``Gamma(z+r) / Gamma(z+t) / z^(r-t)``, which stays bounded above and below."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("z must be positive")
    if np.any(z + r <= 0) or np.any(z + t <= 0):
        raise DomainError("z + r and z + t must be positive")
    # Pochhammer form avoids cancellation between two large log-gammas
    val = poch(z + t, r - t) / z ** (r - t)
    return float(val) if val.ndim == 0 else val
