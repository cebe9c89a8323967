"""Spectral analysis and the Jacobi spectral operators.

Functions here work with a :class:`Spectrum`, the coefficient vector of a
function against the orthonormal system ``TP_n^{(alpha,beta)}``.  The Riesz
transform and the auxiliary operator ``T_M`` are spectral multipliers followed
by synthesis; the Poisson kernel is available both as its eigenfunction series
and as the closed-form double integral over ``[-1, 1]^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, DomainError
from .special import (
    DEFAULT_ORDER,
    JacobiParams,
    OffsetScheme,
    QuadratureRule,
    gauss_jacobi_rule,
    normalizer,
    theta_rule,
    trig_table,
    _check_theta_open,
    _derivative_table,
)

__all__ = [
    "Spectrum",
    "ManifoldParams",
    "SeriesValue",
    "analyze",
    "analyze_samples",
    "synthesize",
    "synthesize_derivative",
    "riesz_transform",
    "t_operator",
    "t_operator_norm",
    "poisson_series",
    "poisson_integral",
    "offset_spectrum",
    "offset_riesz",
    "offset_t_operator",
    "DEFAULT_TRUNCATION",
]

DEFAULT_TRUNCATION = 64


@dataclass(frozen=True, eq=False)
class Spectrum:
    params: JacobiParams
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def norm(self) -> float:
        """``L^2(dmu)`` norm, by Parseval."""
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def multiply(self, multiplier) -> "Spectrum":
        n = np.arange(len(self.coeffs), dtype=float)
        return Spectrum(self.params, self.coeffs * multiplier(n))


@dataclass(frozen=True)
class ManifoldParams:
    """Radial Jacobi data of a compact rank-one symmetric space.

    Use the classmethod constructors; they fill ``alpha``, ``beta``,
    ``lambda_M`` and the choice of ``rho_M``.
    """

    kind: str
    d: int
    m: int
    lambda_M: float
    alpha: float
    beta: float
    rho_selector: str
    l: int | None = field(default=None, compare=False)

    @classmethod
    def sphere(cls, d: int) -> "ManifoldParams":
        if d < 2:
            raise DomainError("the sphere S^d is handled for d >= 2")
        a = (d - 2) / 2
        return cls("sphere", d, 0, ((d - 1) / 2) ** 2, a, a, "inv_sin_sq")

    @classmethod
    def real_projective(cls, d: int) -> "ManifoldParams":
        if d < 2:
            raise DomainError("P_d(R) needs d >= 2")
        a = (d - 2) / 2
        return cls("real_projective", d, 0, ((d - 1) / 2) ** 2, a, a, "inv_sin_half_sq")

    @classmethod
    def complex_projective(cls, l: int) -> "ManifoldParams":
        if l < 2:
            raise DomainError("P_l(C) needs l >= 2")
        return cls._projective("complex_projective", 2, l - 2, l)

    @classmethod
    def quaternionic_projective(cls, l: int) -> "ManifoldParams":
        if l < 2:
            raise DomainError("P_l(H) needs l >= 2")
        return cls._projective("quaternionic_projective", 4, 2 * l - 3, l)

    @classmethod
    def cayley_plane(cls) -> "ManifoldParams":
        return cls._projective("cayley_plane", 8, 3, 2)

    @classmethod
    def _projective(cls, kind, d, m, l):
        return cls(kind, d, m, ((m + d) / 2) ** 2, d - 1.0, float(m), "inv_sin_half_sq", l)

    @classmethod
    def from_name(cls, name: str, n: int | None = None) -> "ManifoldParams":
        builders = {
            "sphere": cls.sphere,
            "real_projective": cls.real_projective,
            "complex_projective": cls.complex_projective,
            "quaternionic_projective": cls.quaternionic_projective,
        }
        if name == "cayley_plane":
            return cls.cayley_plane()
        if name not in builders:
            raise DomainError(f"unknown manifold {name!r}")
        if n is None:
            raise DomainError(f"{name} needs a dimension parameter")
        return builders[name](n)

    @property
    def params(self) -> JacobiParams:
        return JacobiParams(self.alpha, self.beta)

    @property
    def is_sphere(self) -> bool:
        return self.kind == "sphere"

    def sqrt_rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.rho_selector == "inv_sin_sq":
            return 1.0 / np.sin(theta)
        return 1.0 / np.sin(theta / 2)

    def log_sqrt_rho_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.rho_selector == "inv_sin_sq":
            return -1.0 / np.tan(theta)
        return -0.5 / np.tan(theta / 2)


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float


def analyze_samples(values, rule: QuadratureRule, p: JacobiParams, N: int) -> Spectrum:
    """Coefficients from samples at the nodes of a ``dmu_{alpha,beta}`` rule."""
    if rule.target != ("dmu", p.alpha, p.beta):
        raise ConfigurationError("rule does not integrate against dmu for these parameters")
    if rule.order < N + 1:
        raise ConfigurationError(f"quadrature order {rule.order} cannot resolve degree {N}")
    table = trig_table(N, p, rule.nodes)
    return Spectrum(p, table @ (rule.weights * np.asarray(values, dtype=float)))


def analyze(f: Callable, p: JacobiParams, N: int, order: int | None = None) -> Spectrum:
    """``c_n = <f, TP_n>`` for ``n <= N`` by Gauss--Jacobi quadrature in ``x = cos theta``."""
    if N < 0:
        raise DomainError("truncation must be nonnegative")
    if order is None:
        order = max(DEFAULT_ORDER, 2 * N)
    if order < 2 * N:
        raise ConfigurationError(f"quadrature order {order} is below 2N = {2 * N}")
    rule = theta_rule(p, order)
    return analyze_samples(f(rule.nodes), rule, p, N)


def synthesize(s: Spectrum, theta):
    theta = _check_theta_open(theta)
    val = np.tensordot(s.coeffs, trig_table(s.truncation, s.params, theta), axes=1)
    return float(val) if np.ndim(val) == 0 else val


def synthesize_derivative(s: Spectrum, theta):
    """``d/dtheta`` of the synthesised function, term by term."""
    theta = _check_theta_open(theta)
    val = np.tensordot(s.coeffs, _derivative_table(s.truncation, s.params, theta), axes=1)
    return float(val) if np.ndim(val) == 0 else val


def _inverse_sqrt(s: Spectrum) -> Spectrum:
    if s.params.shift <= 0:
        raise DomainError("the bottom eigenvalue vanishes; J^{-1/2} is undefined")
    return s.multiply(lambda n: 1.0 / (n + s.params.shift))


def riesz_transform(s: Spectrum, theta):
    """``d/dtheta J^{-1/2} f``.

    Termwise this is ``-1/2 sqrt(n(n+a+b+1))/(n+(a+b+1)/2) c_n sin(theta) TP_{n-1}^{(a+1,b+1)}``.
    """
    return synthesize_derivative(_inverse_sqrt(s), theta)


def t_operator(s: Spectrum, mp: ManifoldParams, theta):
    """``sqrt(rho_M(theta)) J^{-1/2} f`` with ``J`` of the spectrum's own parameters."""
    theta = _check_theta_open(theta)
    val = mp.sqrt_rho(theta) * synthesize(_inverse_sqrt(s), theta)
    return float(val) if np.ndim(val) == 0 else val


def t_operator_norm(s: Spectrum, mp: ManifoldParams, order: int | None = None) -> float:
    """``||T_M f||`` in ``L^2(dmu_{alpha,beta})`` by an exact Gauss rule.

    ``rho_M dmu_{alpha,beta}`` is itself a Jacobi measure: ``dmu_{alpha-1,beta}``
    for ``1/sin^2(theta/2)`` and ``dmu_{alpha-1,beta-1}/4`` for ``1/sin^2(theta)``,
    so the norm is a plain quadrature of ``(J^{-1/2} f)^2``.
    """
    p = s.params
    if mp.rho_selector == "inv_sin_sq":
        q, scale = p.shifted(-1, -1), 0.25
    else:
        q, scale = p.shifted(-1, 0), 1.0
    rule = theta_rule(q, order or s.truncation + 2)
    g = synthesize(_inverse_sqrt(s), rule.nodes)
    return float(np.sqrt(scale * rule.integrate(g**2)))


def _check_poisson_args(t, theta, varphi):
    if t <= 0:
        raise DomainError("Poisson time must be positive")
    _check_theta_open(np.array([theta, varphi]))


def _sup_bound(n, p: JacobiParams):
    """``sup |TP_n|`` on ``(0, pi)``; endpoint values when ``max(alpha, beta) >= -1/2``."""
    n = np.asarray(n, dtype=float)
    top = np.maximum(
        gammaln(n + p.alpha + 1) - gammaln(n + 1) - gammaln(p.alpha + 1),
        gammaln(n + p.beta + 1) - gammaln(n + 1) - gammaln(p.beta + 1),
    )
    return normalizer(n, p) * np.exp(top)


def poisson_series(t: float, theta: float, varphi: float, p: JacobiParams, N: int = DEFAULT_TRUNCATION) -> SeriesValue:
    """Truncated eigenfunction series of the Poisson kernel with a tail bound.

    The bound uses ``|TP_n| <= sup`` at the endpoints, valid for
    ``max(alpha, beta) >= -1/2``; otherwise the reported bound is ``nan``.
    """
    _check_poisson_args(t, theta, varphi)
    tab = trig_table(N, p, np.array([theta, varphi]))
    n = np.arange(N + 1)
    value = float(np.sum(np.exp(-t * (n + p.shift)) * tab[:, 0] * tab[:, 1]))
    if max(p.alpha, p.beta) < -0.5:
        return SeriesValue(value, math.nan)
    tail = 0.0
    start = N + 1
    while True:
        k = np.arange(start, start + 256)
        terms = np.exp(-t * (k + p.shift)) * _sup_bound(k, p) ** 2
        tail += float(terms.sum())
        r = terms[-1] / terms[-2]
        if r < 1 and terms[-1] * r / (1 - r) <= 1e-17 * max(tail, 1e-300):
            tail += terms[-1] * r / (1 - r)
            break
        start += 256
    return SeriesValue(value, float(tail))


def _poisson_integral_at(t, theta, varphi, p, order):
    a, b = p.alpha, p.beta
    ru = gauss_jacobi_rule(order, a - 0.5, a - 0.5)
    rv = gauss_jacobi_rule(order, b - 0.5, b - 0.5)
    s = math.sin(theta / 2) * math.sin(varphi / 2)
    c = math.cos(theta / 2) * math.cos(varphi / 2)
    # cosh(t/2) - z written as offset + s(1-u) + c(1-v) to keep relative accuracy
    offset = 2 * math.sinh(t / 4) ** 2 + 2 * math.sin((theta - varphi) / 4) ** 2
    den = offset + s * (1 - ru.nodes)[:, None] + c * (1 - rv.nodes)[None, :]
    logs = -(a + b + 2) * np.log(den) + np.log(ru.weights)[:, None] + np.log(rv.weights)[None, :]
    top = logs.max()
    log_pre = (
        gammaln(a + b + 2) - (a + b + 1) * math.log(2) - math.log(math.pi)
        - gammaln(a + 0.5) - gammaln(b + 0.5)
    )
    return math.sinh(t / 2) * math.exp(log_pre + top) * float(np.exp(logs - top).sum())


def poisson_integral(t: float, theta: float, varphi: float, p: JacobiParams, order: int | None = None, tol: float = 1e-11) -> float:
    """Closed-form double-integral representation of the Poisson kernel.

    The factors ``(1-u^2)^(alpha-1/2)`` and ``(1-v^2)^(beta-1/2)`` are absorbed
    into Gauss--Jacobi rules.  With ``order=None`` the order doubles from 64
    until successive values agree to ``tol`` (cap 2048).
    """
    p.require_kernel_range()
    _check_poisson_args(t, theta, varphi)
    if order is not None:
        return _poisson_integral_at(t, theta, varphi, p, order)
    order = 64
    prev = _poisson_integral_at(t, theta, varphi, p, order)
    while order < 2048:
        order *= 2
        cur = _poisson_integral_at(t, theta, varphi, p, order)
        if abs(cur - prev) <= tol * abs(cur):
            return cur
        prev = cur
    return cur


def offset_spectrum(f, base: JacobiParams, scheme: OffsetScheme, N: int, order: int = DEFAULT_ORDER) -> Spectrum:
    """Spectrum of ``u_j^{-1} f`` in the shifted system ``(alpha + a j, beta + b j)``.

    ``<u_j^{-1} f, TP_n>_{dmu shifted} = <f, u_j TP_n>_{dmu base}``, so the
    coefficients are computed with the base-measure rule and no division by ``u_j``.
    """
    rule = theta_rule(base, order)
    shifted = scheme.params(base)
    values = f(rule.nodes) if callable(f) else np.asarray(f, dtype=float)
    table = trig_table(N, shifted, rule.nodes)
    return Spectrum(shifted, table @ (rule.weights * scheme.weight(rule.nodes) * values))


def offset_riesz(spectrum: Spectrum, scheme: OffsetScheme, theta):
    """``u_j R^{shifted}(u_j^{-1} f)`` evaluated from the shifted spectrum."""
    return scheme.weight(theta) * riesz_transform(spectrum, theta)


def offset_t_operator(spectrum: Spectrum, scheme: OffsetScheme, mp: ManifoldParams, theta):
    """``j u_j T_M^{shifted}(u_j^{-1} f)``."""
    return scheme.j * scheme.weight(theta) * t_operator(spectrum, mp, theta)
