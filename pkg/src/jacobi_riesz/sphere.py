"""Geodesic polar decomposition, mixed norms and the Riesz transform on rank-one spaces.

A function on ``M`` is written ``F(theta, x')`` with ``theta in (0, pi)`` the
distance from a pole and ``x'`` on a cross-section sphere.  Projecting ``x'``
onto spherical harmonics ``Y_{j,k}`` gives radial profiles ``F_{j,k}(theta)``,
and each profile is expanded in the radial basis

    psi_{n+j,j}(theta) = kappa^(-1/2) u_j(theta) TP_n^{shifted}(theta),

which is orthonormal for the radial measure ``kappa dmu_base``.  Two models
are implemented:

* spheres ``S^d`` (``d = 2, 3``): base ``(alpha, alpha)``, ``alpha = (d-2)/2``,
  ``u_j = (sin(theta/2) cos(theta/2))^j``, ``kappa = 2^(d-1)`` so that
  ``kappa dmu = sin(theta)^(d-1) dtheta``; cross-section ``S^(d-1)``;
* projective spaces over C, H and the octonions: base ``(d-1, m)``,
  ``u_j = sin(theta/2)^(2j)``, ``kappa = Gamma(m+d+1)/(Gamma(d) Gamma(m+1))``;
  cross-section ``S^d``.

In both, ``(-Delta_M + lambda_M)^(-1/2)`` divides the ``(n, j, k)`` coefficient
by the ``shift`` of the shifted parameters, and

    |R_M f|^2 = |d_theta G|^2 + rho_M(theta) |grad' G|^2,   G = (-Delta_M + lambda_M)^(-1/2) f.

After integrating over ``x'``, ``|grad' G|^2`` becomes
``sum j (j + s - 1) |G_{j,k}|^2`` with ``s`` the cross-section dimension.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, DomainError
from .special import JacobiParams, OffsetScheme, theta_rule, trig_table, _derivative_table
from .transforms import (
    ManifoldParams,
    offset_riesz,
    offset_spectrum,
    offset_t_operator,
)

__all__ = [
    "RadialModel",
    "RadialBasisElement",
    "CircleSection",
    "SphereSection",
    "MixedNormField",
    "RieszResult",
    "radial_model",
    "harmonic_dimension",
    "field_from_coefficients",
    "random_field",
    "synthesize_samples",
    "harmonic_analyze",
    "mixed_norm",
    "inverse_sqrt_laplacian",
    "riesz_sphere",
    "riesz_pointwise",
    "even_projection",
    "projective_radial_pipeline",
    "aggregate_norm",
    "write_field_csv",
    "read_field_csv",
    "write_experiment_csv",
    "DEFAULT_MAX_DEGREE",
    "DEFAULT_RADIAL_CAP",
]

DEFAULT_MAX_DEGREE = 16
DEFAULT_RADIAL_CAP = 24


def harmonic_dimension(j: int, s: int) -> int:
    """Dimension of degree-``j`` spherical harmonics on ``S^s``."""
    if j < 0:
        raise DomainError("degree must be nonnegative")
    if j == 0:
        return 1
    if s == 1:
        return 2
    return (2 * j + s - 1) * math.comb(j + s - 2, j) // (s - 1)


@dataclass(frozen=True)
class RadialModel:
    manifold: ManifoldParams
    base: JacobiParams
    a: float
    b: float
    log_kappa: float
    cross_dim: int

    def scheme(self, j: int) -> OffsetScheme:
        return OffsetScheme(self.a, self.b, j)

    def shifted(self, j: int) -> JacobiParams:
        return self.scheme(j).params(self.base)

    def divisor(self, n, j: int):
        """``n + shift`` of the shifted parameters: square root of the ``(n, j)`` eigenvalue of ``-Delta + lambda``."""
        return np.asarray(n, dtype=float) + self.shifted(j).shift

    def tangential_eigenvalue(self, j: int) -> float:
        return float(j * (j + self.cross_dim - 1))

    def harmonic_count(self, j: int) -> int:
        return harmonic_dimension(j, self.cross_dim)

    def rho(self, theta):
        return self.manifold.sqrt_rho(theta) ** 2

    def rule(self, order: int):
        r = theta_rule(self.base, order)
        return r.nodes, r.weights * math.exp(self.log_kappa)

    def psi_table(self, n_max: int, j: int, theta):
        """``psi_{n+j,j}(theta)`` for ``n = 0..n_max``, shape ``(n_max+1, len(theta))``."""
        sc = self.scheme(j)
        w = np.exp(sc.log_weight(theta) - 0.5 * self.log_kappa)
        return trig_table(n_max, self.shifted(j), theta) * w

    def psi_derivative_table(self, n_max: int, j: int, theta):
        sc = self.scheme(j)
        p = self.shifted(j)
        w = np.exp(sc.log_weight(theta) - 0.5 * self.log_kappa)
        tab = trig_table(n_max, p, theta)
        dtab = _derivative_table(n_max, p, theta)
        return w * (dtab + sc.log_weight_derivative(theta) * tab)


def radial_model(manifold: ManifoldParams) -> RadialModel:
    if manifold.kind == "sphere":
        if manifold.d not in (2, 3):
            raise DomainError("sphere cross-sections are implemented for d = 2, 3")
        a = (manifold.d - 2) / 2
        return RadialModel(manifold, JacobiParams(a, a), 1, 1, (manifold.d - 1) * math.log(2), manifold.d - 1)
    if manifold.kind == "real_projective":
        raise DomainError("P_d(R) is handled as even functions on S^d; use even_projection")
    d, m = manifold.d, manifold.m
    log_kappa = gammaln(m + d + 1) - gammaln(d) - gammaln(m + 1)
    return RadialModel(manifold, JacobiParams(d - 1, m), 2, 0, float(log_kappa), d)


@dataclass(frozen=True, eq=False)
class RadialBasisElement:
    n: int
    j: int
    theta: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, model: RadialModel, n: int, j: int, theta) -> "RadialBasisElement":
        """``psi_{n,j}`` with ``n`` the total degree (``n >= j``)."""
        if n < j:
            raise DomainError("total degree n must be at least j")
        theta = np.asarray(theta, dtype=float)
        return cls(n, j, theta, model.psi_table(n - j, j, theta)[-1])


class CircleSection:
    """``S^1`` sampled at ``n`` equispaced angles, real Fourier harmonics."""

    dim = 1

    def __init__(self, n: int):
        self.n = n
        self.phi = 2 * np.pi * np.arange(n) / n
        self.weights = np.full(n, 2 * np.pi / n)

    @property
    def max_exact_degree(self) -> int:
        return self.n - 1

    def keys(self, L):
        return [(0, 1)] + [(j, k) for j in range(1, L + 1) for k in (1, 2)]

    def harmonics(self, L):
        rows = [np.full(self.n, 1 / math.sqrt(2 * np.pi))]
        grads = [np.zeros((self.n, 1))]
        for j in range(1, L + 1):
            c, s = np.cos(j * self.phi), np.sin(j * self.phi)
            rows += [c / math.sqrt(np.pi), s / math.sqrt(np.pi)]
            grads += [(-j * s / math.sqrt(np.pi))[:, None], (j * c / math.sqrt(np.pi))[:, None]]
        return np.array(rows), np.array(grads)


class SphereSection:
    """``S^2`` on a Gauss--Legendre (in ``cos``) by equispaced-longitude grid.

    Real harmonics for degree ``j`` and order ``m`` are
    ``2^(-m-1/2) sin^m(t) TP_{j-m}^{(m,m)}(t)`` times ``1/sqrt(2 pi)``,
    ``cos(m phi)/sqrt(pi)`` or ``sin(m phi)/sqrt(pi)``; ``k`` runs over
    ``m = 0``, then ``(m, cos), (m, sin)`` for ``m = 1..j``.
    """

    dim = 2

    def __init__(self, n_lat: int, n_lon: int):
        self.n_lat, self.n_lon = n_lat, n_lon
        r = theta_rule(JacobiParams(0, 0), n_lat)
        lat, lon = r.nodes, 2 * np.pi * np.arange(n_lon) / n_lon
        self.polar = np.repeat(lat, n_lon)
        self.phi = np.tile(lon, n_lat)
        # dmu_{0,0} = sin(t)/2 dt
        self.weights = np.repeat(2 * r.weights, n_lon) * (2 * np.pi / n_lon)

    @property
    def max_exact_degree(self) -> int:
        return min(2 * self.n_lat - 1, self.n_lon - 1)

    def keys(self, L):
        return [(j, k) for j in range(L + 1) for k in range(1, 2 * j + 2)]

    def harmonics(self, L):
        t, phi = self.polar, self.phi
        st = np.sin(t)
        rows, grads = [], []
        for j in range(L + 1):
            for m in range(j + 1):
                p = JacobiParams(m, m)
                tp = trig_table(j - m, p, t)[-1]
                dtp = _derivative_table(j - m, p, t)[-1]
                c = 2.0 ** (-m - 0.5)
                leg = c * st**m * tp
                dleg = c * (m * np.cos(t) * st ** max(m - 1, 0) * tp + st**m * dtp)
                # leg / sin(t) without dividing by a small sine
                leg_over_s = c * st ** max(m - 1, 0) * tp
                if m == 0:
                    rows.append(leg / math.sqrt(2 * np.pi))
                    grads.append(np.stack([dleg / math.sqrt(2 * np.pi), np.zeros_like(t)], axis=1))
                    continue
                for trig, dtrig in ((np.cos, lambda x: -np.sin(x)), (np.sin, np.cos)):
                    az, daz = trig(m * phi) / math.sqrt(np.pi), m * dtrig(m * phi) / math.sqrt(np.pi)
                    rows.append(leg * az)
                    grads.append(np.stack([dleg * az, leg_over_s * daz], axis=1))
        return np.array(rows), np.array(grads)


def _section_for(model: RadialModel, L: int):
    if model.cross_dim == 1:
        return CircleSection(2 * L + 2)
    if model.cross_dim == 2:
        return SphereSection(L + 2, 2 * L + 2)
    raise DomainError(f"no cross-section harmonics for S^{model.cross_dim}; use radial profiles")


@dataclass(frozen=True, eq=False)
class MixedNormField:
    """Radial profiles ``F_{j,k}`` on the nodes of a Gauss rule for the radial measure."""

    model: RadialModel
    theta: np.ndarray
    weights: np.ndarray
    keys: tuple
    profiles: np.ndarray
    max_degree: int
    radial_cap: int

    @property
    def manifold(self) -> ManifoldParams:
        return self.model.manifold

    @property
    def theta_grid(self):
        return self.theta

    def profile(self, j: int, k: int):
        return self.profiles[self.keys.index((j, k))]

    def with_profiles(self, profiles) -> "MixedNormField":
        return MixedNormField(self.model, self.theta, self.weights, self.keys,
                              np.asarray(profiles, dtype=float), self.max_degree, self.radial_cap)

    @cached_property
    def _psi(self):
        return {j: self.model.psi_table(self.radial_cap, j, self.theta) for j in range(self.max_degree + 1)}

    def coefficients(self, check: bool = True):
        """``<F_{j,k}, psi_{n+j,j}>`` for ``n <= radial_cap``; rows follow ``keys``.

        With ``check``, profiles that are not reproduced by their expansion
        raise :class:`ConfigurationError`.
        """
        out = np.empty((len(self.keys), self.radial_cap + 1))
        for i, (j, _) in enumerate(self.keys):
            out[i] = self._psi[j] @ (self.weights * self.profiles[i])
        if check:
            recon = self._synth(out)
            scale = max(np.abs(self.profiles).max(), 1e-300)
            if np.abs(recon - self.profiles).max() > 1e-8 * scale:
                raise ConfigurationError("field is not band-limited to the radial cap")
        return out

    def _synth(self, coeffs, table=None):
        table = self._psi if table is None else table
        return np.array([coeffs[i] @ table[j] for i, (j, _) in enumerate(self.keys)])


def _empty_field(model: RadialModel, max_degree: int, radial_cap: int, order: int | None):
    if order is None:
        order = 2 * (radial_cap + max_degree) + 8
    if order < radial_cap + max_degree + 1:
        raise ConfigurationError("radial quadrature order too low for the band limit")
    theta, weights = model.rule(order)
    keys = tuple((j, k) for j in range(max_degree + 1) for k in range(1, model.harmonic_count(j) + 1))
    return theta, weights, keys, order


def field_from_coefficients(model: RadialModel, coeffs, max_degree: int, radial_cap: int, order: int | None = None) -> MixedNormField:
    """Field with ``F_{j,k} = sum_n coeffs[(j,k)][n] psi_{n+j,j}``; rows of ``coeffs`` follow the key order."""
    theta, weights, keys, _ = _empty_field(model, max_degree, radial_cap, order)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(keys), radial_cap + 1):
        raise ValueError(f"coefficients must have shape {(len(keys), radial_cap + 1)}")
    f = MixedNormField(model, theta, weights, keys, np.zeros((len(keys), len(theta))), max_degree, radial_cap)
    return f.with_profiles(f._synth(coeffs))


def random_field(model: RadialModel, rng: np.random.Generator, max_degree: int = DEFAULT_MAX_DEGREE,
                 radial_cap: int = DEFAULT_RADIAL_CAP, order: int | None = None) -> MixedNormField:
    """Band-limited field with independent standard normal coefficients."""
    n_keys = sum(model.harmonic_count(j) for j in range(max_degree + 1))
    coeffs = rng.standard_normal((n_keys, radial_cap + 1))
    return field_from_coefficients(model, coeffs, max_degree, radial_cap, order)


def synthesize_samples(field: MixedNormField, section=None):
    """``F(theta_i, x'_g)`` on the product grid, shape ``(len(theta), len(section points))``."""
    section = _section_for(field.model, field.max_degree) if section is None else section
    Y, _ = section.harmonics(field.max_degree)
    return field.profiles.T @ Y, section


def harmonic_analyze(samples, section, model: RadialModel, max_degree: int, radial_cap: int, order: int | None = None) -> MixedNormField:
    """Profiles ``F_{j,k}(theta) = int F(theta, x') Y_{j,k}(x') dx'`` from product-grid samples.

    ``samples`` has shape ``(n_theta, n_section)`` with rows on the radial
    rule of ``order``.  The section rule must integrate degree ``2 max_degree``.
    """
    if section.dim != model.cross_dim:
        raise ConfigurationError("cross-section dimension does not match the manifold")
    if 2 * max_degree > section.max_exact_degree:
        raise ConfigurationError(
            f"cross-section grid is exact to degree {section.max_exact_degree}, "
            f"aliasing for max_degree {max_degree}"
        )
    theta, weights, keys, _ = _empty_field(model, max_degree, radial_cap, order)
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (len(theta), len(section.weights)):
        raise ValueError("samples do not match the radial and cross-section grids")
    Y, _ = section.harmonics(max_degree)
    profiles = Y @ (section.weights * samples).T
    return MixedNormField(model, theta, weights, keys, profiles, max_degree, radial_cap)


def _lp_of_profile_sum(weights, sq, p):
    if p < 1:
        raise DomainError("p must be at least 1")
    return float(np.sum(weights * sq ** (p / 2)) ** (1 / p))


def mixed_norm(field: MixedNormField, p: float) -> float:
    """``(int (sum_{j,k} |F_{j,k}|^2)^(p/2) kappa dmu)^(1/p)``."""
    return _lp_of_profile_sum(field.weights, np.sum(field.profiles**2, axis=0), p)


def _divide(field, coeffs, power=1.0):
    out = coeffs.copy()
    n = np.arange(field.radial_cap + 1)
    for i, (j, _) in enumerate(field.keys):
        out[i] /= field.model.divisor(n, j) ** power
    return out


def inverse_sqrt_laplacian(field: MixedNormField, power: float = 1.0) -> MixedNormField:
    """``(-Delta_M + lambda_M)^(-power/2)``; the default is the inverse square root."""
    return field.with_profiles(field._synth(_divide(field, field.coefficients(), power)))


@dataclass(frozen=True, eq=False)
class RieszResult:
    density: np.ndarray
    output_norm: float
    input_norm: float
    ratio: float


def _riesz_density(field: MixedNormField):
    """``int |R_M f(theta, x')|^2 dx'`` at each radial node, from the profile expansion."""
    g = _divide(field, field.coefficients())
    dpsi = {j: field.model.psi_derivative_table(field.radial_cap, j, field.theta) for j in range(field.max_degree + 1)}
    G = field._synth(g)
    dG = field._synth(g, dpsi)
    lam = np.array([field.model.tangential_eigenvalue(j) for j, _ in field.keys])
    return np.sum(dG**2, axis=0) + field.model.rho(field.theta) * np.sum(lam[:, None] * G**2, axis=0), G, dG


def riesz_sphere(field: MixedNormField, p: float) -> RieszResult:
    """Mixed ``L^p(L^2)`` norms of ``R_M f`` and ``f`` and their ratio.

    ``density`` holds ``int |R_M f|^2 dx'`` at each radial node.
    """
    dens, _, _ = _riesz_density(field)
    out = _lp_of_profile_sum(field.weights, dens, p)
    inp = mixed_norm(field, p)
    return RieszResult(dens, out, inp, out / inp if inp > 0 else 0.0)


def riesz_pointwise(field: MixedNormField, section=None):
    """``|R_M f|`` on the product grid ``theta x section``."""
    section = _section_for(field.model, field.max_degree) if section is None else section
    _, G, dG = _riesz_density(field)
    Y, dY = section.harmonics(field.max_degree)
    radial = dG.T @ Y
    tang = np.einsum("it,igc->tgc", G, dY)
    sq = radial**2 + field.model.rho(field.theta)[:, None] * np.sum(tang**2, axis=2)
    return np.sqrt(sq), section


def even_projection(field: MixedNormField) -> MixedNormField:
    """Keep the components of even total degree ``n + j`` (functions on ``P_d(R)``)."""
    if field.manifold.kind != "sphere":
        raise DomainError("even projection is defined on spheres")
    c = field.coefficients()
    n = np.arange(field.radial_cap + 1)
    for i, (j, _) in enumerate(field.keys):
        c[i, (n + j) % 2 == 1] = 0.0
    return field.with_profiles(field._synth(c))


def projective_radial_pipeline(field: MixedNormField, N: int | None = None):
    """Per-profile outputs ``u_j R^{shifted}(u_j^-1 F_{j,k})`` and ``j u_j T_M^{shifted}(u_j^-1 F_{j,k})``.

    Returns a dict ``(j, k) -> (riesz_part, t_part)`` sampled on the radial
    nodes, with parameters shifted by ``(2j, 0)``.
    """
    model = field.model
    if model.manifold.kind in ("sphere", "real_projective"):
        raise DomainError("the projective pipeline needs a complex, quaternionic or octonionic model")
    N = field.radial_cap if N is None else N
    order = len(field.theta)
    out = {}
    for i, key in enumerate(field.keys):
        j = key[0]
        sc = model.scheme(j)
        spec = offset_spectrum(field.profiles[i], model.base, sc, N, order)
        out[key] = (
            offset_riesz(spec, sc, field.theta),
            offset_t_operator(spec, sc, model.manifold, field.theta),
        )
    return out


def aggregate_norm(field: MixedNormField, outputs, p: float) -> float:
    """Mixed norm of ``(sum_{j,k} |riesz_part|^2 + |t_part|^2)^(1/2)``."""
    sq = np.zeros_like(field.theta)
    for r, t in outputs.values():
        sq += r**2 + t**2
    return _lp_of_profile_sum(field.weights, sq, p)


def write_field_csv(field: MixedNormField, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "k", "theta_index", "value"])
        for (j, k), row in zip(field.keys, field.profiles):
            for t, v in enumerate(row):
                w.writerow([j, k, t, repr(float(v))])


def read_field_csv(path, template: MixedNormField) -> MixedNormField:
    """Profiles from a CSV written by :func:`write_field_csv`, on ``template``'s grid."""
    profiles = np.zeros_like(template.profiles)
    index = {key: i for i, key in enumerate(template.keys)}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["j"]), int(row["k"]))
            if key not in index:
                raise ValueError(f"profile {key} is not in the template")
            profiles[index[key], int(row["theta_index"])] = float(row["value"])
    return template.with_profiles(profiles)


def write_experiment_csv(rows, path):
    """Rows of ``(trial, p, input_norm, output_norm, ratio)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "p", "input_norm", "output_norm", "ratio"])
        for trial, p, inp, out, ratio in rows:
            w.writerow([int(trial), repr(float(p)), repr(float(inp)), repr(float(out)), repr(float(ratio))])
