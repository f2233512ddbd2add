"""Flux pairs ``f(k, u)``, ``g(l, u)`` and the quantities derived from them.

A :class:`FluxModel` bundles the two fluxes, their analytic derivatives and
the state/coefficient boxes ``[a, b]`` and ``[alpha, beta]``.  Models of the
separable polynomial form ``f = k P(u)``, ``g = l Q(u)`` carry the polynomial
coefficients in :attr:`FluxModel.poly`; the compiled step kernel uses them.

The entropy fluxes obey ``F_u = f_u**2``, ``G_u = g_u**2``, ``H_u = f_u g_u``
and are normalised to vanish at ``u = a``.  They are never tabulated; every
call integrates with a fixed 64-point Gauss-Legendre rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

__all__ = [
    "FluxModel",
    "InvariantRegionReport",
    "NonlinearityReport",
    "make_flux",
    "register_flux",
    "flux_families",
    "check_invariant_region",
    "check_nonlinearity",
    "check_derivatives",
    "entropy_flux_F",
    "entropy_flux_G",
    "entropy_flux_H",
    "singular_mapping_psi",
    "psi_field",
    "flux_potential_bounds",
]

_GL_NODES, _GL_WEIGHTS = leggauss(64)
_CHUNK = 1 << 15
_EMPTY_INTERVAL = 1e-8
_INVARIANT_TOL = 1e-12
NONLINEARITY_SLACK = 0.05


@dataclass(frozen=True)
class FluxModel:
    """Flux pair with derivatives and validity boxes.

    All callables must broadcast over numpy arrays.  ``poly``, if given, is
    ``(P, Q)`` as tuples of ascending power-series coefficients such that
    ``f(k, u) = k P(u)`` and ``g(l, u) = l Q(u)``.
    """

    f: Callable
    g: Callable
    f_u: Callable
    g_u: Callable
    f_k: Callable
    g_l: Callable
    state_bounds: tuple[float, float]
    coeff_bounds: tuple[float, float]
    name: str = "custom"
    params: tuple[float, ...] = ()
    poly: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = field(default=None, compare=False)

    def __post_init__(self):
        a, b = self.state_bounds
        alpha, beta = self.coeff_bounds
        if not a < b:
            raise ValueError(f"state bounds need a < b, got {self.state_bounds}")
        if not alpha <= beta:
            raise ValueError(f"coefficient bounds need alpha <= beta, got {self.coeff_bounds}")

    @property
    def a(self) -> float:
        return float(self.state_bounds[0])

    @property
    def b(self) -> float:
        return float(self.state_bounds[1])

    def symbol(self, xi, k, l, u):
        """``s(xi, k, l, u) = xi_1 f_u(k, u) + xi_2 g_u(l, u)``."""
        return xi[0] * self.f_u(k, u) + xi[1] * self.g_u(l, u)

    def max_speed_f(self, k):
        """``max_{u in [a, b]} |f_u(k, u)|`` for each entry of ``k``."""
        return self._max_speed(k, 0)

    def max_speed_g(self, l):
        """``max_{u in [a, b]} |g_u(l, u)|`` for each entry of ``l``."""
        return self._max_speed(l, 1)

    def _max_speed(self, c, which):
        c = np.asarray(c, dtype=float)
        if self.poly is not None:
            return np.abs(c) * _poly_max_abs_derivative(self.poly[which], self.a, self.b)
        # Dense sampling, padded by 1% since the sampled max can undershoot.
        us = np.linspace(self.a, self.b, 2049)
        deriv = self.f_u if which == 0 else self.g_u
        flat = c.ravel()
        out = np.empty_like(flat)
        for start in range(0, flat.size, 256):
            block = flat[start:start + 256]
            out[start:start + 256] = np.abs(deriv(block[:, None], us[None, :])).max(axis=1)
        return 1.01 * out.reshape(c.shape)


def _poly_max_abs_derivative(coeffs, a, b):
    dp = Polynomial(coeffs).deriv()
    candidates = [a, b]
    if dp.degree() >= 1:
        for r in dp.deriv().roots():
            if abs(r.imag) < 1e-12 and a <= r.real <= b:
                candidates.append(r.real)
    return float(np.max(np.abs(dp(np.array(candidates)))))


# ---------------------------------------------------------------------------
# built-in families

_FAMILIES: dict[str, Callable] = {}


def register_flux(name: str, factory: Callable) -> None:
    """Register ``factory(params, state_bounds, coeff_bounds) -> FluxModel``."""
    _FAMILIES[name] = factory


def flux_families() -> list[str]:
    return sorted(_FAMILIES)


def make_flux(name: str, params=(), state_bounds=(0.0, 1.0), coeff_bounds=(0.5, 1.5)) -> FluxModel:
    """Build a registered flux family by name.

    ``params`` are family specific; for the polynomial families they are the
    two amplitude factors ``(c_x, c_y)`` multiplying ``f`` and ``g``.
    """
    try:
        factory = _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown flux family {name!r}; known: {flux_families()}") from None
    return factory(tuple(float(p) for p in params), tuple(map(float, state_bounds)),
                   tuple(map(float, coeff_bounds)))


def separable_polynomial(name, P, Q, params, state_bounds, coeff_bounds) -> FluxModel:
    """``f = k P(u)``, ``g = l Q(u)`` with ``P``, ``Q`` numpy Polynomials."""
    dP, dQ = P.deriv(), Q.deriv()
    return FluxModel(
        f=lambda k, u: k * P(u),
        g=lambda l, u: l * Q(u),
        f_u=lambda k, u: k * dP(u),
        g_u=lambda l, u: l * dQ(u),
        f_k=lambda k, u: P(u) + 0.0 * k,
        g_l=lambda l, u: Q(u) + 0.0 * l,
        state_bounds=state_bounds,
        coeff_bounds=coeff_bounds,
        name=name,
        params=params,
        poly=(tuple(float(c) for c in P.coef), tuple(float(c) for c in Q.coef)),
    )


def _amplitudes(params, default=(1.0, 1.0)):
    if not params:
        return default
    if len(params) != 2:
        raise ValueError(f"expected two amplitude parameters (c_x, c_y), got {params}")
    return params


def _poly_family(name, P, Q, default=(1.0, 1.0)):
    def factory(params, state_bounds, coeff_bounds):
        cx, cy = _amplitudes(params, default)
        return separable_polynomial(name, cx * P, cy * Q, (cx, cy), state_bounds, coeff_bounds)
    register_flux(name, factory)


_u = Polynomial([0.0, 1.0])
# f = k u^2 (1-u)^2 / 2, g = l u^3 (1-u): vanish at u = 0, 1 and f_u changes sign at 1/2.
_poly_family("resonant", _u**2 * (1 - _u) ** 2 / 2, _u**3 * (1 - _u))
_poly_family("skew", _u**2 / 2, _u**3 / 3)
_poly_family("logistic", _u * (1 - _u), _u * (1 - _u))
_poly_family("linear", _u, _u)
_poly_family("burgers", _u**2 / 2, _u**2 / 2, default=(1.0, 0.0))


def _sine_family(params, state_bounds, coeff_bounds):
    cx, cy = _amplitudes(params)
    pi = np.pi
    return FluxModel(
        f=lambda k, u: cx * k * np.sin(pi * u),
        g=lambda l, u: cy * l * np.sin(2 * pi * u) / 2,
        f_u=lambda k, u: cx * k * pi * np.cos(pi * u),
        g_u=lambda l, u: cy * l * pi * np.cos(2 * pi * u),
        f_k=lambda k, u: cx * np.sin(pi * u) + 0.0 * k,
        g_l=lambda l, u: cy * np.sin(2 * pi * u) / 2 + 0.0 * l,
        state_bounds=state_bounds,
        coeff_bounds=coeff_bounds,
        name="sine",
        params=(cx, cy),
    )


register_flux("sine", _sine_family)


# ---------------------------------------------------------------------------
# structural assumption checks

@dataclass(frozen=True)
class InvariantRegionReport:
    passed: bool
    max_violation: float


@dataclass(frozen=True)
class NonlinearityReport:
    passed: bool
    worst_zero_fraction: float
    threshold: float
    worst_xi: tuple[float, float]
    worst_k: float
    worst_l: float


def check_invariant_region(model: FluxModel, n_samples: int = 33) -> InvariantRegionReport:
    """Check ``f(k, a) = f(k, b) = g(l, a) = g(l, b) = 0`` on sampled coefficients."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    c = np.linspace(*model.coeff_bounds, n_samples)
    vals = [model.f(c, model.a), model.f(c, model.b), model.g(c, model.a), model.g(c, model.b)]
    worst = float(max(np.max(np.abs(np.broadcast_to(v, c.shape))) for v in vals))
    return InvariantRegionReport(passed=worst <= _INVARIANT_TOL, max_violation=worst)


def check_nonlinearity(model: FluxModel, n_xi: int = 64, n_kl: int = 5, n_u: int = 200,
                       zero_tol: float = 1e-10) -> NonlinearityReport:
    """Sampling detector for directions where the symbol vanishes on a set of positive measure.

    For every ``(k, l)`` on an ``n_kl x n_kl`` grid the symbol is evaluated on
    ``n_u`` equispaced states along ``n_xi`` equispaced directions, plus the
    direction orthogonal to each sampled ``(f_u, g_u)`` (the only directions
    along which the symbol can vanish at that state).  This is a heuristic:
    a measure-zero statement cannot be decided from finitely many samples.
    """
    if min(n_xi, n_kl, n_u) < 2:
        raise ValueError("all sample counts must be >= 2")
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    us = np.linspace(model.a, model.b, n_u)
    theta = np.pi * np.arange(n_xi) / n_xi
    base = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    cs = np.linspace(*model.coeff_bounds, n_kl)
    worst = (-1.0, (1.0, 0.0), cs[0], cs[0])
    for k in cs:
        fu = np.broadcast_to(model.f_u(k, us), us.shape)
        for l in cs:
            gu = np.broadcast_to(model.g_u(l, us), us.shape)
            norm = np.hypot(fu, gu)
            keep = norm > 0
            ortho = np.stack([gu[keep], -fu[keep]], axis=1) / norm[keep, None]
            dirs = np.vstack([base, ortho])
            s = dirs[:, :1] * fu[None, :] + dirs[:, 1:] * gu[None, :]
            frac = np.mean(np.abs(s) <= zero_tol, axis=1)
            i = int(np.argmax(frac))
            if frac[i] > worst[0]:
                xi = dirs[i]
                if xi[0] < 0 or (xi[0] == 0 and xi[1] < 0):
                    xi = -xi
                worst = (float(frac[i]), (float(xi[0]), float(xi[1])), float(k), float(l))
    threshold = 2.0 / n_u + NONLINEARITY_SLACK
    return NonlinearityReport(passed=worst[0] <= threshold, worst_zero_fraction=worst[0],
                              threshold=threshold, worst_xi=worst[1], worst_k=worst[2],
                              worst_l=worst[3])


def check_derivatives(model: FluxModel, n: int = 41, step: float = 1e-6) -> float:
    """Largest mismatch between the supplied derivatives and central differences.

    The mismatch of each derivative is scaled by ``1 + max|derivative|`` so
    the result is comparable across flux amplitudes.
    """
    a, b = model.state_bounds
    us = np.linspace(a + 2 * step, b - 2 * step, n)
    cs = np.linspace(*model.coeff_bounds, 7)
    C, U = np.meshgrid(cs, us, indexing="ij")
    worst = 0.0
    for fn, du, dc in ((model.f, model.f_u, model.f_k), (model.g, model.g_u, model.g_l)):
        fd_u = (fn(C, U + step) - fn(C, U - step)) / (2 * step)
        fd_c = (fn(C + step, U) - fn(C - step, U)) / (2 * step)
        ex_u = np.broadcast_to(du(C, U), U.shape)
        ex_c = np.broadcast_to(dc(C, U), U.shape)
        worst = max(worst, float(np.max(np.abs(fd_u - ex_u)) / (1 + np.max(np.abs(ex_u)))),
                    float(np.max(np.abs(fd_c - ex_c)) / (1 + np.max(np.abs(ex_c)))))
    return worst


# ---------------------------------------------------------------------------
# entropy fluxes and the singular mapping

def _check_box(x, lo, hi, what):
    x = np.asarray(x, dtype=float)
    tol = 1e-9 * max(1.0, hi - lo)
    if x.size and (np.min(x) < lo - tol or np.max(x) > hi + tol):
        raise ValueError(f"{what} outside [{lo}, {hi}]")
    return x


def _gauss_integral(integrand, lower, upper, *coeffs, empty=_EMPTY_INTERVAL):
    """Integrate ``integrand(*coeffs, xi)`` over ``[lower, upper]`` elementwise.

    Intervals shorter than ``empty`` integrate to exactly zero.
    """
    arrays = np.broadcast_arrays(np.asarray(lower, float), np.asarray(upper, float),
                                 *[np.asarray(c, float) for c in coeffs])
    shape = arrays[0].shape
    flat = [np.ravel(x) for x in arrays]
    out = np.zeros(flat[0].size)
    for s in range(0, out.size, _CHUNK):
        lo, hi = flat[0][s:s + _CHUNK], flat[1][s:s + _CHUNK]
        half = 0.5 * (hi - lo)
        xi = lo[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)
        cs = [c[s:s + _CHUNK, None] for c in flat[2:]]
        vals = integrand(*cs, xi)
        res = half * (vals @ _GL_WEIGHTS)
        res[np.abs(hi - lo) < empty] = 0.0
        out[s:s + _CHUNK] = res
    return out.reshape(shape) if shape else float(out[0])


def entropy_flux_F(model: FluxModel, k, u):
    """``F(k, u) = int_a^u f_u(k, s)^2 ds``."""
    k = _check_box(k, *model.coeff_bounds, "k")
    u = _check_box(u, *model.state_bounds, "u")
    return _gauss_integral(lambda kk, s: model.f_u(kk, s) ** 2, model.a, u, k)


def entropy_flux_G(model: FluxModel, l, u):
    """``G(l, u) = int_a^u g_u(l, s)^2 ds``."""
    l = _check_box(l, *model.coeff_bounds, "l")
    u = _check_box(u, *model.state_bounds, "u")
    return _gauss_integral(lambda ll, s: model.g_u(ll, s) ** 2, model.a, u, l)


def entropy_flux_H(model: FluxModel, k, l, u):
    """``H(k, l, u) = int_a^u f_u(k, s) g_u(l, s) ds``."""
    k = _check_box(k, *model.coeff_bounds, "k")
    l = _check_box(l, *model.coeff_bounds, "l")
    u = _check_box(u, *model.state_bounds, "u")
    return _gauss_integral(lambda kk, ll, s: model.f_u(kk, s) * model.g_u(ll, s), model.a, u, k, l)


def _psi_breakpoints(model: FluxModel):
    a, b = model.state_bounds
    if model.poly is not None:
        roots = Polynomial(model.poly[0]).deriv().roots()
        inner = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and a < r.real < b)
        return [a, *inner, b]
    return list(np.linspace(a, b, 17))


def singular_mapping_psi(model: FluxModel, k, u):
    """``Psi(k, u) = int_a^u |f_u(k, s)| ds``.

    The integrand has kinks where ``f_u`` changes sign, so the interval is
    split at those points (roots of ``P'`` for polynomial models, 16 equal
    panels otherwise) before applying the Gauss rule.
    """
    k = _check_box(k, *model.coeff_bounds, "k")
    u = _check_box(u, *model.state_bounds, "u")
    edges = _psi_breakpoints(model)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        upper = np.clip(u, lo, hi)
        total = total + _gauss_integral(lambda kk, s: np.abs(model.f_u(kk, s)), lo, upper, k,
                                        empty=0.0)
    total = np.where(np.abs(u - model.a) < _EMPTY_INTERVAL, 0.0, total)
    return total if np.ndim(total) else float(total)


def psi_field(model: FluxModel, k, u):
    """Vectorized ``Psi`` for whole fields.

    Separable polynomial models use the exact antiderivative on each
    monotone piece of ``P``; other models fall back to quadrature.
    """
    if model.poly is None:
        return singular_mapping_psi(model, k, u)
    k = _check_box(k, *model.coeff_bounds, "k")
    u = _check_box(u, *model.state_bounds, "u")
    P = Polynomial(model.poly[0])
    edges = _psi_breakpoints(model)
    total = np.zeros(np.broadcast(k, u).shape)
    for lo, hi in zip(edges[:-1], edges[1:]):
        total = total + np.abs(P(np.clip(u, lo, hi)) - P(lo))
    return np.abs(k) * total


def flux_potential_bounds(model: FluxModel, n: int = 257) -> tuple[float, float]:
    """``sup |int_a^u f_k(k, s) ds|`` and the same for ``g_l``, over the model boxes."""
    us = np.linspace(model.a, model.b, n)[None, :]
    cs = np.linspace(*model.coeff_bounds, 9)[:, None]
    out = []
    for fk in (model.f_k, model.g_l):
        vals = _gauss_integral(lambda cc, s: fk(cc, s), model.a, np.broadcast_to(us, (9, n)),
                               np.broadcast_to(cs, (9, n)))
        out.append(float(np.max(np.abs(vals))))
    return out[0], out[1]
