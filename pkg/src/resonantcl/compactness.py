"""Entropy-flux fields, discrete div/curl, a negative Sobolev proxy and the div-curl product test."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .fields import Grid2D, ScalarField2D
from .flux import FluxModel, entropy_flux_F, entropy_flux_G, entropy_flux_H

__all__ = [
    "CompactnessFields",
    "DivCurlReport",
    "build_fields",
    "w_neg1_2_proxy",
    "window_l2",
    "div_curl_product_test",
    "strict_concavity_gap",
    "cauchy_schwarz_form",
]

BLOCK_CELLS = 8
GAP_FRACTION = 0.10
_EQUALITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CompactnessFields:
    """``F, G, H`` on one snapshot together with ``div D`` and ``curl E``.

    ``D = (F, H)`` and ``E = (-G, H)``, so ``div D = F_x + H_y`` and
    ``curl E = H_x + G_y``.
    """

    F_field: ScalarField2D
    G_field: ScalarField2D
    H_field: ScalarField2D
    div_D: ScalarField2D
    curl_E: ScalarField2D
    grid: Grid2D
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    k: Optional[ScalarField2D] = field(default=None, repr=False)
    l: Optional[ScalarField2D] = field(default=None, repr=False)


def _ddx(v, h, axis):
    return np.gradient(v, h, axis=axis, edge_order=2)


def build_fields(snapshot: ScalarField2D, k: ScalarField2D, l: ScalarField2D, model: FluxModel,
                 *, epsilon=None, delta=None) -> CompactnessFields:
    """Evaluate ``F(k, u)``, ``G(l, u)``, ``H(k, l, u)`` cellwise and difference them.

    Derivatives are centred in the interior and second-order one-sided on
    the outermost cells.
    """
    g = snapshot.grid
    if k.grid != g or l.grid != g:
        raise ValueError("snapshot and coefficients live on different grids")
    u, kv, lv = snapshot.values, k.values, l.values
    F = np.asarray(entropy_flux_F(model, kv, u), dtype=float)
    G = np.asarray(entropy_flux_G(model, lv, u), dtype=float)
    H = np.asarray(entropy_flux_H(model, kv, lv, u), dtype=float)
    h = g.h
    div = _ddx(F, h, 0) + _ddx(H, h, 1)
    curl = _ddx(H, h, 0) + _ddx(G, h, 1)
    wrap = lambda v: ScalarField2D(g, v)  # noqa: E731
    return CompactnessFields(wrap(F), wrap(G), wrap(H), wrap(div), wrap(curl), g,
                             epsilon=epsilon, delta=delta, k=k, l=l)


def w_neg1_2_proxy(field_: ScalarField2D) -> float:
    """``(Σ_ξ |f̂(ξ)|² / (1 + |ξ|²))^{1/2}`` on the zero-padded box of twice the side.

    ``f̂`` is the discrete Fourier transform scaled by the cell area and the
    sum carries the factor ``1/|box|``, so that the unweighted sum is exactly
    the squared ``L²`` norm (Parseval) and the proxy never exceeds it.
    """
    g = field_.grid
    h, nx, ny = g.h, g.nx, g.ny
    fhat = np.fft.fft2(field_.values, s=(2 * nx, 2 * ny)) * h * h
    kx = 2.0 * np.pi * np.fft.fftfreq(2 * nx, d=h)
    ky = 2.0 * np.pi * np.fft.fftfreq(2 * ny, d=h)
    weight = 1.0 / (1.0 + kx[:, None] ** 2 + ky[None, :] ** 2)
    box = (2 * nx * h) * (2 * ny * h)
    return float(np.sqrt(np.sum(np.abs(fhat) ** 2 * weight) / box))


def _window_mask(grid: Grid2D, window) -> np.ndarray:
    if window is None:
        return np.ones(grid.shape, dtype=bool)
    x0, x1, y0, y1 = window
    X, Y = grid.mesh()
    mask = (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)
    if not mask.any():
        raise ValueError(f"window {window} contains no cell centres")
    return mask


def window_l2(*components: ScalarField2D, window=None) -> float:
    """``L²`` norm over the window of the vector field with the given components."""
    g = components[0].grid
    mask = _window_mask(g, window)
    sq = sum(c.values[mask] ** 2 for c in components)
    return float(np.sqrt(np.sum(sq) * g.h ** 2))


def cauchy_schwarz_form(model: FluxModel, k, l, u, c):
    """``(F(u) - F(c))(G(u) - G(c)) - (H(u) - H(c))²``, nonnegative by Cauchy-Schwarz."""
    dF = entropy_flux_F(model, k, u) - entropy_flux_F(model, k, c)
    dG = entropy_flux_G(model, l, u) - entropy_flux_G(model, l, c)
    dH = entropy_flux_H(model, k, l, u) - entropy_flux_H(model, k, l, c)
    return dF * dG - dH ** 2


def strict_concavity_gap(model: FluxModel, k: float, l: float, c: float, n_u: int = 1001) -> float:
    """Smallest Cauchy-Schwarz form over states at distance ``>= 0.1 (b - a)`` from ``c``."""
    if n_u < 2:
        raise ValueError("n_u must be >= 2")
    a, b = model.state_bounds
    us = np.linspace(a, b, n_u)
    us = us[np.abs(us - c) >= 0.1 * (b - a)]
    if us.size == 0:
        raise ValueError("no admissible states away from c")
    vals = cauchy_schwarz_form(model, np.full_like(us, k), np.full_like(us, l), us,
                               np.full_like(us, c))
    return float(np.min(vals))


@dataclass(frozen=True)
class DivCurlReport:
    verdict: str                 # "pass", "fail" or "inconclusive"
    A: tuple
    B: float
    gaps: tuple
    scale: float
    reason: str
    rows: tuple = ()

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("epsilon", "delta", "A", "gap", "proxy_div_D", "proxy_curl_E",
                        "l2_D", "l2_E"))
            for r in self.rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in r])
            w.writerow([f"verdict={self.verdict}", f"B={self.B!r}", f"scale={self.scale!r}",
                        self.reason])
        return path


def _block_mean(v: np.ndarray, b: int) -> np.ndarray:
    nx, ny = v.shape
    return v[: nx - nx % b, : ny - ny % b].reshape(nx // b, b, ny // b, b).mean(axis=(1, 3))


def _equality_case(model: FluxModel, members: Sequence[CompactnessFields]) -> bool:
    """True when the Cauchy-Schwarz form vanishes identically on the sampled coefficients."""
    ks, ls = [], []
    for m in members:
        if m.k is not None:
            ks.append(np.unique(m.k.values))
        if m.l is not None:
            ls.append(np.unique(m.l.values))
    kvals = np.unique(np.concatenate(ks)) if ks else np.linspace(*model.coeff_bounds, 3)
    lvals = np.unique(np.concatenate(ls)) if ls else np.linspace(*model.coeff_bounds, 3)
    kvals = kvals[np.linspace(0, kvals.size - 1, min(5, kvals.size)).astype(int)]
    lvals = lvals[np.linspace(0, lvals.size - 1, min(5, lvals.size)).astype(int)]
    a, b = model.state_bounds
    scale = 0.0
    worst = np.inf
    for k in kvals:
        for l in lvals:
            for c in (a + 0.25 * (b - a), 0.5 * (a + b), a + 0.75 * (b - a)):
                worst = min(worst, strict_concavity_gap(model, k, l, c, n_u=201))
                F = entropy_flux_F(model, k, b)
                G = entropy_flux_G(model, l, b)
                scale = max(scale, abs(F * G))
    return worst <= _EQUALITY_TOL * max(scale, 1.0)


def div_curl_product_test(members: Sequence[CompactnessFields], model: FluxModel,
                          window=None, block_cells: int = BLOCK_CELLS) -> DivCurlReport:
    """Compare window averages of ``H² - F G`` with the product of weak-limit surrogates.

    ``members`` are ordered from coarse to fine on nested grids.  The weak
    limits ``F̄, Ḡ, H̄`` are approximated by averages of the finest member
    over tiles of ``block_cells`` coarsest cells.  Models in the
    Cauchy-Schwarz equality case (``H² = F G`` identically) carry no
    information and yield ``"inconclusive"``.
    """
    if len(members) < 3:
        raise ValueError("the product test needs at least three sweep members")
    coarse, fine = members[0].grid, members[-1].grid
    ratio = fine.nx // coarse.nx
    if fine.nx != ratio * coarse.nx or fine.ny != ratio * coarse.ny:
        raise ValueError("members must live on nested grids")
    b_fine = block_cells * ratio

    Fb = _block_mean(members[-1].F_field.values, b_fine)
    Gb = _block_mean(members[-1].G_field.values, b_fine)
    Hb = _block_mean(members[-1].H_field.values, b_fine)
    tx = fine.x_min + (np.arange(Fb.shape[0]) + 0.5) * b_fine * fine.h
    ty = fine.y_min + (np.arange(Fb.shape[1]) + 0.5) * b_fine * fine.h
    TX, TY = np.meshgrid(tx, ty, indexing="ij")
    x0, x1, y0, y1 = window if window is not None else (-np.inf, np.inf, -np.inf, np.inf)
    tmask = (TX >= x0) & (TX <= x1) & (TY >= y0) & (TY <= y1)
    if not tmask.any():
        raise ValueError("window contains no averaging tile")
    B = float(np.mean((Hb ** 2 - Fb * Gb)[tmask]))
    scale = max(float(np.max(np.abs(a_[tmask]))) for a_ in (Fb, Gb, Hb))
    scale = max(scale, 1e-12) ** 2

    A, gaps, rows = [], [], []
    for m in members:
        r = m.grid.nx // coarse.nx
        prod = m.H_field.values ** 2 - m.F_field.values * m.G_field.values
        tiles = _block_mean(prod, block_cells * r)
        a_j = float(np.mean(tiles[tmask]))
        A.append(a_j)
        gaps.append(abs(a_j - B))
        rows.append((m.epsilon, m.delta, a_j, abs(a_j - B), w_neg1_2_proxy(m.div_D),
                     w_neg1_2_proxy(m.curl_E), window_l2(m.F_field, m.H_field, window=window),
                     window_l2(m.G_field, m.H_field, window=window)))

    if _equality_case(model, members):
        return DivCurlReport("inconclusive", tuple(A), B, tuple(gaps), scale,
                             "flux pair is in the Cauchy-Schwarz equality case", tuple(rows))
    tol = 1e-12 * scale
    decreasing = all(g1 <= g0 + tol for g0, g1 in zip(gaps, gaps[1:]))
    small = gaps[-1] <= GAP_FRACTION * scale
    if decreasing and small:
        verdict, reason = "pass", "gaps non-increasing and final gap within 10% of scale"
    else:
        why = []
        if not decreasing:
            why.append("gaps not non-increasing")
        if not small:
            why.append(f"final gap {gaps[-1]:.3g} > {GAP_FRACTION:g} * scale {scale:.3g}")
        verdict, reason = "fail", "; ".join(why)
    return DivCurlReport(verdict, tuple(A), B, tuple(gaps), scale, reason, tuple(rows))
