"""Time series of the a-priori estimate quantities along a solver run."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fields import ScalarField2D, total_variation
from .flux import flux_potential_bounds, psi_field

__all__ = [
    "MonitorSeries",
    "LemmaReport",
    "sample_monitors",
    "check_lemma_bounds",
    "l1_time_derivative",
    "entropy_dissipation",
    "support_margin",
    "energy_surrogate",
    "fit_energy_constant",
    "dissipation_spread",
    "SUPPORT_THRESHOLD",
]

SUPPORT_THRESHOLD = 1e-6
COLUMNS = ("times", "linf", "l1_time_derivative", "entropy_dissipation", "support_margin", "psi_tv")


@dataclass
class MonitorSeries:
    """Append-only monitor columns, one entry per sampling instant."""

    times: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    l1_time_derivative: list = field(default_factory=list)
    entropy_dissipation: list = field(default_factory=list)
    support_margin: list = field(default_factory=list)
    psi_tv: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def append(self, entry: dict) -> None:
        for name in COLUMNS:
            getattr(self, name).append(float(entry[name]))
        self.steps.append(int(entry.get("step", -1)))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("step",) + COLUMNS)
            for row in zip(self.steps, *(getattr(self, c) for c in COLUMNS)):
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
        return path

    @classmethod
    def from_csv(cls, path) -> "MonitorSeries":
        out = cls()
        with Path(path).open() as fh:
            for row in csv.DictReader(fh):
                out.append({**{c: float(row[c]) for c in COLUMNS}, "step": int(row["step"])})
        return out


def l1_time_derivative(new: np.ndarray, prev: np.ndarray, dt: float, h: float) -> float:
    return float(np.abs(new - prev).sum() * h * h / dt)


def entropy_dissipation(u: np.ndarray, eps: float, h: float) -> float:
    """``ε Σ((D_x u)² + (D_y u)²) h²`` with forward differences over interior edges."""
    # (Δu/h)² h² = Δu²
    return float(eps * ((np.diff(u, axis=0) ** 2).sum() + (np.diff(u, axis=1) ** 2).sum()))


def support_margin(field_: ScalarField2D, a: float, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Distance from the cells with ``u > a + threshold`` to the domain boundary."""
    g = field_.grid
    ii, jj = np.nonzero(field_.values > a + threshold)
    if ii.size == 0:
        return 0.5 * min(g.x_max - g.x_min, g.y_max - g.y_min)
    h = g.h
    return float(min(ii.min(), g.nx - 1 - ii.max(), jj.min(), g.ny - 1 - jj.max()) * h)


def sample_monitors(run, prev_state, dt_used: float) -> dict:
    """Append one monitor entry for ``run`` given the state one step earlier."""
    u = run.u.values
    prev = prev_state.values if isinstance(prev_state, ScalarField2D) else np.asarray(prev_state)
    h = run.grid.h
    entry = {
        "times": run.t,
        "linf": float(np.max(np.abs(u))),
        "l1_time_derivative": l1_time_derivative(u, prev, dt_used, h),
        "entropy_dissipation": entropy_dissipation(u, run.config.epsilon, h),
        "support_margin": support_margin(run.u, run.model.a),
        "psi_tv": _psi_tv(run) if run.track_psi else 0.0,
        "step": run.n_steps,
    }
    run.monitors.append(entry)
    return entry


def _psi_tv(run) -> float:
    psi = psi_field(run.model, run.k_delta.values, run.u.values)
    return total_variation(run.u.with_values(psi))


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of checking a monitor series against the estimate bounds."""

    passed: bool
    linf_ok: bool
    l1_bounded: bool
    l1_nonincreasing: bool
    energy_ok: bool
    C0: float
    C_energy: float
    violations: tuple = ()

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        extra = "; ".join(self.violations) if self.violations else "no violations"
        return f"lemma bounds {state} (C0={self.C0:.6g}, C_energy={self.C_energy:.6g}): {extra}"


def check_lemma_bounds(series: MonitorSeries, bounds: dict, *, monotone_slack: float = 0.01,
                       tol: float = 1e-12) -> LemmaReport:
    """Check the sup bound, the time-Lipschitz bound and the dissipation bound.

    ``bounds`` holds ``linf_box=(a, b)``; optionally ``C0`` (default: first
    sample × 1.05) and ``C_energy`` (default: no dissipation bound).  Because
    ``linf`` is ``max|u|``, the box test uses ``max(|a|, |b|)`` from above and
    is exact for ``a >= 0``.  The nonincreasing property of the time
    derivative is reported alongside, without entering ``passed``.
    """
    if len(series) == 0:
        raise ValueError("empty monitor series")
    a, b = bounds["linf_box"]
    l1 = series.column("l1_time_derivative")
    diss = series.column("entropy_dissipation")
    linf = series.column("linf")
    C0 = float(bounds.get("C0") or l1[0] * 1.05)
    C_energy = bounds.get("C_energy")
    C_energy = float("inf") if C_energy is None else float(C_energy)
    violations = []

    top = max(abs(a), abs(b)) + tol
    low = a - tol if a >= 0 else -np.inf
    bad = np.nonzero((linf > top) | (linf < low))[0]
    if bad.size:
        violations.append(f"linf {linf[bad[0]]:.17g} outside box at t={series.times[bad[0]]:g}")
    bad = np.nonzero(l1 > C0)[0]
    if bad.size:
        violations.append(f"time derivative {l1[bad[0]]:.6g} > C0 at t={series.times[bad[0]]:g}")
        l1_bounded = False
    else:
        l1_bounded = True
    rises = np.nonzero(l1[1:] > l1[:-1] * (1.0 + monotone_slack) + tol)[0]
    if rises.size:
        i = rises[0] + 1
        violations.append(f"time derivative increased at step {series.steps[i]} "
                          f"(t={series.times[i]:g}): {l1[i - 1]:.6g} -> {l1[i]:.6g}")
    bad = np.nonzero(diss > C_energy)[0]
    if bad.size:
        violations.append(f"dissipation {diss[bad[0]]:.6g} > C_energy at t={series.times[bad[0]]:g}")
    linf_ok = not ((linf > top) | (linf < low)).any()
    energy_ok = bad.size == 0
    return LemmaReport(passed=linf_ok and l1_bounded and energy_ok, linf_ok=linf_ok,
                       l1_bounded=l1_bounded, l1_nonincreasing=rises.size == 0,
                       energy_ok=energy_ok, C0=C0, C_energy=C_energy,
                       violations=tuple(violations))


def energy_surrogate(series: MonitorSeries, model, tv_k: float, tv_l: float) -> float:
    """``sup|u|·sup||u_t||₁ + Φ_f TV(k) + Φ_g TV(l)``, with ``Φ`` the flux-potential bounds.

    These are the terms that control the dissipation in the energy identity
    obtained by testing the viscous equation against ``u``.
    """
    phi_f, phi_g = flux_potential_bounds(model)
    sup_u = max(abs(model.a), abs(model.b))
    return float(sup_u * series.column("l1_time_derivative").max() + phi_f * tv_k + phi_g * tv_l)


def fit_energy_constant(series: MonitorSeries, model, tv_k: float, tv_l: float,
                        slack: float = 4.0) -> float:
    """Constant ``C`` such that ``C·surrogate`` exceeds the observed dissipation by ``slack``."""
    s = energy_surrogate(series, model, tv_k, tv_l)
    d = series.column("entropy_dissipation").max()
    if s <= 0.0:
        return 0.0 if d == 0.0 else float("inf")
    return float(slack * d / s)


def dissipation_spread(series_list) -> float:
    """Ratio of the largest to the smallest max-over-time dissipation across runs."""
    peaks = np.array([s.column("entropy_dissipation").max() for s in series_list])
    if np.all(peaks == 0.0):
        return 1.0
    if np.any(peaks == 0.0):
        return float("inf")
    return float(peaks.max() / peaks.min())

