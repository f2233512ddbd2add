"""Balanced sweeps ``ε_j = ε₀ 2^{-j}``, ``δ_j = C ε_j``, ``h_j = δ_j / r`` and their reports.

A sweep runs one viscous solve per level, restricts finer solutions onto
coarser grids by exact cell averaging, and collects the Cauchy distances,
weak-form residuals of the limit equation, estimate monitors and the
compactness diagnostics into a :class:`ConvergenceReport`.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .compactness import build_fields, div_curl_product_test, w_neg1_2_proxy, window_l2
from .errors import ConfigurationError, DivergenceError, SweepError
from .fields import Grid2D, ScalarField2D, coarsen, total_variation, write_snapshot
from .monitors import check_lemma_bounds, energy_surrogate, fit_energy_constant
from .scenarios import Scenario, validate
from .solver import SolverConfig, SolverRun, advance_to

__all__ = [
    "TestFunction",
    "shipped_test_functions",
    "WeakResidualAccumulator",
    "weak_residual",
    "SweepPlan",
    "LevelResult",
    "ConvergenceReport",
    "run_sweep",
    "restrict",
    "cauchy_rate",
    "fit_order",
    "advected_history",
    "manufactured_residuals",
    "plan_from_config",
    "write_outputs",
]


# ---------------------------------------------------------------------------
# test functions and the weak form

def _bump(s, c, r):
    z = 1.0 - ((s - c) / r) ** 2
    return np.where(z > 0.0, z, 0.0) ** 3


def _dbump(s, c, r):
    z = 1.0 - ((s - c) / r) ** 2
    return np.where(z > 0.0, -6.0 * (s - c) / r ** 2 * z ** 2, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """``φ(x, y, t) = B(x) B(y) (1 - t/T)^p`` with the C² bump ``B(s) = (1 - (s - c)²/r²)³₊``."""

    __test__ = False  # not a pytest class

    center: tuple[float, float]
    radius: float
    T: float
    power: int = 1

    def __post_init__(self):
        if self.radius <= 0 or self.T <= 0 or self.power < 1:
            raise ValueError("test function needs radius > 0, T > 0 and power >= 1")

    def q(self, t):
        return (1.0 - t / self.T) ** self.power

    def dq(self, t):
        return -self.power / self.T * (1.0 - t / self.T) ** (self.power - 1)

    def spatial(self, grid: Grid2D):
        """``(B(x)B(y), B'(x)B(y), B(x)B'(y))`` on the grid cell centres."""
        cx, cy = self.center
        bx, by = _bump(grid.x, cx, self.radius), _bump(grid.y, cy, self.radius)
        dbx, dby = _dbump(grid.x, cx, self.radius), _dbump(grid.y, cy, self.radius)
        return np.outer(bx, by), np.outer(dbx, by), np.outer(bx, dby)

    def __call__(self, x, y, t):
        cx, cy = self.center
        return _bump(np.asarray(x, float), cx, self.radius) * _bump(
            np.asarray(y, float), cy, self.radius) * self.q(t)

    def check_support(self, domain, t_end: float) -> None:
        x0, x1, y0, y1 = domain
        cx, cy = self.center
        r = self.radius
        if cx - r < x0 or cx + r > x1 or cy - r < y0 or cy + r > y1:
            raise ValueError(f"test function support around {self.center} (r={r}) leaves the domain")
        if self.T > t_end * (1.0 + 1e-12):
            raise ValueError(f"test function time support [0, {self.T}) exceeds t_end={t_end}")

    def label(self) -> str:
        return f"phi(c=({self.center[0]:g},{self.center[1]:g}),r={self.radius:g},p={self.power})"


def shipped_test_functions(centers, radius: float, T: float) -> list[TestFunction]:
    """Every centre combined with ``q(t) = 1 - t/T`` and ``q(t) = (1 - t/T)²``."""
    return [TestFunction(tuple(c), radius, T, p) for c in centers for p in (1, 2)]


class _WeakForm:
    """Spatial weights of the weak form restricted to the union of the test supports."""

    def __init__(self, model, k: ScalarField2D, l: ScalarField2D, tests: Sequence[TestFunction]):
        g = k.grid
        self.model, self.tests, self.h2 = model, list(tests), g.h ** 2
        parts = [tf.spatial(g) for tf in self.tests]
        active = np.zeros(g.shape, dtype=bool)
        for p in parts:
            active |= (p[0] != 0) | (p[1] != 0) | (p[2] != 0)
        ii, jj = np.nonzero(active)
        if ii.size == 0:
            self.sl = (slice(0, 0), slice(0, 0))
        else:
            self.sl = (slice(ii.min(), ii.max() + 1), slice(jj.min(), jj.max() + 1))
        self.parts = [tuple(x[self.sl] for x in p) for p in parts]
        self.k, self.l = k.values[self.sl], l.values[self.sl]

    def integrands(self, u: np.ndarray, t: float) -> np.ndarray:
        """``Σ (u φ_t + f(k, u) φ_x + g(l, u) φ_y) h²`` for every test function."""
        us = u[self.sl]
        fu, gu = self.model.f(self.k, us), self.model.g(self.l, us)
        out = np.empty(len(self.tests))
        for i, (tf, (b, bx, by)) in enumerate(zip(self.tests, self.parts)):
            out[i] = (tf.dq(t) * np.sum(us * b) + tf.q(t) * (np.sum(fu * bx) + np.sum(gu * by)))
        return out * self.h2

    def initial_term(self, u0: np.ndarray) -> np.ndarray:
        u0s = u0[self.sl]
        return np.array([tf.q(0.0) * np.sum(u0s * b) for tf, (b, _, _) in
                         zip(self.tests, self.parts)]) * self.h2


class WeakResidualAccumulator:
    """Step hook integrating the weak form in time with the trapezoid rule over every step.

    The coefficients are the unmollified ``k``, ``l`` and the initial term
    uses the unmollified ``u0``: the residual measures how well the viscous
    solution satisfies the limit equation.
    """

    def __init__(self, run: SolverRun, tests: Sequence[TestFunction]):
        if run.k is None or run.l is None or run.u0 is None:
            raise ValueError("run lacks the unmollified coefficients or initial data")
        self.form = _WeakForm(run.model, run.k, run.l, tests)
        self.tests = list(tests)
        self.total = np.zeros(len(self.tests))
        self._t = run.t
        self._last = self.form.integrands(run.u.values, run.t)
        self._u0 = self.form.initial_term(run.u0.values)

    def __call__(self, run: SolverRun, prev: np.ndarray, dt: float) -> None:
        t = run.t
        cur = self.form.integrands(run.u.values, t)
        self.total += 0.5 * (t - self._t) * (self._last + cur)
        self._t, self._last = t, cur

    def residuals(self) -> np.ndarray:
        return np.abs(self.total + self._u0)


def weak_residual(times: Sequence[float], states: Sequence[ScalarField2D], model,
                  k: ScalarField2D, l: ScalarField2D, u0: ScalarField2D,
                  test_function: TestFunction) -> float:
    """``|∬ (u φ_t + f(k,u) φ_x + g(l,u) φ_y) dx dt + ∫ u0 φ(·, 0) dx|`` by the trapezoid rule."""
    if len(times) != len(states) or len(times) < 2:
        raise ValueError("need matching times and states, at least two of them")
    g = k.grid
    test_function.check_support((g.x_min, g.x_max, g.y_min, g.y_max), times[-1])
    form = _WeakForm(model, k, l, [test_function])
    vals = np.array([form.integrands(s.values, t)[0] for t, s in zip(times, states)])
    t = np.asarray(times, float)
    integral = float(np.sum(0.5 * np.diff(t) * (vals[1:] + vals[:-1])))
    return abs(integral + float(form.initial_term(u0.values)[0]))


def advected_history(scenario: Scenario, nx: int, t_end: float, steps_per_cell: float = 2.0):
    """Exact solution ``u0(x - c t)`` of a constant-coefficient linear scenario, sampled on a grid.

    Snapshot times are equispaced with ``Δt = h / steps_per_cell``.  Returns
    ``(times, states, k, l, u0)`` ready for :func:`weak_residual`.
    """
    grid = scenario.grid(nx)
    k, l, u0 = scenario.fields(grid)
    model = scenario.model
    kv, lv = np.unique(k.values), np.unique(l.values)
    if kv.size != 1 or lv.size != 1:
        raise ValueError("the advected solution needs constant coefficients")
    cx = float(model.f_u(kv[0], model.a))
    cy = float(model.g_u(lv[0], model.a))
    probe = np.linspace(*model.state_bounds, 7)
    if np.ptp(model.f_u(kv[0], probe)) > 1e-12 or np.ptp(model.g_u(lv[0], probe)) > 1e-12:
        raise ValueError("the advected solution needs a linear flux")
    n = max(2, int(np.ceil(t_end * steps_per_cell / grid.h)))
    times = np.linspace(0.0, t_end, n + 1)
    X, Y = grid.mesh()
    states = [ScalarField2D(grid, scenario.initial(X - cx * t, Y - cy * t)) for t in times]
    return times, states, k, l, u0


def manufactured_residuals(scenario: Scenario, nxs: Sequence[int], tests: Sequence[TestFunction],
                           t_end: float, steps_per_cell: float = 2.0) -> np.ndarray:
    """Weak residuals of the exact advected solution, one row per grid in ``nxs``."""
    rows = []
    for nx in nxs:
        times, states, k, l, u0 = advected_history(scenario, nx, t_end, steps_per_cell)
        rows.append([weak_residual(times, states, scenario.model, k, l, u0, tf) for tf in tests])
    return np.array(rows)


# ---------------------------------------------------------------------------
# sweeps

def restrict(field_: ScalarField2D, target: Grid2D) -> ScalarField2D:
    """Cell-average ``field_`` onto the nested coarser grid ``target``."""
    factor = field_.grid.nx // target.nx
    out = coarsen(field_, factor) if factor > 1 else field_
    if out.grid != target:
        raise ValueError("grids are not nested")
    return out


@dataclass(frozen=True)
class SweepPlan:
    """Balanced refinement plan over ``n_levels`` levels of one scenario."""

    scenario: Scenario
    eps0: float
    n_levels: int = 3
    balance_C: float = 1.0
    grid_ratio: float = 4.0
    t_end: float = 1.0
    compare_fractions: tuple = (0.25, 0.5, 1.0)
    monitor_samples: int = 16
    window: Optional[tuple] = None
    test_centers: tuple = ((0.0, 0.0),)
    test_radius: float = 0.5
    energy_slack: float = 4.0
    cfl_safety: float = 0.9
    timestep_rule: str = "combined"
    mollifier_profile: str = "flat"
    require_valid: bool = True
    track_psi: bool = True

    def __post_init__(self):
        if self.n_levels < 3:
            raise ValueError("a sweep needs at least three levels")
        if self.grid_ratio < 2:
            raise ValueError("grid_ratio must be >= 2 so that delta >= 2h")
        if not (self.eps0 > 0 and self.balance_C > 0 and self.t_end > 0):
            raise ValueError("eps0, balance_C and t_end must be positive")

    def levels(self) -> list[tuple[float, float, int]]:
        """``(epsilon, delta, nx)`` per level."""
        x0, x1, y0, y1 = self.scenario.domain
        out = []
        for j in range(self.n_levels):
            eps = self.eps0 * 2.0 ** (-j)
            delta = self.balance_C * eps
            h = delta / self.grid_ratio
            nx = (x1 - x0) / h
            if abs(nx - round(nx)) > 1e-9 * nx:
                raise ValueError(f"level {j}: domain width {x1 - x0} is not a multiple of h={h}")
            out.append((eps, delta, int(round(nx))))
        return out

    @property
    def compare_times(self) -> tuple[float, ...]:
        return tuple(f * self.t_end for f in self.compare_fractions)

    def test_functions(self) -> list[TestFunction]:
        tests = shipped_test_functions(self.test_centers, self.test_radius, self.t_end)
        for tf in tests:
            tf.check_support(self.scenario.domain, self.t_end)
        return tests


@dataclass(eq=False)
class LevelResult:
    level: int
    epsilon: float
    delta: float
    nx: int
    h: float
    n_steps: int
    runtime: float
    state_min: float
    state_max: float
    min_support_margin: float
    mass_defect: float
    monitors: object
    snapshots: dict
    weak_residuals: tuple
    k: ScalarField2D = field(repr=False)
    l: ScalarField2D = field(repr=False)
    lemma: object = None


def _merge_times(compare, monitor, T):
    times = sorted(set(compare))
    for t in monitor:
        if all(abs(t - c) > 1e-12 * T for c in times):
            times.append(t)
    return sorted(times)


def _run_level(plan: SweepPlan, j: int, eps: float, delta: float, nx: int,
               tests: list[TestFunction]) -> LevelResult:
    sc = plan.scenario
    grid = sc.grid(nx)
    k, l, u0 = sc.fields(grid)
    cfg = SolverConfig.balanced(eps, plan.balance_C, t_end=plan.t_end, cfl_safety=plan.cfl_safety,
                                output_times=plan.compare_times, timestep_rule=plan.timestep_rule,
                                mollifier_profile=plan.mollifier_profile)
    start = time.perf_counter()
    run = SolverRun.from_fields(cfg, sc.model, k, l, u0, track_psi=plan.track_psi)
    acc = WeakResidualAccumulator(run, tests)
    run.hooks.append(acc)
    compare = plan.compare_times
    monitor = [plan.t_end * (i + 1) / plan.monitor_samples for i in range(plan.monitor_samples)]
    snapshots = {}
    try:
        for t in _merge_times(compare, monitor, plan.t_end):
            advance_to(run, t)
            if t in compare:
                snapshots[t] = run.u
    except DivergenceError as exc:
        raise SweepError(j, str(exc)) from exc
    runtime = time.perf_counter() - start
    reason = run.flag()
    if reason is not None:
        raise SweepError(j, reason)
    mass_defect = run.mass() - (run.initial_mass - run.outflow)
    return LevelResult(level=j, epsilon=eps, delta=delta, nx=nx, h=grid.h, n_steps=run.n_steps,
                       runtime=runtime, state_min=run.state_min, state_max=run.state_max,
                       min_support_margin=run.min_support_margin(), mass_defect=mass_defect,
                       monitors=run.monitors, snapshots=snapshots,
                       weak_residuals=tuple(float(r) for r in acc.residuals()), k=k, l=l)


def cauchy_rate(report_or_distances) -> dict:
    """Least-squares decay rate of ``log2`` distance per level, for each compare time.

    Accepts a :class:`ConvergenceReport` or a mapping ``time -> distances``.
    Sequences containing a zero distance report the rate ``"exact"``.
    """
    table = (report_or_distances.pairwise_l1 if isinstance(report_or_distances, ConvergenceReport)
             else report_or_distances)
    out = {}
    for t, d in table.items():
        d = np.asarray(d, float)
        if d.size < 2:
            raise ValueError("a rate needs at least two distances")
        if np.any(d == 0.0):
            out[t] = {"rate": "exact", "fit_residual": 0.0}
            continue
        j = np.arange(d.size, dtype=float)
        coef, res, *_ = np.polyfit(j, np.log2(d), 1, full=True)
        out[t] = {"rate": float(-coef[0]), "fit_residual": float(res[0]) if res.size else 0.0}
    return out


def fit_order(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log error`` against ``log h``."""
    return float(np.polyfit(np.log(np.asarray(hs, float)), np.log(np.asarray(errors, float)), 1)[0])


@dataclass
class ConvergenceReport:
    """Everything measured in a sweep; JSON round-trips exactly (floats via ``repr``)."""

    scenario: str
    plan: dict
    levels: list
    compare_times: list
    pairwise_l1: dict
    observed_rates: dict
    weak_residuals: list
    test_functions: list
    lemma_reports: list
    compactness: dict
    dissipation_peaks: list
    validation: dict
    level_data: list = field(default_factory=list, repr=False, compare=False)
    timings: list = field(default_factory=list, repr=False, compare=False)

    def to_dict(self) -> dict:
        """Serializable content; wall-clock timings are left out so reruns compare equal."""
        d = {k: v for k, v in asdict(self).items() if k not in ("level_data", "timings")}
        d["pairwise_l1"] = {repr(t): v for t, v in self.pairwise_l1.items()}
        d["observed_rates"] = {repr(t): v for t, v in self.observed_rates.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConvergenceReport":
        d = json.loads(text)
        d["pairwise_l1"] = {float(t): v for t, v in d["pairwise_l1"].items()}
        d["observed_rates"] = {float(t): v for t, v in d["observed_rates"].items()}
        return cls(**d)

    def to_csv(self) -> str:
        """One row per level: parameters, distances to the next level, residuals, monitors."""
        buf = io.StringIO()
        w = csv.writer(buf)
        times = sorted(self.pairwise_l1)
        head = (["level", "epsilon", "delta", "nx", "n_steps"]
                + [f"l1_next@t={t:g}" for t in times]
                + [f"residual[{i}]" for i in range(len(self.test_functions))]
                + ["dissipation_peak", "lemma_passed", "proxy_div_D", "proxy_curl_E", "l2_D", "l2_E"])
        w.writerow(head)
        comp = self.compactness
        for j, lev in enumerate(self.levels):
            dists = [self.pairwise_l1[t][j] if j < len(self.pairwise_l1[t]) else "" for t in times]
            w.writerow([j, repr(lev["epsilon"]), repr(lev["delta"]), lev["nx"], lev["n_steps"]]
                       + [repr(d) if d != "" else d for d in dists]
                       + [repr(r) for r in self.weak_residuals[j]]
                       + [repr(self.dissipation_peaks[j]), self.lemma_reports[j]["passed"],
                          repr(comp["proxy_div_D"][j]), repr(comp["proxy_curl_E"][j]),
                          repr(comp["l2_D"][j]), repr(comp["l2_E"][j])])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"sweep over scenario {self.scenario}: {len(self.levels)} levels, "
                 f"balance C = {self.plan['balance_C']:g}, T = {self.plan['t_end']:g}"]
        for j, lev in enumerate(self.levels):
            took = f" ({self.timings[j]:.2f}s)" if j < len(self.timings) else ""
            lines.append(f"  level {j}: eps={lev['epsilon']:.6g} delta={lev['delta']:.6g} "
                         f"nx={lev['nx']} steps={lev['n_steps']} "
                         f"u in [{lev['state_min']:.3g}, {lev['state_max']:.3g}] "
                         f"margin={lev['min_support_margin']:.3g}{took}")
        lines.append("pairwise L1 distances between consecutive levels:")
        for t in sorted(self.pairwise_l1):
            d = self.pairwise_l1[t]
            r = self.observed_rates[t]["rate"]
            rate = r if isinstance(r, str) else f"{r:.3f}"
            lines.append(f"  t={t:g}: " + ", ".join(f"{x:.4e}" for x in d) + f"  (rate {rate})")
        lines.append("weak residuals (rows: levels, columns: test functions):")
        for j, row in enumerate(self.weak_residuals):
            lines.append(f"  level {j}: " + ", ".join(f"{x:.4e}" for x in row))
        lines.append("dissipation peaks: " + ", ".join(f"{x:.4g}" for x in self.dissipation_peaks))
        for j, lr in enumerate(self.lemma_reports):
            lines.append(f"  level {j}: {lr['summary']}")
        c = self.compactness
        lines.append(f"compactness at t={c['time']:g}: proxy(div D) " +
                     ", ".join(f"{x:.4g}" for x in c["proxy_div_D"]) + "; proxy(curl E) " +
                     ", ".join(f"{x:.4g}" for x in c["proxy_curl_E"]))
        lines.append(f"div-curl product test: {c['verdict']} ({c['reason']})")
        return "\n".join(lines)


def run_sweep(plan: SweepPlan) -> ConvergenceReport:
    """Run every level of ``plan`` and assemble the report."""
    sc = plan.scenario
    val = validate(sc)
    if plan.require_valid and not val.passed:
        raise ConfigurationError(f"scenario {sc.name} fails validation: " + "; ".join(val.reasons))
    tests = plan.test_functions()
    results = [_run_level(plan, j, *lev, tests) for j, lev in enumerate(plan.levels())]

    compare = plan.compare_times
    pairwise = {}
    for t in compare:
        pairwise[t] = [results[j].snapshots[t].l1_distance(
            restrict(results[j + 1].snapshots[t], results[j].snapshots[t].grid))
            for j in range(len(results) - 1)]

    model = sc.model
    c_fit = fit_energy_constant(results[0].monitors, model, total_variation(results[0].k),
                                total_variation(results[0].l), plan.energy_slack)
    lemma = []
    for r in results:
        c_energy = c_fit * energy_surrogate(r.monitors, model, total_variation(r.k),
                                            total_variation(r.l))
        rep = check_lemma_bounds(r.monitors, {"linf_box": model.state_bounds, "C_energy": c_energy})
        r.lemma = rep
        lemma.append({"passed": rep.passed, "linf_ok": rep.linf_ok, "l1_bounded": rep.l1_bounded,
                      "l1_nonincreasing": rep.l1_nonincreasing, "energy_ok": rep.energy_ok,
                      "C0": rep.C0, "C_energy": rep.C_energy, "violations": list(rep.violations),
                      "summary": rep.summary()})

    t_mid = min(compare, key=lambda t: abs(t - 0.5 * plan.t_end))
    members = [build_fields(r.snapshots[t_mid], r.k, r.l, model, epsilon=r.epsilon, delta=r.delta)
               for r in results]
    dc = div_curl_product_test(members, model, window=plan.window)
    compactness = {
        "time": t_mid,
        "window": list(plan.window) if plan.window is not None else None,
        "proxy_div_D": [w_neg1_2_proxy(m.div_D) for m in members],
        "proxy_curl_E": [w_neg1_2_proxy(m.curl_E) for m in members],
        "l2_D": [window_l2(m.F_field, m.H_field, window=plan.window) for m in members],
        "l2_E": [window_l2(m.G_field, m.H_field, window=plan.window) for m in members],
        "verdict": dc.verdict, "reason": dc.reason, "A": list(dc.A), "B": dc.B,
        "gaps": list(dc.gaps), "scale": dc.scale,
    }

    levels = [{"epsilon": r.epsilon, "delta": r.delta, "nx": r.nx, "h": r.h, "n_steps": r.n_steps,
               "state_min": r.state_min, "state_max": r.state_max,
               "min_support_margin": r.min_support_margin, "mass_defect": r.mass_defect}
              for r in results]
    plan_dict = {"eps0": plan.eps0, "n_levels": plan.n_levels, "balance_C": plan.balance_C,
                 "grid_ratio": plan.grid_ratio, "t_end": plan.t_end,
                 "compare_fractions": list(plan.compare_fractions),
                 "monitor_samples": plan.monitor_samples, "energy_slack": plan.energy_slack,
                 "cfl_safety": plan.cfl_safety, "timestep_rule": plan.timestep_rule,
                 "mollifier_profile": plan.mollifier_profile}
    return ConvergenceReport(
        scenario=sc.name,
        plan=plan_dict,
        levels=levels,
        compare_times=list(compare),
        pairwise_l1=pairwise,
        observed_rates=cauchy_rate(pairwise),
        weak_residuals=[list(r.weak_residuals) for r in results],
        test_functions=[tf.label() for tf in tests],
        lemma_reports=lemma,
        compactness=compactness,
        dissipation_peaks=[float(max(r.monitors.entropy_dissipation)) for r in results],
        validation={"passed": val.passed, "failed_checks": list(val.failed_checks),
                    "reasons": list(val.reasons)},
        level_data=results,
        timings=[r.runtime for r in results],
    )


def plan_from_config(scenario: Scenario, **overrides) -> SweepPlan:
    """Sweep plan from the ``[sweep]`` and ``[solver]`` sections of the scenario's file."""
    cfg = scenario.settings
    if cfg is None:
        raise ValueError("scenario carries no configuration; build a SweepPlan directly")
    centers = tuple(tuple(float(v) for v in c.replace(",", " ").split())
                    for c in (cfg.get("sweep", "test_centers") or "0 0").split(";") if c.strip())
    window = cfg.floats("sweep", "window", 4)
    kw = dict(
        scenario=scenario,
        eps0=cfg.float("sweep", "eps0", cfg.float("solver", "epsilon")),
        n_levels=cfg.int("sweep", "n_levels", 3),
        balance_C=cfg.float("solver", "balance_c", 1.0),
        grid_ratio=cfg.float("sweep", "grid_ratio", 4.0),
        t_end=cfg.float("solver", "t_end", 1.0),
        compare_fractions=cfg.floats("sweep", "compare_fractions", default=(0.25, 0.5, 1.0)),
        monitor_samples=cfg.int("sweep", "monitor_samples", 16),
        window=window,
        test_centers=centers,
        test_radius=cfg.float("sweep", "test_radius", 0.5),
        energy_slack=cfg.float("sweep", "energy_slack", 4.0),
        cfl_safety=cfg.float("solver", "cfl_safety", 0.9),
        timestep_rule=(cfg.get("solver", "timestep_rule") or "combined").strip(),
        mollifier_profile=(cfg.get("solver", "mollifier_profile") or "flat").strip(),
        track_psi=cfg.bool("solver", "track_psi", True),
    )
    kw.update(overrides)
    return SweepPlan(**kw)


def write_outputs(report: ConvergenceReport, directory) -> Path:
    """Monitor CSVs and snapshots per level, plus ``report.json``, ``report.csv`` and ``summary.txt``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for r in report.level_data:
        r.monitors.to_csv(out / f"monitors_level{r.level}.csv")
        for t, snap in r.snapshots.items():
            write_snapshot(snap, out / f"u_level{r.level}_t{t:.6g}.csv")
    (out / "report.json").write_text(report.to_json())
    (out / "report.csv").write_text(report.to_csv())
    (out / "summary.txt").write_text(report.summary() + "\n")
    return out
