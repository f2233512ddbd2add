"""Explicit monotone solver for ``u_t + f(k^δ, u)_x + g(l^δ, u)_y = ε Δu``.

Forward Euler in time; local Lax-Friedrichs convective fluxes with face
coefficients taken as the mean of the two adjacent mollified cell values;
a 5-point Laplacian; and a frame of ghost cells frozen at the far-field
state ``a``.  The dissipation on each face uses the largest wave speed over
the whole state box, ``α = max_{u∈[a,b]} |f_u(k_face, u)|``, which makes
every step a monotone map under :func:`timestep_bound`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import ConfigurationError, DivergenceError, StepError
from .fields import ScalarField2D
from .flux import FluxModel
from .mollifier import MollifierKernel, mollify, prepare_initial_data
from .monitors import MonitorSeries, sample_monitors

__all__ = [
    "SolverConfig",
    "SolverRun",
    "timestep_bound",
    "stable_timestep",
    "step",
    "advance_to",
    "face_coefficients",
    "run_to_end",
]

_BALANCE_TOL = 1e-12
_STEP_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Viscosity ``epsilon``, mollification radius ``delta = balance_C * epsilon`` and run timing.

    ``timestep_rule`` is ``"combined"`` (default) for
    ``Δt = s / ((A + B)/h + 4ε/h²)``, which guarantees a monotone step, or
    ``"min"`` for ``Δt = s · min(h/(A + B), h²/(4ε))``.
    """

    epsilon: float
    delta: float
    balance_C: float = 1.0
    t_end: float = 1.0
    cfl_safety: float = 0.9
    output_times: tuple = ()
    timestep_rule: str = "combined"
    mollifier_profile: str = "flat"

    def __post_init__(self):
        object.__setattr__(self, "output_times", tuple(float(t) for t in self.output_times))
        if not (self.epsilon > 0 and self.delta > 0 and self.balance_C > 0 and self.t_end > 0):
            raise ConfigurationError("epsilon, delta, balance_C and t_end must be positive")
        if abs(self.delta - self.balance_C * self.epsilon) > _BALANCE_TOL * max(1.0, self.delta):
            raise ConfigurationError(
                f"delta={self.delta!r} is not balance_C*epsilon={self.balance_C * self.epsilon!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        ts = self.output_times
        if any(t1 < t0 for t0, t1 in zip(ts, ts[1:])):
            raise ConfigurationError("output_times must be sorted")
        if ts and (ts[0] < 0.0 or ts[-1] > self.t_end):
            raise ConfigurationError("output_times must lie in [0, t_end]")
        if self.timestep_rule not in ("combined", "min"):
            raise ConfigurationError(f"unknown timestep_rule {self.timestep_rule!r}")

    @classmethod
    def balanced(cls, epsilon: float, balance_C: float = 1.0, **kwargs) -> "SolverConfig":
        return cls(epsilon=epsilon, delta=balance_C * epsilon, balance_C=balance_C, **kwargs)


def timestep_bound(A: float, B: float, h: float, eps: float, safety: float = 0.9,
                   rule: str = "combined") -> float:
    """Explicit step limit for convective speeds ``A``, ``B`` and viscosity ``eps``."""
    conv = (A + B) / h
    diff = 4.0 * eps / h ** 2
    if conv <= 0.0 and diff <= 0.0:
        raise ConfigurationError("no wave speed and no viscosity: the step is unbounded")
    if rule == "combined":
        return safety / (conv + diff)
    if rule == "min":
        return safety * min(1.0 / conv if conv > 0 else np.inf, 1.0 / diff if diff > 0 else np.inf)
    raise ConfigurationError(f"unknown timestep rule {rule!r}")


def face_coefficients(c: np.ndarray, axis: int) -> np.ndarray:
    """Face values along ``axis``: means of neighbours inside, the adjacent cell on the frame."""
    c = np.moveaxis(c, axis, 0)
    out = np.empty((c.shape[0] + 1,) + c.shape[1:])
    out[1:-1] = 0.5 * (c[:-1] + c[1:])
    out[0], out[-1] = c[0], c[-1]
    return np.ascontiguousarray(np.moveaxis(out, 0, axis))


StepHook = Callable[["SolverRun", np.ndarray, float], None]


@dataclass(eq=False)
class SolverRun:
    """State of one viscous solve; build with :meth:`from_fields`."""

    config: SolverConfig
    model: FluxModel
    k_delta: ScalarField2D
    l_delta: ScalarField2D
    u: ScalarField2D
    k: Optional[ScalarField2D] = None
    l: Optional[ScalarField2D] = None
    u0: Optional[ScalarField2D] = None
    t: float = 0.0
    n_steps: int = 0
    track_psi: bool = True
    monitors: MonitorSeries = field(default_factory=MonitorSeries)
    snapshots: dict = field(default_factory=dict)
    hooks: list = field(default_factory=list)
    outflow: float = 0.0
    state_min: float = np.inf
    state_max: float = -np.inf
    backend: str = ""

    def __post_init__(self):
        g = self.u.grid
        if self.k_delta.grid != g or self.l_delta.grid != g:
            raise ValueError("coefficient and state grids differ")
        kd, ld = self.k_delta.values, self.l_delta.values
        self._kx = face_coefficients(kd, 0)
        self._ly = face_coefficients(ld, 1)
        self._ax = np.ascontiguousarray(self.model.max_speed_f(self._kx), dtype=float)
        self._ay = np.ascontiguousarray(self.model.max_speed_g(self._ly), dtype=float)
        self._A = float(self._ax.max())
        self._B = float(self._ay.max())
        if self.model.poly is not None:
            self._pf = np.ascontiguousarray(self.model.poly[0], dtype=float)
            self._pg = np.ascontiguousarray(self.model.poly[1], dtype=float)
            self.backend = self.backend or kernels.BACKEND
        else:
            self.backend = "generic"
        self.initial_mass = self.u.integral()
        self._note_extrema(self.u.values)

    @classmethod
    def from_fields(cls, config: SolverConfig, model: FluxModel, k: ScalarField2D,
                    l: ScalarField2D, u0: ScalarField2D, **kwargs) -> "SolverRun":
        """Mollify ``k``, ``l``; cut off and mollify ``u0``; start at ``t = 0``."""
        kernel = MollifierKernel(config.delta, config.mollifier_profile)
        kernel.check_resolution(u0.grid.h)
        for name, c in (("k", k), ("l", l)):
            if c.grid != u0.grid:
                raise ValueError(f"{name} lives on a different grid than u0")
            lo, hi = model.coeff_bounds
            tol = 1e-12 * max(1.0, hi - lo)
            if c.values.min() < lo - tol or c.values.max() > hi + tol:
                raise ValueError(f"{name} leaves the coefficient box {model.coeff_bounds}")
        u_start = prepare_initial_data(u0, kernel, model.state_bounds)
        return cls(config=config, model=model, k_delta=mollify(k, kernel), l_delta=mollify(l, kernel),
                   u=u_start, k=k, l=l, u0=u0, **kwargs)

    @property
    def grid(self):
        return self.u.grid

    @property
    def max_speeds(self) -> tuple[float, float]:
        return self._A, self._B

    def mass(self) -> float:
        return self.u.integral()

    def _note_extrema(self, v):
        self.state_min = min(self.state_min, float(v.min()))
        self.state_max = max(self.state_max, float(v.max()))

    def min_support_margin(self) -> float:
        m = self.monitors.support_margin
        return min(m) if m else np.inf

    def flag(self) -> Optional[str]:
        """Reason this run is invalid for the truncated-domain model, or ``None``."""
        need = 4.0 * self.config.delta
        m = self.min_support_margin()
        if m < need:
            return f"support margin {m:.4g} < 4*delta = {need:.4g}"
        return None


def stable_timestep(run: SolverRun) -> float:
    return timestep_bound(run._A, run._B, run.grid.h, run.config.epsilon,
                          run.config.cfl_safety, run.config.timestep_rule)


def _raw_step(run: SolverRun, dt: float):
    u = run.u.values
    h, eps, a = run.grid.h, run.config.epsilon, run.model.a
    if run.backend == "generic":
        return kernels.llf_step_generic(u, run.model, run._kx, run._ly, run._ax, run._ay,
                                        a, dt, h, eps)
    fn = kernels.llf_step_py if run.backend == "python" else kernels.llf_step
    new, out = fn(u, run._kx, run._ly, run._ax, run._ay, run._pf, run._pg, a, dt, h, eps)
    return np.asarray(new), float(out)


def step(run: SolverRun, dt: float) -> SolverRun:
    """Advance by ``dt`` (which must not exceed :func:`stable_timestep`)."""
    limit = stable_timestep(run)
    if not (dt > 0.0) or dt > limit * (1.0 + _STEP_TOL):
        raise StepError(f"dt={dt!r} violates the stability bound {limit!r}")
    prev = run.u.values
    new, out = _raw_step(run, dt)
    if not np.all(np.isfinite(new)):
        bad = np.argwhere(~np.isfinite(new))
        raise DivergenceError(
            f"non-finite state after step {run.n_steps + 1} at t={run.t + dt:g}: "
            f"{len(bad)} cells, first at index {tuple(bad[0])}")
    run.u = ScalarField2D(run.grid, new)
    run.t += dt
    run.n_steps += 1
    run.outflow += out
    run._note_extrema(new)
    for hook in run.hooks:
        hook(run, prev, dt)
    run._prev, run._last_dt = prev, dt
    if run.n_steps == 1:
        sample_monitors(run, prev, dt)  # the t = 0+ sample
    return run


def advance_to(run: SolverRun, t_target: float, dt: Optional[float] = None,
               sample: bool = True) -> SolverRun:
    """Step until ``run.t == t_target``; the last step is shortened to land exactly.

    ``dt`` forces a fixed step size (still subject to the stability bound).
    When ``sample`` is true a monitor entry is appended on arrival unless one
    was already taken at this instant.
    """
    if t_target < run.t:
        raise ValueError(f"cannot advance backwards from t={run.t} to {t_target}")
    if t_target == run.t:
        return run
    full = stable_timestep(run) if dt is None else float(dt)
    while run.t < t_target:
        remaining = t_target - run.t
        last = remaining <= full * (1.0 + _STEP_TOL)
        step(run, remaining if last else full)
        if last:
            run.t = float(t_target)
    if sample and (not run.monitors.times or run.monitors.times[-1] != run.t):
        sample_monitors(run, run._prev, run._last_dt)
    return run


def run_to_end(run: SolverRun, store_snapshots: bool = True) -> SolverRun:
    """Visit every configured output time, then ``t_end``, storing snapshots on the way."""
    cfg = run.config
    for t in cfg.output_times:
        if t == 0.0:
            if store_snapshots:
                run.snapshots[0.0] = run.u
            continue
        advance_to(run, t)
        if store_snapshots:
            run.snapshots[t] = run.u
    advance_to(run, cfg.t_end)
    if store_snapshots:
        run.snapshots[cfg.t_end] = run.u
    return run
