"""Shipped problem descriptions: flux family, coefficients, initial data and domain.

Each scenario lives in an INI file next to this module and can be loaded by
name with :func:`load_scenario`.  Files use the same format as run
configurations (see :mod:`resonantcl.config`), so a scenario file is also a
valid input for the command line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..config import RunFile, load_config, parse_blocks
from ..errors import ConfigFileError
from ..fields import Block, Grid2D, PiecewiseConstantCoeff, ScalarField2D, rasterize
from ..flux import FluxModel, check_invariant_region, check_nonlinearity, make_flux

__all__ = [
    "Scenario",
    "SmoothBump",
    "ValidationReport",
    "validate",
    "load_scenario",
    "scenario_from_config",
    "list_scenarios",
    "checkerboard",
    "stripes",
    "SCENARIO_DIR",
]

SCENARIO_DIR = Path(__file__).resolve().parent
FRAME_FRACTION = 0.20


@dataclass(frozen=True)
class SmoothBump:
    """``base + height · B(x) B(y)`` with the C² bump ``B(s) = (1 - (s - c)²/r²)³₊``."""

    center: tuple[float, float]
    radius: float
    height: float
    base: float = 0.0

    def __call__(self, x, y):
        return self.base + self.height * _bump(x, self.center[0], self.radius) * _bump(
            y, self.center[1], self.radius)

    @property
    def value_range(self) -> tuple[float, float]:
        lo, hi = sorted((self.base, self.base + self.height))
        return lo, hi

    @property
    def support(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return cx - r, cx + r, cy - r, cy + r


def _bump(s, c, r):
    z = 1.0 - ((np.asarray(s, float) - c) / r) ** 2
    return np.where(z > 0.0, z, 0.0) ** 3


def checkerboard(region, width, low, high, background=1.0) -> PiecewiseConstantCoeff:
    """Alternating ``low``/``high`` squares of side ``width`` tiling ``region``."""
    x0, x1, y0, y1 = region
    nx, ny = int(round((x1 - x0) / width)), int(round((y1 - y0) / width))
    blocks = [Block(x0 + i * width, x0 + (i + 1) * width, y0 + j * width, y0 + (j + 1) * width,
                    high if (i + j) % 2 == 0 else low)
              for i in range(nx) for j in range(ny)]
    return PiecewiseConstantCoeff(background, tuple(blocks))


def stripes(region, width, low, high, axis="x", background=1.0) -> PiecewiseConstantCoeff:
    """Bands of width ``width`` alternating across ``axis`` (``"x"``: bands are vertical)."""
    x0, x1, y0, y1 = region
    blocks = []
    if axis == "x":
        for i in range(int(round((x1 - x0) / width))):
            blocks.append(Block(x0 + i * width, x0 + (i + 1) * width, y0, y1,
                                high if i % 2 == 0 else low))
    elif axis == "y":
        for j in range(int(round((y1 - y0) / width))):
            blocks.append(Block(x0, x1, y0 + j * width, y0 + (j + 1) * width,
                                high if j % 2 == 0 else low))
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return PiecewiseConstantCoeff(background, tuple(blocks))


@dataclass(frozen=True)
class Scenario:
    """Problem description; coefficient and initial fields are callables of ``(x, y)``."""

    name: str
    model: FluxModel
    coeff_k: Any
    coeff_l: Any
    initial: Any
    domain: tuple[float, float, float, float]
    notes: str = ""
    role: str = "positive"
    expected_failures: tuple[str, ...] = ()
    settings: Optional[RunFile] = field(default=None, compare=False, repr=False)

    def grid(self, nx: int) -> Grid2D:
        x0, x1, y0, y1 = self.domain
        h = (x1 - x0) / nx
        ny = int(round((y1 - y0) / h))
        return Grid2D(x0, x1, y0, y1, nx, ny)

    def fields(self, grid: Grid2D) -> tuple[ScalarField2D, ScalarField2D, ScalarField2D]:
        """Rasterized ``k``, ``l`` and ``u0`` on ``grid``."""
        return rasterize(self.coeff_k, grid), rasterize(self.coeff_l, grid), rasterize(self.initial, grid)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    reasons: tuple[str, ...]
    failed_checks: tuple[str, ...]
    role: str
    expected_failures: tuple[str, ...] = ()

    @property
    def as_documented(self) -> bool:
        """Positive scenarios must pass; controls must fail exactly their documented checks."""
        return set(self.failed_checks) == set(self.expected_failures)


def _range(obj, grid: Optional[Grid2D] = None):
    if hasattr(obj, "value_range"):
        return obj.value_range
    v = rasterize(obj, grid).values
    return float(v.min()), float(v.max())


def _nonzero_extent(initial, a):
    """Bounding box of the region where the initial data differs from ``a`` (or None)."""
    if isinstance(initial, SmoothBump):
        return initial.support if initial.height != 0 and initial.base == a else None
    if isinstance(initial, PiecewiseConstantCoeff):
        boxes = [b for b in initial.blocks if b.value != a]
        if not boxes:
            return None
        return (min(b.x0 for b in boxes), max(b.x1 for b in boxes),
                min(b.y0 for b in boxes), max(b.y1 for b in boxes))
    return None


def validate(scenario: Scenario) -> ValidationReport:
    """Structural checks on the flux pair plus bound and far-field frame checks on the data."""
    model = scenario.model
    a, b = model.state_bounds
    alpha, beta = model.coeff_bounds
    failed, reasons = [], []

    inv = check_invariant_region(model)
    if not inv.passed:
        failed.append("invariant_region")
        reasons.append(f"flux does not vanish at a and b (max violation {inv.max_violation:.3g})")
    nl = check_nonlinearity(model)
    if not nl.passed:
        failed.append("nonlinearity")
        reasons.append(f"symbol vanishes on a fraction {nl.worst_zero_fraction:.3g} of states "
                       f"along xi={tuple(round(v, 4) for v in nl.worst_xi)}")

    probe = scenario.grid(64)
    lo, hi = _range(scenario.initial, probe)
    if lo < a - 1e-12 or hi > b + 1e-12:
        failed.append("initial_bounds")
        reasons.append(f"initial data range [{lo:g}, {hi:g}] leaves [{a:g}, {b:g}]")
    for name, c in (("k", scenario.coeff_k), ("l", scenario.coeff_l)):
        clo, chi = _range(c, probe)
        if clo < alpha - 1e-12 or chi > beta + 1e-12:
            failed.append(f"{name}_bounds")
            reasons.append(f"{name} range [{clo:g}, {chi:g}] leaves [{alpha:g}, {beta:g}]")

    x0, x1, y0, y1 = scenario.domain
    fx, fy = FRAME_FRACTION * (x1 - x0), FRAME_FRACTION * (y1 - y0)
    ext = _nonzero_extent(scenario.initial, a)
    bg = getattr(scenario.initial, "background", getattr(scenario.initial, "base", a))
    frame_ok = bg == a and (ext is None or (ext[0] >= x0 + fx and ext[1] <= x1 - fx
                                            and ext[2] >= y0 + fy and ext[3] <= y1 - fy))
    if not frame_ok:
        failed.append("far_field_frame")
        reasons.append(f"initial data differs from a={a:g} within the outer "
                       f"{FRAME_FRACTION:.0%} frame of the domain")

    return ValidationReport(passed=not failed, reasons=tuple(reasons), failed_checks=tuple(failed),
                            role=scenario.role, expected_failures=scenario.expected_failures)


# ---------------------------------------------------------------------------
# construction from configuration files

def _field_from_section(cfg: RunFile, section: str, default_background: float):
    sec = cfg.sections.get(section)
    where = f"[{section}]"
    if sec is None:
        return PiecewiseConstantCoeff(default_background)
    kind = sec.get("kind", "blocks").strip()
    background = cfg.float(section, "background", default_background)
    if kind == "blocks":
        blocks = parse_blocks(sec.get("blocks", ""), where)
        return PiecewiseConstantCoeff(background, tuple(Block(*b) for b in blocks))
    if kind in ("checkerboard", "stripes"):
        region = cfg.floats(section, "region", 4)
        width = cfg.float(section, "width")
        low, high = cfg.float(section, "low"), cfg.float(section, "high")
        if None in (region, width, low, high):
            raise ConfigFileError(f"{where}: {kind} needs region, width, low and high")
        if kind == "checkerboard":
            return checkerboard(region, width, low, high, background)
        return stripes(region, width, low, high, sec.get("axis", "x").strip(), background)
    if kind == "bump":
        center = cfg.floats(section, "center", 2)
        radius, height = cfg.float(section, "radius"), cfg.float(section, "height")
        if None in (center, radius, height):
            raise ConfigFileError(f"{where}: bump needs center, radius and height")
        return SmoothBump(center, radius, height, background)
    raise ConfigFileError(f"{where}: unknown kind {kind!r}")


def scenario_from_config(cfg: RunFile) -> Scenario:
    family = cfg.get("model", "family").strip()
    params = cfg.floats("model", "params", default=())
    sb = cfg.floats("model", "state_bounds", 2, (0.0, 1.0))
    cb = cfg.floats("model", "coeff_bounds", 2, (0.5, 1.5))
    try:
        model = make_flux(family, params, sb, cb)
    except ValueError as exc:
        raise ConfigFileError(f"[model]: {exc}") from None
    domain = tuple(cfg.float("domain", k) for k in ("x_min", "x_max", "y_min", "y_max"))
    expected = tuple(s.strip() for s in cfg.get("scenario", "expected_failures", "").split(",")
                     if s.strip())
    return Scenario(
        name=cfg.get("scenario", "name").strip(),
        model=model,
        coeff_k=_field_from_section(cfg, "coeff_k", 1.0),
        coeff_l=_field_from_section(cfg, "coeff_l", 1.0),
        initial=_field_from_section(cfg, "initial", sb[0]),
        domain=domain,
        notes=" ".join(cfg.get("scenario", "notes", "").split()),
        role=cfg.get("scenario", "role", "positive").strip(),
        expected_failures=expected,
        settings=cfg,
    )


def list_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.ini"))


def scenario_path(name: str) -> Path:
    p = SCENARIO_DIR / f"{name}.ini"
    if not p.exists():
        raise ConfigFileError(f"unknown scenario {name!r}; shipped: {list_scenarios()}")
    return p


def load_scenario(name_or_path) -> Scenario:
    """Load a shipped scenario by name, or any scenario/run file by path."""
    p = Path(name_or_path)
    if p.suffix != ".ini":
        p = scenario_path(str(name_or_path))
    return scenario_from_config(load_config(p))
