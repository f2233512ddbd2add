"""Pure-numpy forward-Euler step: local Lax-Friedrichs convection, 5-point diffusion.

The state is surrounded by one frame of ghost cells held at the far-field
value ``a``.  ``kx`` and ``ax`` live on the ``(nx+1, ny)`` x-faces, ``ly`` and
``ay`` on the ``(nx, ny+1)`` y-faces.  Both step functions return the new
state and the mass that left through the frame during the step.
"""
from __future__ import annotations

import numpy as np


def _horner(coeffs, x):
    acc = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _pad(u, a):
    return np.pad(u, 1, mode="constant", constant_values=a)


def _update(u, up, Fx, Gy, a, dt, h, eps):
    lam, mu = dt / h, eps * dt / (h * h)
    lap = (up[:-2, 1:-1] + up[2:, 1:-1] + up[1:-1, :-2] + up[1:-1, 2:]) - 4.0 * u
    new = u - lam * (Fx[1:] - Fx[:-1]) - lam * (Gy[:, 1:] - Gy[:, :-1]) + mu * lap
    out = (Fx[-1].sum() - Fx[0].sum() + Gy[:, -1].sum() - Gy[:, 0].sum()
           + eps * ((u[-1] - a).sum() + (u[0] - a).sum()
                    + (u[:, -1] - a).sum() + (u[:, 0] - a).sum()) / h)
    return new, float(out * dt * h)


def llf_step(u, kx, ly, ax, ay, pf, pg, a, dt, h, eps):
    """One step for ``f = k P(u)``, ``g = l Q(u)``; ``pf``, ``pg`` are ascending coefficients."""
    up = _pad(u, a)
    P = _horner(pf, up)
    Q = _horner(pg, up)
    Fx = 0.5 * kx * (P[:-1, 1:-1] + P[1:, 1:-1]) - 0.5 * ax * (up[1:, 1:-1] - up[:-1, 1:-1])
    Gy = 0.5 * ly * (Q[1:-1, :-1] + Q[1:-1, 1:]) - 0.5 * ay * (up[1:-1, 1:] - up[1:-1, :-1])
    return _update(u, up, Fx, Gy, a, dt, h, eps)


def llf_step_generic(u, model, kx, ly, ax, ay, a, dt, h, eps):
    """Same update for arbitrary broadcasting flux callables ``model.f``, ``model.g``."""
    up = _pad(u, a)
    uxl, uxr = up[:-1, 1:-1], up[1:, 1:-1]
    uyl, uyr = up[1:-1, :-1], up[1:-1, 1:]
    Fx = 0.5 * (model.f(kx, uxl) + model.f(kx, uxr)) - 0.5 * ax * (uxr - uxl)
    Gy = 0.5 * (model.g(ly, uyl) + model.g(ly, uyr)) - 0.5 * ay * (uyr - uyl)
    return _update(u, up, Fx, Gy, a, dt, h, eps)
