# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled forward-Euler step for separable polynomial fluxes.

Same contract as :func:`resonantcl._step_py.llf_step`.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double horner(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t i = c.shape[0] - 1
    cdef double acc = c[i]
    while i > 0:
        i -= 1
        acc = acc * x + c[i]
    return acc


def llf_step(const double[:, ::1] u, const double[:, ::1] kx, const double[:, ::1] ly,
             const double[:, ::1] ax, const double[:, ::1] ay,
             const double[::1] pf, const double[::1] pg,
             double a, double dt, double h, double eps):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double lam = dt / h, mu = eps * dt / (h * h)
    cdef double Pa = horner(pf, a), Qa = horner(pg, a)
    cdef double uL, uR, flux, out = 0.0, lap, c
    P_arr = np.empty((nx, ny))
    Q_arr = np.empty((nx, ny))
    Fx_arr = np.empty((nx + 1, ny))
    Gy_arr = np.empty((nx, ny + 1))
    new_arr = np.empty((nx, ny))
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[:, ::1] Fx = Fx_arr
    cdef double[:, ::1] Gy = Gy_arr
    cdef double[:, ::1] new = new_arr

    with nogil:
        for i in range(nx):
            for j in range(ny):
                P[i, j] = horner(pf, u[i, j])
                Q[i, j] = horner(pg, u[i, j])

        for i in range(nx + 1):
            for j in range(ny):
                if i == 0:
                    uL = a
                    uR = u[0, j]
                    flux = 0.5 * kx[i, j] * (Pa + P[0, j])
                elif i == nx:
                    uL = u[nx - 1, j]
                    uR = a
                    flux = 0.5 * kx[i, j] * (P[nx - 1, j] + Pa)
                else:
                    uL = u[i - 1, j]
                    uR = u[i, j]
                    flux = 0.5 * kx[i, j] * (P[i - 1, j] + P[i, j])
                Fx[i, j] = flux - 0.5 * ax[i, j] * (uR - uL)

        for i in range(nx):
            for j in range(ny + 1):
                if j == 0:
                    uL = a
                    uR = u[i, 0]
                    flux = 0.5 * ly[i, j] * (Qa + Q[i, 0])
                elif j == ny:
                    uL = u[i, ny - 1]
                    uR = a
                    flux = 0.5 * ly[i, j] * (Q[i, ny - 1] + Qa)
                else:
                    uL = u[i, j - 1]
                    uR = u[i, j]
                    flux = 0.5 * ly[i, j] * (Q[i, j - 1] + Q[i, j])
                Gy[i, j] = flux - 0.5 * ay[i, j] * (uR - uL)

        for i in range(nx):
            for j in range(ny):
                c = u[i, j]
                lap = -4.0 * c
                lap += u[i - 1, j] if i > 0 else a
                lap += u[i + 1, j] if i < nx - 1 else a
                lap += u[i, j - 1] if j > 0 else a
                lap += u[i, j + 1] if j < ny - 1 else a
                new[i, j] = (c - lam * (Fx[i + 1, j] - Fx[i, j])
                             - lam * (Gy[i, j + 1] - Gy[i, j]) + mu * lap)

        # mass leaving through the frame: convective plus diffusive face fluxes
        for j in range(ny):
            out += Fx[nx, j] - Fx[0, j]
            out += eps * ((u[nx - 1, j] - a) + (u[0, j] - a)) / h
        for i in range(nx):
            out += Gy[i, ny] - Gy[i, 0]
            out += eps * ((u[i, ny - 1] - a) + (u[i, 0] - a)) / h

    return new_arr, out * dt * h
