"""Reduction of the bounded homogeneous Newton system to augmented systems.

Unknowns ``(dx, dw, dy, ds, dz, dtau, dkappa)``; rows, with ``U`` selecting the
bounded columns ``I`` and ``k = |I|``::

    -rho_p dx + A^T dy + ds - U^T dz - c dtau          = xi_d
     A dx + rho_d dy - b dtau                          = xi_p
     U dx + dw - u dtau                                = xi_u
    -c^T dx + b^T dy - u^T dz + rho_g dtau - dkappa    = xi_g
     S dx + X ds                                       = xi_xs
     Z dw + W dz                                       = xi_wz
     kappa dtau + tau dkappa                           = xi_tk

Eliminating ds, dkappa, dz, dw leaves ``K [dx; dy] = [xi~_d + c^ dtau; xi_p + b dtau]``
with ``K = [[-(Theta~^{-1} + rho_p), A^T], [A, rho_d]]``,
``Theta~^{-1} = X^{-1}S + U^T W^{-1}Z U``, ``c^ = c - U^T W^{-1}Z u`` and::

    xi~_d = xi_d - X^{-1} xi_xs + U^T W^{-1}(xi_wz - Z xi_u)

Writing ``[dx; dy] = [u; v] + dtau [p; q]`` with ``K [p; q] = [c^; b]`` and
``K [u; v] = [xi~_d; xi_p]``, the gap row gives::

    dtau = (xi~_g + g^T u - b^T v) / (d_tau - g^T p + b^T q)
    g    = c + U^T W^{-1}Z u
    d_tau = rho_g + kappa/tau + u^T W^{-1}Z u
    xi~_g = xi_g + xi_tk/tau + u^T W^{-1}(xi_wz - Z xi_u)

The denominator equals ``d_tau + [p;q]^T diag(D, rho_d) [p;q]`` after using
``K [p;q] = [c^; b]``, so it is positive for any positive iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import linalg
from .base import DegenerateTau, KKTSolver


@dataclass
class Direction:
    dx: np.ndarray
    dw: np.ndarray
    dy: np.ndarray
    ds: np.ndarray
    dz: np.ndarray
    dtau: object
    dkappa: object

    def blocks(self):
        return (self.dx, self.dw, self.dy, self.ds, self.dz, self.dtau, self.dkappa)

    def is_finite(self) -> bool:
        for v in self.blocks():
            a = np.asarray(v, dtype=float) if not np.isscalar(v) else np.float64(float(v))
            if not np.all(np.isfinite(a)):
                return False
        return True


@dataclass
class NewtonRHS:
    xi_d: np.ndarray
    xi_p: np.ndarray
    xi_u: np.ndarray
    xi_g: object
    xi_xs: np.ndarray
    xi_wz: np.ndarray
    xi_tk: object


class NewtonContext:
    """Per-iteration data shared by every Newton solve of one IPM iteration."""

    def __init__(self, std):
        self.std = std
        self.pq_solves = 0
        self.p = self.q = None

    def update(self, solver: KKTSolver, x, w, s, z, tau, kappa, rho_p, rho_d, rho_g):
        """Refactorize ``solver`` for this iterate and refresh the cached ``(p, q)``."""
        std = self.std
        self.x, self.w, self.s, self.z = x, w, s, z
        self.tau, self.kappa = tau, kappa
        self.rho_p, self.rho_d, self.rho_g = rho_p, rho_d, rho_g
        I = std.bounded
        self.zw = z / w
        theta_inv = s / x
        if len(I):
            theta_inv = theta_inv.copy()
            theta_inv[I] += self.zw
        self.theta = 1 / theta_inv
        solver.update(self.theta, rho_p, rho_d)
        self.zwu = self.zw * std.upper
        c_hat = std.c.copy()
        if len(I):
            c_hat[I] -= self.zwu
        self.p, self.q = solver.solve(c_hat, std.b)
        self.pq_solves += 1
        self.d_tau = rho_g + kappa / tau + np.dot(self.zwu, std.upper)
        self.den = self.d_tau - self._g_dot(self.p) + np.dot(std.b, self.q)

    def _g_dot(self, v):
        r = np.dot(self.std.c, v)
        if len(self.std.bounded):
            r = r + np.dot(self.zwu, v[self.std.bounded])
        return r


def newton_solve(ctx: NewtonContext, solver: KKTSolver, rhs: NewtonRHS) -> Direction:
    std = ctx.std
    I = std.bounded
    x, w, s, z = ctx.x, ctx.w, ctx.s, ctx.z
    tau, kappa = ctx.tau, ctx.kappa

    t_wz = (rhs.xi_wz - z * rhs.xi_u) / w if len(I) else rhs.xi_wz
    xi_d = rhs.xi_d - rhs.xi_xs / x
    if len(I):
        xi_d[I] += t_wz
    xi_g = rhs.xi_g + rhs.xi_tk / tau + (np.dot(std.upper, t_wz) if len(I) else 0)

    u_, v_ = solver.solve(xi_d, rhs.xi_p)
    if not ctx.den > 0:
        raise DegenerateTau(f"tau pivot {float(ctx.den):.3e} is not positive")
    dtau = (xi_g + ctx._g_dot(u_) - np.dot(std.b, v_)) / ctx.den

    dx = u_ + dtau * ctx.p
    dy = v_ + dtau * ctx.q
    if len(I):
        dw = rhs.xi_u - dx[I] + std.upper * dtau
        dz = (rhs.xi_wz - z * dw) / w
    else:
        dw = rhs.xi_u.copy()
        dz = rhs.xi_wz.copy()
    ds = (rhs.xi_xs - s * dx) / x
    dkappa = (rhs.xi_tk - kappa * dtau) / tau
    return Direction(dx, dw, dy, ds, dz, dtau, dkappa)


def newton_matrix_dense(std, x, w, s, z, tau, kappa, rho_p, rho_d, rho_g):
    """Assemble the full 7-block Newton matrix densely (float64, for testing)."""
    A = linalg.dense(std.A, float)
    m, n = A.shape
    I = np.asarray(std.bounded)
    k = len(I)
    U = np.zeros((k, n))
    U[np.arange(k), I] = 1.0
    u = np.asarray(std.upper, dtype=float)
    b = np.asarray(std.b, dtype=float)
    c = np.asarray(std.c, dtype=float)
    N = n + k + m + n + k + 2
    # unknown order: dx, dw, dy, ds, dz, dtau, dkappa
    ox, ow, oy, os_, oz, ot, ok = 0, n, n + k, n + k + m, 2 * n + k + m, 2 * n + 2 * k + m, 2 * n + 2 * k + m + 1
    M = np.zeros((N, N))
    r = 0
    M[r:r + n, ox:ox + n] = -rho_p * np.eye(n)
    M[r:r + n, oy:oy + m] = A.T
    M[r:r + n, os_:os_ + n] = np.eye(n)
    M[r:r + n, oz:oz + k] = -U.T
    M[r:r + n, ot] = -c
    r += n
    M[r:r + m, ox:ox + n] = A
    M[r:r + m, oy:oy + m] = rho_d * np.eye(m)
    M[r:r + m, ot] = -b
    r += m
    M[r:r + k, ox:ox + n] = U
    M[r:r + k, ow:ow + k] = np.eye(k)
    M[r:r + k, ot] = -u
    r += k
    M[r, ox:ox + n] = -c
    M[r, oy:oy + m] = b
    M[r, oz:oz + k] = -u
    M[r, ot] = rho_g
    M[r, ok] = -1.0
    r += 1
    M[r:r + n, ox:ox + n] = np.diag(s)
    M[r:r + n, os_:os_ + n] = np.diag(x)
    r += n
    M[r:r + k, ow:ow + k] = np.diag(z)
    M[r:r + k, oz:oz + k] = np.diag(w)
    r += k
    M[r, ot] = kappa
    M[r, ok] = tau
    offsets = dict(dx=(ox, n), dw=(ow, k), dy=(oy, m), ds=(os_, n), dz=(oz, k), dtau=(ot, 1), dkappa=(ok, 1))
    return M, offsets


def stack_rhs(rhs: NewtonRHS) -> np.ndarray:
    """Right-hand side ordered like the rows of :func:`newton_matrix_dense`."""
    f = lambda v: np.atleast_1d(np.asarray(v, dtype=float))
    return np.concatenate([f(rhs.xi_d), f(rhs.xi_p), f(rhs.xi_u), f(rhs.xi_g),
                           f(rhs.xi_xs), f(rhs.xi_wz), f(rhs.xi_tk)])
