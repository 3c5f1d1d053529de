"""Manufactured incident fields and transmission-data synthesis.

Interior solid wave: plane pressure wave u = H(zeta) sin(omega zeta) d with
zeta = c_L t - x.d - shift (the shift makes the disk data causal).  Exterior
fluid wave: causal cylindrical wave from a source inside the solid,

    v(x, t) = L^{-1}{ K0((s/c) r) / 2pi  * L{m} },   r = |x - x0|,

evaluated exactly through the closed-form inverse transform

    v(x, t) = (1/2pi) int_0^{arccosh(ct/r)} m(t - (r/c) cosh(theta)) dtheta,

which also yields time and radial derivatives (the same integral with m' and
a cosh weight).  These exact evaluators serve as the independent reference
for the CQ-synthesized wave and for the convergence studies.

Transmission data (Laplace-domain convention of the solver):
    lam0(t) = -gamma u_t . nu - d_nu v
    g0(t)   = t(u) + rho_f gamma v_t nu
so that the manufactured pair (u, v) is the exact solution of the polygon
problem (panel normals are used, hence no geometry error in the data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cq
from .assembly import pair_p1, pair_vp1
from .geometry import BoundaryMesh
from .kernels import acoustic_single
from .materials import MaterialParams

_SMOOTHSTEP = (126.0, -420.0, 540.0, -315.0, 70.0)     # t^5 .. t^9
_SMOOTHSTEP_D = (630.0, -2520.0, 3780.0, -2520.0, 630.0)  # derivative, t^4 .. t^8


def smooth_heaviside(t, t0: float):
    """C^4 polynomial ramp: 0 for t <= 0, 1 for t >= t0, degree-9 between."""
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    tau = np.clip(np.asarray(t, dtype=float) / t0, 0.0, 1.0)
    t5 = tau**5
    out = t5 * (_SMOOTHSTEP[0] + tau * (_SMOOTHSTEP[1] + tau * (
        _SMOOTHSTEP[2] + tau * (_SMOOTHSTEP[3] + tau * _SMOOTHSTEP[4]))))
    return out if np.ndim(t) else float(out)


def smooth_heaviside_d1(t, t0: float):
    """Derivative of smooth_heaviside."""
    tt = np.asarray(t, dtype=float)
    tau = tt / t0
    inside = (tau > 0.0) & (tau < 1.0)
    tau = np.clip(tau, 0.0, 1.0)
    t4 = tau**4
    val = t4 * (_SMOOTHSTEP_D[0] + tau * (_SMOOTHSTEP_D[1] + tau * (
        _SMOOTHSTEP_D[2] + tau * (_SMOOTHSTEP_D[3] + tau * _SMOOTHSTEP_D[4])))) / t0
    out = np.where(inside, val, 0.0)
    return out if np.ndim(t) else float(out)


@dataclass(frozen=True)
class WindowedSine:
    """m(t) = H(t; t0) sin(omega t)."""

    omega: float
    t0: float

    def __call__(self, t):
        return smooth_heaviside(t, self.t0) * np.sin(self.omega * np.asarray(t, float))

    def d1(self, t):
        t = np.asarray(t, float)
        return (smooth_heaviside_d1(t, self.t0) * np.sin(self.omega * t)
                + self.omega * smooth_heaviside(t, self.t0) * np.cos(self.omega * t))


def plane_pwave(x, t, mat: MaterialParams, direction, omega: float,
                t0: float = 1.0, shift: float = 0.0):
    """Displacement of the causal plane pressure wave at points x, time t."""
    return PlanePWave(mat, direction, omega, t0, shift).u(x, t)


@dataclass(frozen=True)
class PlanePWave:
    """u(x,t) = H(zeta) sin(omega zeta) d, zeta = c_L t - x.d - shift."""

    mat: MaterialParams
    direction: tuple
    omega: float
    t0: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        object.__setattr__(self, "direction", tuple(d))

    def _zeta(self, x, t):
        d = np.asarray(self.direction)
        x = np.asarray(x, dtype=float)
        proj = x @ d
        return self.mat.c_L * np.asarray(t, dtype=float) - proj - self.shift

    def _psi(self, z):
        return smooth_heaviside(z, self.t0) * np.sin(self.omega * z)

    def _psi_d1(self, z):
        return (smooth_heaviside_d1(z, self.t0) * np.sin(self.omega * z)
                + self.omega * smooth_heaviside(z, self.t0) * np.cos(self.omega * z))

    def u(self, x, t):
        d = np.asarray(self.direction)
        return self._psi(self._zeta(x, t))[..., None] * d

    def u_t(self, x, t):
        d = np.asarray(self.direction)
        return (self.mat.c_L * self._psi_d1(self._zeta(x, t)))[..., None] * d

    def grad(self, x, t):
        """grad u with [i, j] = d u_i / d x_j = -psi'(zeta) d_i d_j."""
        d = np.asarray(self.direction)
        return -self._psi_d1(self._zeta(x, t))[..., None, None] * np.outer(d, d)

    def traction(self, x, t, nu):
        """sigma(u) nu = -psi'(zeta) (2 mu (d.nu) d + lam nu)."""
        d = np.asarray(self.direction)
        nu = np.asarray(nu, dtype=float)
        dpsi = self._psi_d1(self._zeta(x, t))
        dn = nu @ d
        lam, mu = self.mat.lame_lambda, self.mat.lame_mu
        return -dpsi[..., None] * (2.0 * mu * dn[..., None] * d + lam * nu)


@dataclass(frozen=True)
class CylindricalWave:
    """Outgoing causal cylindrical wave from x0 with signal m = H sin(omega t)."""

    x0: tuple
    c: float
    omega: float
    t0: float

    @property
    def signal(self) -> WindowedSine:
        return WindowedSine(self.omega, self.t0)

    def _quad(self, radii, times, func, weight_cosh=False, n_panels=10, q=12):
        """(1/2 pi) int_0^thm func(t - (r/c) cosh th) [cosh th] dth, vectorized
        over (radii, times); zero before arrival ct < r."""
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        times = np.atleast_1d(np.asarray(times, dtype=float))
        a = radii[:, None] / self.c                      # (nr, 1)
        thm = np.arccosh(np.maximum(times[None, :] / a, 1.0))   # (nr, nt)
        xg, wg = np.polynomial.legendre.leggauss(q)
        edges = np.linspace(0.0, 1.0, n_panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        ref = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        wref = (half[:, None] * wg[None, :]).ravel()
        out = np.zeros((len(radii), len(times)))
        chunk = max(1, int(4e6 / (len(radii) * len(ref))))
        for lo in range(0, len(times), chunk):
            hi = min(len(times), lo + chunk)
            th = thm[:, lo:hi, None] * ref                  # (nr, ct, nq)
            ch = np.cosh(th)
            arg = times[None, lo:hi, None] - a[:, :, None] * ch
            vals = func(arg)
            if weight_cosh:
                vals = vals * ch
            out[:, lo:hi] = (vals * wref).sum(axis=-1) * thm[:, lo:hi] / (2 * np.pi)
        return out

    def _radii(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(pts - np.asarray(self.x0), axis=1)

    def v(self, points, times):
        """Field values, shape (npts, nt)."""
        return self._quad(self._radii(points), times, self.signal)

    def v_t(self, points, times):
        return self._quad(self._radii(points), times, self.signal.d1)

    def v_r(self, points, times):
        """Radial derivative d v / d r."""
        return -self._quad(self._radii(points), times, self.signal.d1,
                           weight_cosh=True) / self.c

    def dv_dnu(self, points, normals, times):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        diff = pts - np.asarray(self.x0)
        r = np.linalg.norm(diff, axis=1)
        proj = np.einsum("pk,pk->p", diff / r[:, None], np.atleast_2d(normals))
        return self.v_r(points, times) * proj[:, None]


def cylindrical_wave(points, grid: cq.TimeGrid, x0, c: float,
                     signal: WindowedSine, scheme: cq.CQScheme) -> cq.TimeSignal:
    """CQ realization: convolve the signal with the transfer K0((s/c) r)/2pi
    per point (the spec's forward-CQ construction of the wave)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts - np.asarray(x0, dtype=float), axis=1)
    if np.any(r == 0.0):
        raise ValueError("evaluation point coincides with the source")
    vals = np.repeat(signal(grid.times)[:, None], len(pts), axis=1)

    def transfer(s):
        return acoustic_single(s / c, r)

    return cq.cq_convolve(scheme, grid, transfer, cq.TimeSignal(grid, vals))


def synthesize_transmission_data(uwave: PlanePWave, vwave: CylindricalWave,
                                 bmesh: BoundaryMesh, grid: cq.TimeGrid,
                                 mat: MaterialParams, quad_order: int = 4):
    """Tested transmission data signals on the boundary:

        Lam[n, i] = <lam0(., t_n), psi_i>,   lam0 = -u_t.nu - d_nu v
        Gv[n, j]  = <g0(., t_n),  w_j>,      g0   = t(u) + rho_f v_t nu

    evaluated with per-panel Gauss rules (panel normals; corner-safe).
    """
    xg, wg = np.polynomial.legendre.leggauss(quad_order)
    uref = 0.5 * (xg + 1.0)
    wref = 0.5 * wg
    a = bmesh.nodes[bmesh.panels[:, 0]]
    d = bmesh.nodes[bmesh.panels[:, 1]] - a
    X = a[:, None, :] + uref[None, :, None] * d[:, None, :]     # (P, q, 2)
    P, q = X.shape[:2]
    nu = bmesh.panel_normals
    times = grid.times
    nt = len(times)

    pts = X.reshape(P * q, 2)
    # deduplicate radii (regular polygons collapse to a handful)
    r_all = np.linalg.norm(pts - np.asarray(vwave.x0), axis=1)
    runiq, rinv = np.unique(np.round(r_all, 12), return_inverse=True)
    v_t_u = vwave._quad(runiq, times, vwave.signal.d1)
    v_r_u = -vwave._quad(runiq, times, vwave.signal.d1, weight_cosh=True) / vwave.c
    v_t = v_t_u[rinv].reshape(P, q, nt)
    v_r = v_r_u[rinv].reshape(P, q, nt)
    diff = pts - np.asarray(vwave.x0)
    rhat = diff / r_all[:, None]
    proj = np.einsum("pk,pk->p", rhat, np.repeat(nu, q, axis=0)).reshape(P, q)
    dnv = v_r * proj[:, :, None]

    # elastic wave: u_t and traction at (P, q, nt)
    zeta = (uwave.mat.c_L * times[None, None, :]
            - (X @ np.asarray(uwave.direction))[:, :, None] - uwave.shift)
    dpsi = uwave._psi_d1(zeta)
    dvec = np.asarray(uwave.direction)
    u_t_n = uwave.mat.c_L * dpsi * (nu @ dvec)[:, None, None]   # u_t . nu
    lam0 = -u_t_n - dnv                                          # (P, q, nt)

    dn = nu @ dvec
    lam_c, mu_c = mat.lame_lambda, mat.lame_mu
    tu = -dpsi[..., None] * (2.0 * mu_c * dn[:, None, None, None] * dvec
                             + lam_c * nu[:, None, None, :])     # (P,q,nt,2)
    g0 = tu + mat.rho_fluid * v_t[..., None] * nu[:, None, None, :]

    # tested pairings, accumulated over the dof axis
    wl = wref[None, :] * bmesh.panel_lengths[:, None]            # (P, q)
    s0 = (1.0 - uref)[None, :]
    s1 = uref[None, :]
    n0, n1 = bmesh.panels[:, 0], bmesh.panels[:, 1]
    LamT = np.zeros((bmesh.n_nodes, nt))
    np.add.at(LamT, n0, np.einsum("pq,pqn->pn", wl * s0, lam0))
    np.add.at(LamT, n1, np.einsum("pq,pqn->pn", wl * s1, lam0))
    GvT = np.zeros((2 * bmesh.n_nodes, nt))
    for comp in range(2):
        np.add.at(GvT, 2 * n0 + comp, np.einsum("pq,pqn->pn", wl * s0, g0[..., comp]))
        np.add.at(GvT, 2 * n1 + comp, np.einsum("pq,pqn->pn", wl * s1, g0[..., comp]))
    return cq.TimeSignal(grid, LamT.T), cq.TimeSignal(grid, GvT.T)
