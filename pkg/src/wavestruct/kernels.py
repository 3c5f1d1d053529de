"""Laplace-domain kernels for the 2D acoustic and elastodynamic layer operators.

All functions are vectorized over trailing-free leading shapes: `r` is (...,),
`rhat`, `nu_x`, `nu_y`, `tau_x`, `tau_y` are (..., 2); matrix kernels return
(..., 2, 2) with [k, i] = (test component at x, density component at y).

Conventions (fixed by the jump relations, see tests):
  * acoustic fundamental solution  G(r) = K0(eta r) / 2 pi,  eta = s / c;
  * elastic fundamental solution   E = (1/2 pi mu) [psi I - chi rhat rhat^T];
  * single layer  (S eta)(x) = int E(x,y) eta(y),
    double layer  (D phi)(x) = int [T_y E(y,x)]^T phi(y),
    so that u = S eta - D phi has [gamma u] = phi, [t(u)] = eta
    (jumps = interior minus exterior);
  * the hypersingular Galerkin form splits into the elastostatic tangential
    identity plus a weakly singular dynamic correction:
      <W(s) phi, psi> = C_stat * II d_tau psi . (-ln r I + rhat rhat^T) d_tau phi
                        + II psi . DK_W(x,y) phi,
    C_stat = mu (lam + mu) / (pi (lam + 2 mu)),
    DK_W = -T_x T_y [E(s) - E_static]  (O(log r) at the diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _es(spec, *ops):
    return np.einsum(spec, *ops, optimize=True)

from .specfun import k01_and_g, k01_g_gq

TWO_PI = 2.0 * np.pi
# 90-degree rotation used by the Gunter tangential split: M u = -J d_tau u
J_ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class ElasticFrequency:
    """Material + Laplace frequency bundle for the elastic kernels."""

    s: complex
    lam: float
    mu: float
    rho: float

    c_T: float = field(init=False)
    c_L: float = field(init=False)
    eta_T: complex = field(init=False)
    eta_L: complex = field(init=False)
    beta2: float = field(init=False)

    def __post_init__(self):
        cT = np.sqrt(self.mu / self.rho)
        cL = np.sqrt((self.lam + 2.0 * self.mu) / self.rho)
        object.__setattr__(self, "c_T", float(cT))
        object.__setattr__(self, "c_L", float(cL))
        object.__setattr__(self, "eta_T", complex(self.s / cT))
        object.__setattr__(self, "eta_L", complex(self.s / cL))
        object.__setattr__(self, "beta2", float((cT / cL) ** 2))


# --------------------------------------------------------------- acoustic
def acoustic_single(eta, r):
    """G(x,y) = K0(eta r) / 2 pi."""
    k0, _, _ = k01_and_g(eta * np.asarray(r))
    return k0 / TWO_PI


def acoustic_dbl_y(eta, r, rhat, nu_y):
    """d G / d nu_y = (eta / 2 pi) K1(eta r) (rhat . nu_y),  rhat = (x-y)/r."""
    _, k1, _ = k01_and_g(eta * np.asarray(r))
    return (eta / TWO_PI) * k1 * _es("...k,...k->...", rhat, nu_y)


def acoustic_dbl_x(eta, r, rhat, nu_x):
    """d G / d nu_x = -(eta / 2 pi) K1(eta r) (rhat . nu_x)."""
    _, k1, _ = k01_and_g(eta * np.asarray(r))
    return -(eta / TWO_PI) * k1 * _es("...k,...k->...", rhat, nu_x)


# ---------------------------------------------------------------- elastic
def _elastic_radials(ep: ElasticFrequency, r):
    """psi, chi and derivative combinations of the Kupradze kernel.

    The 1/z^2 poles of the two wave speeds cancel exactly through
    g(z) = K1(z)/z - 1/z^2, so everything here is at worst log-singular
    plus explicit 1/r factors.
    """
    r = np.asarray(r)
    zT = ep.eta_T * r
    zL = ep.eta_L * r
    K0T, K1T, gT = k01_and_g(zT, fast=True)
    K0L, K1L, gL = k01_and_g(zL, fast=True)
    b2 = ep.beta2
    psi = K0T + gT - b2 * gL
    chi = K0T - b2 * K0L + 2.0 * gT - 2.0 * b2 * gL
    gpT = -(K0T + 2.0 * gT) / zT
    gpL = -(K0L + 2.0 * gL) / zL
    psip = ep.eta_T * (-K1T + gpT) - b2 * ep.eta_L * gpL
    chi_over_r = -ep.eta_T * K1T - psip            # psi' + chi/r = -eta_T K1
    chip = psip - chi_over_r + b2 * ep.eta_L * K1L  # psi'-chi'-chi/r = -b2 eta_L K1
    div_coeff = -b2 * ep.eta_L * K1L               # = psi' - chi' - chi/r
    rot_coeff = -ep.eta_T * K1T                    # = psi' + chi/r
    return dict(psi=psi, chi=chi, psip=psip, chip=chip, chi_over_r=chi_over_r,
                div_coeff=div_coeff, rot_coeff=rot_coeff,
                K0T=K0T, K1T=K1T, K0L=K0L, K1L=K1L)


def elastic_E(ep: ElasticFrequency, r, rhat, R=None):
    """Fundamental solution E(x,y;s), symmetric 2x2."""
    if R is None:
        R = _elastic_radials(ep, r)
    a = 1.0 / (TWO_PI * ep.mu)
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    return a * (R["psi"][..., None, None] * eye - R["chi"][..., None, None] * rr)


def _tyE_from_radials(R, lam, mu, r, rhat, nu_y, x_side=False, nu=None):
    """[T E]_{il} template: traction at the point whose normal is `nu`.

    x_side=False: [T_y E(y,x)]_{il} with nu = nu_y (i = component at y).
    x_side=True : [T_x E(x,y)]_{il} with nu = nu_x (i = component at x);
                  all first radial derivatives flip sign.
    """
    if nu is None:
        nu = nu_y
    sgn = -1.0 if x_side else 1.0
    a = 1.0 / (TWO_PI * mu)
    dn = _es("...k,...k->...", rhat, nu)
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    rn = _es("...i,...j->...ij", rhat, nu)
    nr = _es("...i,...j->...ij", nu, rhat)
    dnuE = sgn * a * (
        -(R["psip"] * dn)[..., None, None] * eye
        + (R["chip"] * dn)[..., None, None] * rr
        + R["chi_over_r"][..., None, None] * (rn + nr - 2.0 * dn[..., None, None] * rr)
    )
    # div_y E(y,x) col_l = -a * div_coeff * rhat_l ; div_x flips sign
    div_part = -sgn * a * R["div_coeff"]
    # rot_y E(y,x) col_l = -a * rot_coeff * rperp_l ; rot_x flips sign
    rot_part = -sgn * a * R["rot_coeff"]
    rperp = np.stack([-rhat[..., 1], rhat[..., 0]], axis=-1)
    tau = np.stack([-nu[..., 1], nu[..., 0]], axis=-1)
    out = 2.0 * mu * dnuE
    out = out + lam * div_part[..., None, None] * _es("...i,...j->...ij", nu, rhat)
    out = out - mu * rot_part[..., None, None] * _es("...i,...j->...ij", tau, rperp)
    return out


def elastic_dbl_kernel(ep: ElasticFrequency, r, rhat, nu_y, R=None):
    """Full double-layer kernel K_D(x,y) = [T_y E(y,x)]^T (potential use)."""
    if R is None:
        R = _elastic_radials(ep, r)
    tyE = _tyE_from_radials(R, ep.lam, ep.mu, r, rhat, nu_y)
    return np.swapaxes(tyE, -1, -2)


def elastic_K_reg(ep: ElasticFrequency, r, rhat, nu_y, R=None):
    """Gunter-regularized part of K_D: the mu d_nu + (lam+mu) nu div piece,
    transposed to (x-component, density-component).  CPV grade (r^-1 odd)."""
    if R is None:
        R = _elastic_radials(ep, r)
    a = 1.0 / (TWO_PI * ep.mu)
    dn = _es("...k,...k->...", rhat, nu_y)
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    rn = _es("...i,...j->...ij", rhat, nu_y)
    nr = _es("...i,...j->...ij", nu_y, rhat)
    dnuE = a * (
        -(R["psip"] * dn)[..., None, None] * eye
        + (R["chip"] * dn)[..., None, None] * rr
        + R["chi_over_r"][..., None, None] * (rn + nr - 2.0 * dn[..., None, None] * rr)
    )
    kpre = ep.mu * dnuE - (ep.lam + ep.mu) * (a * R["div_coeff"])[..., None, None] * nr
    return np.swapaxes(kpre, -1, -2)


def elastic_Kt_reg(ep: ElasticFrequency, r, rhat, nu_x, R=None):
    """Gunter-regularized part of the traction-of-single-layer kernel
    [T_x E(x,y)] (no transpose; rows test at x, columns density at y)."""
    if R is None:
        R = _elastic_radials(ep, r)
    a = 1.0 / (TWO_PI * ep.mu)
    dn = _es("...k,...k->...", rhat, nu_x)
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    rn = _es("...i,...j->...ij", rhat, nu_x)
    nr = _es("...i,...j->...ij", nu_x, rhat)
    dnuE = -a * (
        -(R["psip"] * dn)[..., None, None] * eye
        + (R["chip"] * dn)[..., None, None] * rr
        + R["chi_over_r"][..., None, None] * (rn + nr - 2.0 * dn[..., None, None] * rr)
    )
    return ep.mu * dnuE + (ep.lam + ep.mu) * (a * R["div_coeff"])[..., None, None] * nr


def elastic_Kt_full(ep: ElasticFrequency, r, rhat, nu_x, R=None):
    """Full [T_x E(x,y)] kernel (potential-evaluation / traction use)."""
    if R is None:
        R = _elastic_radials(ep, r)
    return _tyE_from_radials(R, ep.lam, ep.mu, r, rhat, None, x_side=True, nu=nu_x)


# -------------------------------------------------- hypersingular pieces
class GeomScalars:
    """Componentwise pair geometry with lazily cached scalar products.

    All fields are broadcast-compatible scalar arrays; the component kernel
    API below never builds (..., 2, 2) intermediates.
    """

    def __init__(self, r, rhat, nux, nuy):
        self.r = r
        self.rh = (rhat[..., 0], rhat[..., 1])
        self.nux = (None, None) if nux is None else (nux[..., 0], nux[..., 1])
        self.nuy = (None, None) if nuy is None else (nuy[..., 0], nuy[..., 1])
        self._c = {}

    def _get(self, key, fn):
        v = self._c.get(key)
        if v is None:
            v = fn()
            self._c[key] = v
        return v

    @property
    def dny(self):
        return self._get("dny", lambda: self.rh[0] * self.nuy[0] + self.rh[1] * self.nuy[1])

    @property
    def dnx(self):
        return self._get("dnx", lambda: self.rh[0] * self.nux[0] + self.rh[1] * self.nux[1])

    @property
    def nxny(self):
        return self._get("nxny", lambda: self.nux[0] * self.nuy[0] + self.nux[1] * self.nuy[1])

    def w(self, i):           # Pi nu_y = nu_y - dny rhat
        return self._get(("w", i), lambda: self.nuy[i] - self.dny * self.rh[i])

    def wx(self, i):          # Pi nu_x
        return self._get(("wx", i), lambda: self.nux[i] - self.dnx * self.rh[i])

    @property
    def nxw(self):            # nu_x . w = nxny - dny dnx
        return self._get("nxw", lambda: self.nxny - self.dny * self.dnx)

    @property
    def dpx(self):            # nu_x . rperp
        return self._get("dpx", lambda: -self.nux[0] * self.rh[1] + self.nux[1] * self.rh[0])

    def tau_y(self, i):       # (-nuy1, nuy0)
        return -self.nuy[1] if i == 0 else self.nuy[0]

    def rperp(self, i):       # (-rh1, rh0)
        return -self.rh[1] if i == 0 else self.rh[0]

    def pi(self, i, j):       # Pi_ij = delta_ij - rh_i rh_j
        def make():
            d = 1.0 if i == j else 0.0
            return d - self.rh[i] * self.rh[j]
        return self._get(("pi", i, j), make)


def w_static_constant(lam, mu):
    """C_stat in the elastostatic identity."""
    return mu * (lam + mu) / (np.pi * (lam + 2.0 * mu))


def w_static_B(lam, mu, r, rhat):
    """B_stat(x,y) = C_stat (-ln r I + rhat rhat^T); pair with d_tau densities."""
    c = w_static_constant(lam, mu)
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    return c * (-np.log(r)[..., None, None] * eye + rr)


def _delta_radials(ep: ElasticFrequency, r):
    """Stable dynamic-minus-static radial set for the W correction kernel.

    Returns f_m and f_m' (m = 1..5) for the K_D term list
      f1 d_n I, f2 d_n rr, f3 (rn + nr - 2 d_n rr), f4 rn, f5 rperp tau^T
    with f1 = -2 mu a d(psi'), f2 = 2 mu a d(chi'), f3 = 2 mu a d(chi/r),
    f4 = -lam a d(div_coeff), f5 = mu a d(rot_coeff); a = 1/(2 pi mu).
    """
    r = np.asarray(r)
    zT = ep.eta_T * r
    zL = ep.eta_L * r
    K0T, K1T, gT, gqT = k01_g_gq(zT, fast=True)
    K0L, K1L, gL, gqL = k01_g_gq(zL, fast=True)
    b2 = ep.beta2
    eT2 = ep.eta_T**2
    eL2 = ep.eta_L**2

    d_gq = gqT - b2 * gqL
    # d(psi') = -eta_T^2 r g_T - (gq_T - b2 gq_L)/r
    dpsip = -eT2 * r * gT - d_gq / r
    # d(chi) = gq_T - b2 gq_L ; d(chi/r) = d(chi)/r
    dchi = d_gq
    dchi_r = dchi / r
    # d(chi') = d(psi') - d(chi)/r + b2 eta_L^2 r g_L
    dchip = dpsip - dchi_r + b2 * eL2 * r * gL
    # combos: d(div_coeff) = -b2 eta_L^2 r g_L ; d(rot_coeff) = -eta_T^2 r g_T
    ddiv = -b2 * eL2 * r * gL
    drot = -eT2 * r * gT

    # derivatives in r; use z g'(z) = 1/2 - gq  and  g + z g' = -(K0 + g)
    gpT = (0.5 - gqT) / zT
    gpL = (0.5 - gqL) / zL
    gqpT = -zT * gT - 2.0 * gqT / zT
    gqpL = -zL * gL - 2.0 * gqL / zL
    # d(psi'') = d/dr dpsip
    dpsipp = (-eT2 * (gT + zT * gpT)
              + d_gq / r**2
              - (ep.eta_T * gqpT - b2 * ep.eta_L * gqpL) / r)
    ddiv_p = b2 * eL2 * (K0L + gL)      # d/dr[-b2 eL2 r gL] = -b2 eL2 (g + z g') = +b2 eL2 (K0+g)
    drot_p = eT2 * (K0T + gT)
    dchi_p = dchip
    dchi_r_p = dchip / r - dchi / r**2
    dchipp = dpsipp - dchi_r_p + b2 * eL2 * (gL + zL * gpL)

    a = 1.0 / (TWO_PI * ep.mu)
    mu, lam = ep.mu, ep.lam
    f = (-2 * mu * a * dpsip, 2 * mu * a * dchip, 2 * mu * a * dchi_r,
         -lam * a * ddiv, mu * a * drot)
    fp = (-2 * mu * a * dpsipp, 2 * mu * a * dchipp, 2 * mu * a * dchi_r_p,
          -lam * a * ddiv_p, mu * a * drot_p)
    return f, fp


def elastic_W_delta(ep: ElasticFrequency, r, rhat, nu_x, nu_y, frads=None):
    """DK_W(x,y) = -T_x [K_D^dyn - K_D^stat](x,y): weakly singular 2x2.

    Built by applying the traction at x to the five-term difference kernel;
    every radial coefficient is a stable dynamic-minus-static combination.
    """
    if frads is None:
        frads = _delta_radials(ep, r)
    f, fp = frads
    lam, mu = ep.lam, ep.mu
    r = np.asarray(r)
    rinv = 1.0 / r
    eye = np.eye(2)
    rr = _es("...i,...j->...ij", rhat, rhat)
    Pi = eye - rr
    dn = _es("...k,...k->...", rhat, nu_y)
    w = nu_y - dn[..., None] * rhat                       # Pi nu_y
    rn = _es("...i,...j->...ij", rhat, nu_y)
    nr = _es("...i,...j->...ij", nu_y, rhat)
    rperp = np.stack([-rhat[..., 1], rhat[..., 0]], axis=-1)
    tau_y = np.stack([-nu_y[..., 1], nu_y[..., 0]], axis=-1)
    R_Pi = _es("km,...mj->...kj", np.array([[0.0, -1.0], [1.0, 0.0]]), Pi)

    # dyads D_m (..., k, i) and their gradients dD_m (..., k, i, j)
    D1 = dn[..., None, None] * eye
    D2 = dn[..., None, None] * rr
    D3 = rn + nr - 2.0 * dn[..., None, None] * rr
    D4 = rn
    D5 = _es("...i,...j->...ij", rperp, tau_y)

    def outer3(A, v):
        return _es("...ki,...j->...kij", A, v)

    gradP = (_es("...kj,...i->...kij", Pi, rhat)
             + _es("...k,...ij->...kij", rhat, Pi))  # d_j (rr)_{ki} * r
    dD1 = _es("...j,ki->...kij", w, eye) * rinv[..., None, None, None]
    dD2 = (_es("...j,...ki->...kij", w, rr) + dn[..., None, None, None] * gradP) \
        * rinv[..., None, None, None]
    dD3 = (_es("...kj,...i->...kij", Pi, nu_y)
           + _es("...k,...ij->...kij", nu_y, Pi)
           - 2.0 * _es("...j,...ki->...kij", w, rr)
           - 2.0 * dn[..., None, None, None] * gradP) * rinv[..., None, None, None]
    dD4 = _es("...kj,...i->...kij", Pi, nu_y) * rinv[..., None, None, None]
    dD5 = _es("...kj,...i->...kij", R_Pi, tau_y) * rinv[..., None, None, None]

    G = np.zeros(r.shape + (2, 2, 2), dtype=complex)     # G[k, i, j] = d_j m^i_k
    for fm, fpm, Dm, dDm in zip(f, fp, (D1, D2, D3, D4, D5), (dD1, dD2, dD3, dD4, dD5)):
        G = G + outer3(Dm, fpm[..., None] * rhat) + fm[..., None, None, None] * dDm

    trG = G[..., 0, :, 0] + G[..., 1, :, 1]              # (..., i)
    sig = mu * (G + np.swapaxes(G, -3, -1))
    sig = sig + lam * _es("...i,kj->...kij", trG, eye)
    t = _es("...kij,...j->...ki", sig, nu_x)
    return -t


# ----------------------------------------------- componentwise kernel API
DELTA = ((1.0, 0.0), (0.0, 1.0))


def e_comp(c, d, gs: GeomScalars, R, mu):
    """E[c, d] from cached radials."""
    a = 1.0 / (TWO_PI * mu)
    out = -a * R["chi"] * gs.rh[c] * gs.rh[d]
    if c == d:
        out = out + a * R["psi"]
    return out


def e_static_B_comp(c, d, gs: GeomScalars, cstat):
    out = cstat * gs.rh[c] * gs.rh[d]
    if c == d:
        out = out - cstat * np.log(gs.r)
    return out


def k_reg_comp(c, d, gs: GeomScalars, R, lam, mu):
    """Gunter-regularized double-layer block K_reg[c, d] (c at x, d at y).

    K_reg = [K-pre]^T with
    K-pre[i,l] = mu a[-psi' dn d_il + chi' rh_i rh_l dn
                 + (chi/r)(rh_i n_l + n_i rh_l - 2 rh_i rh_l dn)]
                 - (lam+mu) a div_coeff n_i rh_l,   n = nu_y, dn = rhat.nu_y.
    """
    a = 1.0 / TWO_PI
    i, l = d, c
    rh_i, rh_l = gs.rh[i], gs.rh[l]
    n_i, n_l = gs.nuy[i], gs.nuy[l]
    dn = gs.dny
    out = a * (R["chip"] * rh_i * rh_l * dn
               + R["chi_over_r"] * (rh_i * n_l + n_i * rh_l - 2.0 * rh_i * rh_l * dn))
    if i == l:
        out = out - a * R["psip"] * dn
    out = out - ((lam + mu) / mu) * a * R["div_coeff"] * n_i * rh_l
    return out


def kt_reg_comp(c, d, gs: GeomScalars, R, lam, mu):
    """Gunter-regularized [T_x E][c, d]: x-side mirror (first derivatives flip)."""
    a = 1.0 / TWO_PI
    rh_c, rh_d = gs.rh[c], gs.rh[d]
    n_c, n_d = gs.nux[c], gs.nux[d]
    dn = gs.dnx
    out = -a * (R["chip"] * rh_c * rh_d * dn
                + R["chi_over_r"] * (rh_c * n_d + n_c * rh_d - 2.0 * rh_c * rh_d * dn))
    if c == d:
        out = out + a * R["psip"] * dn
    out = out + ((lam + mu) / mu) * a * R["div_coeff"] * n_c * rh_d
    return out


def dbl_full_comp(c, d, gs: GeomScalars, R, lam, mu):
    """Full double-layer kernel K_D[c, d] = [T_y E(y,x)]_{d, c}."""
    a = 1.0 / (TWO_PI * mu)
    i, l = d, c
    rh_i, rh_l = gs.rh[i], gs.rh[l]
    n_i, n_l = gs.nuy[i], gs.nuy[l]
    dn = gs.dny
    dnuE = a * (R["chip"] * rh_i * rh_l * dn
                + R["chi_over_r"] * (rh_i * n_l + n_i * rh_l - 2.0 * rh_i * rh_l * dn))
    if i == l:
        dnuE = dnuE - a * R["psip"] * dn
    out = 2.0 * mu * dnuE
    out = out - lam * a * R["div_coeff"] * n_i * rh_l
    out = out + mu * a * R["rot_coeff"] * gs.tau_y(i) * gs.rperp(l)
    return out


def w_delta_block(gs: GeomScalars, frads, lam, mu):
    """All four components of DK_W with shared temporaries."""
    return [[w_delta_comp(0, 0, gs, frads, lam, mu),
             w_delta_comp(0, 1, gs, frads, lam, mu)],
            [w_delta_comp(1, 0, gs, frads, lam, mu),
             w_delta_comp(1, 1, gs, frads, lam, mu)]]


def _w_delta_shared(gs: GeomScalars, frads):
    """(c,d)-independent products of the DK_W evaluation, cached on gs."""
    sh = gs._c.get("wd")
    if sh is None:
        f, fp = frads
        rinv = 1.0 / gs.r
        sh = dict(
            rinv=rinv,
            fr=[fm * rinv for fm in f],
            fpdnx=[fpm * gs.dnx for fpm in fp],
            dn_rinv=gs.dny * rinv,
            nxw_rinv=gs.nxw * rinv,
            dnx_rinv=gs.dnx * rinv,
            dndnx_rinv=gs.dny * gs.dnx * rinv,
            f=f, fp=fp,
        )
        gs._c["wd"] = sh
    return sh


def w_delta_comp(c, d, gs: GeomScalars, frads, lam, mu):
    """DK_W[c, d] componentwise; see elastic_W_delta for the tensor form.

    Uses the contracted dyad identities (k = c is the test component at x,
    i = d the density component at y):
      DK_W[k,i] = -[ mu (G.nux)[k,i] + mu (G^T.nux)[k,i] + lam trG[i] nux_k ]
    with G[k,i,j] = sum_m f_m' rh_j D_m[k,i] + f_m dD_m[k,i,j].
    """
    sh = _w_delta_shared(gs, frads)
    f, fp = sh["f"], sh["fp"]
    fr, fpdnx = sh["fr"], sh["fpdnx"]
    k, i = c, d
    rh_k, rh_i = gs.rh[k], gs.rh[i]
    n_k, n_i = gs.nuy[k], gs.nuy[i]
    nux_k = gs.nux[k]
    dn, dnx = gs.dny, gs.dnx
    w_k, w_i = gs.w(k), gs.w(i)
    wx_k, wx_i = gs.wx(k), gs.wx(i)
    dfab = DELTA[k][i]
    tau_i = gs.tau_y(i)
    rp_k = gs.rperp(k)
    rkri = rh_k * rh_i
    cross = wx_k * rh_i + rh_k * wx_i

    # D_m[k,i]
    D1 = dn * dfab if dfab else 0.0
    D2 = dn * rkri
    D3 = rh_k * n_i + n_k * rh_i - 2.0 * D2
    D4 = rh_k * n_i
    D5 = rp_k * tau_i

    # A_m[k,i] = sum_j dD_m[k,i,j] nux_j   (all carry 1/r via sh products)
    A1 = sh["nxw_rinv"] * dfab if dfab else 0.0
    A2 = sh["nxw_rinv"] * rkri + sh["dn_rinv"] * cross
    A3 = (sh["rinv"] * (wx_k * n_i + n_k * wx_i)
          - 2.0 * sh["nxw_rinv"] * rkri - 2.0 * sh["dn_rinv"] * cross)
    A4 = sh["rinv"] * wx_k * n_i
    Rwx_k = -gs.wx(1) if k == 0 else gs.wx(0)
    A5 = sh["rinv"] * Rwx_k * tau_i

    # C_m[i] = sum_j D_m[j,i] nux_j
    C1 = dn * gs.nux[i]
    C2 = dn * dnx * rh_i
    C3 = dnx * n_i + gs.nxny * rh_i - 2.0 * C2
    C4 = dnx * n_i
    C5 = gs.dpx * tau_i

    # E_m[i,k] = sum_j dD_m[j,i,k] nux_j
    Pik = gs.pi(i, k)
    E1 = gs.nux[i] * w_k * sh["rinv"]
    E2 = (sh["dnx_rinv"] * w_k + sh["dn_rinv"] * wx_k) * rh_i + sh["dndnx_rinv"] * Pik
    E3 = (sh["rinv"] * wx_k * n_i + gs.nxny * sh["rinv"] * Pik
          - 2.0 * sh["dnx_rinv"] * w_k * rh_i - 2.0 * sh["dn_rinv"] * wx_k * rh_i
          - 2.0 * sh["dndnx_rinv"] * Pik)
    E4 = sh["rinv"] * wx_k * n_i
    nxR_k = gs.nux[1] if k == 0 else -gs.nux[0]
    E5 = sh["rinv"] * (nxR_k - gs.dpx * rh_k) * tau_i

    # F_m[i], H_m[i]
    F12 = dn * rh_i
    F3 = w_i
    F4 = n_i
    H1 = w_i * sh["rinv"]
    H2 = sh["dn_rinv"] * rh_i
    H3 = sh["rinv"] * (n_i + w_i) - 2.0 * H2
    H4 = n_i * sh["rinv"]

    Gnux = (fpdnx[0] * D1 + f[0] * A1 + fpdnx[1] * D2 + f[1] * A2
            + fpdnx[2] * D3 + f[2] * A3 + fpdnx[3] * D4 + f[3] * A4
            + fpdnx[4] * D5 + f[4] * A5)
    Gt = (fp[0] * rh_k * C1 + f[0] * E1 + fp[1] * rh_k * C2 + f[1] * E2
          + fp[2] * rh_k * C3 + f[2] * E3 + fp[3] * rh_k * C4 + f[3] * E4
          + fp[4] * rh_k * C5 + f[4] * E5)
    trG = ((fp[0] + fp[1]) * F12 + f[0] * H1 + f[1] * H2
           + fp[2] * F3 + f[2] * H3 + fp[3] * F4 + f[3] * H4)
    return -(mu * (Gnux + Gt) + lam * trG * nux_k)
