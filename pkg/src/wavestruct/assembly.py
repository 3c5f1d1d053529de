"""Galerkin assembly of boundary-operator blocks over panel-shape families.

The assembler runs a list of jobs (kernel, test family, trial family, target)
through one pass over the quadrature geometry, sharing the per-frequency
radial caches (the Bessel evaluations dominate the cost).  Composed operators
such as N^t V(s/c) N are assembled exactly by pairing the kernel with the
appropriate composed families (e.g. vector-P1-dot-normal), with no mass-matrix
projections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _es(spec, *ops):
    return np.einsum(spec, *ops, optimize=True)
import scipy.sparse as sp

from . import kernels as kn
from .geometry import BoundaryMesh
from .quadrature import PanelQuadrature
from .specfun import k01_and_g

X_SLAB = 64


# ------------------------------------------------------------------ spaces
@dataclass(frozen=True)
class BemSpace:
    """Descriptor of one discrete boundary space on a mesh."""

    kind: str          # P0_panelwise | P1_continuous | P1_vector
    dof_count: int


def make_space(mesh: BoundaryMesh, kind: str) -> BemSpace:
    if kind == "P0_panelwise":
        return BemSpace(kind, mesh.n_panels)
    if kind == "P1_continuous":
        return BemSpace(kind, mesh.n_nodes)
    if kind == "P1_vector":
        return BemSpace(kind, 2 * mesh.n_nodes)
    raise ValueError(f"unknown space kind {kind}")


# ----------------------------------------------------------------- families
class Family:
    """Panelwise shape family; values carry no quadrature weights."""

    scalar: bool

    def __init__(self, mesh: BoundaryMesh):
        self.mesh = mesh

    def dofs(self, panels):
        raise NotImplementedError

    def values(self, panels, u):
        raise NotImplementedError


class P0(Family):
    scalar = True
    nslots = 1

    def __init__(self, mesh):
        super().__init__(mesh)
        self.ndof = mesh.n_panels

    def dofs(self, panels):
        return np.asarray(panels).reshape(-1, 1)

    def values(self, panels, u):
        return np.ones(np.shape(u) + (1,))


class P1(Family):
    scalar = True
    nslots = 2

    def __init__(self, mesh):
        super().__init__(mesh)
        self.ndof = mesh.n_nodes

    def dofs(self, panels):
        return self.mesh.panels[panels]

    def values(self, panels, u):
        return np.stack([1.0 - u, u], axis=-1)


class DP1(P1):
    """Arclength derivative of P1 (panelwise constant)."""

    def values(self, panels, u):
        inv = 1.0 / self.mesh.panel_lengths[panels]
        ones = np.ones_like(u)
        inv = inv.reshape(inv.shape + (1,) * (u.ndim - np.ndim(panels)))
        return np.stack([-inv * ones, inv * ones], axis=-1)


class VP1DotN(Family):
    """Scalar-valued family (w . nu) of a vector P1 function; 4 slots/panel."""

    scalar = True
    nslots = 4

    def __init__(self, mesh):
        super().__init__(mesh)
        self.ndof = 2 * mesh.n_nodes

    def dofs(self, panels):
        n = self.mesh.panels[panels]
        return np.stack([2 * n[..., 0], 2 * n[..., 0] + 1,
                         2 * n[..., 1], 2 * n[..., 1] + 1], axis=-1)

    def values(self, panels, u):
        nu = self.mesh.panel_normals[panels]
        nu = nu.reshape(nu.shape[:-1] + (1,) * (u.ndim - np.ndim(panels)) + (2,))
        s0, s1 = 1.0 - u, u
        return np.stack([s0 * nu[..., 0], s0 * nu[..., 1],
                         s1 * nu[..., 0], s1 * nu[..., 1]], axis=-1)


class VP1(Family):
    """Vector P1 (2 dofs per node, interleaved); values (..., 4, 2)."""

    scalar = False
    nslots = 4

    def __init__(self, mesh):
        super().__init__(mesh)
        self.ndof = 2 * mesh.n_nodes

    def dofs(self, panels):
        n = self.mesh.panels[panels]
        return np.stack([2 * n[..., 0], 2 * n[..., 0] + 1,
                         2 * n[..., 1], 2 * n[..., 1] + 1], axis=-1)

    def _shapes(self, panels, u):
        return 1.0 - u, u

    def values(self, panels, u):
        s0, s1 = self._shapes(panels, u)
        z = np.zeros_like(u)
        return np.stack([
            np.stack([s0, z], axis=-1), np.stack([z, s0], axis=-1),
            np.stack([s1, z], axis=-1), np.stack([z, s1], axis=-1),
        ], axis=-2)


class DVP1(VP1):
    """Arclength derivative of vector P1."""

    def _shapes(self, panels, u):
        inv = 1.0 / self.mesh.panel_lengths[panels]
        inv = inv.reshape(inv.shape + (1,) * (u.ndim - np.ndim(panels)))
        ones = np.ones_like(u)
        return -inv * ones, inv * ones


class JDVP1(VP1):
    """J^T-rotated arclength derivative: J^T e_x = +e_y, J^T e_y = -e_x."""

    def _shapes(self, panels, u):
        inv = 1.0 / self.mesh.panel_lengths[panels]
        inv = inv.reshape(inv.shape + (1,) * (u.ndim - np.ndim(panels)))
        ones = np.ones_like(u)
        return -inv * ones, inv * ones

    def values(self, panels, u):
        s0, s1 = self._shapes(panels, u)
        z = np.zeros_like(u)
        return np.stack([
            np.stack([z, s0], axis=-1), np.stack([-s0, z], axis=-1),
            np.stack([z, s1], axis=-1), np.stack([-s1, z], axis=-1),
        ], axis=-2)


class P1N(Family):
    """Vector-valued family (scalar P1) * nu_panel; 2 slots/panel."""

    scalar = False
    nslots = 2

    def __init__(self, mesh):
        super().__init__(mesh)
        self.ndof = mesh.n_nodes

    def dofs(self, panels):
        return self.mesh.panels[panels]

    def values(self, panels, u):
        nu = self.mesh.panel_normals[panels]
        nu = nu.reshape(nu.shape[:-1] + (1,) * (u.ndim - np.ndim(panels)) + (2,))
        s0, s1 = 1.0 - u, u
        return np.stack([s0[..., None] * nu, s1[..., None] * nu], axis=-2)


# ------------------------------------------------------------------ kernels
class ScalarKernel:
    vector = False

    def __init__(self, fn, needs):
        self.fn = fn
        self.needs = needs

    def __call__(self, gs, cache):
        return self.fn(gs, cache)


class MatrixKernel:
    vector = True

    def __init__(self, fn, needs):
        self.fn = fn
        self.needs = needs

    def comp(self, c, d, gs, cache):
        return self.fn(c, d, gs, cache)


def make_kernel(name, *, eta=None, ep=None):
    """Componentwise kernel objects over GeomScalars; second element is the
    radial-cache tag the kernel needs."""
    if name == "V_ac":
        return ScalarKernel(lambda g, c: c["ac0"] / kn.TWO_PI, "ac"), "ac"
    if name in ("K_ac", "D_ac"):
        return ScalarKernel(
            lambda g, c: (eta / kn.TWO_PI) * c["ac1"] * g.dny, "ac"), "ac"
    if name == "Kt_ac":
        return ScalarKernel(
            lambda g, c: -(eta / kn.TWO_PI) * c["ac1"] * g.dnx, "ac"), "ac"
    if name == "W_ac_mass":
        return ScalarKernel(
            lambda g, c: (eta**2 / kn.TWO_PI) * c["ac0"] * g.nxny, "ac"), "ac"
    if name == "V_el":
        return MatrixKernel(
            lambda cc, dd, g, c: kn.e_comp(cc, dd, g, c["el"], ep.mu), "el"), "el"
    if name == "K_el_reg":
        return MatrixKernel(
            lambda cc, dd, g, c: kn.k_reg_comp(cc, dd, g, c["el"], ep.lam, ep.mu),
            "el"), "el"
    if name == "Kt_el_reg":
        return MatrixKernel(
            lambda cc, dd, g, c: kn.kt_reg_comp(cc, dd, g, c["el"], ep.lam, ep.mu),
            "el"), "el"
    if name == "W_el_B":
        _cs = kn.w_static_constant(ep.lam, ep.mu)
        return MatrixKernel(
            lambda cc, dd, g, c: kn.e_static_B_comp(cc, dd, g, _cs).astype(complex),
            None), None
    if name == "W_el_delta":
        return MatrixKernel(
            lambda cc, dd, g, c: kn.w_delta_comp(cc, dd, g, c["eld"], ep.lam, ep.mu),
            "eld"), "eld"
    if name == "D_el_full":
        return MatrixKernel(
            lambda cc, dd, g, c: kn.dbl_full_comp(cc, dd, g, c["el"], ep.lam, ep.mu),
            "el"), "el"
    raise ValueError(name)


@dataclass
class Job:
    kernel: object          # callable(geom, cache)
    needs: str | None       # 'ac' | 'el' | 'eld' | None
    test: Family
    trial: Family
    coeff: complex
    target: str


def _caches(needed, r, eta, ep):
    out = {}
    if "ac" in needed:
        k0, k1, _ = k01_and_g(eta * r, fast=True)
        out["ac0"], out["ac1"] = k0, k1
    if "el" in needed:
        out["el"] = kn._elastic_radials(ep, r)
    if "eld" in needed:
        out["eld"] = kn._delta_radials(ep, r)
    return out


def far_order_for(pq, eta=None, ep=None):
    im = 0.0
    if eta is not None:
        im = max(im, abs(complex(eta).imag))
    if ep is not None:
        im = max(im, abs(ep.eta_T.imag), abs(ep.eta_L.imag))
    return pq.far_order(im)


def assemble_jobs(pq: PanelQuadrature, jobs, eta=None, ep=None, far_q=None):
    """Run all jobs over the far grid and the singular pair classes.

    Returns {target: dense complex matrix}.
    """
    mesh = pq.mesh
    P = mesh.n_panels
    q = far_q or far_order_for(pq, eta, ep)
    far_u, far_x, far_w = pq.far_grid(q)
    targets = {}
    for j in jobs:
        key = j.target
        if key not in targets:
            targets[key] = np.zeros((j.test.ndof, j.trial.ndof), dtype=complex)
    needed = {j.needs for j in jobs if j.needs}

    # sparse shape-weight matrices for the far grid, per family (cached)
    fam_mats = {}

    def far_mats(fam):
        key = id(fam)
        if key not in fam_mats:
            panels = np.arange(P)
            u = np.broadcast_to(far_u, (P, q))
            vals = fam.values(panels, u)                    # (P, q, nslots[,2])
            dofs = fam.dofs(panels)                         # (P, nslots)
            w = far_w                                       # (P, q)
            cols = np.repeat(np.arange(P * q).reshape(P, q)[:, :, None],
                             fam.nslots, axis=2)
            rows = np.repeat(dofs[:, None, :], q, axis=1)
            if fam.scalar:
                data = (vals * w[..., None]).ravel()
                mats = [sp.csr_matrix((data, (rows.ravel(), cols.ravel())),
                                      shape=(fam.ndof, P * q))]
            else:
                mats = []
                for comp in range(2):
                    data = (vals[..., comp] * w[..., None]).ravel()
                    mats.append(sp.csr_matrix((data, (rows.ravel(), cols.ravel())),
                                              shape=(fam.ndof, P * q)))
            fam_mats[key] = mats
        return fam_mats[key]

    all_y = far_x.reshape(P * q, 2)
    nuy_far = np.repeat(pq.nu, q, axis=0)
    tauy_far = np.repeat(pq.tau, q, axis=0)

    for lo in range(0, P, X_SLAB):
        hi = min(P, lo + X_SLAB)
        xs = far_x[lo:hi].reshape(-1, 2)
        nx = np.repeat(pq.nu[lo:hi], q, axis=0)
        tx = np.repeat(pq.tau[lo:hi], q, axis=0)
        diff = xs[:, None, :] - all_y[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        mask = np.repeat(np.repeat(pq.excluded[lo:hi], q, axis=0), q, axis=1)
        r_safe = np.where(mask | (r == 0.0), 1.0, r)
        rhat = diff / r_safe[..., None]
        g = kn.GeomScalars(r_safe, rhat, nx[:, None, :], nuy_far[None, :, :])
        cache = _caches(needed, r_safe, eta, ep)
        kmemo = {}

        def getK(kern, cc=None, dd=None):
            key = (id(kern), cc, dd)
            v = kmemo.get(key)
            if v is None:
                raw = kern(g, cache) if cc is None else kern.comp(cc, dd, g, cache)
                v = np.where(mask, 0.0, np.broadcast_to(raw, mask.shape))
                kmemo[key] = v
            return v

        for j in jobs:
            if not j.kernel.vector:
                K = getK(j.kernel)
                T = far_mats(j.test)[0][:, lo * q:hi * q]
                S = far_mats(j.trial)[0]
                KS = S.dot(K.T).T                     # (nx, ndof_trial)
                targets[j.target] += j.coeff * T.dot(KS)
            else:
                Ts = far_mats(j.test)
                Ss = far_mats(j.trial)
                for ccomp in range(2):
                    for dcomp in range(2):
                        K = getK(j.kernel, ccomp, dcomp)
                        T = Ts[ccomp][:, lo * q:hi * q]
                        S = Ss[dcomp]
                        KS = S.dot(K.T).T
                        targets[j.target] += j.coeff * T.dot(KS)

    # singular classes
    for cls in pq.classes():
        nx = pq.nu[cls.p_idx][:, None, :]
        ny = pq.nu[cls.q_idx][:, None, :]
        g = cls.cache.get("gs")
        if g is None:
            g = kn.GeomScalars(cls.r, cls.rhat, nx, ny)
            cls.cache["gs"] = g
        g._c.pop("wd", None)      # frequency-dependent shared products
        cache = _caches(needed, cls.r, eta, ep)
        kmemo = {}

        def getK(kern, cc=None, dd=None):
            key = (id(kern), cc, dd)
            v = kmemo.get(key)
            if v is None:
                v = kern(g, cache) if cc is None else kern.comp(cc, dd, g, cache)
                v = np.broadcast_to(v, cls.r.shape)
                kmemo[key] = v
            return v

        def contract(K, Tw, Sv):
            # contrib[p] = (K * Tw)[p]^T @ Sv[p], batched over pairs
            KT = K[..., None] * Tw
            return np.matmul(KT.transpose(0, 2, 1), Sv)

        for j in jobs:
            Tv, dt = cls.family_values(j.test, "test")
            Sv, ds = cls.family_values(j.trial, "trial")
            wkey = (type(j.test).__name__,)
            Tw = cls.cache.get(("wtest",) + wkey)
            if Tw is None:
                Tw = cls.wt[..., None] * Tv if j.test.scalar \
                    else cls.wt[..., None, None] * Tv
                cls.cache[("wtest",) + wkey] = Tw
            if not j.kernel.vector:
                contrib = contract(getK(j.kernel), Tw, Sv)
            else:
                contrib = None
                for ccomp in range(2):
                    for dcomp in range(2):
                        piece = contract(getK(j.kernel, ccomp, dcomp),
                                         Tw[..., ccomp], Sv[..., dcomp])
                        contrib = piece if contrib is None else contrib + piece
            np.add.at(targets[j.target],
                      (dt[:, :, None], ds[:, None, :]), j.coeff * contrib)
    return targets


# ------------------------------------------------------ public block API
import weakref

from .materials import MaterialParams

_PQ_CACHE: "weakref.WeakKeyDictionary[BoundaryMesh, PanelQuadrature]" = (
    weakref.WeakKeyDictionary()
)


def panel_quadrature(mesh: BoundaryMesh) -> PanelQuadrature:
    pq = _PQ_CACHE.get(mesh)
    if pq is None:
        pq = PanelQuadrature(mesh)
        _PQ_CACHE[mesh] = pq
    return pq


@dataclass(frozen=True)
class OperatorBlock:
    """Dense Galerkin matrix of one layer operator at one frequency."""

    matrix: np.ndarray
    row_space: BemSpace
    col_space: BemSpace
    kind: str
    frequency: complex


class AssemblyError(RuntimeError):
    pass


def _fam(mesh, kind):
    if kind == "P0_panelwise":
        return P0(mesh)
    if kind == "P1_continuous":
        return P1(mesh)
    if kind == "P1_vector":
        return VP1(mesh)
    raise ValueError(kind)


def assemble_acoustic_block(kind: str, mesh: BoundaryMesh, row_space: str,
                            col_space: str, s_over_c: complex) -> OperatorBlock:
    """Galerkin matrix <Op phi_j, psi_i> for Op in {V, K, Kt, W} at eta = s/c."""
    eta = complex(s_over_c)
    if eta.real <= 0:
        raise AssemblyError("need Re(s/c) > 0")
    pq = panel_quadrature(mesh)
    ft = _fam(mesh, row_space)
    fs = _fam(mesh, col_space)
    if kind in ("V", "K", "Kt"):
        kern, needs = make_kernel({"V": "V_ac", "K": "K_ac", "Kt": "Kt_ac"}[kind],
                                  eta=eta)
        jobs = [Job(kern, needs, ft, fs, 1.0, "A")]
    elif kind == "W":
        if row_space != "P1_continuous" or col_space != "P1_continuous":
            raise AssemblyError("W needs P1 x P1")
        kv, nv = make_kernel("V_ac", eta=eta)
        km, nm = make_kernel("W_ac_mass", eta=eta)
        jobs = [Job(kv, nv, DP1(mesh), DP1(mesh), 1.0, "A"),
                Job(km, nm, ft, fs, 1.0, "A")]
    else:
        raise ValueError(kind)
    A = assemble_jobs(pq, jobs, eta=eta)["A"]
    return OperatorBlock(A, make_space(mesh, row_space), make_space(mesh, col_space),
                         kind, eta)


def assemble_elastic_block(kind: str, mesh: BoundaryMesh, row_space: str,
                           col_space: str, s: complex,
                           mat: MaterialParams) -> OperatorBlock:
    """Galerkin matrix of the elastodynamic layer operators on vector P1."""
    s = complex(s)
    if s.real <= 0:
        raise AssemblyError("need Re s > 0")
    if row_space != "P1_vector" or col_space != "P1_vector":
        raise AssemblyError("elastic blocks use vector P1 spaces")
    ep = kn.ElasticFrequency(s, mat.lame_lambda, mat.lame_mu, mat.rho_solid)
    pq = panel_quadrature(mesh)
    v = VP1(mesh)
    if kind == "V":
        kv, nv = make_kernel("V_el", ep=ep)
        jobs = [Job(kv, nv, v, v, 1.0, "A")]
    elif kind == "K":
        kr, nr = make_kernel("K_el_reg", ep=ep)
        kv, nv = make_kernel("V_el", ep=ep)
        jobs = [Job(kr, nr, v, v, 1.0, "A"),
                Job(kv, nv, v, JDVP1(mesh), ep.mu, "A")]
    elif kind == "Kt":
        kr, nr = make_kernel("Kt_el_reg", ep=ep)
        kv, nv = make_kernel("V_el", ep=ep)
        jobs = [Job(kr, nr, v, v, 1.0, "A"),
                Job(kv, nv, JDVP1(mesh), v, ep.mu, "A")]
    elif kind == "W":
        kb, nb = make_kernel("W_el_B", ep=ep)
        kd, nd = make_kernel("W_el_delta", ep=ep)
        jobs = [Job(kb, nb, DVP1(mesh), DVP1(mesh), 1.0, "A"),
                Job(kd, nd, v, v, 1.0, "A")]
    else:
        raise ValueError(kind)
    A = assemble_jobs(pq, jobs, ep=ep)["A"]
    return OperatorBlock(A, make_space(mesh, row_space), make_space(mesh, col_space),
                         kind, s)


# ------------------------------------------------------- mass / dualities
def mass_p1(mesh: BoundaryMesh) -> np.ndarray:
    n = mesh.n_nodes
    M = np.zeros((n, n))
    for (i, j), L in zip(mesh.panels, mesh.panel_lengths):
        M[i, i] += L / 3.0
        M[j, j] += L / 3.0
        M[i, j] += L / 6.0
        M[j, i] += L / 6.0
    return M


def mass_vp1(mesh: BoundaryMesh) -> np.ndarray:
    Ms = mass_p1(mesh)
    n = mesh.n_nodes
    M = np.zeros((2 * n, 2 * n))
    M[0::2, 0::2] = Ms
    M[1::2, 1::2] = Ms
    return M


def duality_p1_p0(mesh: BoundaryMesh) -> np.ndarray:
    """B[i, k] = int psi_i chi_k over panel k."""
    B = np.zeros((mesh.n_nodes, mesh.n_panels))
    for k, ((i, j), L) in enumerate(zip(mesh.panels, mesh.panel_lengths)):
        B[i, k] += L / 2.0
        B[j, k] += L / 2.0
    return B


def project_p1(mesh: BoundaryMesh, func) -> np.ndarray:
    """L2 projection of a scalar function onto P1 via 4-pt Gauss pairing."""
    return np.linalg.solve(mass_p1(mesh), pair_p1(mesh, func))


def pair_p1(mesh: BoundaryMesh, func) -> np.ndarray:
    """<f, psi_i> with per-panel Gauss (panel normal passed to func)."""
    xg, wg = np.polynomial.legendre.leggauss(4)
    u = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    a = mesh.nodes[mesh.panels[:, 0]]
    d = mesh.nodes[mesh.panels[:, 1]] - a
    x = a[:, None, :] + u[None, :, None] * d[:, None, :]
    f = func(x, mesh.panel_normals[:, None, :])             # (P, q)
    out = np.zeros(mesh.n_nodes, dtype=np.result_type(f, float))
    wl = w[None, :] * mesh.panel_lengths[:, None]
    np.add.at(out, mesh.panels[:, 0], (f * wl * (1.0 - u)).sum(axis=1))
    np.add.at(out, mesh.panels[:, 1], (f * wl * u).sum(axis=1))
    return out


def pair_vp1(mesh: BoundaryMesh, func) -> np.ndarray:
    """<f, w_j> for vector P1 tests; func(x, nu) -> (..., 2)."""
    xg, wg = np.polynomial.legendre.leggauss(4)
    u = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    a = mesh.nodes[mesh.panels[:, 0]]
    d = mesh.nodes[mesh.panels[:, 1]] - a
    x = a[:, None, :] + u[None, :, None] * d[:, None, :]
    f = func(x, mesh.panel_normals[:, None, :])             # (P, q, 2)
    out = np.zeros(2 * mesh.n_nodes, dtype=np.result_type(f, float))
    wl = w[None, :] * mesh.panel_lengths[:, None]
    for comp in range(2):
        np.add.at(out, 2 * mesh.panels[:, 0] + comp,
                  (f[..., comp] * wl * (1.0 - u)).sum(axis=1))
        np.add.at(out, 2 * mesh.panels[:, 1] + comp,
                  (f[..., comp] * wl * u).sum(axis=1))
    return out


def project_vp1(mesh: BoundaryMesh, func) -> np.ndarray:
    return np.linalg.solve(mass_vp1(mesh), pair_vp1(mesh, func))


# ------------------------------------------------------------- potentials
Q_EVAL = 8


def potential_matrix(mesh: BoundaryMesh, points, kernel, needs, trial: Family,
                     eta=None, ep=None):
    """(npts x ndof) evaluation matrix of a layer potential at off-surface points."""
    points = np.atleast_2d(points)
    xg, wg = np.polynomial.legendre.leggauss(Q_EVAL)
    u = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    P = mesh.n_panels
    a = mesh.nodes[mesh.panels[:, 0]]
    d = mesh.nodes[mesh.panels[:, 1]] - a
    y = (a[:, None, :] + u[None, :, None] * d[:, None, :]).reshape(P * Q_EVAL, 2)
    wy = (w[None, :] * mesh.panel_lengths[:, None]).reshape(P * Q_EVAL)
    nuy = np.repeat(mesh.panel_normals, Q_EVAL, axis=0)
    tauy = np.repeat(mesh.panel_tangents, Q_EVAL, axis=0)
    diff = points[:, None, :] - y[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    rhat = diff / r[..., None]
    g = kn.GeomScalars(r, rhat, None, nuy[None, :, :])
    cache = _caches({needs} if needs else set(), r, eta, ep)
    panels = np.arange(P)
    uu = np.broadcast_to(u, (P, Q_EVAL))
    vals = trial.values(panels, uu)
    dofs = trial.dofs(panels)
    npts = len(points)
    if trial.scalar:
        K = kernel(g, cache)
        K = np.broadcast_to(K, r.shape)
        data = (vals * wy.reshape(P, Q_EVAL, 1)).reshape(P * Q_EVAL, trial.nslots)
        rows = np.repeat(dofs[:, None, :], Q_EVAL, axis=1).reshape(-1, trial.nslots)
        S = sp.csr_matrix((data.ravel(),
                           (np.repeat(np.arange(P * Q_EVAL), trial.nslots), rows.ravel())),
                          shape=(P * Q_EVAL, trial.ndof))
        return S.T.dot(K.T).T
    # vector trial: result rows are (pt, component at x)
    Svals = vals * wy.reshape(P, Q_EVAL, 1, 1)
    Svals = Svals.reshape(P * Q_EVAL, trial.nslots, 2)
    rows = np.repeat(dofs[:, None, :], Q_EVAL, axis=1).reshape(-1, trial.nslots)
    res = np.zeros((npts, 2, trial.ndof), dtype=complex)
    for dcomp in range(2):
        S = sp.csr_matrix((Svals[..., dcomp].ravel(),
                           (np.repeat(np.arange(P * Q_EVAL), trial.nslots), rows.ravel())),
                          shape=(P * Q_EVAL, trial.ndof))
        for ccomp in range(2):
            K = kernel.comp(ccomp, dcomp, g, cache)
            res[:, ccomp, :] += S.T.dot(K.T).T
    return res
