"""Panel-pair quadrature for Galerkin boundary-operator assembly.

Pair classes and rules:

* far       : tensor Gauss (Q_FAR per panel) on the full panel-product grid,
              with self/adjacent/near blocks masked out;
* near      : non-touching pairs closer than ~1.5 panel lengths, integrated on
              a 3x3 subdivision with tensor Gauss;
* adjacent  : pairs sharing one node, Duffy transform toward the shared corner
              with geometrically graded cells in the radial variable;
* self      : diagonal reduction w = u - v with both orderings kept (exactly
              symmetric under panel-exchange, which also realizes CPV kernels),
              geometrically graded cells in w.

The grading resolves both the log singularity and the exp(-Re(s) r / c)
boundary layers of large-|s| CQ frequencies.  All rules are symmetric under
exchange of the two panels, so V/W blocks come out exactly complex-symmetric
and Kt exactly equals K^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryMesh

Q_FAR = 6
NEAR_FACTOR = 1.5
NEAR_SUBDIV = 3
Q_NEAR = 5
GRADE_RATIO = 0.15
GRADE_LEVELS = 10
Q_SING = 6          # radial variable (w or xi)
Q_REG = 4           # regular variable (m or eta)


def gauss01(q):
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def graded_cells(ratio=GRADE_RATIO, levels=GRADE_LEVELS):
    """Geometric cells (lo_k, hi_k) covering (ratio^levels, 1]."""
    edges = ratio ** np.arange(levels + 1)
    return edges[1:], edges[:-1]


def _self_reference():
    """Reference nodes (u, v, wt) for the self-pair rule on [0,1]^2.

    int_0^1 int_0^1 F du dv = int_0^1 dw int_0^{1-w} [F(m+w, m) + F(m, m+w)] dm
    with graded cells in w.  Weights contain the (1-w) Jacobian of m-scaling.
    """
    xg, wg = gauss01(Q_SING)
    xm, wm = gauss01(Q_REG)
    lo, hi = graded_cells()
    us, vs, ws = [], [], []
    for a, b in zip(lo, hi):
        w = a + (b - a) * xg                    # (qs,)
        ww = (b - a) * wg
        m = (1.0 - w)[:, None] * xm[None, :]    # (qs, qm)
        wm2 = (1.0 - w)[:, None] * wm[None, :] * ww[:, None]
        u1 = m + w[:, None]
        v1 = m
        us.append(u1.ravel()); vs.append(v1.ravel()); ws.append(wm2.ravel())
        us.append(v1.ravel()); vs.append(u1.ravel()); ws.append(wm2.ravel())
    return np.concatenate(us), np.concatenate(vs), np.concatenate(ws)


def _adjacent_reference():
    """Duffy nodes (u, v, wt) on [0,1]^2, singular corner at (0,0).

    Split into u >= v and v >= u; on each, (u,v) = (xi, xi*eta) with graded
    cells in xi; weight contains the Duffy Jacobian xi.
    """
    xg, wg = gauss01(Q_SING)
    xe, we = gauss01(Q_REG)
    lo, hi = graded_cells()
    us, vs, ws = [], [], []
    for a, b in zip(lo, hi):
        xi = a + (b - a) * xg
        wxi = (b - a) * wg
        eta = xe
        u = np.repeat(xi, len(eta))
        v = (xi[:, None] * eta[None, :]).ravel()
        wt = (wxi[:, None] * we[None, :] * xi[:, None]).ravel()
        us.append(u); vs.append(v); ws.append(wt)
        us.append(v); vs.append(u); ws.append(wt)
    return np.concatenate(us), np.concatenate(vs), np.concatenate(ws)


def _near_reference():
    """Subdivided tensor rule on [0,1]^2 for close but disjoint panels."""
    xg, wg = gauss01(Q_NEAR)
    n = NEAR_SUBDIV
    u1 = (np.arange(n)[:, None] + xg[None, :]).ravel() / n
    w1 = np.tile(wg / n, n)
    u = np.repeat(u1, len(u1))
    v = np.tile(u1, len(u1))
    wt = np.outer(w1, w1).ravel()
    return u, v, wt


_SELF_REF = _self_reference()
_ADJ_REF = _adjacent_reference()
_NEAR_REF = _near_reference()


def segment_distance(a0, a1, b0, b1):
    """Min distance between segments [a0,a1], [b0,b1] (vectorized pairs)."""
    def pt_seg(p, s0, s1):
        d = s1 - s0
        t = np.einsum("...k,...k->...", p - s0, d) / np.einsum("...k,...k->...", d, d)
        t = np.clip(t, 0.0, 1.0)
        proj = s0 + t[..., None] * d
        return np.linalg.norm(p - proj, axis=-1)

    return np.minimum.reduce([
        pt_seg(a0, b0, b1), pt_seg(a1, b0, b1),
        pt_seg(b0, a0, a1), pt_seg(b1, a0, a1),
    ])


@dataclass
class PairClass:
    """One singular-quadrature pair class, fully precomputed in space."""

    p_idx: np.ndarray       # (npairs,) x-panel index
    q_idx: np.ndarray       # (npairs,) y-panel index
    x: np.ndarray           # (npairs, n, 2) quadrature points on x panel
    y: np.ndarray           # (npairs, n, 2)
    wt: np.ndarray          # (npairs, n) weights incl. both Jacobians
    u: np.ndarray           # (npairs, n) x-panel parameter in [0,1]
    v: np.ndarray           # (npairs, n) y-panel parameter
    r: np.ndarray           # (npairs, n)
    rhat: np.ndarray        # (npairs, n, 2)

    def __post_init__(self):
        self.cache = {}     # per-class memo (family values, geometry scalars)

    def family_values(self, fam, side):
        """Cached shape values/dofs of a family on this class (geometry-only)."""
        key = (type(fam).__name__, side)
        out = self.cache.get(key)
        if out is None:
            if side == "test":
                out = (fam.values(self.p_idx[:, None], self.u), fam.dofs(self.p_idx))
            else:
                out = (fam.values(self.q_idx[:, None], self.v), fam.dofs(self.q_idx))
            self.cache[key] = out
        return out


class PanelQuadrature:
    """All geometric quadrature data for one BoundaryMesh."""

    def __init__(self, mesh: BoundaryMesh):
        self.mesh = mesh
        P = mesh.n_panels
        a = mesh.nodes[mesh.panels[:, 0]]
        b = mesh.nodes[mesh.panels[:, 1]]
        d = b - a
        self.a, self.d = a, d
        self.L = mesh.panel_lengths
        self.nu = mesh.panel_normals
        self.tau = mesh.panel_tangents

        # ---------------- far grids (built lazily per Gauss order)
        self._far = {}

        # ---------------- pair classification
        shared = np.zeros((P, P), dtype=bool)
        n0, n1 = mesh.panels[:, 0], mesh.panels[:, 1]
        for pa in range(P):
            shared[pa] = (n0 == n0[pa]) | (n0 == n1[pa]) | (n1 == n0[pa]) | (n1 == n1[pa])
        np.fill_diagonal(shared, False)

        ii, jj = np.meshgrid(np.arange(P), np.arange(P), indexing="ij")
        dist = segment_distance(a[ii], (a + d)[ii], a[jj], (a + d)[jj])
        lmax = np.maximum(self.L[ii], self.L[jj])
        near_mask = (dist <= NEAR_FACTOR * lmax) & ~shared & (ii != jj)

        self.excluded = np.zeros((P, P), dtype=bool)
        self.excluded |= shared
        self.excluded |= near_mask
        np.fill_diagonal(self.excluded, True)

        self.cls_self = self._build_self()
        self.cls_adj = self._build_adjacent(shared)
        self.cls_near = self._build_near(near_mask)

    # ------------------------------------------------------------------
    def far_grid(self, q):
        """(u, x, w) far-grid data at Gauss order q: x (P, q, 2), w (P, q)."""
        if q not in self._far:
            xg, wg = gauss01(q)
            x = self.a[:, None, :] + xg[None, :, None] * self.d[:, None, :]
            w = wg[None, :] * self.L[:, None]
            self._far[q] = (xg, x, w)
        return self._far[q]

    def far_order(self, max_im_eta) -> int:
        """Gauss order for separated pairs, set by the worst per-panel phase."""
        phase = float(max_im_eta) * float(self.L.max())
        for q, limit in ((3, 0.8), (4, 1.6), (5, 2.6), (6, 3.6)):
            if phase <= limit:
                return q
        return 8

    # ------------------------------------------------------------------
    def _pointset(self, p_idx, q_idx, u, v, wt_ref):
        x = self.a[p_idx][:, None, :] + u[..., None] * self.d[p_idx][:, None, :]
        y = self.a[q_idx][:, None, :] + v[..., None] * self.d[q_idx][:, None, :]
        wt = wt_ref * (self.L[p_idx] * self.L[q_idx])[:, None]
        diff = x - y
        r = np.linalg.norm(diff, axis=-1)
        rhat = diff / r[..., None]
        return PairClass(p_idx, q_idx, x, y, wt, u, v, r, rhat)

    def _build_self(self):
        u, v, w = _SELF_REF
        P = self.mesh.n_panels
        p_idx = np.arange(P)
        uu = np.broadcast_to(u, (P, len(u))).copy()
        vv = np.broadcast_to(v, (P, len(v))).copy()
        wt = np.broadcast_to(w, (P, len(w))).copy()
        return self._pointset(p_idx, p_idx, uu, vv, wt)

    def _build_adjacent(self, shared):
        mesh = self.mesh
        pairs = np.argwhere(shared)
        if len(pairs) == 0:
            return None
        u0, v0, w0 = _ADJ_REF
        ulist, vlist = [], []
        for p, q in pairs:
            # parameter measured from the shared node on each panel
            if mesh.panels[p, 0] in mesh.panels[q]:
                up = u0          # shared node is start of p
            else:
                up = 1.0 - u0
            if mesh.panels[q, 0] in mesh.panels[p]:
                vq = v0
            else:
                vq = 1.0 - v0
            ulist.append(up)
            vlist.append(vq)
        u = np.stack(ulist)
        v = np.stack(vlist)
        wt = np.broadcast_to(w0, u.shape).copy()
        return self._pointset(pairs[:, 0], pairs[:, 1], u, v, wt)

    def _build_near(self, near_mask):
        pairs = np.argwhere(near_mask)
        if len(pairs) == 0:
            return None
        u0, v0, w0 = _NEAR_REF
        n = len(pairs)
        u = np.broadcast_to(u0, (n, len(u0))).copy()
        v = np.broadcast_to(v0, (n, len(v0))).copy()
        wt = np.broadcast_to(w0, (n, len(w0))).copy()
        return self._pointset(pairs[:, 0], pairs[:, 1], u, v, wt)

    def classes(self):
        out = [self.cls_self]
        if self.cls_adj is not None:
            out.append(self.cls_adj)
        if self.cls_near is not None:
            out.append(self.cls_near)
        return out
