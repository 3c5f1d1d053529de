"""Vector P1 finite elements for the interior elastodynamic form.

a(u, w; s) = (sigma(u), eps(w)) + s^2 (rho u, w) on the triangulated solid;
exact per-triangle integration (closed form), consistent mass.  Dof layout is
interleaved: vertex v owns dofs (2v, 2v+1), matching the boundary vector-P1
layout through the boundary vertex loop.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .geometry import BoundaryMesh, TriMesh, boundary_vertex_loop
from .materials import MaterialParams


class InterfaceError(ValueError):
    pass


def _fields(tm: TriMesh, mat_field):
    nt = tm.n_triangles
    if isinstance(mat_field, MaterialParams):
        lam = np.full(nt, mat_field.lame_lambda)
        mu = np.full(nt, mat_field.lame_mu)
        rho = np.full(nt, mat_field.rho_solid)
        return lam, mu, rho
    lam = np.broadcast_to(np.asarray(mat_field["lam"], dtype=float), (nt,))
    mu = np.broadcast_to(np.asarray(mat_field["mu"], dtype=float), (nt,))
    rho = np.broadcast_to(np.asarray(mat_field["rho"], dtype=float), (nt,))
    if np.any(mu <= 0) or np.any(lam + mu <= 0) or np.any(rho <= 0):
        raise ValueError("invalid per-triangle material field")
    return lam, mu, rho


def assemble_elastic_fem(tm: TriMesh, mat_field, s: complex):
    """(K_stiff, M, A(s) = K + s^2 M): sparse real K (PSD, kernel = rigid
    motions), sparse real SPD consistent mass M."""
    lam, mu, rho = _fields(tm, mat_field)
    areas = tm.areas()
    v = tm.vertices
    t = tm.triangles
    nv = tm.n_vertices

    rows, cols, kvals, mvals = [], [], [], []
    mloc_scalar = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    for e in range(tm.n_triangles):
        vid = t[e]
        x = v[vid]
        # gradients of the barycentric shapes
        mat = np.array([[x[1, 0] - x[0, 0], x[2, 0] - x[0, 0]],
                        [x[1, 1] - x[0, 1], x[2, 1] - x[0, 1]]])
        inv = np.linalg.inv(mat)
        grads = np.zeros((3, 2))
        grads[1] = inv[0]
        grads[2] = inv[1]
        grads[0] = -grads[1] - grads[2]
        A = areas[e]
        # Voigt B matrix: [eps11, eps22, 2 eps12] = B u_local (u interleaved)
        B = np.zeros((3, 6))
        for i in range(3):
            B[0, 2 * i] = grads[i, 0]
            B[1, 2 * i + 1] = grads[i, 1]
            B[2, 2 * i] = grads[i, 1]
            B[2, 2 * i + 1] = grads[i, 0]
        D = np.array([[lam[e] + 2 * mu[e], lam[e], 0.0],
                      [lam[e], lam[e] + 2 * mu[e], 0.0],
                      [0.0, 0.0, mu[e]]])
        Ke = A * B.T @ D @ B
        Me = rho[e] * A * np.kron(mloc_scalar, np.eye(2))
        dofs = np.concatenate([[2 * vi, 2 * vi + 1] for vi in vid])
        rr, cc = np.meshgrid(dofs, dofs, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        kvals.append(Ke.ravel())
        mvals.append(Me.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    K = sp.csr_matrix((np.concatenate(kvals), (rows, cols)), shape=(2 * nv, 2 * nv))
    M = sp.csr_matrix((np.concatenate(mvals), (rows, cols)), shape=(2 * nv, 2 * nv))
    A = (K + complex(s) ** 2 * M).tocsc()
    return K, M, A


def assemble_trace_normal_coupling(tm: TriMesh, bmesh: BoundaryMesh):
    """G[i, j] = <psi_j, gamma(w_i) . nu>_Gamma, rows FEM dofs, cols boundary
    scalar P1 dofs; nonzero only for boundary-adjacent FEM dofs."""
    loop = boundary_vertex_loop(tm)
    if len(loop) != bmesh.n_panels:
        raise InterfaceError("boundary mesh does not conform to the triangulation")
    if not np.allclose(tm.vertices[loop], bmesh.nodes):
        raise InterfaceError("boundary nodes do not match the triangulation loop")
    nv = tm.n_vertices
    n_s = bmesh.n_nodes
    rows, cols, vals = [], [], []
    n = bmesh.n_panels
    for p in range(n):
        a, b = p, (p + 1) % n                  # boundary node ids of panel p
        va, vb = loop[a], loop[b]              # FEM vertex ids
        L = bmesh.panel_lengths[p]
        nu = bmesh.panel_normals[p]
        for (vert, bn, w_same, w_other) in ((va, a, L / 3.0, L / 6.0),
                                            (vb, b, L / 3.0, L / 6.0)):
            other = b if vert == va else a
            for c in range(2):
                rows.extend([2 * vert + c, 2 * vert + c])
                cols.extend([bn, other])
                vals.extend([nu[c] * w_same, nu[c] * w_other])
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * nv, n_s))


def boundary_trace_map(tm: TriMesh, bmesh: BoundaryMesh):
    """Sparse restriction T (2 N_b x 2 V): boundary vector-P1 coefficients of
    the FEM trace (the trace of vertex-based P1 is the boundary P1 itself)."""
    loop = boundary_vertex_loop(tm)
    n_b = bmesh.n_nodes
    rows = np.arange(2 * n_b)
    cols = np.empty(2 * n_b, dtype=int)
    cols[0::2] = 2 * loop
    cols[1::2] = 2 * loop + 1
    return sp.csr_matrix((np.ones(2 * n_b), (rows, cols)),
                         shape=(2 * n_b, 2 * tm.n_vertices))
