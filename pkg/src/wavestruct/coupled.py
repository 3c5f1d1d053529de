"""Coupled interior-FEM / boundary-BEM system for the rectangle scatterer.

Per frequency, the Galerkin system in (u, phi, lambda) reads

    A(s) u + s rho_f G phi                                   = F1
    -s G^T u + W(s/c) phi + (-1/2 B + Kt(s/c)) lambda        = F2
    (1/2 B^T - K(s/c)) phi + V(s/c) lambda                   = 0

with A(s) = K_stiff + s^2 M (sparse), G the trace-normal coupling, B the
P1 x P0 duality, and the acoustic boundary blocks at eta = s/c.  Data enter as
tested pairings: F1 = <g0, gamma w>, F2 = <lam0, psi>.  The solve eliminates u
through the sparse factorization of A(s) (monolithic solution, realized by
exact block elimination).  The exterior field is v = D(s/c) phi - S(s/c) lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assembly as asm
from . import fem
from .bie import SolveError, _check_distance
from .geometry import BoundaryMesh, TriMesh
from .materials import MaterialParams


@dataclass
class CoupledSystem:
    s: complex
    trimesh: TriMesh
    bmesh: BoundaryMesh
    mat: MaterialParams
    K_stiff: sp.spmatrix
    M: sp.spmatrix
    A: sp.spmatrix             # K + s^2 M
    G: sp.spmatrix             # trace-normal coupling (2V x N_s)
    W: np.ndarray              # acoustic blocks at s/c
    K: np.ndarray              # (N_p x N_s)
    Kt: np.ndarray             # (N_s x N_p)
    V: np.ndarray              # (N_p x N_p)
    B: np.ndarray              # P1 x P0 duality
    _lu: object = None

    def block_matrix(self) -> sp.spmatrix:
        """Full sparse block matrix over (u, phi, lam); for tests/residuals."""
        rf = self.mat.rho_fluid
        s = self.s
        Ct = -0.5 * self.B + self.Kt
        Ck = 0.5 * self.B.T - self.K
        return sp.bmat([
            [self.A, rf * s * self.G, None],
            [-s * self.G.T, sp.csr_matrix(self.W), sp.csr_matrix(Ct)],
            [None, sp.csr_matrix(Ck), sp.csr_matrix(self.V)],
        ], format="csr")

    def lu(self):
        if self._lu is None:
            self._lu = spla.splu(self.A.tocsc())
        return self._lu


def assemble_coupled_system(s: complex, trimesh: TriMesh, bmesh: BoundaryMesh,
                            mat_field, mat: MaterialParams) -> CoupledSystem:
    s = complex(s)
    if s.real <= 0:
        raise asm.AssemblyError("need Re s > 0")
    eta = s / mat.sound_speed
    K_stiff, M, A = fem.assemble_elastic_fem(trimesh, mat_field, s)
    G = fem.assemble_trace_normal_coupling(trimesh, bmesh)

    p1 = asm.P1(bmesh)
    p0 = asm.P0(bmesh)
    dp1 = asm.DP1(bmesh)
    kV, nV = asm.make_kernel("V_ac", eta=eta)
    kK, nK = asm.make_kernel("K_ac", eta=eta)
    kKt, nKt = asm.make_kernel("Kt_ac", eta=eta)
    kWm, nWm = asm.make_kernel("W_ac_mass", eta=eta)
    jobs = [
        asm.Job(kV, nV, dp1, dp1, 1.0, "W"),
        asm.Job(kWm, nWm, p1, p1, 1.0, "W"),
        asm.Job(kKt, nKt, p1, p0, 1.0, "Kt"),
        asm.Job(kK, nK, p0, p1, 1.0, "K"),
        asm.Job(kV, nV, p0, p0, 1.0, "V"),
    ]
    pq = asm.panel_quadrature(bmesh)
    blocks = asm.assemble_jobs(pq, jobs, eta=eta)
    B = asm.duality_p1_p0(bmesh)
    return CoupledSystem(s, trimesh, bmesh, mat, K_stiff, M, A, G,
                         blocks["W"], blocks["K"], blocks["Kt"], blocks["V"], B)


def solve_coupled_frequency(system: CoupledSystem, data, check_residual=True):
    """Solve for (u, phi, lam); data = (F2 = <lam0, psi>, F1 = <g0, gamma w>),
    F1 given on the boundary vector-P1 dofs (injected to FEM dofs inside)."""
    F2, F1b = data
    s = system.s
    rf = system.mat.rho_fluid
    T = fem.boundary_trace_map(system.trimesh, system.bmesh)
    F1 = T.T @ np.asarray(F1b, dtype=complex)
    F2 = np.asarray(F2, dtype=complex)
    lu = system.lu()
    Gd = system.G.toarray().astype(complex)
    AinvG = lu.solve(Gd)
    AinvF1 = lu.solve(F1)
    n_s = system.bmesh.n_nodes
    n_p = system.bmesh.n_panels
    Ct = -0.5 * system.B + system.Kt
    Ck = 0.5 * system.B.T - system.K
    S11 = system.W + rf * s**2 * (system.G.T @ AinvG)
    top = np.concatenate([F2 + s * (system.G.T @ AinvF1), np.zeros(n_p, dtype=complex)])
    lhs = np.block([[S11, Ct], [Ck, system.V]])
    try:
        sol = np.linalg.solve(lhs, top)
    except np.linalg.LinAlgError as exc:
        raise SolveError(f"singular coupled system at s={s}", s,
                         np.linalg.cond(lhs, 1)) from exc
    phi = sol[:n_s]
    lam = sol[n_s:]
    u = AinvF1 - rf * s * (AinvG @ phi)
    if check_residual:
        x = np.concatenate([u, phi, lam])
        b = np.concatenate([F1, F2, np.zeros(n_p, dtype=complex)])
        nb = np.linalg.norm(b)
        if nb > 0:
            res = np.linalg.norm(system.block_matrix() @ x - b) / nb
            if res > 1e-10:
                import warnings

                warnings.warn(f"coupled solve at s={s}: residual {res:.2e}")
    return u, phi, lam


def evaluate_exterior(phi, lam, s: complex, mat: MaterialParams,
                      bmesh: BoundaryMesh, points):
    """v = D(s/c) phi - S(s/c) lam at exterior points."""
    _check_distance(bmesh, points)
    eta = complex(s) / mat.sound_speed
    kV, nV = asm.make_kernel("V_ac", eta=eta)
    kD, nD = asm.make_kernel("D_ac", eta=eta)
    Dp = asm.potential_matrix(bmesh, points, kD, nD, asm.P1(bmesh), eta=eta)
    Sp = asm.potential_matrix(bmesh, points, kV, nV, asm.P0(bmesh), eta=eta)
    return Dp @ np.asarray(phi, dtype=complex) - Sp @ np.asarray(lam, dtype=complex)
