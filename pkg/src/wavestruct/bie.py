"""The coupled boundary-integral system for the solid-fluid disk problem.

Unknowns per frequency: x = (phi_sig, phi_f) with phi_sig the solid boundary
displacement trace (vector P1, 2N dofs) and phi_f the exterior acoustic trace
(scalar P1, N dofs).  Data b = (lam0, g0) with lam0 the scalar Neumann-type
datum (P1 coefficients) and g0 the vector traction-type datum (vector P1).

The left-hand block operator is

    [ W_el(s) + rho_f s^2 N^t V(s/c) N ,  rho_f s (N^t K(s/c) - Kt_el(s) N^t) ]
    [ rho_f s (N K_el(s) - Kt(s/c) N)  ,  (rho_f s)^2 N V_el(s) N^t + rho_f W(s/c) ]

and the right-hand map (with the traction datum g0 := t(u) + rho_f gamma v' nu,
which reduces to -rho_f s N^t phi_0 for the normal datum of the pure model)

    row1 = -rho_f s N^t V(s/c) lam0 + (1/2 I - Kt_el(s)) g0
    row2 = rho_f (1/2 I + Kt(s/c)) lam0 + rho_f s N V_el(s) g0.

N / N^t compositions are assembled exactly through composed shape families.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assembly as asm
from . import kernels as kn
from .geometry import BoundaryMesh
from .materials import MaterialParams


class SolveError(RuntimeError):
    def __init__(self, msg, s=None, cond=None):
        super().__init__(msg)
        self.s = s
        self.cond = cond


@dataclass
class BieSystem:
    """Assembled frequency-domain BIE system L x = R b."""

    lhs: np.ndarray
    rhs_map: np.ndarray
    s: complex
    mesh: BoundaryMesh
    mat: MaterialParams
    blocks: dict


def _families(mesh):
    return dict(p1=asm.P1(mesh), dp1=asm.DP1(mesh), vp1=asm.VP1(mesh),
                dvp1=asm.DVP1(mesh), jdvp1=asm.JDVP1(mesh),
                p1n=asm.P1N(mesh), vdn=asm.VP1DotN(mesh))


def bie_operator_blocks(mesh: BoundaryMesh, s: complex, mat: MaterialParams) -> dict:
    """All Galerkin blocks needed by L(s) and R(s), in one assembly pass."""
    s = complex(s)
    eta = s / mat.sound_speed
    ep = kn.ElasticFrequency(s, mat.lame_lambda, mat.lame_mu, mat.rho_solid)
    f = _families(mesh)
    mu = mat.lame_mu

    kV, nV = asm.make_kernel("V_ac", eta=eta)
    kK, nK = asm.make_kernel("K_ac", eta=eta)
    kKt, nKt = asm.make_kernel("Kt_ac", eta=eta)
    kWm, nWm = asm.make_kernel("W_ac_mass", eta=eta)
    kVe, nVe = asm.make_kernel("V_el", ep=ep)
    kKe, nKe = asm.make_kernel("K_el_reg", ep=ep)
    kKte, nKte = asm.make_kernel("Kt_el_reg", ep=ep)
    kWb, nWb = asm.make_kernel("W_el_B", ep=ep)
    kWd, nWd = asm.make_kernel("W_el_delta", ep=ep)

    jobs = [
        # elastic hypersingular
        asm.Job(kWb, nWb, f["dvp1"], f["dvp1"], 1.0, "Wel"),
        asm.Job(kWd, nWd, f["vp1"], f["vp1"], 1.0, "Wel"),
        # acoustic hypersingular
        asm.Job(kV, nV, f["dp1"], f["dp1"], 1.0, "Wac"),
        asm.Job(kWm, nWm, f["p1"], f["p1"], 1.0, "Wac"),
        # N-composed acoustic blocks
        asm.Job(kV, nV, f["vdn"], f["vdn"], 1.0, "Vac_nn"),
        asm.Job(kK, nK, f["vdn"], f["p1"], 1.0, "Kac_n"),
        asm.Job(kKt, nKt, f["p1"], f["vdn"], 1.0, "Ktac_n"),
        # elastic blocks against P1*nu densities
        asm.Job(kKte, nKte, f["vp1"], f["p1n"], 1.0, "Ktel_np"),
        asm.Job(kVe, nVe, f["jdvp1"], f["p1n"], mu, "Ktel_np"),
        asm.Job(kKe, nKe, f["p1n"], f["vp1"], 1.0, "Kel_n"),
        asm.Job(kVe, nVe, f["p1n"], f["jdvp1"], mu, "Kel_n"),
        asm.Job(kVe, nVe, f["p1n"], f["p1n"], 1.0, "Vel_nn"),
        # rhs blocks
        asm.Job(kV, nV, f["vdn"], f["p1"], 1.0, "Vac_np"),
        asm.Job(kKte, nKte, f["vp1"], f["vp1"], 1.0, "Ktel_vv"),
        asm.Job(kVe, nVe, f["jdvp1"], f["vp1"], mu, "Ktel_vv"),
        asm.Job(kKt, nKt, f["p1"], f["p1"], 1.0, "Ktac_pp"),
        asm.Job(kVe, nVe, f["p1n"], f["vp1"], 1.0, "Vel_nv"),
    ]
    pq = asm.panel_quadrature(mesh)
    out = asm.assemble_jobs(pq, jobs, eta=eta, ep=ep)
    # adjoint pairs are exact transposes under the symmetric quadrature
    out["Kel_n"] = out["Ktel_np"].T.copy()
    out["Ktac_n"] = out["Kac_n"].T.copy()
    return out


def assemble_bie_system(mesh: BoundaryMesh, s: complex,
                        mat: MaterialParams) -> BieSystem:
    """L(s), R(s) of the two-trace boundary integral system."""
    s = complex(s)
    if s.real <= 0:
        raise asm.AssemblyError("need Re s > 0")
    B = bie_operator_blocks(mesh, s, mat)
    rf = mat.rho_fluid
    n_s = mesh.n_nodes
    n_v = 2 * n_s
    Ms = asm.mass_p1(mesh)
    Mv = asm.mass_vp1(mesh)

    L = np.zeros((n_v + n_s, n_v + n_s), dtype=complex)
    L[:n_v, :n_v] = B["Wel"] + rf * s**2 * B["Vac_nn"]
    L[:n_v, n_v:] = rf * s * (B["Kac_n"] - B["Ktel_np"])
    L[n_v:, :n_v] = rf * s * (B["Kel_n"] - B["Ktac_n"])
    L[n_v:, n_v:] = (rf * s) ** 2 * B["Vel_nn"] + rf * B["Wac"]

    R = np.zeros((n_v + n_s, n_s + n_v), dtype=complex)
    R[:n_v, :n_s] = -rf * s * B["Vac_np"]
    R[:n_v, n_s:] = 0.5 * Mv - B["Ktel_vv"]
    R[n_v:, :n_s] = rf * (0.5 * Ms + B["Ktac_pp"])
    R[n_v:, n_s:] = rf * s * B["Vel_nv"]
    return BieSystem(L, R, s, mesh, mat, B)


def solve_bie_frequency(system: BieSystem, data, check_residual=True):
    """Solve L x = R b; data = (lam0 coefficients, g0 coefficients)."""
    lam0, g0 = data
    b = np.concatenate([np.asarray(lam0, dtype=complex),
                        np.asarray(g0, dtype=complex)])
    rhs = system.rhs_map @ b
    try:
        x = np.linalg.solve(system.lhs, rhs)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(system.lhs, 1)
        raise SolveError(f"singular BIE matrix at s={system.s}", system.s, cond) from exc
    if check_residual:
        nb = np.linalg.norm(rhs)
        if nb > 0:
            res = np.linalg.norm(system.lhs @ x - rhs) / nb
            if res > 1e-10:
                cond = np.linalg.cond(system.lhs, 1)
                if cond > 1e12:
                    import warnings

                    warnings.warn(f"BIE solve at s={system.s}: residual {res:.2e}, "
                                  f"cond estimate {cond:.2e}")
    n_v = 2 * system.mesh.n_nodes
    return x[:n_v], x[n_v:]


class NearSingularError(ValueError):
    pass


def _check_distance(mesh, points):
    points = np.atleast_2d(points)
    hmin = mesh.panel_lengths.min()
    a = mesh.nodes[mesh.panels[:, 0]]
    d = mesh.nodes[mesh.panels[:, 1]] - a
    dd = np.einsum("pk,pk->p", d, d)
    for p in points:
        t = np.clip(np.einsum("pk,pk->p", p[None, :] - a, d) / dd, 0.0, 1.0)
        proj = a + t[:, None] * d
        dist = np.linalg.norm(p[None, :] - proj, axis=1).min()
        if dist < hmin:
            raise NearSingularError(f"evaluation point {p} closer than one panel "
                                    f"length ({dist:.3g} < {hmin:.3g})")


def evaluate_fields(phi_sig, phi_f, data, s, mat, mesh,
                    interior_points=None, exterior_points=None):
    """Representation formulas for the interior displacement u and exterior
    acoustic field v at points off the interface.

      u = S_el(s)[g0 - rho_f s nu phi_f] - D_el(s)[phi_sig]
      v = S(s/c)[lam0 + s (phi_sig . nu)] + D(s/c)[phi_f]
    """
    lam0, g0 = data
    s = complex(s)
    eta = s / mat.sound_speed
    ep = kn.ElasticFrequency(s, mat.lame_lambda, mat.lame_mu, mat.rho_solid)
    f = _families(mesh)
    rf = mat.rho_fluid
    u_vals = v_vals = None
    if interior_points is not None and len(interior_points):
        _check_distance(mesh, interior_points)
        kVe, nVe = asm.make_kernel("V_el", ep=ep)
        kDe, nDe = asm.make_kernel("D_el_full", ep=ep)
        S_v = asm.potential_matrix(mesh, interior_points, kVe, nVe, f["vp1"], ep=ep)
        S_n = asm.potential_matrix(mesh, interior_points, kVe, nVe, f["p1n"], ep=ep)
        D_v = asm.potential_matrix(mesh, interior_points, kDe, nDe, f["vp1"], ep=ep)
        u_vals = (np.einsum("pcj,j->pc", S_v, np.asarray(g0, dtype=complex))
                  - rf * s * np.einsum("pcj,j->pc", S_n, np.asarray(phi_f, dtype=complex))
                  - np.einsum("pcj,j->pc", D_v, np.asarray(phi_sig, dtype=complex)))
    if exterior_points is not None and len(exterior_points):
        _check_distance(mesh, exterior_points)
        kV, nV = asm.make_kernel("V_ac", eta=eta)
        kD, nD = asm.make_kernel("D_ac", eta=eta)
        Sp = asm.potential_matrix(mesh, exterior_points, kV, nV, f["p1"], eta=eta)
        Sn = asm.potential_matrix(mesh, exterior_points, kV, nV, f["vdn"], eta=eta)
        Dp = asm.potential_matrix(mesh, exterior_points, kD, nD, f["p1"], eta=eta)
        v_vals = (Sp @ np.asarray(lam0, dtype=complex)
                  + s * (Sn @ np.asarray(phi_sig, dtype=complex))
                  + Dp @ np.asarray(phi_f, dtype=complex))
    return u_vals, v_vals
