import numpy as np
import pytest

from wavestruct import assembly as asm
from wavestruct import bie, geometry
from wavestruct.materials import DISK_STUDY

MAT = DISK_STUDY


@pytest.fixture(scope="module")
def sys40():
    mesh = geometry.circle_boundary(1.0, 40)
    return mesh, bie.assemble_bie_system(mesh, 3.0 + 2.0j, MAT)


def test_blockwise_reconstruction(sys40):
    mesh, system = sys40
    s = system.s
    rf = MAT.rho_fluid
    n_s = mesh.n_nodes
    n_v = 2 * n_s
    B = system.blocks
    # top-left equals W_el + rho_f s^2 N^t V(s/c) N assembled from parts
    Wel = asm.assemble_elastic_block("W", mesh, "P1_vector", "P1_vector", s, MAT).matrix
    tl = Wel + rf * s**2 * B["Vac_nn"]
    got = system.lhs[:n_v, :n_v]
    assert np.max(np.abs(got - tl)) <= 1e-12 * np.max(np.abs(got))
    # bottom-right equals (rho_f s)^2 N V_el N^t + rho_f W(s/c)
    Wac = asm.assemble_acoustic_block("W", mesh, "P1_continuous", "P1_continuous",
                                      s / MAT.sound_speed).matrix
    br = (rf * s) ** 2 * B["Vel_nn"] + rf * Wac
    got = system.lhs[n_v:, n_v:]
    assert np.max(np.abs(got - br)) <= 1e-12 * np.max(np.abs(got))


def test_skew_block_structure(sys40):
    # L12 = -L21^T exactly (adjoint pairing with symmetric quadrature)
    mesh, system = sys40
    n_v = 2 * mesh.n_nodes
    L12 = system.lhs[:n_v, n_v:]
    L21 = system.lhs[n_v:, :n_v]
    scale = np.max(np.abs(system.lhs))
    assert np.max(np.abs(L12 + L21.T)) <= 1e-12 * scale
    # diagonal blocks complex-symmetric
    L11 = system.lhs[:n_v, :n_v]
    L22 = system.lhs[n_v:, n_v:]
    assert np.max(np.abs(L11 - L11.T)) <= 1e-12 * scale
    assert np.max(np.abs(L22 - L22.T)) <= 1e-12 * scale


def test_rho_f_zero_decouples():
    from dataclasses import replace

    mesh = geometry.circle_boundary(1.0, 24)
    mat0 = replace(MAT, rho_fluid=1e-30)   # limit rho_f -> 0
    system = bie.assemble_bie_system(mesh, 2.0 + 1.0j, mat0)
    n_v = 2 * mesh.n_nodes
    Wel = asm.assemble_elastic_block("W", mesh, "P1_vector", "P1_vector",
                                     system.s, mat0).matrix
    scale = np.max(np.abs(Wel))
    assert np.max(np.abs(system.lhs[:n_v, :n_v] - Wel)) <= 1e-12 * scale
    assert np.max(np.abs(system.lhs[:n_v, n_v:])) <= 1e-12 * scale
    assert np.max(np.abs(system.lhs[n_v:, :n_v])) <= 1e-12 * scale
    assert np.max(np.abs(system.lhs[n_v:, n_v:])) <= 1e-12 * scale


def test_conjugation_symmetry_of_system():
    mesh = geometry.circle_boundary(1.0, 24)
    s = 1.3 + 2.1j
    A = bie.assemble_bie_system(mesh, s, MAT)
    B = bie.assemble_bie_system(mesh, np.conj(s), MAT)
    assert np.max(np.abs(B.lhs - np.conj(A.lhs))) <= 1e-12 * np.max(np.abs(A.lhs))
    assert np.max(np.abs(B.rhs_map - np.conj(A.rhs_map))) <= 1e-12 * np.max(np.abs(A.rhs_map))


def test_zero_data_zero_solution(sys40):
    mesh, system = sys40
    lam0 = np.zeros(mesh.n_nodes)
    g0 = np.zeros(2 * mesh.n_nodes)
    phi_sig, phi_f = bie.solve_bie_frequency(system, (lam0, g0))
    assert np.all(phi_sig == 0) and np.all(phi_f == 0)


def test_solver_residual_contract(sys40):
    mesh, system = sys40
    rng = np.random.default_rng(7)
    lam0 = rng.normal(size=mesh.n_nodes)
    g0 = rng.normal(size=2 * mesh.n_nodes)
    phi_sig, phi_f = bie.solve_bie_frequency(system, (lam0, g0))
    x = np.concatenate([phi_sig, phi_f])
    rhs = system.rhs_map @ np.concatenate([lam0, g0])
    res = np.linalg.norm(system.lhs @ x - rhs) / np.linalg.norm(rhs)
    assert res <= 1e-10


def test_conjugate_solution_symmetry():
    mesh = geometry.circle_boundary(1.0, 24)
    s = 2.0 + 1.5j
    rng = np.random.default_rng(3)
    lam0 = rng.normal(size=mesh.n_nodes)
    g0 = rng.normal(size=2 * mesh.n_nodes)
    xa = np.concatenate(bie.solve_bie_frequency(
        bie.assemble_bie_system(mesh, s, MAT), (lam0, g0)))
    xb = np.concatenate(bie.solve_bie_frequency(
        bie.assemble_bie_system(mesh, np.conj(s), MAT), (lam0, g0)))
    assert np.max(np.abs(xb - np.conj(xa))) <= 1e-10 * np.max(np.abs(xa))


def test_evaluate_fields_zero_everything(sys40):
    mesh, system = sys40
    z = np.zeros(mesh.n_nodes)
    zv = np.zeros(2 * mesh.n_nodes)
    u, v = bie.evaluate_fields(zv, z, (z, zv), system.s, MAT, mesh,
                               interior_points=np.array([[0.2, 0.1]]),
                               exterior_points=np.array([[2.0, 0.5]]))
    assert np.all(u == 0) and np.all(v == 0)


def test_evaluate_fields_near_singular_guard(sys40):
    mesh, system = sys40
    z = np.zeros(mesh.n_nodes)
    zv = np.zeros(2 * mesh.n_nodes)
    with pytest.raises(bie.NearSingularError):
        bie.evaluate_fields(zv, z, (z, zv), system.s, MAT, mesh,
                            interior_points=np.array([[0.999, 0.0]]))
