import numpy as np
import pytest
import scipy.sparse.linalg as spla

from wavestruct import fem, geometry
from wavestruct.materials import RECT_STUDY

MAT = RECT_STUDY


@pytest.fixture(scope="module")
def mesh_and_mats():
    tm, bm = geometry.triangulate_rectangle(1.0, 3.0, 1.0, 2.0, 12, 6)
    K, M, A = fem.assemble_elastic_fem(tm, MAT, 1.0 + 1.0j)
    return tm, bm, K, M


def nodal(tm, f):
    return np.stack([f(tm.vertices[:, 0], tm.vertices[:, 1])[0],
                     f(tm.vertices[:, 0], tm.vertices[:, 1])[1]], axis=1).ravel()


def test_rigid_motions_in_kernel(mesh_and_mats):
    tm, bm, K, M = mesh_and_mats
    scale = abs(K).max()
    for f in (lambda x, y: (np.ones_like(x), np.zeros_like(y)),
              lambda x, y: (np.zeros_like(x), np.ones_like(y)),
              lambda x, y: (-y, x)):
        m = nodal(tm, f)
        assert np.max(np.abs(K @ m)) <= 1e-12 * scale * np.max(np.abs(m))


def test_kernel_is_exactly_three_dimensional():
    tm, _ = geometry.triangulate_rectangle(0.0, 1.0, 0.0, 1.0, 4, 4)
    K, M, _ = fem.assemble_elastic_fem(tm, MAT, 1.0)
    w = np.linalg.eigvalsh(K.toarray())
    assert np.all(w[:3] <= 1e-10 * w[-1])
    assert w[3] > 1e-6 * w[-1]


def test_mass_spd(mesh_and_mats):
    tm, bm, K, M = mesh_and_mats
    w = spla.eigsh(M, k=1, which="SA", return_eigenvectors=False)
    assert w[0] > 0
    ones = np.zeros(2 * tm.n_vertices)
    ones[0::2] = 1.0
    assert ones @ (M @ ones) == pytest.approx(MAT.rho_solid * 2.0, rel=1e-12)


def test_energy_identity(mesh_and_mats):
    # Re(conj(s) z* A(s) z) = sigma (z* K z + |s|^2 z* M z) exactly
    tm, bm, K, M = mesh_and_mats
    rng = np.random.default_rng(0)
    for _ in range(25):
        s = complex(rng.uniform(0.1, 3.0), rng.uniform(-5.0, 5.0))
        _, _, A = fem.assemble_elastic_fem(tm, MAT, s)
        z = rng.normal(size=2 * tm.n_vertices) + 1j * rng.normal(size=2 * tm.n_vertices)
        lhs = (np.conj(s) * np.vdot(z, A @ z)).real
        rhs = s.real * ((np.vdot(z, K @ z)).real + abs(s) ** 2 * (np.vdot(z, M @ z)).real)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_patch_test_constant_stress(mesh_and_mats):
    # u = (x1, 0): K u rows vanish at strictly interior vertices
    tm, bm, K, M = mesh_and_mats
    u = np.zeros(2 * tm.n_vertices)
    u[0::2] = tm.vertices[:, 0]
    r = K @ u
    boundary = set(geometry.boundary_vertex_loop(tm).tolist())
    interior = [v for v in range(tm.n_vertices) if v not in boundary]
    scale = abs(K).max() * np.max(np.abs(u))
    for v in interior:
        assert abs(r[2 * v]) <= 1e-12 * scale
        assert abs(r[2 * v + 1]) <= 1e-12 * scale


def test_trace_coupling_closed_curve_identity(mesh_and_mats):
    tm, bm, K, M = mesh_and_mats
    G = fem.assemble_trace_normal_coupling(tm, bm)
    # w = (1,0), psi = 1: pairing = contour integral of nu_1 = 0
    w = np.zeros(2 * tm.n_vertices)
    w[0::2] = 1.0
    ones = np.ones(bm.n_nodes)
    assert abs(w @ (G @ ones)) <= 1e-12
    # w = (x1, 0), psi = 1: pairing = contour integral of x1 nu_1 = area
    wx = np.zeros(2 * tm.n_vertices)
    wx[0::2] = tm.vertices[:, 0]
    assert wx @ (G @ ones) == pytest.approx(2.0, abs=1e-12)


def test_trace_coupling_interior_rows_zero(mesh_and_mats):
    tm, bm, K, M = mesh_and_mats
    G = fem.assemble_trace_normal_coupling(tm, bm)
    boundary = set(geometry.boundary_vertex_loop(tm).tolist())
    dense = np.abs(G.toarray()).sum(axis=1)
    for v in range(tm.n_vertices):
        if v not in boundary:
            assert dense[2 * v] == 0 and dense[2 * v + 1] == 0


def test_nonconforming_interface_raises():
    tm, _ = geometry.triangulate_rectangle(1.0, 3.0, 1.0, 2.0, 4, 2)
    other = geometry.rectangle_boundary(1.0, 3.0, 1.0, 2.0, 0.4)
    with pytest.raises(fem.InterfaceError):
        fem.assemble_trace_normal_coupling(tm, other)
