import numpy as np
import pytest

from wavestruct import geometry


def test_circle_nodes_at_uniform_angles():
    m = geometry.circle_boundary(1.0, 4)
    expect = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    assert np.allclose(m.nodes, expect, atol=1e-15)


def test_circle_perimeter_chord_formula():
    m = geometry.circle_boundary(1.0, 360)
    assert m.perimeter() == pytest.approx(2 * 360 * np.sin(np.pi / 360), rel=1e-12)


def test_circle_outward_normal_orientation():
    m = geometry.circle_boundary(1.0, 64)
    mids = 0.5 * (m.nodes[m.panels[:, 0]] + m.nodes[m.panels[:, 1]])
    k = np.argmin(np.linalg.norm(mids - np.array([1.0, 0.0]), axis=1))
    assert m.panel_normals[k, 0] > 0
    # normals point away from the enclosed region everywhere
    assert np.all(np.sum(mids * m.panel_normals, axis=1) > 0)


def test_circle_perimeter_defect_second_order():
    # doubling n reduces the perimeter defect by a factor in [3.8, 4.2]
    defects = []
    for n in (64, 128, 256):
        m = geometry.circle_boundary(1.0, n)
        defects.append(2 * np.pi - m.perimeter())
    for a, b in zip(defects, defects[1:]):
        assert 3.8 <= a / b <= 4.2


def test_rectangle_coarse_is_four_panels():
    m = geometry.rectangle_boundary(1.0, 3.0, 1.0, 2.0, 10.0)
    assert m.n_panels == 4
    assert m.perimeter() == pytest.approx(6.0)


def test_rectangle_bottom_normal():
    m = geometry.rectangle_boundary(1.0, 3.0, 1.0, 2.0, 10.0)
    mids = 0.5 * (m.nodes[m.panels[:, 0]] + m.nodes[m.panels[:, 1]])
    k = np.argmin(mids[:, 1])
    assert np.allclose(m.panel_normals[k], [0.0, -1.0])


def test_rectangle_uniform_split():
    m = geometry.rectangle_boundary(0.0, 1.0, 0.0, 1.0, 0.5)
    assert m.n_panels == 8
    assert np.allclose(m.panel_lengths, 0.5)


def test_rectangle_degenerate_raises():
    with pytest.raises(geometry.ParameterError):
        geometry.rectangle_boundary(1.0, 1.0, 0.0, 1.0, 0.5)
    with pytest.raises(geometry.ParameterError):
        geometry.circle_boundary(1.0, 3)


def test_closed_surface_identity():
    # sum of length * normal vanishes for any closed loop
    for m in (geometry.circle_boundary(2.0, 37),
              geometry.rectangle_boundary(1.0, 3.0, 1.0, 2.0, 0.3)):
        total = (m.panel_lengths[:, None] * m.panel_normals).sum(axis=0)
        assert np.all(np.abs(total) <= 1e-12)


def test_triangulate_unit_square_minimal():
    tm, bm = geometry.triangulate_rectangle(0.0, 1.0, 0.0, 1.0, 1, 1)
    assert tm.n_triangles == 2
    assert tm.areas().sum() == pytest.approx(1.0, abs=1e-12)
    assert bm.n_panels == 4


def test_triangulate_boundary_edge_count_and_areas():
    nx, ny = 5, 3
    tm, bm = geometry.triangulate_rectangle(1.0, 3.0, 1.0, 2.0, nx, ny)
    assert len(tm.boundary_edges) == 2 * (nx + ny)
    assert bm.n_panels == 2 * (nx + ny)
    assert np.all(tm.areas() > 0)
    assert tm.areas().sum() == pytest.approx(2.0, abs=1e-12)


def test_boundary_edges_tile_panels():
    tm, bm = geometry.triangulate_rectangle(1.0, 3.0, 1.0, 2.0, 4, 2)
    loop = geometry.boundary_vertex_loop(tm)
    assert np.allclose(tm.vertices[loop], bm.nodes)
    for (a, b), p in tm.boundary_edges.items():
        assert np.allclose(tm.vertices[a], bm.nodes[bm.panels[p, 0]])
        assert np.allclose(tm.vertices[b], bm.nodes[bm.panels[p, 1]])


def test_mesh_dump(tmp_path):
    tm, bm = geometry.triangulate_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2)
    path = tmp_path / "mesh.csv"
    geometry.dump_mesh_csv(path, bm, tm)
    text = path.read_text()
    assert "nodes\n" in text and "panels\n" in text and "triangles\n" in text
