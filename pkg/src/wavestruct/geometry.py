"""Boundary polygons and structured triangulations for the scattering domains.

The interface curve is stored as a closed loop of straight panels with
outward unit normals (counterclockwise orientation, enclosed region on the
left).  The solid is a structured triangulation whose boundary edges tile the
panels of an associated BoundaryMesh one-to-one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Invalid geometric parameters."""


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Closed polygonal interface: nodes, panels, outward normals, lengths."""

    nodes: np.ndarray          # (n, 2)
    panels: np.ndarray         # (p, 2) node indices, counterclockwise loop

    panel_normals: np.ndarray = field(init=False)
    panel_tangents: np.ndarray = field(init=False)
    panel_lengths: np.ndarray = field(init=False)

    def __post_init__(self):
        a = self.nodes[self.panels[:, 0]]
        b = self.nodes[self.panels[:, 1]]
        d = b - a
        lengths = np.linalg.norm(d, axis=1)
        if np.any(lengths <= 0):
            raise ParameterError("zero-length panel")
        t = d / lengths[:, None]
        # outward normal for a counterclockwise loop: rotate tangent by -90 deg
        n = np.stack([t[:, 1], -t[:, 0]], axis=1)
        object.__setattr__(self, "panel_tangents", t)
        object.__setattr__(self, "panel_normals", n)
        object.__setattr__(self, "panel_lengths", lengths)
        counts = np.bincount(self.panels.ravel(), minlength=len(self.nodes))
        if not np.all(counts == 2):
            raise ParameterError("boundary is not a closed curve (node valence != 2)")
        if self.signed_area() <= 0:
            raise ParameterError("panel loop must be counterclockwise")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_panels(self) -> int:
        return len(self.panels)

    def signed_area(self) -> float:
        a = self.nodes[self.panels[:, 0]]
        b = self.nodes[self.panels[:, 1]]
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))

    def perimeter(self) -> float:
        return float(self.panel_lengths.sum())


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Conforming triangulation: vertices, positively oriented triangles.

    boundary_edges maps each boundary edge (ordered vertex pair) to the index
    of the matching panel in the companion BoundaryMesh.
    """

    vertices: np.ndarray       # (v, 2)
    triangles: np.ndarray      # (t, 3) vertex indices, positive orientation
    boundary_edges: dict[tuple[int, int], int]

    def __post_init__(self):
        if np.any(self.areas() <= 0):
            raise ParameterError("triangle with non-positive area")

    def areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        d1 = v[t[:, 1]] - v[t[:, 0]]
        d2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


def circle_boundary(radius: float, n_panels: int) -> BoundaryMesh:
    """Regular inscribed polygon approximating the circle of given radius."""
    if n_panels < 4:
        raise ParameterError("n_panels must be >= 4")
    if radius <= 0:
        raise ParameterError("radius must be positive")
    theta = 2.0 * np.pi * np.arange(n_panels) / n_panels
    nodes = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    panels = np.stack([np.arange(n_panels), (np.arange(n_panels) + 1) % n_panels], axis=1)
    return BoundaryMesh(nodes, panels)


def rectangle_boundary(x_lo: float, x_hi: float, y_lo: float, y_hi: float,
                       h_target: float) -> BoundaryMesh:
    """Rectangle boundary with per-side uniform panels of length <= h_target."""
    if not (x_lo < x_hi and y_lo < y_hi):
        raise ParameterError("degenerate rectangle")
    if h_target <= 0:
        raise ParameterError("h_target must be positive")
    nx = max(1, int(np.ceil((x_hi - x_lo) / h_target)))
    ny = max(1, int(np.ceil((y_hi - y_lo) / h_target)))
    return _rectangle_loop(x_lo, x_hi, y_lo, y_hi, nx, ny)


def _rectangle_loop(x_lo, x_hi, y_lo, y_hi, nx, ny) -> BoundaryMesh:
    xs = np.linspace(x_lo, x_hi, nx + 1)
    ys = np.linspace(y_lo, y_hi, ny + 1)
    pts = []
    pts.extend((x, y_lo) for x in xs[:-1])            # bottom, left to right
    pts.extend((x_hi, y) for y in ys[:-1])            # right, upward
    pts.extend((x, y_hi) for x in xs[:0:-1])          # top, right to left
    pts.extend((x_lo, y) for y in ys[:0:-1])          # left, downward
    nodes = np.array(pts)
    n = len(nodes)
    panels = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1)
    return BoundaryMesh(nodes, panels)


def triangulate_rectangle(x_lo: float, x_hi: float, y_lo: float, y_hi: float,
                          nx: int, ny: int) -> tuple[TriMesh, BoundaryMesh]:
    """Structured nx-by-ny grid split into 2*nx*ny triangles, plus the
    conforming boundary mesh (boundary edges tile the panels exactly)."""
    if nx < 1 or ny < 1:
        raise ParameterError("nx, ny must be >= 1")
    if not (x_lo < x_hi and y_lo < y_hi):
        raise ParameterError("degenerate rectangle")
    xs = np.linspace(x_lo, x_hi, nx + 1)
    ys = np.linspace(y_lo, y_hi, ny + 1)
    xv, yv = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.stack([xv.ravel(), yv.ravel()], axis=1)

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    triangles = np.array(tris, dtype=int)

    bmesh = _rectangle_loop(x_lo, x_hi, y_lo, y_hi, nx, ny)
    # boundary vertices in loop order, mapped to grid vertex ids
    loop = []
    loop.extend(vid(i, 0) for i in range(nx))                 # bottom
    loop.extend(vid(nx, j) for j in range(ny))                # right
    loop.extend(vid(i, ny) for i in range(nx, 0, -1))         # top
    loop.extend(vid(0, j) for j in range(ny, 0, -1))          # left
    boundary_edges = {}
    n = len(loop)
    for p in range(n):
        boundary_edges[(loop[p], loop[(p + 1) % n])] = p
    tm = TriMesh(vertices, triangles, boundary_edges)
    if not np.allclose(tm.vertices[loop], bmesh.nodes):
        raise ParameterError("boundary loop does not match panel nodes")
    return tm, bmesh


def boundary_vertex_loop(tm: TriMesh) -> np.ndarray:
    """Vertex ids of the TriMesh boundary, in panel order (panel p runs from
    loop[p] to loop[p+1])."""
    n = len(tm.boundary_edges)
    loop = np.empty(n, dtype=int)
    for (a, _b), p in tm.boundary_edges.items():
        loop[p] = a
    return loop


def dump_mesh_csv(path, bmesh: BoundaryMesh | None = None, tm: TriMesh | None = None):
    """Debug dump: sections `nodes` (id,x,y), `panels` (id,n0,n1,nx,ny,len),
    `triangles` (id,v0,v1,v2)."""
    with open(path, "w") as f:
        if bmesh is not None:
            f.write("nodes\n")
            for i, (x, y) in enumerate(bmesh.nodes):
                f.write(f"{i},{x!r},{y!r}\n")
            f.write("panels\n")
            for i, ((a, b), nrm, ln) in enumerate(
                zip(bmesh.panels, bmesh.panel_normals, bmesh.panel_lengths)
            ):
                f.write(f"{i},{a},{b},{nrm[0]!r},{nrm[1]!r},{ln!r}\n")
        if tm is not None:
            f.write("triangles\n")
            for i, (a, b, c) in enumerate(tm.triangles):
                f.write(f"{i},{a},{b},{c}\n")
