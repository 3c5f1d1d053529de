"""Convergence-study drivers: manufactured data in, error ladder out.

Disk study (pure BIE): unit-disk polygon, plane pressure wave inside (shifted
by the disk radius so the data are causal), cylindrical wave outside from the
center; errors sampled at seeded points on the circles r = 0.7 (displacement)
and r = 2 (acoustic field) at the final time.

Rectangle study (coupled FEM-BEM): rectangle [1,3]x[1,2], plane pressure wave
inside, cylindrical wave from (1.5, 1.5); the acoustic error is sampled at
seeded exterior points, the displacement error in relative discrete L2/H1
norms over the triangulation.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import bie, coupled, cq, fem, waves
from .assembly import mass_p1, mass_vp1
from .geometry import circle_boundary, triangulate_rectangle
from .materials import DISK_STUDY, RECT_STUDY, MaterialParams

GOLDEN = 0.6180339887498949


class NormalizationError(ValueError):
    pass


def error_metrics(exact, computed):
    """Relative sup metric: max_i |exact_i - computed_i| / max_i |exact_i|.

    Rows of 2D inputs are compared in the Euclidean norm per sample point.
    """
    exact = np.asarray(exact)
    computed = np.asarray(computed)
    if exact.ndim == 1:
        num = np.abs(exact - computed)
        den = np.abs(exact)
    else:
        num = np.linalg.norm(exact - computed, axis=-1)
        den = np.linalg.norm(exact, axis=-1)
    dmax = den.max()
    if dmax == 0:
        raise NormalizationError("all-zero exact samples")
    return float(num.max() / dmax)


def seeded_angles(seed: int, n: int, tag: int = 0):
    """Deterministic low-discrepancy angles from a 64-bit seed."""
    x = (seed * 2654435761 + tag * 97531) % (2**32)
    start = x / 2**32
    return 2.0 * np.pi * ((start + GOLDEN * np.arange(1, n + 1)) % 1.0)


@dataclass
class ScenarioConfig:
    formulation: str                 # 'bie' | 'coupled'
    scheme: str = "tr"               # 'bdf2' | 'tr'
    materials: MaterialParams | None = None
    final_time: float | None = None
    ladder: list = field(default_factory=list)   # bie: (N, M); coupled: (M, n)
    seed: int = 20260810
    out: str | None = None
    workers: int = 0                 # 0 -> auto
    dump_signals: str | None = None

    def __post_init__(self):
        if self.formulation not in ("bie", "coupled"):
            raise ValueError("formulation must be 'bie' or 'coupled'")
        if self.scheme not in ("bdf2", "tr"):
            raise ValueError("scheme must be 'bdf2' or 'tr'")
        if self.materials is None:
            self.materials = DISK_STUDY if self.formulation == "bie" else RECT_STUDY
        if self.final_time is None:
            self.final_time = 5.0 if self.formulation == "bie" else 1.5
        if not self.ladder:
            if self.formulation == "bie":
                self.ladder = [(40, 80), (80, 160), (160, 320), (320, 640)]
            else:
                self.ladder = [(20, 2), (40, 3), (80, 4), (160, 5)]
        if self.final_time <= 0 or any(min(e) <= 0 for e in self.ladder):
            raise ValueError("final time and ladder entries must be positive")

    def scheme_obj(self):
        return cq.BDF2 if self.scheme == "bdf2" else cq.TR

    def n_workers(self):
        if self.workers > 0:
            return self.workers
        return min(4, os.cpu_count() or 1)


@dataclass
class ConvergenceReport:
    config: ScenarioConfig
    columns: list
    rows: list                       # list of dicts
    meta: dict
    failures: list = field(default_factory=list)

    def csv_lines(self, with_timings=True):
        lines = [f"# wavestruct convergence report: {self.config.formulation}/"
                 f"{self.config.scheme}"]
        cfg = dict(formulation=self.config.formulation, scheme=self.config.scheme,
                   final_time=self.config.final_time,
                   ladder=[list(e) for e in self.config.ladder],
                   seed=self.config.seed)
        lines.append("# config: " + json.dumps(cfg, sort_keys=True))
        for key, val in sorted(self.meta.items()):
            if key == "timings":
                continue
            lines.append(f"# {key}: {val}")
        if with_timings and "timings" in self.meta:
            lines.append("# timings: " + json.dumps(self.meta["timings"]))
        for msg in self.failures:
            lines.append(f"# FAILED {msg}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            cells = []
            for c in self.columns:
                v = row.get(c, "")
                if isinstance(v, float):
                    cells.append(f"{v:.6e}")
                else:
                    cells.append(str(v))
            lines.append(",".join(cells))
        return lines

    def write(self, path=None):
        path = path or self.config.out
        if path:
            with open(path, "w") as f:
                f.write("\n".join(self.csv_lines()) + "\n")
        return path


def _append_ecr(rows, err_keys):
    for i, row in enumerate(rows):
        for k in err_keys:
            ek = "ecr_" + k.split("^")[-1].replace("_", "")
            ek = {"E^u": "ecr_u", "E^v": "ecr_v",
                  "E^u_L2": "ecr_u_L2", "E^u_H1": "ecr_u_H1"}[k]
            if i == 0 or k not in rows[i - 1]:
                row[ek] = ""
            else:
                row[ek] = float(np.log2(rows[i - 1][k] / row[k]))


# ------------------------------------------------------------- disk study
def disk_waves(mat: MaterialParams):
    uw = waves.PlanePWave(mat, (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)),
                          omega=3.0, t0=1.0, shift=1.0)
    vw = waves.CylindricalWave((0.0, 0.0), mat.sound_speed, omega=2.0, t0=1.0)
    return uw, vw


def disk_sample_points(seed: int):
    ang_u = seeded_angles(seed, 20, tag=1)
    ang_v = seeded_angles(seed, 20, tag=2)
    pts_u = 0.7 * np.stack([np.cos(ang_u), np.sin(ang_u)], axis=1)
    pts_v = 2.0 * np.stack([np.cos(ang_v), np.sin(ang_v)], axis=1)
    return pts_u, pts_v


def run_disk_rung(cfg: ScenarioConfig, N: int, M: int, dump=None):
    mat = cfg.materials
    mesh = circle_boundary(1.0, N)
    grid = cq.TimeGrid(cfg.final_time / M, M)
    uw, vw = disk_waves(mat)
    pts_u, pts_v = disk_sample_points(cfg.seed)

    lam_sig, g_sig = waves.synthesize_transmission_data(uw, vw, mesh, grid, mat)
    rhs = cq.TimeSignal(grid, np.hstack([lam_sig.values, g_sig.values]))

    n_s = mesh.n_nodes
    Ms = mass_p1(mesh)
    Mv = mass_vp1(mesh)

    def frequency_solver(s, bhat):
        lam_hat = np.linalg.solve(Ms, bhat[:n_s])
        g_hat = np.linalg.solve(Mv, bhat[n_s:])
        system = bie.assemble_bie_system(mesh, s, mat)
        phi_sig, phi_f = bie.solve_bie_frequency(system, (lam_hat, g_hat))
        u_pts, v_pts = bie.evaluate_fields(phi_sig, phi_f, (lam_hat, g_hat),
                                           s, mat, mesh,
                                           interior_points=pts_u,
                                           exterior_points=pts_v)
        return np.concatenate([u_pts.ravel(), v_pts])

    out = cq.cq_solve(cfg.scheme_obj(), grid, rhs, frequency_solver,
                      workers=cfg.n_workers())
    T = grid.final_time
    u_num = out.values[-1, :2 * len(pts_u)].reshape(len(pts_u), 2)
    v_num = out.values[-1, 2 * len(pts_u):]
    u_ex = uw.u(pts_u, T)
    v_ex = vw.v(pts_v, np.array([T]))[:, 0]
    if dump is not None:
        dump[(N, M)] = (grid.times, out.values.copy())
    return dict(N=N, M=M,
                **{"E^u": error_metrics(u_ex, u_num),
                   "E^v": error_metrics(v_ex, v_num)})


# -------------------------------------------------------- rectangle study
RECT = (1.0, 3.0, 1.0, 2.0)


def rect_waves(mat: MaterialParams):
    uw = waves.PlanePWave(mat, (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)),
                          omega=2.0, t0=0.5, shift=0.0)
    vw = waves.CylindricalWave((1.5, 1.5), mat.sound_speed, omega=3.0, t0=0.5)
    return uw, vw


def rect_sample_points(seed: int, n: int = 10):
    ang = seeded_angles(seed, n, tag=3)
    center = np.array([2.0, 1.5])
    return center + 2.0 * np.stack([np.cos(ang), np.sin(ang)], axis=1)


_TRI_Q = (
    # 6-point degree-4 rule (barycentric, weight)
    (0.44594849091597, 0.44594849091597, 0.22338158967801),
    (0.44594849091597, 0.10810301816807, 0.22338158967801),
    (0.10810301816807, 0.44594849091597, 0.22338158967801),
    (0.09157621350977, 0.09157621350977, 0.10995174365532),
    (0.09157621350977, 0.81684757298046, 0.10995174365532),
    (0.81684757298046, 0.09157621350977, 0.10995174365532),
)


def fem_errors(tm, u_coeff, uw: waves.PlanePWave, T: float):
    """Relative L2 and H1(full) errors of the P1 field u_coeff vs the exact
    plane wave at time T, by degree-4 triangle quadrature."""
    v = tm.vertices
    t = tm.triangles
    areas = tm.areas()
    uc = u_coeff.reshape(-1, 2)
    num_l2 = den_l2 = num_h1 = den_h1 = 0.0
    lamb = np.array([[l1, l2, 1.0 - l1 - l2] for (l1, l2, _w) in _TRI_Q])
    wts = np.array([w for (_l1, _l2, w) in _TRI_Q])
    x1 = v[t[:, 0]]
    x2 = v[t[:, 1]]
    x3 = v[t[:, 2]]
    # gradients of barycentric shapes per triangle
    for e in range(tm.n_triangles):
        xs = np.stack([x1[e], x2[e], x3[e]])
        mat2 = np.array([[xs[1, 0] - xs[0, 0], xs[2, 0] - xs[0, 0]],
                         [xs[1, 1] - xs[0, 1], xs[2, 1] - xs[0, 1]]])
        inv = np.linalg.inv(mat2)
        grads = np.zeros((3, 2))
        grads[1] = inv[0]
        grads[2] = inv[1]
        grads[0] = -grads[1] - grads[2]
        nodes = uc[t[e]]                       # (3, 2)
        qpts = lamb @ xs                       # (6, 2)
        uh = lamb @ nodes                      # (6, 2)
        ghr = grads.T @ nodes                  # (2grad, 2comp): d u_c / d x_g
        uex = uw.u(qpts, T)                    # (6, 2)
        gex = uw.grad(qpts, T)                 # (6, 2, 2) [comp, deriv]
        w = wts * areas[e]
        num_l2 += np.sum(w * np.sum(np.abs(uh - uex) ** 2, axis=1))
        den_l2 += np.sum(w * np.sum(np.abs(uex) ** 2, axis=1))
        gh = ghr.T                             # [comp, deriv]
        dg = gex - gh[None, :, :]
        num_h1 += np.sum(w * np.sum(np.abs(dg) ** 2, axis=(1, 2)))
        den_h1 += np.sum(w * np.sum(np.abs(gex) ** 2, axis=(1, 2)))
    den_h1_full = den_h1 + den_l2
    num_h1_full = num_h1 + num_l2
    if den_l2 == 0:
        raise NormalizationError("exact displacement vanishes at final time")
    return float(np.sqrt(num_l2 / den_l2)), float(np.sqrt(num_h1_full / den_h1_full))


def run_rect_rung(cfg: ScenarioConfig, M: int, n_level: int, dump=None):
    mat = cfg.materials
    h = 0.52 * 2.0 ** (-n_level)
    nx = int(np.ceil((RECT[1] - RECT[0]) / h))
    ny = int(np.ceil((RECT[3] - RECT[2]) / h))
    tm, bm = triangulate_rectangle(*RECT, nx, ny)
    grid = cq.TimeGrid(cfg.final_time / M, M)
    uw, vw = rect_waves(mat)
    pts_v = rect_sample_points(cfg.seed)

    lam_sig, g_sig = waves.synthesize_transmission_data(uw, vw, bm, grid, mat)
    rhs = cq.TimeSignal(grid, np.hstack([lam_sig.values, g_sig.values]))
    n_s = bm.n_nodes

    def frequency_solver(s, bhat):
        system = coupled.assemble_coupled_system(s, tm, bm, mat, mat)
        u, phi, lam = coupled.solve_coupled_frequency(
            system, (bhat[:n_s], bhat[n_s:]))
        v_pts = coupled.evaluate_exterior(phi, lam, s, mat, bm, pts_v)
        return np.concatenate([v_pts, u])

    out = cq.cq_solve(cfg.scheme_obj(), grid, rhs, frequency_solver,
                      workers=cfg.n_workers())
    T = grid.final_time
    nv = len(pts_v)
    v_num = out.values[-1, :nv]
    u_coeff = out.values[-1, nv:]
    v_ex = vw.v(pts_v, np.array([T]))[:, 0]
    e_l2, e_h1 = fem_errors(tm, u_coeff, uw, T)
    if dump is not None:
        dump[(M, n_level)] = (grid.times, out.values[:, :nv].copy())
    return dict(M=M, N=n_level,
                **{"E^v": error_metrics(v_ex, v_num),
                   "E^u_L2": e_l2, "E^u_H1": e_h1})


# ----------------------------------------------------------------- driver
def run_convergence(cfg: ScenarioConfig) -> ConvergenceReport:
    rows = []
    failures = []
    timings = {}
    dump = {} if cfg.dump_signals else None
    for entry in cfg.ladder:
        t0 = time.time()
        try:
            if cfg.formulation == "bie":
                row = run_disk_rung(cfg, *entry, dump=dump)
            else:
                row = run_rect_rung(cfg, *entry, dump=dump)
            rows.append(row)
        except Exception as exc:           # rung failure: record and continue
            failures.append(f"{entry}: {type(exc).__name__}: {exc}")
        timings[str(tuple(entry))] = round(time.time() - t0, 2)
    if cfg.formulation == "bie":
        columns = ["N", "M", "E^u", "ecr_u", "E^v", "ecr_v"]
        _append_ecr(rows, ["E^u", "E^v"])
        pts_u, pts_v = disk_sample_points(cfg.seed)
        meta = {"sample_points_u": np.array2string(pts_u, precision=6),
                "sample_points_v": np.array2string(pts_v, precision=6)}
    else:
        columns = ["M", "N", "E^v", "ecr_v", "E^u_L2", "ecr_u_L2",
                   "E^u_H1", "ecr_u_H1"]
        _append_ecr(rows, ["E^v", "E^u_L2", "E^u_H1"])
        meta = {"sample_points_v": np.array2string(rect_sample_points(cfg.seed),
                                                   precision=6)}
    meta["seed"] = cfg.seed
    meta["timings"] = timings
    report = ConvergenceReport(cfg, columns, rows, meta, failures)
    if cfg.out:
        report.write()
    if cfg.dump_signals and dump:
        _write_signals(cfg.dump_signals, dump)
    return report


def _write_signals(path, dump):
    with open(path, "w") as f:
        for key, (times, values) in sorted(dump.items()):
            f.write(f"# rung {key}\n")
            f.write("t," + ",".join(f"dof{j}" for j in range(values.shape[1])) + "\n")
            for tt, row in zip(times, values):
                f.write(f"{tt!r}," + ",".join(f"{v:.6e}" for v in row) + "\n")
