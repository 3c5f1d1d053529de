"""Multistep Convolution Quadrature: scheme symbols, forward convolution, and
the all-steps-at-once solve.

Both directions use the scaled-DFT realization: with contour radius R chosen
so that R^(M+1) = sqrt(machine eps), the weights of F(delta(zeta)/kappa) are
recovered from samples on |zeta| = R at the M+1 roots of unity; conjugate
symmetry halves the number of frequency solves for real data.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


class PoleError(ValueError):
    """Trapezoidal-rule symbol evaluated at its pole zeta = -1."""


@dataclass(frozen=True)
class CQScheme:
    """Multistep generator; tag in {'bdf2', 'tr'}."""

    tag: str

    def __post_init__(self):
        if self.tag not in ("bdf2", "tr"):
            raise ValueError(f"unknown CQ scheme {self.tag!r}")

    def delta(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.tag == "bdf2":
            out = 1.5 - 2.0 * zeta + 0.5 * zeta**2
        else:
            if np.any(zeta == -1.0):
                raise PoleError("TR symbol has a pole at zeta = -1")
            out = 2.0 * (1.0 - zeta) / (1.0 + zeta)
        return complex(out) if np.ndim(zeta) == 0 else out


BDF2 = CQScheme("bdf2")
TR = CQScheme("tr")


def cq_delta(scheme: CQScheme, zeta) -> complex:
    """delta(zeta) of the scheme; |zeta| <= 1 (zeta != -1 for TR)."""
    return scheme.delta(zeta)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n kappa, n = 0..M (kappa * M = final time)."""

    kappa: float
    steps: int

    def __post_init__(self):
        if self.kappa <= 0 or self.steps < 1:
            raise ValueError("need kappa > 0 and steps >= 1")

    @property
    def final_time(self) -> float:
        return self.kappa * self.steps

    @property
    def times(self) -> np.ndarray:
        return self.kappa * np.arange(self.steps + 1)

    @property
    def radius(self) -> float:
        # R^(M+1) = sqrt(eps): weight accuracy floor ~1e-8 vs aliasing
        return float(np.finfo(float).eps ** (0.5 / (self.steps + 1)))


@dataclass
class TimeSignal:
    """Values per time step: shape (M+1, ndof) (ndof may be 1)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values))
        if v.shape[0] != self.grid.steps + 1:
            raise ValueError("values must have M+1 rows")
        self.values = v


def _check_causal(values, what):
    v0 = np.max(np.abs(values[0])) if values.size else 0.0
    scale = np.max(np.abs(values)) or 1.0
    if v0 > 1e-8 * scale:
        warnings.warn(f"{what}: input is not causal (nonzero at t=0)")


def _frequencies(scheme: CQScheme, grid: TimeGrid):
    M1 = grid.steps + 1
    R = grid.radius
    zeta = R * np.exp(-2j * np.pi * np.arange(M1) / M1)
    return scheme.delta(zeta) / grid.kappa


def _forward_dft(values, R):
    # hat(l) = sum_n values_n R^n e^{-2 pi i n l/(M+1)}
    M1 = values.shape[0]
    scaled = values * (R ** np.arange(M1))[:, None]
    return np.fft.fft(scaled, axis=0)


def _inverse_dft(hat, R):
    M1 = hat.shape[0]
    out = np.fft.ifft(hat, axis=0)
    return out * (R ** -np.arange(M1))[:, None]


def cq_convolve(scheme: CQScheme, grid: TimeGrid, transfer,
                signal: TimeSignal) -> TimeSignal:
    """Forward CQ: output_n = sum_{m<=n} omega_{n-m}(F) input_m.

    `transfer` maps a Laplace frequency s to a linear action on dof vectors:
    either a scalar/array multiplier or a callable s -> (vector -> vector).
    """
    _check_causal(signal.values, "cq_convolve")
    M1 = grid.steps + 1
    R = grid.radius
    hat = _forward_dft(signal.values.astype(complex), R)
    freqs = _frequencies(scheme, grid)
    out = np.empty_like(hat)
    half = M1 // 2
    real_input = np.isrealobj(signal.values)
    for idx in range(M1):
        if real_input and idx > half:
            out[idx] = np.conj(out[M1 - idx])
            continue
        s = freqs[idx]
        act = transfer(s)
        out[idx] = act(hat[idx]) if callable(act) else act * hat[idx]
    vals = _inverse_dft(out, R)
    if real_input:
        vals = vals.real
    return TimeSignal(grid, vals)


def cq_solve(scheme: CQScheme, grid: TimeGrid, rhs: TimeSignal,
             frequency_solver, workers: int = 1) -> TimeSignal:
    """All-steps-at-once CQ solve of F(d/dt) u = rhs.

    frequency_solver(s, rhs_hat_vector) -> solution vector at frequency s;
    it must be reentrant when workers > 1.  The set of solved frequencies is
    halved by conjugate symmetry when rhs is real; the inverse transform runs
    in fixed index order so the output is independent of scheduling.
    """
    M1 = grid.steps + 1
    R = grid.radius
    real_input = np.isrealobj(rhs.values)
    hat = _forward_dft(rhs.values.astype(complex), R)
    freqs = _frequencies(scheme, grid)
    half = M1 // 2
    idxs = list(range(half + 1)) if real_input else list(range(M1))

    results: dict[int, np.ndarray] = {}

    def solve_one(idx):
        return idx, np.asarray(frequency_solver(freqs[idx], hat[idx]), dtype=complex)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for idx, sol in pool.map(solve_one, idxs):
                results[idx] = sol
    else:
        for idx in idxs:
            results[idx] = solve_one(idx)[1]

    ndof = results[0].shape[0] if results[0].ndim else 1
    out = np.empty((M1, ndof), dtype=complex)
    for idx in range(M1):
        if idx in results:
            out[idx] = results[idx]
        else:
            out[idx] = np.conj(results[M1 - idx])
    vals = _inverse_dft(out, R)
    if real_input:
        vals = vals.real
    return TimeSignal(grid, vals)
