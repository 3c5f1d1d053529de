import numpy as np
import pytest

from wavestruct import cq
from wavestruct.kernels import acoustic_single


def smooth_causal(grid, ndof=1, seed=0):
    rng = np.random.default_rng(seed)
    t = grid.times
    T = grid.final_time
    out = np.zeros((grid.steps + 1, ndof))
    for j in range(ndof):
        f = rng.uniform(1.0, 3.0)
        # C^inf window vanishing to all orders at t=0
        w = np.where(t > 0, np.exp(-0.5 * T / np.maximum(t, 1e-300)), 0.0)
        out[:, j] = w * np.sin(2 * np.pi * f * t / T)
    return cq.TimeSignal(grid, out)


def test_delta_values():
    assert cq.cq_delta(cq.BDF2, 0.0) == pytest.approx(1.5)
    assert cq.cq_delta(cq.TR, 0.0) == pytest.approx(2.0)
    assert cq.cq_delta(cq.BDF2, 1.0) == pytest.approx(0.0)
    assert cq.cq_delta(cq.TR, 1.0) == pytest.approx(0.0)
    with pytest.raises(cq.PoleError):
        cq.cq_delta(cq.TR, -1.0)


def test_a_stability_region():
    # Re delta(zeta)/kappa > 0 for |zeta| < 1
    rng = np.random.default_rng(1)
    zeta = rng.uniform(0, 0.999, 200) * np.exp(1j * rng.uniform(0, 2 * np.pi, 200))
    for scheme in (cq.BDF2, cq.TR):
        assert np.all(scheme.delta(zeta).real > 0)


def test_identity_transfer():
    grid = cq.TimeGrid(0.01, 150)
    sig = smooth_causal(grid, ndof=3)
    out = cq.cq_convolve(cq.BDF2, grid, lambda s: 1.0, sig)
    assert np.max(np.abs(out.values - sig.values)) <= 1e-10 * np.max(np.abs(sig.values))


def test_bdf2_differentiation_identity():
    # F(s) = s under BDF2-CQ is the BDF2 difference operator
    grid = cq.TimeGrid(0.005, 200)
    rng = np.random.default_rng(5)
    vals = np.zeros((201, 2))
    vals[1:] = rng.normal(size=(200, 2))      # random causal signal
    sig = cq.TimeSignal(grid, vals)
    out = cq.cq_convolve(cq.BDF2, grid, lambda s: s, sig)
    g = np.vstack([np.zeros((2, 2)), vals])   # g_{-1} = g_{-2} = 0
    expect = (3 * g[2:] - 4 * g[1:-1] + g[:-2]) / (2 * grid.kappa)
    scale = np.max(np.abs(expect))
    assert np.max(np.abs(out.values - expect)) <= 1e-8 * scale


def test_tr_integration_identity():
    # F(s) = 1/s under TR-CQ is cumulative trapezoidal integration
    grid = cq.TimeGrid(0.01, 200)
    rng = np.random.default_rng(6)
    vals = np.zeros((201, 1))
    vals[1:, 0] = rng.normal(size=200)
    sig = cq.TimeSignal(grid, vals)
    out = cq.cq_convolve(cq.TR, grid, lambda s: 1.0 / s, sig)
    expect = np.zeros(201)
    expect[1:] = np.cumsum(0.5 * (vals[1:, 0] + vals[:-1, 0])) * grid.kappa
    scale = np.max(np.abs(expect))
    assert np.max(np.abs(out.values[:, 0] - expect)) <= 1e-7 * scale


def test_solve_vs_convolve_cross_check():
    grid = cq.TimeGrid(0.01, 120)
    sig = smooth_causal(grid, ndof=2, seed=9)
    conv = cq.cq_convolve(cq.TR, grid, lambda s: 1.0 / s, sig)
    solved = cq.cq_solve(cq.TR, grid, sig, lambda s, b: b / s)
    scale = np.max(np.abs(conv.values))
    assert np.max(np.abs(conv.values - solved.values)) <= 1e-7 * scale


def test_solve_identity_and_linearity():
    grid = cq.TimeGrid(0.02, 80)
    sig = smooth_causal(grid, ndof=2, seed=2)
    out = cq.cq_solve(cq.BDF2, grid, sig, lambda s, b: b)
    assert np.max(np.abs(out.values - sig.values)) <= 1e-10 * np.max(np.abs(sig.values))
    twice = cq.TimeSignal(grid, 2.0 * sig.values)
    out2 = cq.cq_solve(cq.BDF2, grid, twice, lambda s, b: b)
    assert np.max(np.abs(out2.values - 2 * out.values)) <= 1e-12 * np.max(np.abs(out2.values))


def test_causality():
    grid = cq.TimeGrid(0.01, 160)
    vals = np.zeros((161, 1))
    n0 = 60
    t = grid.times
    vals[n0:, 0] = np.sin(3 * (t[n0:] - t[n0])) ** 2
    sig = cq.TimeSignal(grid, vals)
    out = cq.cq_convolve(cq.BDF2, grid, lambda s: 1.0 / (1.0 + s), sig)
    tail = np.max(np.abs(out.values[:n0]))
    # the documented contour choice R^(M+1) = sqrt(eps) floors the pre-arrival
    # residue at ~1.5e-8 relative
    assert tail <= 2e-8 * np.max(np.abs(out.values))


def test_noncausal_warning():
    grid = cq.TimeGrid(0.01, 20)
    vals = np.ones((21, 1))
    with pytest.warns(UserWarning):
        cq.cq_convolve(cq.TR, grid, lambda s: 1.0, cq.TimeSignal(grid, vals))


@pytest.mark.parametrize("scheme", [cq.BDF2, cq.TR])
def test_order_two_selfconvergence_k0_kernel(scheme):
    # transfer F(s) = K0(1.5 s)/2 pi, smooth windowed-sinusoid input;
    # error at T vs a 4x-finer reference decreases at order 2.0 +- 0.3
    T = 2.0
    r = 1.5

    def transfer(s):
        return complex(acoustic_single(s, np.array([r]))[0])

    def run(M):
        grid = cq.TimeGrid(T / M, M)
        t = grid.times
        w = np.where(t > 0, np.exp(-0.25 * T / np.maximum(t, 1e-300)), 0.0)
        vals = (w * np.sin(4 * np.pi * t / T))[:, None]
        out = cq.cq_convolve(scheme, grid, transfer, cq.TimeSignal(grid, vals))
        return out.values[:, 0]

    errs = []
    for M in (64, 128, 256):
        coarse = run(M)
        fine = run(4 * M)          # 4x-finer reference
        idx = np.arange(M + 1)[M // 2:]
        errs.append(np.max(np.abs(coarse[idx] - fine[4 * idx])))
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert 1.7 <= np.mean(orders) <= 2.3, (errs, orders)


def test_scheduling_determinism():
    grid = cq.TimeGrid(0.01, 100)
    sig = smooth_causal(grid, ndof=3, seed=11)

    def solver(s, b):
        return b / (1.0 + s)

    a = cq.cq_solve(cq.TR, grid, sig, solver, workers=1)
    b = cq.cq_solve(cq.TR, grid, sig, solver, workers=4)
    assert np.array_equal(a.values, b.values)
