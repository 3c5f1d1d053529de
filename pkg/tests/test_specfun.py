import numpy as np
import pytest
import scipy.integrate
import scipy.special

from wavestruct import specfun


def kv_integral_oracle_scaled(order, z):
    """e^z K_nu(z) = int_0^inf e^{-z (cosh t - 1)} cosh(nu t) dt via scipy.

    Scaling by e^z keeps the result O(1) so the adaptive quadrature's absolute
    tolerance does not dominate for large Re z.  Independent of the package
    implementation.  Valid where the integrand decays (away from the
    imaginary axis).
    """
    z = complex(z)
    tmax = np.arccosh(1.0 + 60.0 / z.real)

    def f_re(t):
        return (np.exp(-z * (np.cosh(t) - 1.0)) * np.cosh(order * t)).real

    def f_im(t):
        return (np.exp(-z * (np.cosh(t) - 1.0)) * np.cosh(order * t)).imag

    re, _ = scipy.integrate.quad(f_re, 0.0, tmax, limit=400, epsabs=1e-14, epsrel=1e-13)
    im, _ = scipy.integrate.quad(f_im, 0.0, tmax, limit=400, epsabs=1e-14, epsrel=1e-13)
    return re + 1j * im


def halfplane_grid(n_abs=20, n_arg=10, abs_lo=1e-2, abs_hi=200.0, arg_max=1.35):
    radii = np.geomspace(abs_lo, abs_hi, n_abs)
    args = np.linspace(-arg_max, arg_max, n_arg)
    return np.array([r * np.exp(1j * a) for r in radii for a in args])


def test_frozen_reference_values():
    # values frozen from the integral-representation oracle
    assert abs(specfun.mod_bessel_k(0, 1.0 + 0j) - 0.42102443824070834) < 1e-12
    assert abs(specfun.mod_bessel_k(1, 1.0 + 0j) - 0.6019072301972346) < 1e-12


def test_schwarz_reflection():
    z = 0.7 + 1.3j
    for order in (0, 1):
        a = specfun.mod_bessel_k(order, np.conj(z))
        b = np.conj(specfun.mod_bessel_k(order, z))
        assert abs(a - b) <= 1e-14 * abs(b)


def test_matches_integral_oracle_halfplane():
    # 200-point half-plane grid; oracle needs decay so the argument stays
    # away from +-pi/2 at large |z|
    zs = halfplane_grid(n_abs=25, n_arg=8, abs_lo=0.05, abs_hi=60.0, arg_max=1.1)
    assert len(zs) == 200
    for order in (0, 1):
        vals = specfun.mod_bessel_k(order, zs)
        for z, v in zip(zs, vals):
            ref = kv_integral_oracle_scaled(order, z)
            scaled = v * np.exp(z)
            assert abs(scaled - ref) <= 1e-10 * abs(ref), (order, z)


def test_matches_scipy_amos_wide():
    zs = halfplane_grid(n_abs=24, n_arg=12, abs_lo=1e-8, abs_hi=200.0, arg_max=1.45)
    for order in (0, 1):
        vals = specfun.mod_bessel_k(order, zs)
        ref = scipy.special.kv(order, zs)
        ok = np.abs(vals - ref) <= 2e-11 * np.abs(ref) + 1e-300
        assert ok.all(), zs[~ok]


def test_wronskian_identity_grid():
    # I0(z) K1(z) + I1(z) K0(z) = 1/z on a 20-point grid, |z| in [0.1, 50],
    # arg in (-pi/2, pi/2).  The I series (oracle-grade, per design) limits
    # the angle at large radius: keep |z| - Re z <= 16 so it holds 1e-10.
    rng = np.random.default_rng(7)
    radii = np.geomspace(0.1, 50.0, 20)
    args = rng.uniform(-1.4, 1.4, 20)
    amax = np.arccos(np.clip(1.0 - 16.0 / radii, -1.0, 1.0))
    args = np.clip(args, -amax, amax)
    zs = radii * np.exp(1j * args)
    for z in zs:
        w = specfun.mod_bessel_i(0, z) * specfun.mod_bessel_k(1, z) + specfun.mod_bessel_i(
            1, z
        ) * specfun.mod_bessel_k(0, z)
        assert abs(w - 1.0 / z) <= 1e-10 * abs(1.0 / z), z


def test_wronskian_at_spec_point():
    z = 2.0 + 1.0j
    w = specfun.mod_bessel_i(0, z) * specfun.mod_bessel_k(1, z) + specfun.mod_bessel_i(
        1, z
    ) * specfun.mod_bessel_k(0, z)
    assert abs(w - 1.0 / z) <= 1e-10 * abs(1.0 / z)


def test_i_series_values():
    assert specfun.mod_bessel_i(0, 0.0) == pytest.approx(1.0)
    assert specfun.mod_bessel_i(1, 0.0) == pytest.approx(0.0)
    # cross-check against scipy on a few points
    for z in (0.3, 2.0 + 1.0j, 5.0 - 2.0j):
        for m in (0, 1, 3, 7):
            ref = scipy.special.iv(m, z)
            assert abs(specfun.mod_bessel_i(m, z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_derivative_recurrence_k0p_is_minus_k1():
    rng = np.random.default_rng(3)
    for _ in range(12):
        z = rng.uniform(0.3, 30.0) * np.exp(1j * rng.uniform(-1.2, 1.2))
        h = 1e-5 * abs(z)
        fd = (specfun.mod_bessel_k(0, z + h) - specfun.mod_bessel_k(0, z - h)) / (2 * h)
        k1 = specfun.mod_bessel_k(1, z)
        assert abs(fd + k1) <= 1e-6 * abs(k1), z


@pytest.mark.parametrize("seam", ["series_integral", "series_asymptotic", "integral_asymptotic"])
def test_crossover_continuity(seam):
    # the two methods meeting at each internal region boundary agree to 1e-10
    # when evaluated at the same points on the seam
    if seam == "series_integral":
        # seam |z| + Re z = 16 (|z| < 13.5)
        thetas = np.linspace(0.3, 1.2, 9)
        zs = (16.0 / (1.0 + np.cos(thetas))) * np.exp(1j * thetas)
        zs = zs[np.abs(zs) < 13.4]
        branches = (specfun._k01_series, specfun._k01_integral)
    elif seam == "series_asymptotic":
        # seam |z| = 13.5 on the near-imaginary side (|z| + Re z < 16 there)
        args = np.linspace(1.39, 1.48, 5)
        args = np.concatenate([-args, args])
        zs = 13.5 * np.exp(1j * args)
        branches = (specfun._k01_series, specfun._k01_asymptotic)
    else:
        # seam |z| = 13.5 at moderate argument (integral side)
        args = np.linspace(-1.2, 1.2, 9)
        zs = 13.5 * np.exp(1j * args)
        branches = (specfun._k01_integral, specfun._k01_asymptotic)
    a0, a1 = branches[0](zs)[:2]
    b0, b1 = branches[1](zs)[:2]
    assert np.all(np.abs(a0 - b0) <= 1e-10 * np.abs(b0))
    assert np.all(np.abs(a1 - b1) <= 1e-10 * np.abs(b1))


def test_domain_errors():
    with pytest.raises(specfun.DomainError):
        specfun.mod_bessel_k(0, -1.0 + 0j)
    with pytest.raises(specfun.DomainError):
        specfun.mod_bessel_k(1, np.nan + 0j)
    with pytest.raises(specfun.DomainError):
        specfun.mod_bessel_i(0, np.inf)
    with pytest.raises(ValueError):
        specfun.mod_bessel_k(2, 1.0)


def test_log_bessel_g_series_vs_direct():
    # g(z) = K1(z)/z - 1/z^2 ; series and direct branches must agree at the seam
    for z in (0.9 - 1e-10j + 0.0, 0.89 + 0.1j, 0.95 + 0.05j, 0.5 + 0.7j):
        g = specfun.log_bessel_g(z)
        k1 = scipy.special.kv(1, z)
        ref = k1 / z - 1.0 / z**2
        assert abs(g - ref) <= 1e-10 * max(abs(ref), 1e-3)


def test_k_order_recurrence_helper():
    for z in (2.0 + 0j, 2.0 + 2.0j):
        for m in (2, 3, 5):
            ref = scipy.special.kv(m, z)
            val = specfun.mod_bessel_k_order(m, z)
            assert abs(val - ref) <= 1e-11 * abs(ref)
