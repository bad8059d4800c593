"""Tests for the log-space integration engines.

Oracles are closed forms: the gamma function, incomplete-gamma mass
functions, Gaussian integrals, and direct evaluation of the tabulated
product function.
"""

import math

import numpy as np
import pytest
from scipy import special

from tailcens._quad import (
    U_HI,
    U_LO,
    TailProductTable,
    batched_log_integral,
    log_integral_precise,
)


# ---------------------------------------------------------------------------
# precise scalar engine
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("a", [0.1, 1.0, 2.5, 7.0, 40.0])
def test_precise_gamma_closed_form(a):
    got = log_integral_precise(lambda t: (a - 1.0) * np.log(t) - t)
    np.testing.assert_allclose(got, math.lgamma(a), rtol=0, atol=1e-10)


def test_precise_bounded_domain():
    got = log_integral_precise(lambda t: -t, upper=2.0)
    np.testing.assert_allclose(got, math.log(-math.expm1(-2.0)), atol=1e-12)
    # lower incomplete gamma with an integrable endpoint singularity
    got = log_integral_precise(lambda t: -0.5 * np.log(t) - t, upper=1.0)
    want = math.lgamma(0.5) + math.log(special.gammainc(0.5, 1.0))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_precise_large_shift_and_narrow_peak():
    # a unit-width Gaussian at t = 1000 occupies ~1e-6 of the transformed
    # domain; the zoomed scan must still find it and shift correctly
    got = log_integral_precise(lambda t: 5000.0 - 0.5 * (t - 1000.0) ** 2)
    np.testing.assert_allclose(got, 5000.0 + 0.5 * math.log(2 * math.pi), atol=1e-8)
    got = log_integral_precise(lambda t: -0.5 * ((t - 2e4) / 0.5) ** 2)
    np.testing.assert_allclose(got, math.log(0.5) + 0.5 * math.log(2 * math.pi), atol=1e-6)


def test_precise_vanishing_integrand():
    res = log_integral_precise(
        lambda t: np.full_like(np.asarray(t, dtype=float), -np.inf)
    )
    assert res == -math.inf


# ---------------------------------------------------------------------------
# product table
# ---------------------------------------------------------------------------


def _direct_g(x, u):
    # sum_i log1p(e^u * x_i) evaluated without the table
    return np.log1p(np.exp(u)[..., None] * x[:, None, :]).sum(axis=-1)


def test_table_matches_direct_inside_grid():
    rng = np.random.default_rng(0)
    x = rng.exponential(size=(5, 7))
    tab = TailProductTable(x)
    u = np.linspace(math.log(1e-6), math.log(1e8), 401)
    got = tab.eval(np.broadcast_to(u, (5, 401)))
    np.testing.assert_allclose(got, _direct_g(x, u), rtol=0, atol=1e-5)


def test_table_asymptotes_outside_grid():
    rng = np.random.default_rng(1)
    x = rng.exponential(size=(3, 6))
    tab = TailProductTable(x)
    u_lo = np.tile(U_LO - np.array([2.0, 5.0, 9.0]), (3, 1))
    np.testing.assert_allclose(
        tab.eval(u_lo), _direct_g(x, u_lo[0]), rtol=1e-8
    )
    u_hi = np.tile(U_HI + np.array([1.0, 6.0]), (3, 1))
    np.testing.assert_allclose(
        tab.eval(u_hi), _direct_g(x, u_hi[0]), rtol=1e-10
    )


def test_table_zero_coordinates():
    # rows may contain structural zeros (censored-free draws); the right
    # asymptote slope counts only positive coordinates
    x = np.array([[2.0, 0.0, 0.5, 0.0]])
    tab = TailProductTable(x)
    assert tab.npos[0] == 2.0
    u = np.array([[U_HI + 3.0]])
    np.testing.assert_allclose(tab.eval(u), _direct_g(x, u[0]), rtol=1e-10)


def test_table_tile_shares_values():
    x = np.array([[1.0, 0.3, 4.0]])
    tab = TailProductTable(x)
    tiled = tab.tile(4)
    u = np.linspace(-3.0, 6.0, 17)
    got = tiled.eval(np.broadcast_to(u, (4, 17)))
    want = tab.eval(u[None, :])
    for r in range(4):
        np.testing.assert_array_equal(got[r], want[0])
    with pytest.raises(ValueError):
        tiled.tile(2)


def test_table_rejects_negative_coordinates():
    with pytest.raises(ValueError):
        TailProductTable(np.array([[1.0, -0.1]]))


# ---------------------------------------------------------------------------
# batched engine
# ---------------------------------------------------------------------------


def test_batched_gamma_family():
    a = np.array([1.5, 3.0, 10.0, 25.0])
    got = batched_log_integral(lambda u: a[:, None] * u - np.exp(u), 4)
    np.testing.assert_allclose(got, special.gammaln(a), rtol=0, atol=1e-12)


def test_batched_upper_caps():
    a = np.array([1.5, 3.0, 10.0, 25.0])
    c = np.array([0.5, 2.0, 8.0, 30.0])
    got = batched_log_integral(
        lambda u: a[:, None] * u - np.exp(u), 4, u_hi_cap=np.log(c)
    )
    want = special.gammaln(a) + np.log(special.gammainc(a, c))
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_batched_matches_precise_on_product_integrand():
    # the production shape: t^{p} e^{-bt} prod_i (1 + t x_i)^{-c_i}
    rng = np.random.default_rng(7)
    x = rng.exponential(size=(6, 5))
    cexp = 1.0 + rng.random((6, 5))
    p, b = 4.0, 0.7

    def phi(u):
        t = np.exp(u)
        core = np.zeros_like(u)
        for i in range(5):
            core -= cexp[:, i : i + 1] * np.log1p(t * x[:, i : i + 1])
        return p * u - b * t + core + u

    got = batched_log_integral(phi, 6)
    for r in range(6):
        want = log_integral_precise(
            lambda t, r=r: p * np.log(t)
            - b * t
            - sum(cexp[r, i] * np.log1p(t * x[r, i]) for i in range(5))
        )
        np.testing.assert_allclose(got[r], want, rtol=0, atol=1e-9)


def test_batched_with_table_backed_integrand():
    # uniform-exponent product evaluated through the interpolation table,
    # exactly as the density kernels consume it
    rng = np.random.default_rng(11)
    x = rng.exponential(size=(4, 8))
    tab = TailProductTable(x)
    p, b, c = 6.0, 1.2, 2.5

    def phi_tab(u):
        return p * u - b * np.exp(u) - c * tab.eval(u) + u

    got = batched_log_integral(phi_tab, 4)
    for r in range(4):
        want = log_integral_precise(
            lambda t, r=r: p * np.log(t)
            - b * t
            - c * sum(np.log1p(t * x[r, i]) for i in range(8))
        )
        np.testing.assert_allclose(got[r], want, rtol=0, atol=1e-6)


def test_batched_handles_all_minus_inf_rows():
    def phi(u):
        out = -np.exp(u) + 2.0 * u
        out[1] = -np.inf
        return out

    got = batched_log_integral(phi, 2)
    np.testing.assert_allclose(got[0], special.gammaln(2.0), atol=1e-12)
    assert got[1] == -math.inf
