import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rho_3_4, rho_exact
from smoothlab.dickman import (
    build_dickman, dickman_cdf, dickman_density, dickman_quantile, load_table, quantile_many,
    rho, rho_integral, save_table, total_mass,
)
from smoothlab.errors import OutOfRangeError, UsageError
from smoothlab.primes import EULER_GAMMA

E_MG = math.exp(-EULER_GAMMA)


def test_rho_unit_interval(dickman):
    u = np.linspace(0, 1, 1001)
    assert np.all(rho(dickman, u) == 1.0)
    assert np.array_equal(rho_integral(dickman, u), u)


@pytest.mark.parametrize("u", [1.0, 1.25, 1.5, 2.0])
def test_rho_closed_form_1_2(dickman, u):
    assert rho(dickman, u) == pytest.approx(1 - math.log(u), abs=1e-12)


@pytest.mark.parametrize("u", np.linspace(2, 3, 11).tolist())
def test_rho_dilog_oracle(dickman, u):
    assert rho(dickman, u) == pytest.approx(float(rho_exact(u)), abs=1e-13)


def test_rho_quadrature_oracle(dickman):
    assert rho(dickman, 3.5) == pytest.approx(float(rho_3_4(3.5)), abs=1e-13)


def test_rho_literature_values(dickman):
    assert rho(dickman, 3) == pytest.approx(0.04860838829, abs=1e-10)
    assert rho(dickman, 10) == pytest.approx(2.77017183772596e-11, rel=1e-9)
    assert rho(dickman, 20) > 0
    assert rho(dickman, 20) < 1e-20


def test_rho_integral_examples(dickman):
    assert rho_integral(dickman, 1) == 1.0
    assert rho_integral(dickman, 2) == pytest.approx(3 - 2 * math.log(2), abs=1e-12)
    assert rho_integral(dickman, 20) == pytest.approx(math.exp(EULER_GAMMA), abs=1e-6)


def test_delay_identity(dickman):
    u = np.linspace(1, 20, 1000)
    resid = u * rho(dickman, u) - (rho_integral(dickman, u) - rho_integral(dickman, u - 1))
    assert np.max(np.abs(resid)) <= 1e-9


def test_ode_residual(dickman):
    # u rho'(u) = -rho(u - 1), derivative by a central difference
    u = np.linspace(1.5, 19.5, 500)
    h = 1e-5
    d = (rho(dickman, u + h) - rho(dickman, u - h)) / (2 * h)
    assert np.max(np.abs(u * d + rho(dickman, u - 1))) <= 1e-8


def test_mesh_doubling(dickman):
    fine = build_dickman(20, 1e-10, 2 * dickman.nodes_per_unit)
    pts = np.random.default_rng(3).uniform(0, 20, 100)
    assert np.max(np.abs(rho(dickman, pts) - rho(fine, pts))) <= 1e-10


def test_positive_and_decreasing(dickman):
    u = np.linspace(1, 20, 5000)
    r = rho(dickman, u)
    assert np.all(r > 0)
    assert np.all(np.diff(r) < 0)


def test_domain_errors(dickman):
    with pytest.raises(UsageError):
        rho(dickman, -0.1)
    with pytest.raises(OutOfRangeError):
        rho(dickman, 20.5)
    with pytest.raises(UsageError):
        build_dickman(u_max=60)
    with pytest.raises(UsageError):
        build_dickman(tol=1e-20)


def test_cdf_examples(dickman):
    assert dickman_cdf(dickman, 0) == 0
    assert dickman_cdf(dickman, 1) == pytest.approx(E_MG, abs=1e-14)
    assert abs(dickman_cdf(dickman, 20) - 1) <= 1e-6
    assert 1 - 1e-6 <= total_mass(dickman) <= 1 + 1e-15


def test_cdf_saturation_flag(dickman):
    val, sat = dickman_cdf(dickman, 25.0, with_flag=True)
    assert sat and val == dickman_cdf(dickman, 20.0)
    assert dickman_cdf(dickman, 5.0, with_flag=True)[1] is False


def test_density(dickman):
    assert dickman_density(dickman, 0.5) == pytest.approx(E_MG)


def test_cdf_monotone(dickman):
    assert np.all(np.diff(dickman_cdf(dickman, np.linspace(0, 20, 4001))) >= 0)


def test_quantile_examples(dickman):
    assert dickman_quantile(dickman, 0) == 0
    assert dickman_quantile(dickman, E_MG) == pytest.approx(1.0, abs=1e-7)
    z = dickman_quantile(dickman, 0.9)
    assert abs(dickman_cdf(dickman, z) - 0.9) <= 1e-9
    with pytest.raises(UsageError):
        dickman_quantile(dickman, 1 - 1e-7)
    with pytest.raises(UsageError):
        dickman_quantile(dickman, -0.1)


def test_quantile_roundtrip(dickman):
    z = np.linspace(0.05, 0.95, 181)
    q = dickman_cdf(dickman, z)
    assert np.max(np.abs(quantile_many(dickman, q) - z)) <= 1e-7


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.999))
def test_quantile_many_matches_bisection(q):
    table = build_dickman()
    a = quantile_many(table, np.array([q]))[0]
    assert abs(dickman_cdf(table, a) - q) <= 1e-9


def test_cache_roundtrip(dickman, tmp_path):
    path = tmp_path / "d.tbl"
    save_table(dickman, path)
    text = path.read_text().splitlines()
    assert text[0].startswith("# smoothlab dickman table")
    assert any(line.startswith("# u_max=") for line in text[:6])
    back = load_table(path)
    u = np.linspace(0, 20, 997)
    assert np.max(np.abs(rho(back, u) - rho(dickman, u))) <= 1e-15
    assert np.max(np.abs(rho_integral(back, u) - rho_integral(dickman, u))) <= 1e-14


def test_cache_bad_header(tmp_path):
    p = tmp_path / "x.tbl"
    p.write_text("hello\n")
    with pytest.raises(UsageError):
        load_table(p)


def test_small_u_max():
    t = build_dickman(u_max=2.5)
    assert rho(t, 2.5) == pytest.approx(float(rho_exact(2.5)), abs=1e-12)
    with pytest.raises(OutOfRangeError):
        rho(t, 3)
