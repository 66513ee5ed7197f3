import numpy as np
import pytest

from conftest import abc_arrays, abc_jet_closed_form, random_smooth_coeffs, rfg_jet_from_bundle
from cp2flow.geometry import (
    ProfileABC,
    ProfileError,
    ProfileJet,
    ProfileRFG,
    abc_to_rfg,
    cone_ratio,
    deturck_v,
    fd_jet,
    jet_from_abc,
    kahler_ratio,
    radial_christoffels,
    rfg_to_abc,
    ricci_diagonal,
    sectional_curvatures,
)
from cp2flow.grid import StaggeredGrid
from cp2flow.perturbation import PerturbationParams, initial_profile_jet, initial_profiles
from cp2flow.soliton import SQRT2, cone_reference


def fs_profiles(grid):
    th = grid.theta
    return ProfileRFG(grid, np.ones_like(th), np.sin(th) * np.cos(th), np.sin(th))


# ---------------------------------------------------------------- transforms


def test_abc_to_rfg_round_metric():
    g = StaggeredGrid(128)
    zero = np.zeros(128)
    rfg = abc_to_rfg(ProfileABC(g, zero, zero, zero))
    assert np.allclose(rfg.rho, 1.0, atol=1e-15)
    assert np.allclose(rfg.f, np.sin(g.theta) * np.cos(g.theta), rtol=1e-15)
    assert np.allclose(rfg.g, np.sin(g.theta), rtol=1e-15)


def test_abc_to_rfg_conformal_scaling():
    g = StaggeredGrid(128)
    h = 1 + 0.3 * np.cos(2 * g.theta)
    zero = np.zeros(128)
    rfg = abc_to_rfg(ProfileABC(g, np.log(h), zero, zero))
    assert np.allclose(rfg.rho, h, rtol=1e-14)
    assert np.allclose(rfg.f, h * np.sin(g.theta) * np.cos(g.theta), rtol=1e-14)
    assert np.allclose(rfg.g, h * np.sin(g.theta), rtol=1e-14)


def test_abc_to_rfg_homothety():
    g = StaggeredGrid(64)
    zero = np.zeros(64)
    a = np.full(64, 0.7)
    rfg = abc_to_rfg(ProfileABC(g, a, zero, zero))
    s = np.exp(0.7)
    assert np.allclose(rfg.rho, s, rtol=1e-15)
    assert np.allclose(rfg.g, s * np.sin(g.theta), rtol=1e-15)


def test_rfg_to_abc_round_and_perturbed():
    g = StaggeredGrid(128)
    abc = rfg_to_abc(fs_profiles(g))
    assert np.allclose(abc.a, 0.0, atol=1e-14)
    assert np.allclose(abc.b, 0.0, atol=1e-11)
    assert np.allclose(abc.c, 0.0, atol=1e-11)

    _, rfg = initial_profiles(PerturbationParams(0.1), g)
    abc = rfg_to_abc(rfg)
    assert np.allclose(abc.a, np.log(1 + 0.3 * np.cos(2 * g.theta)), atol=1e-13)
    assert np.max(np.abs(abc.b)) < 1e-10
    assert np.max(np.abs(abc.c)) < 1e-10


def test_round_trip_rfg_space():
    # rfg -> abc -> rfg is conditioning-safe at any n; 1e-12 relative
    g = StaggeredGrid(512)
    rng = np.random.default_rng(3)
    for _ in range(5):
        abc = ProfileABC(g, *abc_arrays(random_smooth_coeffs(rng), g.theta))
        rfg1 = abc_to_rfg(abc)
        rfg2 = abc_to_rfg(rfg_to_abc(rfg1))
        for x, y in ((rfg1.rho, rfg2.rho), (rfg1.f, rfg2.f), (rfg1.g, rfg2.g)):
            assert np.max(np.abs(x / y - 1.0)) < 1e-12


def test_round_trip_abc_space():
    # b and c divide out sin^2 factors, so their round-trip error grows like
    # eps / sin^2(theta_0); compare a directly and (b, c) through Y and Z
    g = StaggeredGrid(64)
    rng = np.random.default_rng(4)
    s2 = np.sin(g.theta) ** 2
    q2 = np.sin(2 * g.theta) ** 2
    for _ in range(5):
        abc1 = ProfileABC(g, *abc_arrays(random_smooth_coeffs(rng), g.theta))
        abc2 = rfg_to_abc(abc_to_rfg(abc1))
        assert np.max(np.abs(abc1.a - abc2.a)) < 1e-12
        assert np.max(np.abs((abc1.b - abc2.b) * s2)) < 1e-12
        assert np.max(np.abs((abc1.c - abc2.c) * q2)) < 1e-12
        # raw fields at a grid-aware tolerance
        tol = 5e-15 / min(s2[0], q2[0])
        assert np.max(np.abs(abc1.b - abc2.b)) < tol
        assert np.max(np.abs(abc1.c - abc2.c)) < tol


def test_rfg_to_abc_rejects_nonpositive():
    g = StaggeredGrid(32)
    p = fs_profiles(g)
    bad = ProfileRFG(g, p.rho, -p.f, p.g)
    with pytest.raises(ProfileError):
        rfg_to_abc(bad)


def test_jet_from_abc_matches_symbolic(analytic_bundle):
    g = StaggeredGrid(256)
    rng = np.random.default_rng(11)
    for _ in range(5):
        coeffs = random_smooth_coeffs(rng)
        mine = jet_from_abc(abc_jet_closed_form(coeffs, g.theta))
        ref, _, _ = rfg_jet_from_bundle(analytic_bundle, coeffs, g.theta)
        for name in ("rho", "drho", "d2rho", "f", "df", "d2f", "g", "dg", "d2g"):
            x, y = getattr(mine, name), getattr(ref, name)
            scale = max(1.0, np.max(np.abs(y)))
            assert np.max(np.abs(x - y)) / scale < 1e-11, name


# ----------------------------------------------------------------- curvature


def test_sectional_curvatures_round_metric():
    # the round profiles have kappa_12 = kappa_02 = 1, kappa_23 = kappa_01 = 4
    # at every point
    g = StaggeredGrid(256)
    jet = initial_profile_jet(PerturbationParams(0.0), g.theta)
    k = sectional_curvatures(jet)
    assert np.allclose(k.k12, 1.0, atol=1e-9)
    assert np.allclose(k.k23, 4.0, atol=1e-9)
    assert np.allclose(k.k01, 4.0, atol=1e-9)
    assert np.allclose(k.k02, 1.0, atol=1e-9)


def test_sectional_curvatures_cone():
    # cone profile in arclength: all curvatures vanish except the orbit one
    s = np.linspace(0.5, 3.0, 200)
    gamma = 2.0 ** (-0.25)
    one, zero = np.ones_like(s), np.zeros_like(s)
    jet = ProfileJet(
        s, one, zero, zero,
        gamma**2 * s, np.full_like(s, gamma**2), zero,
        gamma * s, np.full_like(s, gamma), zero,
    )
    k = sectional_curvatures(jet)
    expected = 4 * (SQRT2 - 1) / s**2
    assert np.allclose(k.k23, expected, rtol=1e-12)
    for other in (k.k12, k.k01, k.k02):
        assert np.max(np.abs(other)) < 1e-12


def test_sectional_symmetry_f_equals_g():
    # with f = g the two orbit curvatures coincide
    s = np.linspace(0.3, 1.2, 50)
    f = np.sin(s)
    df = np.cos(s)
    d2f = -np.sin(s)
    one, zero = np.ones_like(s), np.zeros_like(s)
    jet = ProfileJet(s, one, zero, zero, f, df, d2f, f, df, d2f)
    k = sectional_curvatures(jet)
    assert np.allclose(k.k12, k.k23, atol=1e-12)


def test_ricci_round_is_einstein():
    g = StaggeredGrid(256)
    jet = initial_profile_jet(PerturbationParams(0.0), g.theta)
    for r in ricci_diagonal(sectional_curvatures(jet)):
        assert np.max(np.abs(r - 6.0)) < 1e-10


def test_ricci_homothety_scaling():
    # scaling the metric by s^2 scales orthonormal Ricci eigenvalues by 1/s^2
    g = StaggeredGrid(128)
    jet = initial_profile_jet(PerturbationParams(0.0), g.theta)
    s = 1.8
    scaled = ProfileJet(
        jet.theta,
        s * jet.rho, s * jet.drho, s * jet.d2rho,
        s * jet.f, s * jet.df, s * jet.d2f,
        s * jet.g, s * jet.dg, s * jet.d2g,
    )
    for r in ricci_diagonal(sectional_curvatures(scaled)):
        assert np.max(np.abs(r - 6.0 / s**2)) < 1e-10


def test_point_values_at_pi_over_4():
    th = np.array([np.pi / 4])
    jet = initial_profile_jet(PerturbationParams(0.0), th)
    k = sectional_curvatures(jet)
    assert k.k12[0] == pytest.approx(1.0, abs=1e-13)
    assert k.k23[0] == pytest.approx(4.0, abs=1e-13)
    assert k.k01[0] == pytest.approx(4.0, abs=1e-13)
    assert k.k02[0] == pytest.approx(1.0, abs=1e-13)
    r00, r11, r22 = ricci_diagonal(k)
    assert r00[0] == pytest.approx(6.0, abs=1e-12)
    assert r11[0] == pytest.approx(6.0, abs=1e-12)
    assert r22[0] == pytest.approx(6.0, abs=1e-12)


# --------------------------------------------------------------- diagnostics


def test_kahler_ratio_round_and_flipped():
    g = StaggeredGrid(256)
    jet = initial_profile_jet(PerturbationParams(0.0), g.theta)
    assert np.allclose(kahler_ratio(jet), 1.0, atol=1e-12)
    flipped = ProfileJet(
        jet.theta, jet.rho, jet.drho, jet.d2rho,
        -jet.f, -jet.df, -jet.d2f, jet.g, jet.dg, jet.d2g,
    )
    assert np.allclose(kahler_ratio(flipped), -1.0, atol=1e-12)


def test_kahler_ratio_perturbed_at_pi_over_4():
    # K = 1 + rho' tan(theta) / rho = 1 - 0.6 at theta = pi/4, eps = 0.1
    th = np.array([np.pi / 4])
    jet = initial_profile_jet(PerturbationParams(0.1), th)
    assert kahler_ratio(jet)[0] == pytest.approx(0.4, abs=1e-13)


def test_cone_ratio_values():
    g = StaggeredGrid(128)
    fs = fs_profiles(g)
    assert np.allclose(cone_ratio(fs), np.cos(g.theta) ** 2, rtol=1e-13)
    s = np.linspace(0.2, 5.0, 64)
    f, gg, _ = cone_reference(s)
    cone = ProfileRFG(None, np.ones_like(s), f, gg)
    assert np.allclose(cone_ratio(cone), 1 / SQRT2, rtol=1e-14)
    scaled = ProfileRFG(None, fs.rho * 2.3, fs.f * 2.3, fs.g * 2.3)
    assert np.allclose(cone_ratio(scaled), cone_ratio(fs), rtol=1e-13)


def test_radial_christoffels_closed_forms():
    g = StaggeredGrid(256)
    th = g.theta
    chr_fs = radial_christoffels(initial_profile_jet(PerturbationParams(0.0), th))
    assert np.max(np.abs(chr_fs.gamma00)) < 1e-14
    assert np.allclose(chr_fs.gamma11, -0.25 * np.sin(4 * th), atol=1e-14)
    assert np.allclose(chr_fs.gamma22, -0.5 * np.sin(2 * th), atol=1e-14)

    eps = 0.1
    h = 1 + 3 * eps * np.cos(2 * th)
    chr_p = radial_christoffels(initial_profile_jet(PerturbationParams(eps), th))
    assert np.allclose(chr_p.gamma00, -6 * eps * np.sin(2 * th) / h, atol=1e-10)
    assert np.allclose(
        chr_p.gamma11,
        -np.sin(2 * th) * (np.cos(2 * th) + 3 * eps * np.cos(4 * th)) / (2 * h),
        atol=1e-10,
    )
    assert np.allclose(
        chr_p.gamma22,
        -np.sin(th) * np.cos(th) * (1 - 6 * eps + 9 * eps * np.cos(2 * th)) / h,
        atol=1e-10,
    )


def test_christoffels_continuous_in_eps():
    g = StaggeredGrid(64)
    chr_fs = radial_christoffels(initial_profile_jet(PerturbationParams(0.0), g.theta))
    chr_small = radial_christoffels(initial_profile_jet(PerturbationParams(1e-9), g.theta))
    assert np.max(np.abs(chr_small.gamma00 - chr_fs.gamma00)) < 1e-7
    assert np.max(np.abs(chr_small.gamma11 - chr_fs.gamma11)) < 1e-7
    assert np.max(np.abs(chr_small.gamma22 - chr_fs.gamma22)) < 1e-7


def test_deturck_v_round_and_perturbed():
    g = StaggeredGrid(256)
    th = g.theta
    assert np.max(np.abs(deturck_v(initial_profile_jet(PerturbationParams(0.0), th)))) < 1e-12

    eps = 0.1
    v = deturck_v(initial_profile_jet(PerturbationParams(eps), th))
    closed = 12 * eps * np.sin(2 * th) / (1 + 3 * eps * np.cos(2 * th)) ** 3
    assert np.max(np.abs(v - closed)) < 1e-10

    point = deturck_v(initial_profile_jet(PerturbationParams(0.1), np.array([np.pi / 4])))
    assert point[0] == pytest.approx(1.2, abs=1e-13)


def test_fd_route_converges_to_analytic():
    # the finite-difference jet reproduces closed-form curvature at order 2
    params = PerturbationParams(0.1)

    def err(n):
        g = StaggeredGrid(n)
        abc, _ = initial_profiles(params, g)
        exact = ricci_diagonal(sectional_curvatures(initial_profile_jet(params, g.theta)))
        approx = ricci_diagonal(sectional_curvatures(fd_jet(abc)))
        return max(np.max(np.abs(e - a)) for e, a in zip(exact, approx))

    e256, e512 = err(256), err(512)
    assert 3.4 < e256 / e512 < 4.6
