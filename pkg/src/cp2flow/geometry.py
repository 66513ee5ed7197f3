"""Metric profiles on the cohomogeneity-one ansatz, transforms between their
representations, and curvature / gauge diagnostics.

The metric is

    G = rho^2 dtheta^2 + f^2 w1 x w1 + g^2 (w2 x w2 + w3 x w3)

with U(2) symmetry, theta in [0, pi/2], (w1, w2, w3) a Milnor coframe on the
SU(2) orbits.  Two equivalent representations are used:

* raw profiles (rho, f, g) -- the representation curvature formulas live in;
* regularized fields (a, b, c), defined through

      g   = e^a sin(theta),
      f   = e^Y cos(theta) g,      Y = b sin^2(theta),
      rho = e^(a + Y + Z),         Z = c sin^2(2 theta),

  which absorb the boundary behavior of (rho, f, g): a, b and c all extend
  evenly across both endpoints, so a single parity rule differences them.
  (f and g themselves have mixed odd/even behavior at the two ends and are
  never differenced directly.)

Curvature, connection and diagnostic formulas are pointwise algebra over
(value, d/dtheta, d2/dtheta2) triples, bundled in jet containers below.  How
the derivatives are produced -- parity finite differences routed through
(a, b, c), or caller-supplied closed forms -- is the caller's choice, which
keeps stencil error out of the algebra tests.
"""

from dataclasses import dataclass

import numpy as np

from .grid import EVEN, StaggeredGrid


class ProfileError(ValueError):
    """Raised when a profile violates positivity or finiteness requirements."""


@dataclass
class ProfileABC:
    """Regularized metric state (a, b, c) on a staggered grid."""

    grid: StaggeredGrid
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def copy(self):
        return ProfileABC(self.grid, self.a.copy(), self.b.copy(), self.c.copy())


@dataclass
class ProfileRFG:
    """Raw metric profiles (rho, f, g) on a staggered grid."""

    grid: StaggeredGrid
    rho: np.ndarray
    f: np.ndarray
    g: np.ndarray


@dataclass
class AbcJet:
    """(a, b, c) together with first and second theta-derivatives."""

    theta: np.ndarray
    a: np.ndarray
    da: np.ndarray
    d2a: np.ndarray
    b: np.ndarray
    db: np.ndarray
    d2b: np.ndarray
    c: np.ndarray
    dc: np.ndarray
    d2c: np.ndarray

    @classmethod
    def from_profile(cls, p):
        """Finite-difference jet: even-parity stencils at both endpoints."""
        g = p.grid
        return cls(
            g.theta,
            p.a, g.d1(p.a, EVEN), g.d2(p.a, EVEN),
            p.b, g.d1(p.b, EVEN), g.d2(p.b, EVEN),
            p.c, g.d1(p.c, EVEN), g.d2(p.c, EVEN),
        )


@dataclass
class ProfileJet:
    """(rho, f, g) with first and second theta-derivatives.

    Input to every curvature/connection/diagnostic formula.  Construct with
    :func:`jet_from_abc` (finite differences, production path) or directly
    from closed-form derivatives (test oracles).
    """

    theta: np.ndarray
    rho: np.ndarray
    drho: np.ndarray
    d2rho: np.ndarray
    f: np.ndarray
    df: np.ndarray
    d2f: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray


@dataclass
class SectionalCurvatures:
    """The four distinct sectional curvatures of the ansatz.

    k12 = k31 and k02 = k03 by the U(2) symmetry; the index 0 is the radial
    direction d/ds.
    """

    k12: np.ndarray
    k23: np.ndarray
    k01: np.ndarray
    k02: np.ndarray


@dataclass
class RadialChristoffels:
    """Radial (upper index 0) connection coefficients in the theta coframe."""

    gamma00: np.ndarray
    gamma11: np.ndarray
    gamma22: np.ndarray


def abc_to_rfg(p):
    """Reconstruct raw profiles from the regularized fields."""
    th = p.grid.theta
    s, cth = np.sin(th), np.cos(th)
    y = p.b * s**2
    z = p.c * np.sin(2.0 * th) ** 2
    g = np.exp(p.a) * s
    f = np.exp(y) * cth * g
    rho = np.exp(p.a + y + z)
    out = ProfileRFG(p.grid, rho, f, g)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise ProfileError("abc_to_rfg produced non-finite values (exponential overflow)")
    return out


def rfg_to_abc(p):
    """Invert the defining relations; requires rho, f, g > 0 on all cells.

    Note the conditioning: b = Y / sin^2(theta) and c = Z / sin^2(2 theta)
    amplify the eps-level uncertainty of the logarithms by the inverse
    sine factors near the endpoints.  Y and Z themselves (and hence the
    reconstructed metric) round-trip at machine precision.
    """
    if not (np.all(p.rho > 0.0) and np.all(p.f > 0.0) and np.all(p.g > 0.0)):
        raise ProfileError("rfg_to_abc requires positive rho, f, g")
    th = p.grid.theta
    s, cth = np.sin(th), np.cos(th)
    a = np.log(p.g / s)
    y = np.log(p.f / (p.g * cth))
    z = np.log(p.rho) - a - y
    return ProfileABC(p.grid, a, y / s**2, z / np.sin(2.0 * th) ** 2)


def jet_from_abc(aj):
    """Exact chain rule from an (a, b, c) jet to the (rho, f, g) jet.

    The singular trig factors are combined analytically (cot^2 - csc^2 = -1
    and the 2-theta analogue), so no individually divergent term survives.
    """
    th = aj.theta
    s, cth = np.sin(th), np.cos(th)
    sin2t, cos2t = np.sin(2.0 * th), np.cos(2.0 * th)
    sin4t, cos4t = np.sin(4.0 * th), np.cos(4.0 * th)
    cot = cth / s
    cot2t = cos2t / sin2t

    y = aj.b * s**2
    dy = aj.db * s**2 + aj.b * sin2t
    d2y = aj.d2b * s**2 + 2.0 * aj.db * sin2t + 2.0 * aj.b * cos2t
    z = aj.c * sin2t**2
    dz = aj.dc * sin2t**2 + 2.0 * aj.c * sin4t
    d2z = aj.d2c * sin2t**2 + 4.0 * aj.dc * sin4t + 8.0 * aj.c * cos4t

    g = np.exp(aj.a) * s
    dg = g * (aj.da + cot)
    d2g = g * (aj.d2a + aj.da**2 + 2.0 * aj.da * cot - 1.0)

    f = np.exp(aj.a + y) * s * cth
    lf = aj.da + dy
    df = f * (lf + 2.0 * cot2t)
    d2f = f * (aj.d2a + d2y + lf**2 + 4.0 * lf * cot2t - 4.0)

    w = aj.a + y + z
    dw = aj.da + dy + dz
    rho = np.exp(w)
    drho = rho * dw
    d2rho = rho * (aj.d2a + d2y + d2z + dw**2)

    return ProfileJet(th, rho, drho, d2rho, f, df, d2f, g, dg, d2g)


def fd_jet(p):
    """Finite-difference (rho, f, g) jet of a profile.

    Accepts either representation; an RFG profile is converted first so that
    differencing always acts on the uniformly even fields (a, b, c).
    """
    if isinstance(p, ProfileRFG):
        p = rfg_to_abc(p)
    return jet_from_abc(AbcJet.from_profile(p))


def _as_jet(p):
    if isinstance(p, ProfileJet):
        return p
    return fd_jet(p)


def sectional_curvatures(p):
    """Sectional curvatures from a profile or jet.

    With s the arclength (ds = rho dtheta):

        k12 = f^2 / g^4 - f_s g_s / (f g)
        k23 = (4 g^2 - 3 f^2) / g^4 - g_s^2 / g^2
        k01 = -f_ss / f
        k02 = -g_ss / g

    where F_s = F_theta / rho and F_ss = F_thetatheta / rho^2
    - rho_theta F_theta / rho^3.
    """
    j = _as_jet(p)
    if np.any(j.f == 0.0) or np.any(j.g == 0.0):
        raise ProfileError("sectional_curvatures: f or g vanishes on a cell")
    rho2 = j.rho**2
    fs = j.df / j.rho
    gs = j.dg / j.rho
    fss = j.d2f / rho2 - j.drho * j.df / (rho2 * j.rho)
    gss = j.d2g / rho2 - j.drho * j.dg / (rho2 * j.rho)
    g2 = j.g**2
    g4 = g2**2
    f2 = j.f**2
    k12 = f2 / g4 - fs * gs / (j.f * j.g)
    k23 = (4.0 * g2 - 3.0 * f2) / g4 - gs**2 / g2
    k01 = -fss / j.f
    k02 = -gss / j.g
    return SectionalCurvatures(k12, k23, k01, k02)


def ricci_diagonal(k):
    """Orthonormal-frame Ricci eigenvalues (R00, R11, R22) as sectional sums.

    For the diagonal ansatz: R00 = k01 + 2 k02, R11 = k01 + 2 k12,
    R22 = k02 + k12 + k23.  The round Fubini-Study profiles give 6 for all
    three (the Einstein constant of CP^2).
    """
    return k.k01 + 2.0 * k.k02, k.k01 + 2.0 * k.k12, k.k02 + k.k12 + k.k23


def kahler_ratio(p):
    """K = g g_s / f, the local closeness-to-Kahler measure.

    The ansatz metric is Kahler iff f = g g_s, i.e. K = 1; K = -1 is Kahler
    with the orientation of s reversed.
    """
    j = _as_jet(p)
    if np.any(j.f == 0.0):
        raise ProfileError("kahler_ratio: f vanishes on a cell")
    return j.g * (j.dg / j.rho) / j.f


def cone_ratio(p):
    """Cone angle gamma^2 = f^2 / g^2 (scale invariant)."""
    if np.any(np.asarray(p.g) == 0.0):
        raise ProfileError("cone_ratio: g vanishes on a cell")
    return (p.f / p.g) ** 2


def radial_christoffels(p):
    """Radial connection coefficients of the ansatz metric:

    Gamma^0_00 = rho_theta / rho,  Gamma^0_11 = -f f_theta / rho^2,
    Gamma^0_22 = Gamma^0_33 = -g g_theta / rho^2.
    """
    j = _as_jet(p)
    rho2 = j.rho**2
    return RadialChristoffels(j.drho / j.rho, -j.f * j.df / rho2, -j.g * j.dg / rho2)


def deturck_v(p):
    """Radial component v of the gauge vector field measured against the
    round reference connection:

        v = rho_theta / rho^3
            + (rho^2 sin(4 theta)/4 - f f_theta) / (rho^2 f^2)
            + (rho^2 sin(2 theta) - 2 g g_theta) / (rho^2 g^2).

    Vanishes identically on the round (Fubini-Study) profiles.
    """
    j = _as_jet(p)
    th = j.theta
    rho2 = j.rho**2
    if np.any(j.f == 0.0) or np.any(j.g == 0.0):
        raise ProfileError("deturck_v: f or g vanishes on a cell")
    return (
        j.drho / (rho2 * j.rho)
        + (0.25 * rho2 * np.sin(4.0 * th) - j.f * j.df) / (rho2 * j.f**2)
        + (rho2 * np.sin(2.0 * th) - 2.0 * j.g * j.dg) / (rho2 * j.g**2)
    )
