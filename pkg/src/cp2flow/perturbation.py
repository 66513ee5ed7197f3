"""The unstable conformal mode of the round metric and perturbed initial data.

The round Fubini-Study metric on CP^2 is an Einstein fixed point of the flow
(up to homothety).  Its entropy-unstable direction is conformal: the mode
psi(theta) = 1 + 3 cos(2 theta) spans the nullspace of the second variation,
has zero mean against the volume element, and has a positive cubed integral,
which is the instability condition.  Initial data scale the round metric by
h = 1 + 3 eps cos(2 theta), where eps = delta / (1 + delta) for a bare
perturbation amplitude delta.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import ProfileABC, ProfileJet, ProfileRFG
from .grid import StaggeredGrid

#: Coefficient in the nullspace ODE (Delta + 12) psi = 0; equals twice the
#: Einstein constant 6 of the round metric.
EINSTEIN_ODE_COEFFICIENT = 12.0

#: Largest admissible eps: h = 1 + 3 eps cos(2 theta) stays positive iff
#: eps < 1/3.
EPSILON_MAX = 1.0 / 3.0


@dataclass(frozen=True)
class PerturbationParams:
    """Conformal perturbation amplitude.

    ``epsilon`` is the user-facing parameter; the bare amplitude is
    delta = epsilon / (1 - epsilon).  Requires 0 <= epsilon < 1/3 so the
    conformal factor stays positive.
    """

    epsilon: float
    einstein_coefficient: float = field(default=EINSTEIN_ODE_COEFFICIENT)

    def __post_init__(self):
        if not (0.0 <= self.epsilon < EPSILON_MAX):
            raise ValueError(
                f"epsilon must lie in [0, 1/3), got {self.epsilon}"
            )

    @property
    def delta(self):
        return self.epsilon / (1.0 - self.epsilon)


def psi(theta):
    """The smooth rotationally symmetric nullspace mode 1 + 3 cos(2 theta)."""
    return 1.0 + 3.0 * np.cos(2.0 * np.asarray(theta, dtype=float))


def nullspace_residual(theta):
    """Residual of psi in the radial nullspace ODE, with exact derivatives:

        psi'' + (3 cot(theta) - tan(theta)) psi' + 12 psi.

    Zero (to rounding) on the open interval (0, pi/2).
    """
    th = np.asarray(theta, dtype=float)
    d1 = -6.0 * np.sin(2.0 * th)
    d2 = -12.0 * np.cos(2.0 * th)
    drift = 3.0 * np.cos(th) / np.sin(th) - np.sin(th) / np.cos(th)
    return d2 + drift * d1 + EINSTEIN_ODE_COEFFICIENT * psi(th)


def _weighted_midpoint(n, fn):
    g = StaggeredGrid(n)
    w = np.sin(g.theta) ** 3 * np.cos(g.theta)
    return g.integrate_midpoint(fn(g.theta) * w)


def volume_integral_checks(n_quad):
    """The two volume integrals of psi against the weight sin^3 cos:

        I1 = integral of psi   dV  (should be 0, the mean-zero normalization),
        I3 = integral of psi^3 dV  (should be 2/5 > 0, the instability sign).

    The constant orbit-volume factor is dropped, so the integrals carry only
    the sin^3(theta) cos(theta) weight.  Midpoint sums on staggered grids of
    n_quad and n_quad // 2 cells are Richardson-combined to cancel the
    leading quadrature error, which the 1e-8 target for I1 requires.
    """
    n_quad = int(n_quad)
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    n_half = n_quad // 2
    r = (n_quad / n_half) ** 2
    out = []
    for fn in (psi, lambda th: psi(th) ** 3):
        fine = _weighted_midpoint(n_quad, fn)
        coarse = _weighted_midpoint(n_half, fn)
        out.append((r * fine - coarse) / (r - 1.0))
    return out[0], out[1]


def conformal_factor(params, theta):
    """h(theta) = 1 + 3 eps cos(2 theta), the conformal scaling of initial data."""
    return 1.0 + 3.0 * params.epsilon * np.cos(2.0 * np.asarray(theta, dtype=float))


def initial_profiles(params, grid):
    """Initial data h * G_round in both representations.

    Returns (ProfileABC, ProfileRFG) with

        rho = h,  f = (2 sin(2 theta) + 3 eps sin(4 theta)) / 4,  g = h sin(theta)
        a = log h,  b = 0,  c = 0.
    """
    th = grid.theta
    eps = params.epsilon
    h = conformal_factor(params, th)
    if np.any(h <= 0.0):
        raise ValueError("conformal factor not positive; epsilon too large")
    rfg = ProfileRFG(
        grid,
        rho=h,
        f=0.25 * (2.0 * np.sin(2.0 * th) + 3.0 * eps * np.sin(4.0 * th)),
        g=h * np.sin(th),
    )
    abc = ProfileABC(grid, a=np.log(h), b=np.zeros(grid.n_cells), c=np.zeros(grid.n_cells))
    return abc, rfg


def initial_profile_jet(params, theta):
    """Closed-form (rho, f, g) jet of the initial data at the given nodes.

    eps = 0 gives the round profiles (1, sin cos, sin) and their derivatives;
    used by the analytic-derivative verification path.
    """
    th = np.asarray(theta, dtype=float)
    eps = params.epsilon
    s, cth = np.sin(th), np.cos(th)
    sin2t, cos2t = np.sin(2.0 * th), np.cos(2.0 * th)
    sin4t, cos4t = np.sin(4.0 * th), np.cos(4.0 * th)

    h = 1.0 + 3.0 * eps * cos2t
    dh = -6.0 * eps * sin2t
    d2h = -12.0 * eps * cos2t

    f = 0.25 * (2.0 * sin2t + 3.0 * eps * sin4t)
    df = cos2t + 3.0 * eps * cos4t
    d2f = -2.0 * sin2t - 12.0 * eps * sin4t

    g = h * s
    dg = dh * s + h * cth
    d2g = d2h * s + 2.0 * dh * cth - h * s

    return ProfileJet(th, h, dh, d2h, f, df, d2f, g, dg, d2g)
