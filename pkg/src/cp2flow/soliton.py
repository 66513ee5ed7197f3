"""Blowdown-soliton profile ODE and its asymptotic cone.

The singularity model is the unique U(2)-invariant gradient shrinking Kahler
soliton on the blowup of C^2 at a point.  Its metric is determined by a
potential-derivative profile phi(r) > 1 solving the separable first-order ODE
integrated here; phi_r / phi is the local cone angle f^2/g^2 and tends to
1/sqrt(2), so the asymptotic cone is (f, g) = (gamma^2 s, gamma s) with
gamma = 2^(-1/4).
"""

from dataclasses import dataclass

import math

import numpy as np

SQRT2 = math.sqrt(2.0)
#: cone parameter: gamma^2 = 1/sqrt(2) is the asymptotic cone angle
GAMMA = 2.0 ** (-0.25)

_H_MIN = 1e-12
_H_MAX = 0.5


class SolitonIntegrationError(RuntimeError):
    """Raised when the profile integration loses monotonicity or stalls."""


def profile_rhs(phi):
    """Right side of the profile ODE:

        dphi/dr = phi/sqrt(2) - (sqrt(2) - 1) - (1 - 1/sqrt(2)) / phi
                = (phi - 1)(phi + sqrt(2) - 1) / (sqrt(2) phi).

    Zero at the tip fixed point phi = 1 and positive for phi > 1;
    dphi/dr / phi -> 1/sqrt(2) as phi -> infinity.
    """
    phi = np.asarray(phi, dtype=float)
    out = phi / SQRT2 - (SQRT2 - 1.0) - (1.0 - 1.0 / SQRT2) / phi
    return float(out) if out.ndim == 0 else out


def first_integral(r, phi):
    """Conserved quantity of the profile ODE (the separation constant eta):

        log(phi - 1) + (sqrt(2) - 1) log(phi + sqrt(2) - 1) - r.

    Its r-derivative along solutions is exactly
    phi_r * [1/(phi-1) + (sqrt(2)-1)/(phi+sqrt(2)-1)] - 1 = 0, as the
    factored form of the right side shows.  Diverges to -infinity as
    phi -> 1+, matching the tip at r -> -infinity.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 1.0):
        raise ValueError("first_integral requires phi > 1")
    out = np.log(phi - 1.0) + (SQRT2 - 1.0) * np.log(phi + SQRT2 - 1.0) - np.asarray(r, dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass
class SolitonTrajectory:
    """Samples (r_i, phi_i, phi_r_i) of the integrated profile, phi strictly
    increasing, anchored at r = 0; eta_gauge is the value of the conserved
    first integral there (a pure r-translation)."""

    r: np.ndarray
    phi: np.ndarray
    phi_r: np.ndarray
    eta_gauge: float

    def invariant_drift(self):
        """first_integral along the samples minus eta_gauge."""
        return first_integral(self.r, self.phi) - self.eta_gauge


def _rhs_w(w):
    """Right side in the shifted variable w = phi - 1, factored so it keeps
    full relative precision near the tip:

        dw/dr = w (w + sqrt(2)) / (sqrt(2) (1 + w)).
    """
    return w * (w + SQRT2) / (SQRT2 * (1.0 + w))


def _first_integral_w(r, w):
    # log(phi - 1) + (sqrt(2)-1) log(phi + sqrt(2) - 1) - r, in w
    return math.log(w) + (SQRT2 - 1.0) * math.log(w + SQRT2) - r


def _rk4_step_w(w, h):
    k1 = _rhs_w(w)
    k2 = _rhs_w(w + 0.5 * h * k1)
    k3 = _rhs_w(w + 0.5 * h * k2)
    k4 = _rhs_w(w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_profile(phi_start, phi_end, tol=1e-10):
    """Integrate the profile ODE from (r, phi) = (0, phi_start) until
    phi >= phi_end.

    Classical RK4 with step halving controlled by the conserved first
    integral: a step is accepted when its invariant drift is below tol * h,
    so the accumulated drift stays below tol times the integrated r-span.
    The ODE is degenerate at phi = 1 (hence phi_start must exceed 1), and
    the integration runs in the shifted variable w = phi - 1, which keeps
    both the right side and the invariant fully accurate near the tip.
    """
    if not phi_start > 1.0:
        raise ValueError("phi_start must be > 1 (the ODE is degenerate at the tip)")
    if not phi_start < phi_end:
        raise ValueError("phi_start must be below phi_end")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    r, w = 0.0, float(phi_start) - 1.0
    w_end = float(phi_end) - 1.0
    rs, ws = [r], [w]
    inv = _first_integral_w(r, w)
    eta = inv
    h = 1e-3
    while w < w_end:
        w_new = _rk4_step_w(w, h)
        if not (w_new > w):
            raise SolitonIntegrationError(f"phi not increasing at r={r} (h={h})")
        inv_new = _first_integral_w(r + h, w_new)
        drift = abs(inv_new - inv)
        if drift > tol * h:
            if h <= _H_MIN:
                raise SolitonIntegrationError("step size underflow")
            h *= 0.5
            continue
        r += h
        w = w_new
        inv = inv_new
        rs.append(r)
        ws.append(w)
        if drift < 0.05 * tol * h and h < _H_MAX:
            h = min(1.5 * h, _H_MAX)
    ws = np.asarray(ws)
    return SolitonTrajectory(np.asarray(rs), 1.0 + ws, _rhs_w(ws), eta)


def cone_reference(s):
    """Asymptotic-cone profile at arclength s > 0 from the vertex:

        f = gamma^2 s,  g = gamma s,  kappa_23 = 4 (sqrt(2) - 1) / s^2,

    with gamma = 2^(-1/4); all other sectional curvatures vanish.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("cone_reference needs s > 0")
    f = GAMMA**2 * s
    g = GAMMA * s
    kappa23 = 4.0 * (SQRT2 - 1.0) / s**2
    if f.ndim == 0:
        return float(f), float(g), float(kappa23)
    return f, g, kappa23
