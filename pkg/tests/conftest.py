"""Shared test helpers.

``analytic_bundle`` builds, once per session, closed-form evaluators for a
family of smooth profiles

    a = a0 + a1 cos(2 theta) + a2 cos(4 theta)   (same shape for b, c)

differentiated symbolically, entirely independently of the package's own
chain-rule code.  Evaluating the bundle at random coefficient draws yields
exact (rho, f, g) jets plus the gauge vector and its derivative, which are
the injection oracles for the algebra cross-checks.
"""

import numpy as np
import pytest

from cp2flow.geometry import AbcJet, ProfileJet


def random_smooth_coeffs(rng, scale=0.25):
    """Coefficient triples (3 x 3) for a bounded smooth (a, b, c) profile."""
    return rng.uniform(-scale, scale, size=(3, 3))


def abc_arrays(coeffs, theta):
    """Values of the cos(2 k theta) expansions at the nodes."""
    basis = np.stack([np.cos(2.0 * k * theta) for k in range(3)])
    return coeffs @ basis


def abc_jet_closed_form(coeffs, theta):
    """Exact jet of the trig-polynomial (a, b, c) profile."""
    vals = []
    for row in coeffs:
        v = sum(row[k] * np.cos(2.0 * k * theta) for k in range(3))
        d1 = sum(-2.0 * k * row[k] * np.sin(2.0 * k * theta) for k in range(3))
        d2 = sum(-4.0 * k * k * row[k] * np.cos(2.0 * k * theta) for k in range(3))
        vals.extend((v, d1, d2))
    return AbcJet(theta, *vals)


@pytest.fixture(scope="session")
def analytic_bundle():
    """dict of lambdified closed forms keyed by quantity name.

    Each entry maps (theta_array, coeff_flat_9) -> array.  Provided
    quantities: rho, drho, d2rho, f, df, d2f, g, dg, d2g, v, dv.
    """
    import sympy as sp

    th = sp.symbols("theta", positive=True)
    cs = sp.symbols("p0:9")
    a = cs[0] + cs[1] * sp.cos(2 * th) + cs[2] * sp.cos(4 * th)
    b = cs[3] + cs[4] * sp.cos(2 * th) + cs[5] * sp.cos(4 * th)
    c = cs[6] + cs[7] * sp.cos(2 * th) + cs[8] * sp.cos(4 * th)
    y = b * sp.sin(th) ** 2
    z = c * sp.sin(2 * th) ** 2
    g = sp.exp(a) * sp.sin(th)
    f = sp.exp(y) * sp.cos(th) * g
    rho = sp.exp(a + y + z)
    v = (
        sp.diff(rho, th) / rho**3
        + (sp.Rational(1, 4) * rho**2 * sp.sin(4 * th) - f * sp.diff(f, th)) / (rho**2 * f**2)
        + (rho**2 * sp.sin(2 * th) - 2 * g * sp.diff(g, th)) / (rho**2 * g**2)
    )
    quantities = {
        "rho": rho,
        "drho": sp.diff(rho, th),
        "d2rho": sp.diff(rho, th, 2),
        "f": f,
        "df": sp.diff(f, th),
        "d2f": sp.diff(f, th, 2),
        "g": g,
        "dg": sp.diff(g, th),
        "d2g": sp.diff(g, th, 2),
        "v": v,
        "dv": sp.diff(v, th),
    }
    return {
        name: sp.lambdify((th, cs), expr, "numpy") for name, expr in quantities.items()
    }


def rfg_jet_from_bundle(bundle, coeffs, theta):
    flat = tuple(coeffs.ravel())
    q = {name: fn(theta, flat) for name, fn in bundle.items()}
    jet = ProfileJet(
        theta,
        q["rho"], q["drho"], q["d2rho"],
        q["f"], q["df"], q["d2f"],
        q["g"], q["dg"], q["d2g"],
    )
    return jet, q["v"], q["dv"]


def rel_err(x, y):
    """Max-norm difference scaled by the larger max-norm (floored at 1)."""
    scale = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1.0)
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) / scale
