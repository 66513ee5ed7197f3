"""The evolution engine: right sides for (a, b, c), CFL-limited explicit Euler
stepping, stopping logic, diagnostics, and the raw-profile right sides used as
cross-check oracles.

The production loop evolves only the regularized fields (a, b, c), whose
equations are strictly parabolic and admit plain even-parity Neumann closure
at both ends.  The equivalent (rho, f, g)-form systems -- pure evolution in
the fixed theta gauge, and the gauge-fixed parabolic version with the
reference-connection drift -- exist here solely as test oracles: the pure
form is not parabolic in rho and is never stepped.

Singular-looking source terms such as (e^{2Z} - 1) / sin^2(2 theta) are
evaluated through expm1/sinh so that their finite limits at the endpoints
survive in floating point; each rearrangement is an exact identity.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    AbcJet,
    ProfileABC,
    abc_to_rfg,
    cone_ratio,
    fd_jet,
    kahler_ratio,
)
from .grid import StaggeredGrid
from .perturbation import EPSILON_MAX, PerturbationParams, initial_profiles

RUNNING = "running"
REACHED_T_MAX = "reached_t_max"
REACHED_SINGULARITY = "reached_singularity_threshold"
FAILED_NONFINITE = "failed_nonfinite"
FAILED_NONPOSITIVE = "failed_nonpositive_metric"

#: log of the smallest positive normal double; an exponent below this means
#: the reconstructed metric coefficient underflows to zero.
_LOG_TINY = math.log(np.finfo(float).tiny)


class FlowError(RuntimeError):
    """Raised for non-finite right sides outside the stepping loop."""


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters.  t_max defaults to the extinction time 1/12 of the
    unperturbed round metric; perturbed runs hit the curvature threshold
    earlier."""

    epsilon: float
    n_cells: int = 2048
    cfl_safety: float = 0.5
    t_max: float = 1.0 / 12.0
    stop_inv_kappa: float = 1e-6
    snapshot_every: int = 200_000
    timeseries_every: int = 500

    def __post_init__(self):
        if not (0.0 <= self.epsilon < EPSILON_MAX):
            raise ValueError(f"epsilon must lie in [0, 1/3), got {self.epsilon}")
        if self.n_cells < 64:
            raise ValueError("n_cells must be at least 64")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.stop_inv_kappa <= 0.0:
            raise ValueError("stop_inv_kappa must be positive")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.snapshot_every < 1 or self.timeseries_every < 1:
            raise ValueError("emission cadences must be positive")

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "n_cells": self.n_cells,
            "cfl_safety": self.cfl_safety,
            "t_max": self.t_max,
            "stop_inv_kappa": self.stop_inv_kappa,
            "snapshot_every": self.snapshot_every,
            "timeseries_every": self.timeseries_every,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class FlowState:
    """Mutable integration state; stepping returns a new instance."""

    t: float
    step_index: int
    profile: ProfileABC
    last_dt: float = 0.0
    status: str = RUNNING


class TrigTables:
    """theta-dependent factors of the right sides, precomputed once per grid."""

    def __init__(self, grid):
        self.grid = grid
        th = grid.theta
        s, cth = np.sin(th), np.cos(th)
        self.sin = s
        self.cos = cth
        self.sin_sq = s * s
        self.cos_sq = cth * cth
        self.inv_sin_sq = 1.0 / self.sin_sq
        self.inv_sin_4 = self.inv_sin_sq**2
        self.sin2t = np.sin(2.0 * th)
        self.cos2t = np.cos(2.0 * th)
        self.sin2t_sq = self.sin2t**2
        self.inv_sin2t = 1.0 / self.sin2t
        self.inv_sin2t_sq = self.inv_sin2t**2
        self.inv_sin2t_4 = self.inv_sin2t_sq**2
        self.cot = cth / s
        self.tan = s / cth
        self.cot2t = self.cos2t / self.sin2t
        self.one_plus_cos_sq = 1.0 + self.cos_sq
        self.log_sin = np.log(s)
        # f = e^(a+Y) sin cos: log of the trig part, for positivity checks
        self.log_sincos = self.log_sin + np.log(cth)


def _tables_for(grid, tables):
    if tables is None or tables.grid is not grid:
        return TrigTables(grid)
    return tables


def _fd_pair(grid, values):
    """First and second even-parity derivatives from one ghost extension."""
    ext = grid.extended(values, "even")
    left, right = ext[:-2], ext[2:]
    return (right - left) / (2.0 * grid.dtheta), (right + left - 2.0 * values) / grid.dtheta**2


def q_field(p, tables=None):
    """Drift coefficient Q = 2 e^{2Z} (cot(2 theta) + e^{2Y} cot(theta)).

    Equals rho^2 sin cos (cos(2 theta)/f^2 + 2/g^2) in raw variables; on the
    flat state it reduces to 3 cot(theta) - tan(theta), the drift of the
    radial Laplacian.  Diverges like 3/theta toward theta = 0, so it is only
    ever evaluated at cell centers.
    """
    T = _tables_for(p.grid, tables)
    y2 = 2.0 * p.b * T.sin_sq
    z2 = 2.0 * p.c * T.sin2t_sq
    return 2.0 * np.exp(z2) * (T.cot2t + np.exp(y2) * T.cot)


def rhs_abc(p, tables=None, jet=None, check=True):
    """Time derivatives (da/dt, db/dt, dc/dt) of the regularized fields.

    ``p`` may be a ProfileABC (derivatives by even-parity differencing) or an
    AbcJet with caller-supplied derivatives; ``jet`` overrides the
    differencing when both are given.  Each returned rate includes the
    1/rho^2 prefactor.
    """
    if jet is None and isinstance(p, AbcJet):
        jet = p
    if tables is None:
        grid = p.grid if isinstance(p, ProfileABC) else None
        if grid is None:
            raise ValueError("rhs_abc needs TrigTables when called with a bare jet")
        tables = TrigTables(grid)
    T = tables

    if jet is None:
        a, b, c = p.a, p.b, p.c
        da, d2a = _fd_pair(p.grid, a)
        db, d2b = _fd_pair(p.grid, b)
        dc, d2c = _fd_pair(p.grid, c)
    else:
        a, b, c = jet.a, jet.b, jet.c
        da, d2a = jet.da, jet.d2a
        db, d2b = jet.db, jet.d2b
        dc, d2c = jet.dc, jet.d2c

    y = b * T.sin_sq
    z = c * T.sin2t_sq
    e2y = np.exp(2.0 * y)
    e2z = np.exp(2.0 * z)
    e2yz = e2y * e2z
    m2y = np.expm1(2.0 * y)
    m2z = np.expm1(2.0 * z)
    m2yz = np.expm1(2.0 * (y + z))
    m4y2z = np.expm1(2.0 * (2.0 * y + z))
    inv_rho2 = np.exp(-2.0 * (a + y + z))
    q = 2.0 * e2z * (T.cot2t + e2y * T.cot)

    # all theta-singular sources below are grouped so each ratio has a finite
    # endpoint limit: m2yz/sin^2 -> 2b + 8c cos^2, (m2y - 2y)/sin^4 -> 2b^2, ...
    da_dt = inv_rho2 * (
        d2a
        + q * da
        - 6.0
        + (2.0 * T.cos_sq * m4y2z + (2.0 * T.cos_sq - 4.0) * m2yz + T.cos2t * m2z)
        * T.inv_sin_sq
    )

    db_dt = inv_rho2 * (
        d2b
        + (q + 4.0 * T.cot) * db
        - 2.0 * b * (m2yz + e2z * m2y) * T.inv_sin_sq
        - 4.0 * b * (1.0 + e2z + e2yz)
        + 2.0 * e2z * m2y * (3.0 + 2.0 * m2y) * T.inv_sin_sq
        + 4.0 * m2z * T.inv_sin2t_sq
        - 4.0 * e2yz * (m2y - 2.0 * y) * T.inv_sin_4
    )

    a_s = da * T.inv_sin2t
    wc = T.sin2t * dc + 4.0 * T.cos2t * c
    dc_dt = inv_rho2 * (
        d2c
        + (q + 8.0 * T.cot2t) * dc
        - 8.0 * c * (2.0 + e2z + e2yz)
        - m2yz * T.inv_sin_sq * (2.0 * a_s - 4.0 * c)
        - m2z * T.inv_sin2t_sq * (
            -8.0 * c + 4.0 * T.cot2t * da + 2.0 * T.cos2t * (T.tan * db + 2.0 * b) - 6.0
        )
        + 2.0 * e2yz * (np.sinh(y) * T.inv_sin_sq) ** 2
        - 8.0 * T.one_plus_cos_sq * (m2z - 2.0 * z) * T.inv_sin2t_4
        + 2.0 * a_s**2
        - wc * (wc + T.tan * db + 2.0 * b + 2.0 * a_s)
    )

    if check:
        for name, arr in (("da/dt", da_dt), ("db/dt", db_dt), ("dc/dt", dc_dt)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise FlowError(f"non-finite {name} first at cell {bad[0]}")
    return da_dt, db_dt, dc_dt


def abc_rates_to_rfg(p, rates):
    """Chain rule from (da/dt, db/dt, dc/dt) to (drho/dt, df/dt, dg/dt).

    rho = e^(a+Y+Z), f = e^(a+Y) sin cos, g = e^a sin give
    drho = rho (da + s^2 db + sin^2(2t) dc), df = f (da + s^2 db), dg = g da.
    """
    da_dt, db_dt, dc_dt = rates
    th = p.grid.theta
    s2 = np.sin(th) ** 2
    q2 = np.sin(2.0 * th) ** 2
    rfg = abc_to_rfg(p)
    return (
        rfg.rho * (da_dt + s2 * db_dt + q2 * dc_dt),
        rfg.f * (da_dt + s2 * db_dt),
        rfg.g * da_dt,
    )


def rhs_rfg_plain(j):
    """Pure-evolution rates of (rho, f, g) in the fixed theta gauge.

    Oracle only: the rho equation makes this system non-parabolic, so it is
    never stepped.
    """
    rho, f, g = j.rho, j.f, j.g
    r1, f1, g1 = j.drho, j.df, j.dg
    r2, f2, g2 = j.d2rho, j.d2f, j.d2g
    rho2 = rho**2
    drho = f2 / (rho * f) - r1 * f1 / (rho2 * f) + 2.0 * g2 / (rho * g) - 2.0 * r1 * g1 / (rho2 * g)
    df = f2 / rho2 - r1 * f1 / (rho2 * rho) + 2.0 * f1 * g1 / (rho2 * g) - 2.0 * f**3 / g**4
    dg = (
        g2 / rho2
        - r1 * g1 / (rho2 * rho)
        + (f1 / f + g1 / g) * g1 / rho2
        + 2.0 * (f**2 - 2.0 * g**2) / g**3
    )
    return drho, df, dg


def rhs_rfg_deturck(j):
    """Gauge-fixed (parabolic) rates of (rho, f, g): the pure rates plus the
    reference-connection drift.  Oracle for the (a, b, c) system."""
    from .geometry import deturck_v

    th = j.theta
    rho, f, g = j.rho, j.f, j.g
    r1, f1, g1 = j.drho, j.df, j.dg
    r2, f2, g2 = j.d2rho, j.d2f, j.d2g
    rho2 = rho**2
    v = deturck_v(j)
    # d/dtheta of sin(4t)/(4 f^2) + sin(2t)/g^2, expanded
    bracket = (
        np.cos(4.0 * th) / f**2
        - 0.5 * np.sin(4.0 * th) * f1 / f**3
        + 2.0 * np.cos(2.0 * th) / g**2
        - 2.0 * np.sin(2.0 * th) * g1 / g**3
    )
    drho = (
        r2 / rho2
        - 3.0 * r1**2 / (rho2 * rho)
        + (f1 / (rho2 * f) + 2.0 * g1 / (rho2 * g) + v) * r1
        + bracket * rho
        + f1**2 / (rho * f**2)
        + 2.0 * g1**2 / (rho * g**2)
    )
    df = f2 / rho2 + (v - r1 / (rho2 * rho)) * f1 + 2.0 * f1 * g1 / (rho2 * g) - 2.0 * f**3 / g**4
    dg = (
        g2 / rho2
        + (v - r1 / (rho2 * rho)) * g1
        + (f1 / f + g1 / g) * g1 / rho2
        + 2.0 * (f**2 - 2.0 * g**2) / g**3
    )
    return drho, df, dg


def cfl_dt(p, config, tables=None):
    """Stable explicit step: cfl_safety * (rho_min * dtheta)^2 / 2."""
    T = _tables_for(p.grid, tables)
    w = p.a + p.b * T.sin_sq + p.c * T.sin2t_sq
    wmin = float(np.min(w))
    if not np.isfinite(wmin):
        raise FlowError("non-finite profile in cfl_dt")
    rho_min = math.exp(wmin)
    if rho_min <= 0.0:
        raise FlowError("rho_min underflowed to zero")
    return config.cfl_safety * 0.5 * (rho_min * p.grid.dtheta) ** 2


def fiber_g(p):
    """g extrapolated to theta = pi/2 from the last two cells.

    Fit g = alpha + beta (theta - pi/2)^2 through the two cell centers:
    g* = (9 g_{n-1} - g_{n-2}) / 8, exact through the quadratic term of the
    even extension, so the error is O(dtheta^4).
    """
    th = p.grid.theta
    gl = math.exp(p.a[-1]) * math.sin(th[-1])
    gl2 = math.exp(p.a[-2]) * math.sin(th[-2])
    return (9.0 * gl - gl2) / 8.0


def inv_kappa23_fiber(p):
    """1/kappa_23 at the fiber: the orbit curvature there reduces to 4/g*^2
    (f = 0 and g_s = 0 at theta = pi/2), so its inverse is g*^2 / 4 -- the
    time-remaining proxy monitored by the stopping rule."""
    gstar = fiber_g(p)
    return gstar * gstar / 4.0


@dataclass
class DiagnosticsRecord:
    """Per-snapshot derived quantities."""

    t: float
    step_index: int
    inv_kappa23_fiber: float
    g_fiber: float
    kahler: np.ndarray
    gamma2: np.ndarray
    length_from_right: np.ndarray


@dataclass
class TimeseriesRow:
    """Scalar monitors, one row per timeseries emission."""

    step_index: int
    t: float
    dt: float
    inv_kappa23_fiber: float
    g_fiber: float
    min_g: float
    max_abs_b: float
    max_abs_c: float


def fiber_diagnostics(p, t=0.0, step_index=0):
    """Kahler ratio, cone angle, arclength-from-fiber, and the fiber
    curvature proxy, all from the finite-difference jet of ``p``."""
    j = fd_jet(p)
    lengths = p.grid.cumulative_length_from_right(j.rho)
    gstar = fiber_g(p)
    return DiagnosticsRecord(
        t=t,
        step_index=step_index,
        inv_kappa23_fiber=gstar * gstar / 4.0,
        g_fiber=gstar,
        kahler=kahler_ratio(j),
        gamma2=cone_ratio(j),
        length_from_right=lengths,
    )


def _timeseries_row(state, tables):
    p = state.profile
    gstar = fiber_g(p)
    min_g = math.exp(float(np.min(p.a + tables.log_sin)))
    return TimeseriesRow(
        step_index=state.step_index,
        t=state.t,
        dt=state.last_dt,
        inv_kappa23_fiber=gstar * gstar / 4.0,
        g_fiber=gstar,
        min_g=min_g,
        max_abs_b=float(np.max(np.abs(p.b))),
        max_abs_c=float(np.max(np.abs(p.c))),
    )


def step_euler(state, config, tables=None):
    """One forward-Euler step with the CFL bound recomputed from the current
    profile.  Failure transitions the status instead of raising; the returned
    state then keeps the last finite profile.  Non-running states pass
    through unchanged."""
    if state.status != RUNNING:
        return state
    p = state.profile
    T = _tables_for(p.grid, tables)
    try:
        dt = cfl_dt(p, config, T)
    except FlowError:
        return replace(state, status=FAILED_NONFINITE)
    # land exactly on t_max rather than overshooting
    clamped = state.t + dt >= config.t_max
    if clamped:
        dt = config.t_max - state.t
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        da_dt, db_dt, dc_dt = rhs_abc(p, T, check=False)
        a = p.a + dt * da_dt
        b = p.b + dt * db_dt
        c = p.c + dt * dc_dt
    if not (
        np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))
    ):
        return replace(state, status=FAILED_NONFINITE)
    # positivity of the reconstructed metric: each coefficient is exp(...),
    # so it can only fail by underflowing to zero
    y = b * T.sin_sq
    z = c * T.sin2t_sq
    log_g = a + T.log_sin
    log_f = a + y + T.log_sincos
    log_rho = a + y + z
    if min(float(np.min(log_g)), float(np.min(log_f)), float(np.min(log_rho))) < _LOG_TINY:
        return replace(state, status=FAILED_NONPOSITIVE)
    return FlowState(
        t=config.t_max if clamped else state.t + dt,
        step_index=state.step_index + 1,
        profile=ProfileABC(p.grid, a, b, c),
        last_dt=dt,
        status=RUNNING,
    )


def run(config, on_timeseries=None, on_snapshot=None, initial_state=None):
    """Drive the flow from the perturbed initial data (or a supplied state)
    until a stopping condition, emitting monitors to the caller's sinks.

    Halts with status ``reached_singularity_threshold`` when the fiber proxy
    1/kappa_23 falls to config.stop_inv_kappa (checked before each step, so
    a threshold above the initial value halts at step 0), with
    ``reached_t_max`` at the configured final time, or with a ``failed_*``
    status from the stepper.  Deterministic: identical configs produce
    bit-identical trajectories.
    """
    grid = None
    if initial_state is not None:
        grid = initial_state.profile.grid
        if grid.n_cells != config.n_cells:
            raise ValueError("initial state grid does not match config.n_cells")
        state = initial_state
    else:
        grid = StaggeredGrid(config.n_cells)
        abc, _ = initial_profiles(PerturbationParams(config.epsilon), grid)
        state = FlowState(t=0.0, step_index=0, profile=abc)
    tables = TrigTables(grid)

    last_ts_step = -1
    last_snap_step = -1

    def emit_timeseries():
        nonlocal last_ts_step
        if on_timeseries is not None and state.step_index != last_ts_step:
            on_timeseries(_timeseries_row(state, tables))
            last_ts_step = state.step_index

    def emit_snapshot():
        nonlocal last_snap_step
        if on_snapshot is not None and state.step_index != last_snap_step:
            on_snapshot(
                state.profile.copy(),
                fiber_diagnostics(state.profile, state.t, state.step_index),
            )
            last_snap_step = state.step_index

    while True:
        if state.status != RUNNING:
            break
        if inv_kappa23_fiber(state.profile) <= config.stop_inv_kappa:
            state = replace(state, status=REACHED_SINGULARITY)
            break
        if state.t >= config.t_max:
            state = replace(state, status=REACHED_T_MAX)
            break
        if state.step_index % config.timeseries_every == 0:
            emit_timeseries()
        if state.step_index % config.snapshot_every == 0:
            emit_snapshot()
        state = step_euler(state, config, tables)

    emit_timeseries()
    emit_snapshot()
    return state
