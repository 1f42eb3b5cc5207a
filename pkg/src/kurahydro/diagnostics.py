"""Scalar functionals of the flow: energies, diameters, decay envelopes,
asymptotic order-parameter prediction, Dirac-distance bound, blow-up monitor.

Most quantities exist in two guises -- over an Eulerian FieldState (mass
weights dtheta*rho*w_k) or over a Lagrangian sample ensemble (quadrature
weights) -- and the public functions dispatch on the argument type.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domain import FieldState
from .meanfield import mean_field_cos  # noqa: F401  (re-exported convenience)

SERIES_COLUMNS = (
    "t",
    "r",
    "phi",
    "Ek",
    "Ep",
    "vc",
    "etac",
    "d_eta",
    "d_v",
    "L",
    "mass_err",
    "min_du",
    "max_rho",
    "Ek_integral",
)


@dataclass(frozen=True)
class TimeSeriesRecord:
    """One diagnostics row; the field order is the CSV column order."""

    t: float
    r: float
    phi: float
    Ek: float
    Ep: float
    vc: float
    etac: float
    d_eta: float
    d_v: float
    L: float
    mass_err: float
    min_du: float
    max_rho: float
    Ek_integral: float

    def as_tuple(self):
        return tuple(getattr(self, name) for name in SERIES_COLUMNS)


class TimeSeries:
    """Column-accessible record table backed by an (n, 14) float array."""

    columns = SERIES_COLUMNS

    def __init__(self, data):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[1] != len(SERIES_COLUMNS):
            raise ValueError(f"series rows must have {len(SERIES_COLUMNS)} columns")
        self.data = data

    def __len__(self):
        return self.data.shape[0]

    def __getattr__(self, name):
        if name == "data":
            raise AttributeError(name)
        try:
            j = SERIES_COLUMNS.index(name)
        except ValueError:
            raise AttributeError(name) from None
        return self.data[:, j]

    def records(self):
        return [TimeSeriesRecord(*row) for row in self.data]


class SeriesBuilder:
    def __init__(self):
        self.rows = []

    def append(self, row):
        assert len(row) == len(SERIES_COLUMNS)
        self.rows.append(tuple(float(x) for x in row))

    def build(self):
        return TimeSeries(np.array(self.rows, dtype=float))


# ---------------------------------------------------------------------------
# Weighted moments.  An "ensemble" is any object with attributes
# (eta, v, weight, t) -- duck-typed to avoid importing the oracle module.


def _field_cell_masses(state):
    return state.grid.dtheta * state.rho * state.omega.weights[:, None]


def mean_velocity(obj):
    """Mass-weighted mean velocity v_c."""
    if isinstance(obj, FieldState):
        return float(np.sum(_field_cell_masses(obj) * obj.u))
    return float(np.dot(obj.weight, obj.v))


def mean_phase(obj):
    """Mass-weighted mean phase (unwrapped for ensembles)."""
    if isinstance(obj, FieldState):
        return float(np.sum(_field_cell_masses(obj) * obj.grid.centers[None, :]))
    return float(np.dot(obj.weight, obj.eta))


def energies(obj, op, params):
    """Kinetic and potential energy (E_k, E_p).

    E_k = (1/2) sum w (v - v_c)^2; E_p = (K/2m)(1 - r^2), the closed form of
    the double integral -- exact under the shared quadrature.
    """
    if isinstance(obj, FieldState):
        w = _field_cell_masses(obj)
        v = obj.u
    else:
        w = obj.weight
        v = obj.v
    vc = float(np.sum(w * v))
    Ek = 0.5 * float(np.sum(w * np.square(v - vc)))
    Ep = (params.K / (2.0 * params.m)) * (1.0 - op.r**2)
    return Ek, Ep


def lyapunov(obj, op, params):
    """L = (1/2) sum w (v + K r sin(eta - phi))^2, via the moment form."""
    if isinstance(obj, FieldState):
        w = _field_cell_masses(obj)
        v = obj.u
        ang = obj.grid.centers[None, :]
    else:
        w = obj.weight
        v = obj.v
        ang = obj.eta
    # r sin(eta - phi) = C sin(eta) - S cos(eta)
    term = v + params.K * (op.C * np.sin(ang) - op.S * np.cos(ang))
    return 0.5 * float(np.sum(w * np.square(term)))


def min_grad_u(state):
    """Min over the grid of the centered-difference d(theta) u."""
    du = (np.roll(state.u, -1, axis=-1) - np.roll(state.u, 1, axis=-1)) / (
        2.0 * state.grid.dtheta
    )
    return float(np.min(du))


def _covering_arc(angles):
    """Length of the shortest arc containing all given angles on the circle."""
    if angles.size == 1:
        return 0.0
    a = np.sort(np.mod(angles, 2.0 * np.pi))
    gaps = np.diff(a)
    wrap_gap = a[0] + 2.0 * np.pi - a[-1]
    return float(2.0 * np.pi - max(np.max(gaps), wrap_gap))


def diameters(obj, eps_supp=None):
    """Phase and velocity diameters (d_eta, d_v) over the support.

    Ensembles use unwrapped sample phases (max - min).  Eulerian states use
    the cells with rho > eps_supp; the phase diameter is then the shortest
    covering arc on the circle.  eps_supp defaults to 1e-8 * max(rho) -- pass
    the value derived from the initial state for time-consistent support.
    """
    if isinstance(obj, FieldState):
        if eps_supp is None:
            eps_supp = 1e-8 * float(np.max(obj.rho))
        mask = obj.rho > eps_supp
        if not np.any(mask):
            raise ValueError("empty support: no cells above the density floor")
        d_v = float(np.max(obj.u[mask]) - np.min(obj.u[mask]))
        support_angles = obj.grid.centers[np.any(mask, axis=0)]
        return _covering_arc(support_angles), d_v
    mask = obj.weight > 0.0
    if not np.any(mask):
        raise ValueError("empty support: all sample weights vanish")
    eta = obj.eta[mask]
    v = obj.v[mask]
    return float(np.max(eta) - np.min(eta)), float(np.max(v) - np.min(v))


# ---------------------------------------------------------------------------
# Analytic decay envelopes for the diameters.


@dataclass(frozen=True)
class EnvelopeParams:
    """Constants of the diameter decay bounds.

    C0 = max(d_eta0, d_eta0 + m*d_v0), D0 = sin(C0)/C0; the damped phase
    oscillator m*x'' + x' + K*D0*x <= 0 is overdamped when 4mKD0 < 1 (rates
    nu1 > nu2 > 0) and critically/underdamped otherwise.
    """

    d_eta0: float
    d_v0: float
    m: float
    K: float
    C0: float
    D0: float
    four_mKD0: float
    regime: str
    nu1: float
    nu2: float
    C1: float
    C2: float


def envelope_params(d_eta0, d_v0, params):
    """Derive EnvelopeParams; requires 0 < C0 < pi."""
    if d_eta0 < 0 or d_v0 < 0:
        raise ValueError("diameters must be nonnegative")
    m, K = params.m, params.K
    C0 = max(d_eta0, d_eta0 + m * d_v0)
    if not 0.0 < C0 < np.pi:
        raise ValueError(
            f"envelope not applicable: need 0 < C0 < pi, got C0 = {C0:.6g}"
        )
    D0 = math.sin(C0) / C0
    four = 4.0 * m * K * D0
    C2 = d_eta0 / (2.0 * m) + d_v0
    if four < 1.0:
        disc = math.sqrt(1.0 - four)
        nu1 = (1.0 + disc) / (2.0 * m)
        nu2 = (1.0 - disc) / (2.0 * m)
        C1 = m * (d_v0 + nu1 * d_eta0) / disc
        regime = "overdamped"
    else:
        nu1 = nu2 = 1.0 / (2.0 * m)
        C1 = math.nan
        regime = "underdamped"
    return EnvelopeParams(
        d_eta0, d_v0, m, K, C0, D0, four, regime, nu1, nu2, C1, C2
    )


def phase_envelope(env, t):
    """Upper bound on the phase diameter d_eta(t)."""
    t = np.asarray(t, dtype=float)
    if env.regime == "overdamped":
        disc = math.sqrt(1.0 - env.four_mKD0)
        e1 = np.exp(-env.nu1 * t)
        e2 = np.exp(-env.nu2 * t)
        return env.d_eta0 * e1 + env.m * (e2 - e1) / disc * (
            env.d_v0 + env.nu1 * env.d_eta0
        )
    return np.exp(-t / (2.0 * env.m)) * (env.d_eta0 + env.C2 * t)


def velocity_envelope(env, t):
    """Upper bound on the velocity diameter d_v(t)."""
    t = np.asarray(t, dtype=float)
    m, K = env.m, env.K
    if env.regime == "overdamped":
        B = K * env.C1 / (1.0 - m * env.nu2)
        D = K * (env.C1 - env.d_eta0) / (1.0 - m * env.nu1)
        A = env.d_v0 + D - B
        return A * np.exp(-t / m) + B * np.exp(-env.nu2 * t) - D * np.exp(-env.nu1 * t)
    return (1.0 + 4.0 * K * m) * env.d_v0 * np.exp(-t / m) + (
        2.0 * K * env.C2 * t - 4.0 * K * m * env.d_v0
    ) * np.exp(-t / (2.0 * m))


def gronwall_bound(a, b, c, x0, x1, t):
    """Decay bound for a*x'' + b*x' + c*x <= 0 with x >= 0.

    Distinct-root case (b^2 > 4ac):
        x(t) <= x0 e^{-a1 t} + a (x1 + a1 x0)(e^{-a2 t} - e^{-a1 t})/sqrt(b^2-4ac)
    with a1,2 = (b +/- sqrt(b^2-4ac))/(2a); otherwise
        x(t) <= e^{-bt/(2a)} (x0 + (b x0/(2a) + x1) t).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    t = np.asarray(t, dtype=float)
    disc = b * b - 4.0 * a * c
    if disc > 0:
        root = math.sqrt(disc)
        a1 = (b + root) / (2.0 * a)
        a2 = (b - root) / (2.0 * a)
        return x0 * np.exp(-a1 * t) + a * (x1 + a1 * x0) * (
            np.exp(-a2 * t) - np.exp(-a1 * t)
        ) / root
    return np.exp(-b * t / (2.0 * a)) * (x0 + (b * x0 / (2.0 * a) + x1) * t)


def r_infinity_prediction(series, params):
    """Predicted limit of r: sqrt(r0^2 - (2m/K) Ek(0) + (4/K) int Ek dt)."""
    if not params.K > 0:
        raise ValueError("the asymptotic r prediction needs K > 0")
    r0 = float(series.r[0])
    Ek0 = float(series.Ek[0])
    Ek_int = float(series.Ek_integral[-1])
    radicand = r0 * r0 - (2.0 * params.m / params.K) * Ek0 + (4.0 / params.K) * Ek_int
    if radicand < -1e-10:
        warnings.warn(
            f"r_infinity radicand {radicand:.3e} < -1e-10: run looks under-resolved",
            stacklevel=2,
        )
    return math.sqrt(max(0.0, radicand))


def dirac_distance_bound(ens, ens0, params):
    """Measured mean distance to the limit phase vs its analytic bound.

    The limit phase is eta_inf = eta_c(0) + m*v_c(0); the bound is
    d_eta(t) + m*|v_c(0)|*e^{-t/m}.  Returns (measured, bound).
    """
    vc0 = mean_velocity(ens0)
    eta_inf = mean_phase(ens0) + params.m * vc0
    measured = float(np.dot(ens.weight, np.abs(ens.eta - eta_inf)))
    d_eta, _ = diameters(ens)
    bound = d_eta + params.m * abs(vc0) * math.exp(-ens.t / params.m)
    return measured, bound


# ---------------------------------------------------------------------------
# Blow-up detection.


@dataclass(frozen=True)
class BlowupEvent:
    t: float
    reason: str


class BlowupMonitor:
    """Latching detector: density concentration, gradient collapse, or NaN.

    The first observed state fixes the reference max(rho0) unless one is
    supplied.  Once fired the monitor stays fired (the event is kept).
    """

    def __init__(self, rho_factor=1e3, grad_limit=1e6, max_rho0=None):
        self.rho_factor = rho_factor
        self.grad_limit = grad_limit
        self.max_rho0 = max_rho0
        self.event = None

    @property
    def fired(self):
        return self.event is not None

    def observe_values(self, t, max_rho, min_du, finite=True):
        if self.event is not None:
            return self.event
        if not finite or not (np.isfinite(max_rho) and np.isfinite(min_du)):
            self.event = BlowupEvent(t, "non-finite")
            return self.event
        if self.max_rho0 is None:
            self.max_rho0 = max_rho
        if max_rho > self.rho_factor * self.max_rho0:
            self.event = BlowupEvent(t, "density-concentration")
        elif min_du < -self.grad_limit:
            self.event = BlowupEvent(t, "gradient-collapse")
        return self.event

    def observe(self, obj):
        """Observe a FieldState or a sample ensemble; returns the event or None."""
        if isinstance(obj, FieldState):
            finite = bool(np.all(np.isfinite(obj.rho)) and np.all(np.isfinite(obj.u)))
            max_rho = float(np.max(obj.rho)) if finite else math.inf
            min_du = min_grad_u(obj) if finite else -math.inf
        else:
            finite = bool(
                np.all(np.isfinite(obj.eta))
                and np.all(np.isfinite(obj.v))
                and np.all(np.isfinite(obj.d))
            )
            with np.errstate(over="ignore"):
                max_rho = float(np.exp(np.max(obj.log_rho))) if finite else math.inf
            min_du = float(np.min(obj.d)) if finite else -math.inf
        return self.observe_values(obj.t, max_rho, min_du, finite)
