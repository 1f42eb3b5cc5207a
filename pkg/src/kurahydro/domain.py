"""Grids, model parameters, frequency discretization, and initial states.

The model lives on the periodic phase circle [-pi, pi) crossed with a set of
natural frequencies Omega_k carrying probability weights w_k ~ g(Omega_k).
A FieldState holds the density rho(theta, Omega) -- per unit theta, each
Omega-slice carrying unit mass -- and the phase velocity u(theta, Omega).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def _readonly(a, dtype=float):
    out = np.ascontiguousarray(a, dtype=dtype)
    out.flags.writeable = False
    return out


def wrap_angle(x):
    """Map angles to the fundamental domain [-pi, pi)."""
    return np.mod(np.asarray(x) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True)
class Params:
    """Inertia strength m > 0 and coupling strength K >= 0."""

    m: float
    K: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("m must be positive")
        if not self.K >= 0:
            raise ValueError("K must be nonnegative")


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform periodic cell grid on [-pi, pi); centers at -pi + (j+1/2)*dtheta."""

    n: int
    centers: np.ndarray
    dtheta: float

    def __post_init__(self):
        object.__setattr__(self, "centers", _readonly(self.centers))


def make_theta_grid(n_theta):
    """Build the periodic theta grid with n_theta uniform cells."""
    n_theta = int(n_theta)
    if n_theta < 4:
        raise ValueError("n_theta must be at least 4")
    dtheta = TWO_PI / n_theta
    centers = -np.pi + (np.arange(n_theta) + 0.5) * dtheta
    return ThetaGrid(n_theta, centers, dtheta)


def gaussian_density(x):
    """Standard normal density."""
    return np.exp(-0.5 * np.square(x)) / np.sqrt(TWO_PI)


@dataclass(frozen=True)
class OmegaGrid:
    """Frequency nodes with probability weights; kind 'dirac' or 'density'."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "weights", _readonly(self.weights))

    @property
    def n(self):
        return self.nodes.size

    def second_moment(self):
        return float(np.sum(np.square(self.nodes) * self.weights))


def discretize_frequency(kind, n_omega=600, L=5.0, omega0=0.0):
    """Discretize the frequency distribution g.

    kind 'dirac' gives the single node omega0 with weight 1.  kind 'gaussian'
    (or any callable density) is sampled at n_omega equispaced nodes on
    [-L, L] with trapezoid weights, renormalized so the weights sum to 1.
    """
    if kind == "dirac":
        return OmegaGrid(np.array([float(omega0)]), np.array([1.0]), "dirac")
    if kind == "gaussian":
        density = gaussian_density
    elif callable(kind):
        density = kind
    else:
        raise ValueError(f"unknown frequency distribution {kind!r}")
    n_omega = int(n_omega)
    if n_omega < 2:
        raise ValueError("n_omega must be at least 2 for a density grid")
    if not L > 0:
        raise ValueError("truncation L must be positive")
    nodes = np.linspace(-L, L, n_omega)
    h = nodes[1] - nodes[0]
    w = np.asarray(density(nodes), dtype=float) * h
    w[0] *= 0.5
    w[-1] *= 0.5
    if np.any(w < 0):
        raise ValueError("frequency density must be nonnegative")
    total = w.sum()
    if not total > 0:
        raise ValueError("frequency distribution has zero mass on [-L, L]")
    return OmegaGrid(nodes, w / total, "density")


# ---------------------------------------------------------------------------
# Initial-condition specifications.


@dataclass(frozen=True)
class RhoGaussian:
    """Gaussian density restricted to [-pi, pi], renormalized per slice."""

    mu: float = 0.0
    sigma: float = 1.0


@dataclass(frozen=True)
class RhoUniform:
    pass


@dataclass(frozen=True)
class RhoPointCell:
    """All mass in the single cell containing theta0."""

    theta0: float = 0.0


@dataclass(frozen=True)
class USine:
    """u0(theta) = amplitude * sin(freq * theta) + offset."""

    amplitude: float = 1.0
    freq: float = 1.0
    offset: float = 0.0


@dataclass(frozen=True)
class UCosine:
    """u0(theta) = amplitude * cos(freq * theta) + offset."""

    amplitude: float = 1.0
    freq: float = 1.0
    offset: float = 0.0


@dataclass(frozen=True)
class UConst:
    value: float = 0.0


@dataclass(frozen=True)
class TableData:
    """Tabulated initial data: flat arrays of (theta, omega, rho, u) rows."""

    theta: np.ndarray
    omega: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    path: str = ""

    def __post_init__(self):
        for name in ("theta", "omega", "rho", "u"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = self.theta.size
        if not (self.omega.size == self.rho.size == self.u.size == n):
            raise ValueError("table columns must have equal length")

    def __eq__(self, other):
        if not isinstance(other, TableData):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("theta", "omega", "rho", "u")
        )


def read_initial_table(path):
    """Read a (theta, omega, rho, u) CSV table; the header row is required."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty initial-condition table")
        header = [h.strip() for h in header]
        required = ["theta", "omega", "rho", "u"]
        if sorted(header) != sorted(required):
            raise ValueError(
                f"{path}: expected header columns {required}, got {header}"
            )
        cols = {name: [] for name in header}
        for row in reader:
            if not row:
                continue
            for name, value in zip(header, row):
                cols[name].append(float(value))
    return TableData(
        np.array(cols["theta"]),
        np.array(cols["omega"]),
        np.array(cols["rho"]),
        np.array(cols["u"]),
        path=str(path),
    )


@dataclass(frozen=True)
class InitSpec:
    """Symbolic or tabulated initial data (rho0, u0)."""

    rho0: object = field(default_factory=RhoGaussian)
    u0: object = field(default_factory=UConst)

    @classmethod
    def from_table(cls, path):
        table = read_initial_table(path)
        return cls(rho0=table, u0=table)


def evaluate_u0(u0, theta):
    """Evaluate a symbolic u0 spec at angles theta."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(u0, USine):
        return u0.amplitude * np.sin(u0.freq * theta) + u0.offset
    if isinstance(u0, UCosine):
        return u0.amplitude * np.cos(u0.freq * theta) + u0.offset
    if isinstance(u0, UConst):
        return np.full_like(theta, float(u0.value))
    raise TypeError(f"cannot evaluate u0 spec of type {type(u0).__name__}")


def evaluate_du0(u0, theta):
    """Analytic d/dtheta of a symbolic u0 spec at angles theta."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(u0, USine):
        return u0.amplitude * u0.freq * np.cos(u0.freq * theta)
    if isinstance(u0, UCosine):
        return -u0.amplitude * u0.freq * np.sin(u0.freq * theta)
    if isinstance(u0, UConst):
        return np.zeros_like(theta)
    raise TypeError(f"cannot differentiate u0 spec of type {type(u0).__name__}")


def min_du0(u0, n_scan=8192):
    """Minimum of the analytic derivative of a symbolic u0 over the circle.

    For the sine/cosine family with |freq| >= 1 the minimum -|amplitude*freq|
    is attained exactly; otherwise a dense scan of the analytic derivative is
    used (the scan also covers non-integer frequencies below 1).
    """
    if isinstance(u0, UConst):
        return 0.0
    if isinstance(u0, (USine, UCosine)) and abs(u0.freq) >= 1.0:
        return -abs(u0.amplitude * u0.freq)
    theta = np.linspace(-np.pi, np.pi, n_scan)
    return float(np.min(evaluate_du0(u0, theta)))


@dataclass(frozen=True)
class FieldState:
    """Eulerian fields rho, u with shape (n_omega, n_theta) at time t."""

    grid: ThetaGrid
    omega: OmegaGrid
    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0
    clipped_mass: float = 0.0

    def __post_init__(self):
        shape = (self.omega.n, self.grid.n)
        rho = np.asarray(self.rho, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if rho.shape != shape or u.shape != shape:
            raise ValueError(
                f"field arrays must have shape {shape}, got {rho.shape}/{u.shape}"
            )
        object.__setattr__(self, "rho", _readonly(rho))
        object.__setattr__(self, "u", _readonly(u))

    def per_slice_mass(self):
        """Mass of each Omega-slice (exactly 1 at t=0 by construction)."""
        return self.grid.dtheta * self.rho.sum(axis=1)


def _table_to_fields(table, grid, omega):
    """Map a flat (theta, omega, rho, u) table onto grid x omega arrays."""
    n_rows = table.theta.size
    if n_rows != grid.n * omega.n:
        raise ValueError(
            f"table has {n_rows} rows, grid needs {grid.n * omega.n}"
        )
    order = np.lexsort((table.theta, table.omega))
    th = table.theta[order].reshape(omega.n, grid.n)
    om = table.omega[order].reshape(omega.n, grid.n)
    if not np.allclose(th, grid.centers[None, :], atol=1e-9, rtol=0.0):
        raise ValueError("table theta values do not match the grid centers")
    if not np.allclose(om, omega.nodes[:, None], atol=1e-9, rtol=0.0):
        raise ValueError("table omega values do not match the frequency nodes")
    rho = table.rho[order].reshape(omega.n, grid.n)
    u = table.u[order].reshape(omega.n, grid.n)
    return rho, u


def rho0_profile(rho0, theta):
    """Unnormalized rho0 profile at the given angles (theta-only kinds)."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(rho0, RhoGaussian):
        if not rho0.sigma > 0:
            raise ValueError("rho0 sigma must be positive")
        z = (theta - rho0.mu) / rho0.sigma
        return np.exp(-0.5 * z * z)
    if isinstance(rho0, RhoUniform):
        return np.ones(theta.size)
    if isinstance(rho0, RhoPointCell):
        profile = np.zeros(theta.size)
        j = int(np.argmin(np.abs(theta - wrap_angle(rho0.theta0))))
        profile[j] = 1.0
        return profile
    if isinstance(rho0, (USine, UCosine, UConst)):
        profile = evaluate_u0(rho0, theta)
        if np.any(profile < 0):
            raise ValueError("expression rho0 must be nonnegative")
        return profile
    raise TypeError(f"cannot evaluate rho0 spec of type {type(rho0).__name__}")


def normalize_slices(rho, dtheta):
    """Scale each Omega-slice of rho to unit mass."""
    mass = dtheta * rho.sum(axis=1, keepdims=True)
    if np.any(mass <= 0):
        raise ValueError("initial density has a zero-mass Omega-slice")
    return rho / mass


def init_state(spec, grid, omega):
    """Resolve an InitSpec to a normalized FieldState at t = 0."""
    if isinstance(spec.rho0, TableData):
        rho, table_u = _table_to_fields(spec.rho0, grid, omega)
        if np.any(rho < 0):
            raise ValueError("initial density table contains negative values")
    else:
        rho = np.broadcast_to(
            rho0_profile(spec.rho0, grid.centers), (omega.n, grid.n)
        ).copy()
        table_u = None
    rho = normalize_slices(rho, grid.dtheta)

    if isinstance(spec.u0, TableData):
        if spec.u0 is spec.rho0 and table_u is not None:
            u = table_u
        else:
            _, u = _table_to_fields(spec.u0, grid, omega)
    else:
        u = np.broadcast_to(evaluate_u0(spec.u0, grid.centers), (omega.n, grid.n)).copy()
    return FieldState(grid, omega, rho, u, t=0.0)
