"""Linear-quadratic system: dynamics, costs, noise, closed-loop simulation.

The true system evolves as ``x(t+1) = A x(t) + B u(t) + w(t+1)``. The
dynamics parameter ``theta = [A | B]`` is stored as a plain ``(p, p + r)``
array throughout the package.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import ShapeError, as_matrix, as_samples, as_square, as_vector

DEFAULT_STATE_CAP = 1e12
SYMMETRY_TOL = 1e-12


class DivergenceError(RuntimeError):
    """State norm exceeded the configured cap."""

    def __init__(self, time, norm, cap):
        super().__init__(f"state norm {norm:.3g} exceeded cap {cap:.3g} at t={time}")
        self.time = time
        self.norm = norm
        self.cap = cap


@dataclass(frozen=True)
class Dimensions:
    p: int
    r: int

    def __post_init__(self):
        for name in ("p", "r"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def q(self):
        return self.p + self.r


def split_theta(theta, p):
    """Return ``(A, B)`` from ``theta = [A | B]``."""
    return theta[:, :p], theta[:, p:]


def join_theta(A, B):
    A = as_square(A, name="A")
    B = as_matrix(B, shape=(A.shape[0], None), name="B")
    return np.hstack([A, B])


def check_theta(theta, dims, name="theta"):
    return as_matrix(theta, shape=(dims.p, dims.q), name=name)


def extended_gain(G):
    """Stack ``[I_p; G]`` so that ``theta @ extended_gain(G)`` is the closed loop."""
    G = np.asarray(G, dtype=float)
    return np.vstack([np.eye(G.shape[1]), G])


def _check_spd(M, name):
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"{name} is not symmetric (max asymmetry {asym:.3g})")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError(f"{name} is not positive definite")


@dataclass(frozen=True, eq=False)
class CostPair:
    """State and input weights of the quadratic cost ``x'Qx x + u'Qu u``."""

    Qx: np.ndarray
    Qu: np.ndarray

    def __post_init__(self):
        Qx = as_square(self.Qx, name="Qx")
        Qu = as_square(self.Qu, name="Qu")
        _check_spd(Qx, "Qx")
        _check_spd(Qu, "Qu")
        object.__setattr__(self, "Qx", Qx)
        object.__setattr__(self, "Qu", Qu)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Distribution of the i.i.d. noise ``w(t)``.

    ``kind="gaussian"`` draws ``N(0, C)`` through the symmetric square root
    of ``C``; ``kind="empirical"`` draws uniformly over centered ``atoms``.
    Use the :meth:`gaussian` and :meth:`empirical` constructors.
    """

    kind: str
    C: np.ndarray = None
    atoms: np.ndarray = None
    _root: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind == "gaussian":
            C = as_square(self.C, name="C")
            _check_spd(C, "C")
            w, V = np.linalg.eigh(C)
            object.__setattr__(self, "C", C)
            object.__setattr__(self, "_root", (V * np.sqrt(w)) @ V.T)
        elif self.kind == "empirical":
            atoms = np.asarray(self.atoms, dtype=float)
            if atoms.ndim != 2 or atoms.shape[0] == 0:
                raise ShapeError("atoms must be a non-empty (k, p) array")
            if np.abs(atoms.sum(axis=0)).max() > 1e-12 * max(1, len(atoms)) * max(1.0, np.abs(atoms).max()):
                raise ValueError("empirical atoms must sum to zero")
            object.__setattr__(self, "atoms", atoms)
        else:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def gaussian(cls, C):
        return cls("gaussian", C=C)

    @classmethod
    def empirical(cls, atoms):
        return cls("empirical", atoms=atoms)

    @property
    def dim(self):
        return self.C.shape[0] if self.kind == "gaussian" else self.atoms.shape[1]

    @property
    def root(self):
        return self._root


@dataclass(frozen=True, eq=False)
class LqModel:
    dims: Dimensions
    theta0: np.ndarray
    costs: CostPair
    noise: NoiseModel

    def __post_init__(self):
        object.__setattr__(self, "theta0", check_theta(self.theta0, self.dims, "theta0"))
        if self.costs.Qx.shape[0] != self.dims.p or self.costs.Qu.shape[0] != self.dims.r:
            raise ShapeError("cost matrices do not match dims")
        if self.noise.dim != self.dims.p:
            raise ShapeError("noise dimension does not match dims")

    @classmethod
    def from_matrices(cls, A, B, Qx, Qu, C=None):
        theta = join_theta(A, B)
        p, q = theta.shape
        noise = NoiseModel.gaussian(np.eye(p) if C is None else C)
        return cls(Dimensions(p, q - p), theta, CostPair(Qx, Qu), noise)

    @property
    def A(self):
        return self.theta0[:, : self.dims.p]

    @property
    def B(self):
        return self.theta0[:, self.dims.p:]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Closed-loop history: ``states`` (n+1, p), ``actions`` (n, r),
    extended ``gains`` (n, q, p) and ``noises`` (n, p); ``noises[t]`` is w(t+1)."""

    states: np.ndarray
    actions: np.ndarray
    gains: np.ndarray
    noises: np.ndarray

    def __post_init__(self):
        n = len(self.actions)
        if len(self.states) != n + 1 or len(self.noises) != n or len(self.gains) != n:
            raise ShapeError("trajectory lengths are inconsistent")

    @property
    def horizon(self):
        return len(self.actions)

    @property
    def regressors(self):
        """``z_t = L_t x(t) = [x(t); u(t)]``, one row per step."""
        return np.hstack([self.states[:-1], self.actions])

    @property
    def responses(self):
        return self.states[1:]

    def truncate(self, n):
        """History up to time ``n`` (states x(0..n))."""
        return Trajectory(self.states[: n + 1], self.actions[:n], self.gains[:n], self.noises[:n])


def normalize_breaks(break_schedule, dims=None):
    """Sorted list of ``(time, theta)``; times must be strictly increasing."""
    if not break_schedule:
        return []
    out = []
    for time, theta in break_schedule:
        theta = np.asarray(theta, dtype=float)
        if dims is not None:
            theta = check_theta(theta, dims, "break theta")
        out.append((int(time), theta))
    times = [t for t, _ in out]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"break times must be strictly increasing, got {times}")
    return out


def theta_in_force(theta0, breaks, t):
    """Dynamics used for the transition ``x(t) -> x(t+1)``."""
    theta = theta0
    for time, new in breaks:
        if t >= time:
            theta = new
        else:
            break
    return theta


def step(model, x, u, w, theta=None):
    p, r = model.dims.p, model.dims.r
    x = as_vector(x, p, "x")
    u = as_vector(u, r, "u")
    w = as_vector(w, p, "w")
    theta = model.theta0 if theta is None else theta
    return theta[:, :p] @ x + theta[:, p:] @ u + w


def draw_noise(noise, rng, size=None):
    """One p-vector, or a ``(size, p)`` array of i.i.d. draws."""
    rng = np.random.default_rng(rng)
    k = 1 if size is None else size
    if noise.kind == "gaussian":
        out = rng.standard_normal((k, noise.dim)) @ noise.root.T
    else:
        out = noise.atoms[rng.integers(len(noise.atoms), size=k)]
    return out[0] if size is None else out


def simulate_closed_loop(model, gain_schedule, horizon, rng=None, break_schedule=None,
                         x0=None, noises=None, state_cap=DEFAULT_STATE_CAP, dither=None):
    """Run ``u(t) = G_t x(t)`` on the true system for ``horizon`` steps.

    ``gain_schedule`` is either a callable ``t -> (r, p)`` array or a fixed
    gain. Pass ``noises`` (``(horizon, p)``) to replay a given noise path;
    otherwise it is drawn from ``model.noise`` with ``rng``. Breaks swap the
    dynamics for every transition starting at or after their time.

    ``dither`` (``(horizon, r)``) is added to the feedback action; the
    recorded gains hold the feedback part only, so with dither the
    regressors must be taken from states and actions, not from the gains.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    p, r = model.dims.p, model.dims.r
    breaks = normalize_breaks(break_schedule, model.dims)
    if noises is None:
        noises = draw_noise(model.noise, rng, size=horizon)
    noises = as_samples(noises, p, "noises")
    if len(noises) != horizon:
        raise ShapeError(f"need {horizon} noise vectors, got {len(noises)}")
    if dither is not None:
        dither = as_samples(dither, r, "dither")
        if len(dither) != horizon:
            raise ShapeError(f"need {horizon} dither vectors, got {len(dither)}")
    if callable(gain_schedule):
        schedule = gain_schedule
    else:
        fixed = as_matrix(gain_schedule, shape=(r, p), name="gain")
        schedule = lambda t: fixed  # noqa: E731

    states = np.zeros((horizon + 1, p))
    if x0 is not None:
        states[0] = as_vector(x0, p, "x0")
    actions = np.zeros((horizon, r))
    gains = np.zeros((horizon, p + r, p))
    eye = np.eye(p)
    for t in range(horizon):
        G = np.asarray(schedule(t), dtype=float)
        if G.shape != (r, p):
            raise ShapeError(f"gain at t={t} has shape {G.shape}, expected {(r, p)}")
        theta = theta_in_force(model.theta0, breaks, t)
        x = states[t]
        u = G @ x
        if dither is not None:
            u = u + dither[t]
        actions[t] = u
        gains[t, :p] = eye
        gains[t, p:] = G
        nxt = theta[:, :p] @ x + theta[:, p:] @ u + noises[t]
        norm = np.linalg.norm(nxt)
        if not norm <= state_cap:
            raise DivergenceError(t + 1, norm, state_cap)
        states[t + 1] = nxt
    return Trajectory(states, actions, gains, noises.copy())
