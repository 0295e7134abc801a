"""Rossler oscillator dynamics on chains and gated 2-D lattices.

The vector field of one cell is

    dx/dt = -omega * y - z + coupling
    dy/dt = omega * x + a * y
    dz/dt = b + z * (x - c)

with the coupling injected only into the x equation.  Chains use
attractive (diffusive) nearest-neighbor coupling; lattices combine an
attractive gated term with an always-on repulsive term over the
8-neighborhood.  Integration is classical fixed-step RK4: every stage
sees a consistent snapshot of the whole system, so results do not
depend on cell order or threading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GateSet, NEIGHBOR_OFFSETS, full_adjacency, neighbor_counts

DIVERGENCE_BOUND = 1.0e6

#: Initial-condition box: x, y uniform in [-5, 5], z uniform in [0, 0.5].
INIT_XY_HALF_WIDTH = 5.0
INIT_Z_MAX = 0.5


class DivergenceError(RuntimeError):
    """A state component left the divergence bound during integration."""

    def __init__(self, time: float, max_abs: float):
        super().__init__(
            f"state diverged at t={time:g} (max |component| = {max_abs:.3e})"
        )
        self.time = time
        self.max_abs = max_abs


@dataclass(frozen=True)
class RosslerParams:
    a: float = 0.15
    b: float = 0.2
    c: float = 10.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"RosslerParams.{name} must be finite")


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 0.01
    t_end: float = 500.0
    sample_stride: int = 50
    seed: int = 42
    burn_in: float = 50.0

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if not (self.t_end > self.dt):
            raise ValueError("t_end must exceed dt")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if not (0 <= self.burn_in < self.t_end):
            raise ValueError("burn_in must lie in [0, t_end)")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class ChainConfig:
    n: int
    k: float
    omegas: np.ndarray
    params: RosslerParams = field(default_factory=RosslerParams)

    def __post_init__(self):
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=np.float64))
        if self.n < 2:
            raise ValueError("chain needs at least 2 oscillators")
        if self.k < 0:
            raise ValueError("coupling strength must be nonnegative")
        if self.omegas.shape != (self.n,):
            raise ValueError("omegas must have one entry per oscillator")
        if np.any(self.omegas < 0.9) or np.any(self.omegas > 1.1):
            raise ValueError("natural frequencies must lie in [0.9, 1.1]")


@dataclass(frozen=True)
class LatticeField:
    """Full (x, y, z) state of every lattice cell, shape (N, M, 3)."""

    states: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.float64)
        if s.ndim != 3 or s.shape[2] != 3:
            raise ValueError("states must have shape (N, M, 3)")
        if not np.all(np.isfinite(s)):
            raise ValueError("states must be finite")
        if np.max(np.abs(s)) > DIVERGENCE_BOUND:
            raise ValueError("states exceed the divergence bound")
        object.__setattr__(self, "states", s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.states.shape[:2]


@dataclass(frozen=True)
class LatticeParams:
    omega: np.ndarray
    k_plus: np.ndarray
    k_minus: np.ndarray
    gates: GateSet
    params: RosslerParams = field(default_factory=RosslerParams)

    def __post_init__(self):
        for name in ("omega", "k_plus", "k_minus"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=np.float64)
            )
        shape = self.omega.shape
        if len(shape) != 2:
            raise ValueError("parameter maps must be 2-D")
        for name in ("k_plus", "k_minus"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} shape {arr.shape} != omega shape {shape}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if self.gates.shape != shape:
            raise ValueError("gate shape does not match parameter maps")
        if not np.all(np.isfinite(self.omega)) or np.any(self.omega <= 0):
            raise ValueError("omega map must be finite and positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.omega.shape


def draw_initial_states(rng: np.random.Generator, shape) -> np.ndarray:
    """Sample initial states from the attractor-basin box, shape (*shape, 3)."""
    shape = tuple(np.atleast_1d(shape))
    out = np.empty(shape + (3,), dtype=np.float64)
    out[..., 0] = rng.uniform(-INIT_XY_HALF_WIDTH, INIT_XY_HALF_WIDTH, size=shape)
    out[..., 1] = rng.uniform(-INIT_XY_HALF_WIDTH, INIT_XY_HALF_WIDTH, size=shape)
    out[..., 2] = rng.uniform(0.0, INIT_Z_MAX, size=shape)
    return out


def rossler_derivative(state, omega, coupling, params: RosslerParams = RosslerParams()):
    """Time derivative of one oscillator (or an array of them).

    `state` carries (x, y, z) on its last axis; `omega` and `coupling`
    broadcast against the leading axes.  The coupling term enters only
    the x equation.
    """
    state = np.asarray(state, dtype=np.float64)
    x, y, z = state[..., 0], state[..., 1], state[..., 2]
    out = np.empty_like(state)
    out[..., 0] = -omega * y - z + coupling
    out[..., 1] = omega * x + params.a * y
    out[..., 2] = params.b + z * (x - params.c)
    return out


def chain_coupling(x_values, k: float, index: int) -> float:
    """Diffusive coupling felt by chain oscillator `index`.

    Interior cells see k * (x[i-1] + x[i+1] - 2 x[i]); the two chain
    ends are coupled to their single neighbor only.
    """
    x = np.asarray(x_values, dtype=np.float64)
    n = x.shape[0]
    if not (0 <= index < n):
        raise IndexError("oscillator index out of range")
    if index == 0:
        return float(k * (x[1] - x[0]))
    if index == n - 1:
        return float(k * (x[n - 2] - x[n - 1]))
    return float(k * (x[index - 1] + x[index + 1] - 2.0 * x[index]))


def chain_coupling_vector(x: np.ndarray, k: float) -> np.ndarray:
    """Vectorized `chain_coupling` over the whole chain."""
    cpl = np.empty_like(x)
    cpl[1:-1] = k * (x[:-2] + x[2:] - 2.0 * x[1:-1])
    cpl[0] = k * (x[1] - x[0])
    cpl[-1] = k * (x[-2] - x[-1])
    return cpl


def lattice_coupling(field: LatticeField, params: LatticeParams, cell) -> float:
    """Coupling felt by one lattice cell.

    Attractive gated term plus repulsive always-on term:
    k+ * sum_gated(x_nbr - x) - k- * sum_all(x_nbr - x), free-end
    boundary (off-grid neighbors are skipped).
    """
    i, j = cell
    n, m = field.shape
    if not (0 <= i < n and 0 <= j < m):
        raise IndexError("cell outside the lattice")
    x = field.states[..., 0]
    attract = 0.0
    repel = 0.0
    for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
        p, q = i + di, j + dj
        if not (0 <= p < n and 0 <= q < m):
            continue
        diff = x[p, q] - x[i, j]
        repel += diff
        if params.gates.planes[d, i, j]:
            attract += diff
    return float(params.k_plus[i, j] * attract - params.k_minus[i, j] * repel)


def rk4_step(f, y, dt: float, divergence_bound: float | None = None):
    """One classical 4th-order Runge-Kutta step for y' = f(y).

    All four stages evaluate `f` on complete state snapshots.  When
    `divergence_bound` is given, a step whose result leaves the bound
    (or turns non-finite) raises DivergenceError.
    """
    if not (dt > 0):
        raise ValueError("dt must be positive")
    k1 = f(y)
    k2 = f(y + (0.5 * dt) * k1)
    k3 = f(y + (0.5 * dt) * k2)
    k4 = f(y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if divergence_bound is not None:
        max_abs = float(np.max(np.abs(out)))
        if not (max_abs <= divergence_bound):
            raise DivergenceError(float("nan"), max_abs)
    return out


@dataclass(frozen=True)
class ChainTrajectory:
    times: np.ndarray  # (S,)
    x: np.ndarray      # (S, n)
    y: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class LatticeTrajectory:
    times: np.ndarray  # (S,)
    x: np.ndarray      # (S, N, M)
    y: np.ndarray
    z: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.shape[1:]


def _sample_times(integ: IntegrationConfig) -> np.ndarray:
    idx = np.arange(0, integ.n_steps + 1, integ.sample_stride)
    return idx * integ.dt


def integrate_chain(
    config: ChainConfig,
    integ: IntegrationConfig,
    initial: np.ndarray | None = None,
) -> ChainTrajectory:
    """Integrate the 1-D coupled chain, sampling every `sample_stride` steps.

    `initial` has shape (n, 3); when omitted it is drawn from the
    seeded initial-condition box, making the run fully determined by
    (config, integ).
    """
    if initial is None:
        initial = draw_initial_states(np.random.default_rng(integ.seed), config.n)
    initial = np.asarray(initial, dtype=np.float64)
    if initial.shape != (config.n, 3):
        raise ValueError(f"initial states must have shape ({config.n}, 3)")
    if not np.all(np.isfinite(initial)):
        raise ValueError("initial states must be finite")

    omega = config.omegas
    a, b, c = config.params.a, config.params.b, config.params.c
    k = config.k

    def rhs(state):
        x, y, z = state
        cpl = chain_coupling_vector(x, k)
        return np.stack((
            -omega * y - z + cpl,
            omega * x + a * y,
            b + z * (x - c),
        ))

    state = initial.T.copy()  # (3, n)
    n_steps = integ.n_steps
    stride = integ.sample_stride
    n_samples = n_steps // stride + 1
    xs = np.empty((n_samples, config.n))
    ys = np.empty_like(xs)
    zs = np.empty_like(xs)
    xs[0], ys[0], zs[0] = state
    s = 1
    dt = integ.dt
    for step in range(1, n_steps + 1):
        try:
            state = rk4_step(rhs, state, dt, divergence_bound=DIVERGENCE_BOUND)
        except DivergenceError as err:
            raise DivergenceError(step * dt, err.max_abs) from None
        if step % stride == 0:
            xs[s], ys[s], zs[s] = state
            s += 1
    return ChainTrajectory(_sample_times(integ), xs, ys, zs)


class LatticeOperator:
    """Precomputed neighbor-difference operators for one lattice shape."""

    def __init__(self, gates: GateSet):
        shape = gates.shape
        self.shape = shape
        self.adj_plus = gates.to_adjacency()
        self.adj_minus = full_adjacency(shape)
        self.deg_plus = np.asarray(self.adj_plus.sum(axis=1)).ravel()
        self.deg_minus = neighbor_counts(shape).astype(np.float64).ravel()

    def delta_plus(self, x_flat: np.ndarray) -> np.ndarray:
        """Gated attractive neighbor-difference sum per cell."""
        return self.adj_plus @ x_flat - self.deg_plus * x_flat

    def delta_minus(self, x_flat: np.ndarray) -> np.ndarray:
        """Always-on neighbor-difference sum per cell."""
        return self.adj_minus @ x_flat - self.deg_minus * x_flat


def integrate_lattice(
    field: LatticeField,
    params: LatticeParams,
    integ: IntegrationConfig,
    coupling_schedule=None,
    record_z: bool = False,
) -> LatticeTrajectory:
    """Integrate the full gated lattice.

    `coupling_schedule(t)` may return fresh (k_plus, k_minus) maps; it
    is consulted once per integration step at the step's start time
    (moving-attention runs).  Sampled (x, y) planes are recorded every
    `sample_stride` steps, including t=0; z is recorded on request.
    """
    shape = field.shape
    if params.shape != shape:
        raise ValueError(
            f"parameter map shape {params.shape} does not match lattice {shape}"
        )
    n_cells = shape[0] * shape[1]
    op = LatticeOperator(params.gates)
    omega = params.omega.ravel()
    a, b, c = params.params.a, params.params.b, params.params.c

    kp = params.k_plus.ravel().copy()
    km = params.k_minus.ravel().copy()

    def rhs(state):
        x, y, z = state
        cpl = kp * (op.delta_plus(x)) - km * (op.delta_minus(x))
        return np.stack((
            -omega * y - z + cpl,
            omega * x + a * y,
            b + z * (x - c),
        ))

    state = field.states.reshape(n_cells, 3).T.copy()  # (3, n_cells)
    n_steps = integ.n_steps
    stride = integ.sample_stride
    n_samples = n_steps // stride + 1
    xs = np.empty((n_samples,) + shape)
    ys = np.empty_like(xs)
    zs = np.empty_like(xs) if record_z else None
    xs[0] = state[0].reshape(shape)
    ys[0] = state[1].reshape(shape)
    if record_z:
        zs[0] = state[2].reshape(shape)
    s = 1
    dt = integ.dt
    for step in range(1, n_steps + 1):
        if coupling_schedule is not None:
            new_kp, new_km = coupling_schedule((step - 1) * dt)
            kp[:] = np.asarray(new_kp, dtype=np.float64).ravel()
            km[:] = np.asarray(new_km, dtype=np.float64).ravel()
        try:
            state = rk4_step(rhs, state, dt, divergence_bound=DIVERGENCE_BOUND)
        except DivergenceError as err:
            raise DivergenceError(step * dt, err.max_abs) from None
        if step % stride == 0:
            xs[s] = state[0].reshape(shape)
            ys[s] = state[1].reshape(shape)
            if record_z:
                zs[s] = state[2].reshape(shape)
            s += 1
    return LatticeTrajectory(_sample_times(integ), xs, ys, zs)


def integrate_oscillator(
    omega: float,
    integ: IntegrationConfig,
    initial: np.ndarray,
    params: RosslerParams = RosslerParams(),
    record_z: bool = False,
) -> LatticeTrajectory:
    """Integrate one uncoupled oscillator (a 1x1 lattice)."""
    field = LatticeField(np.asarray(initial, dtype=np.float64).reshape(1, 1, 3))
    lattice = LatticeParams(
        omega=np.full((1, 1), omega),
        k_plus=np.zeros((1, 1)),
        k_minus=np.zeros((1, 1)),
        gates=GateSet.all_off((1, 1)),
        params=params,
    )
    return integrate_lattice(field, lattice, integ, record_z=record_z)
