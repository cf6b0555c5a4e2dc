# dynamics.py: Logistic and monotone network dynamics, quotient (lumped) systems, order monitoring and bounds.
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple
import logging

import numpy as np

from graph_core import Graph
from preorder import PreorderRelation, equivalence_classes
from refinement import Partition, quotient_matrix

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]
# kernel(own value, sorted neighbor values) -> rate
Kernel = Callable[[float, np.ndarray], float]

BOX_EPS = 1e-9
STEP_SLACK = 1e-12
MONITOR_BLOCK = 1024


@dataclass(frozen=True)
class LogisticParams:
    """Infection rate and fixed-step integration grid."""
    gamma: float = 1.0
    horizon: float = 10.0
    dt: float = 1e-3

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not 0 < self.dt <= self.horizon:
            raise ParameterError(f"Need 0 < dt <= horizon, got dt={self.dt}, horizon={self.horizon}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states; row k of `states` is the state at `times[k]`."""
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != len(self.times):
            raise DynamicsError("states must be a (len(times), N) array")
        if len(self.times) == 0 or self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise DynamicsError("times must start at 0 and increase strictly")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def lift(self, p: Partition) -> 'Trajectory':
        """Node-level trajectory of a class-level one."""
        return Trajectory(self.times, self.states[:, np.array(p.class_of, dtype=np.int64)])

    def to_csv(self, path: Path) -> None:
        header = ",".join(["t"] + [f"y{i}" for i in range(self.n)])
        np.savetxt(path, np.column_stack([self.times, self.states]), delimiter=',',
                   header=header, comments='', fmt='%.17g')


@dataclass(frozen=True, eq=False)
class QuotientSystem:
    """Lumped logistic dynamics on the classes of an equitable partition."""
    S: np.ndarray
    sizes: np.ndarray
    gamma: float

    def __post_init__(self):
        K = len(self.sizes)
        if self.S.shape != (K, K):
            raise DynamicsError(f"S must be {K}x{K}, got {self.S.shape}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def class_degrees(self) -> np.ndarray:
        return self.S.sum(axis=1)

    @classmethod
    def from_partition(cls, g: Graph, p: Partition, gamma: float) -> 'QuotientSystem':
        S, sizes = quotient_matrix(g, p)
        return cls(S, sizes, gamma)


@dataclass(frozen=True)
class Violation:
    """y_j exceeded y_i by `gap` at time t although i dominates j."""
    t: float
    i: int
    j: int
    gap: float

    def to_json(self) -> Dict:
        return {'t': self.t, 'i': self.i, 'j': self.j, 'gap': self.gap}


def violations_to_json(violations: Sequence[Violation]) -> List[Dict]:
    return [v.to_json() for v in violations]


def logistic_field(g: Graph, gamma: float, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return gamma * (g.adjacency_matrix() @ y) * (1.0 - y) - y


def logistic_kernel(gamma: float) -> Kernel:
    return lambda x, neighbors: gamma * float(np.sum(neighbors)) * (1.0 - x) - x


def decay_kernel(x: float, neighbors: np.ndarray) -> float:
    return -x


def mean_field_kernel(x: float, neighbors: np.ndarray) -> float:
    return (float(np.mean(neighbors)) if len(neighbors) else 0.0) - x


def generic_field(g: Graph, kernel: Kernel, y: np.ndarray, pad: bool = False) -> np.ndarray:
    """Field F_i(y) = kernel(y_i, sorted neighbor values).

    With pad=True the neighbor values are zero-padded to length n-1 before
    sorting. Sorting makes the result independent of neighbor order.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty(g.n)
    for i, row in enumerate(g.adjacency):
        values = y[list(row)]
        if pad:
            values = np.concatenate([values, np.zeros(max(g.n - 1 - len(row), 0))])
        out[i] = kernel(float(y[i]), np.sort(values))
    return out


def logistic_system(g: Graph, gamma: float) -> VectorField:
    g.adjacency_matrix()
    return lambda y: logistic_field(g, gamma, y)


def generic_system(g: Graph, kernel: Kernel, pad: bool = False) -> VectorField:
    return lambda y: generic_field(g, kernel, y, pad)


def quotient_field(q: QuotientSystem, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return q.gamma * (q.S @ z) * (1.0 - z) - z


def quotient_system(q: QuotientSystem) -> VectorField:
    return lambda z: quotient_field(q, z)


def _time_grid(params: LogisticParams) -> np.ndarray:
    full_steps = int(np.floor(params.horizon / params.dt + STEP_SLACK))
    times = params.dt * np.arange(full_steps + 1)
    if params.horizon - times[-1] > STEP_SLACK * params.horizon:
        times = np.append(times, params.horizon)
    else:
        times[-1] = params.horizon
    return times


def _rk4_states(field: VectorField, y0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """RK4 states on `times`; y0 is a state vector or an (N, B) matrix of column states."""
    y = np.array(y0, dtype=float)
    states = np.empty((len(times),) + y.shape)
    states[0] = y
    for step, h in enumerate(np.diff(times), start=1):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"Non-finite state at step {step} (t={times[step]:.6g})", step)
        states[step] = y
    logger.debug(f"RK4: {len(times) - 1} steps to t={times[-1]}, state shape {y.shape}")
    return states


def _columns(starts: np.ndarray) -> np.ndarray:
    starts = np.asarray(starts, dtype=float)
    if starts.ndim != 2:
        raise ParameterError(f"Batched starts must be an (N, B) matrix, got shape {starts.shape}")
    return starts


def _split(times: np.ndarray, states: np.ndarray) -> List[Trajectory]:
    return [Trajectory(times, states[:, :, b]) for b in range(states.shape[2])]


def integrate_rk4(field: VectorField, y0: np.ndarray, params: LogisticParams) -> Trajectory:
    """Classical fixed-step RK4; the last step is shortened to land on the horizon."""
    times = _time_grid(params)
    return Trajectory(times, _rk4_states(field, y0, times))


def integrate_rk4_batch(field: VectorField, starts: np.ndarray, params: LogisticParams) -> List[Trajectory]:
    """One RK4 run over the columns of an (N, B) start matrix, split into B trajectories.

    The field must act on each column independently, as logistic_field and
    quotient_field do.
    """
    times = _time_grid(params)
    return _split(times, _rk4_states(field, _columns(starts), times))


def max_discrete_step(g: Graph, gamma: float) -> float:
    """Largest h with h*(1 + gamma*d_max) <= 1."""
    return 1.0 / (1.0 + gamma * g.max_degree)


def _check_discrete_step(h: float, gamma: float, max_degree: int) -> None:
    if not h > 0 or h * (1.0 + gamma * max_degree) > 1.0 + STEP_SLACK:
        raise ParameterError(
            f"Discrete step h={h} violates 0 < h*(1 + gamma*d_max) <= 1 (gamma={gamma}, d_max={max_degree})"
        )


def discrete_step(g: Graph, gamma: float, h: float, y: np.ndarray) -> np.ndarray:
    """Explicit-Euler map y + h*F(y); monotone and [0,1]-preserving under the step bound."""
    _check_discrete_step(h, gamma, g.max_degree)
    y = np.asarray(y, dtype=float)
    return y + h * logistic_field(g, gamma, y)


def _iterate_states(field: VectorField, h: float, y0: np.ndarray, steps: int) -> np.ndarray:
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    y = np.array(y0, dtype=float)
    states = np.empty((steps + 1,) + y.shape)
    states[0] = y
    for k in range(1, steps + 1):
        y = y + h * field(y)
        states[k] = y
    return states


def _iterate(field: VectorField, h: float, y0: np.ndarray, steps: int) -> Trajectory:
    return Trajectory(h * np.arange(steps + 1), _iterate_states(field, h, y0, steps))


def iterate_discrete(g: Graph, gamma: float, h: float, y0: np.ndarray, steps: int) -> Trajectory:
    _check_discrete_step(h, gamma, g.max_degree)
    return _iterate(logistic_system(g, gamma), h, y0, steps)


def iterate_discrete_batch(g: Graph, gamma: float, h: float, starts: np.ndarray, steps: int) -> List[Trajectory]:
    """Discrete map applied to the columns of an (N, B) start matrix together."""
    _check_discrete_step(h, gamma, g.max_degree)
    states = _iterate_states(logistic_system(g, gamma), h, _columns(starts), steps)
    return _split(h * np.arange(steps + 1), states)


def iterate_quotient_discrete(q: QuotientSystem, h: float, z0: np.ndarray, steps: int) -> Trajectory:
    _check_discrete_step(h, q.gamma, int(q.class_degrees.max(initial=0)))
    return _iterate(quotient_system(q), h, z0, steps)


def endemic_equilibrium(degree: int, gamma: float) -> float:
    """Nonzero constant equilibrium 1 - 1/(gamma*d) of a d-regular graph, or 0 below threshold."""
    reproduction = gamma * degree
    return 1.0 - 1.0 / reproduction if reproduction > 1 else 0.0


def lift(p: Partition, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if len(z) != p.K:
        raise ParameterError(f"Expected {p.K} class values, got {len(z)}")
    return z[np.array(p.class_of, dtype=np.int64)]


def project(p: Partition, y: np.ndarray, tol: float = BOX_EPS) -> np.ndarray:
    """Class values of a class-constant state."""
    y = np.asarray(y, dtype=float)
    if len(y) != p.n:
        raise ParameterError(f"Expected {p.n} node values, got {len(y)}")
    values = np.empty(p.K)
    for c, members in enumerate(p.classes):
        block = y[list(members)]
        if np.ptp(block) > tol:
            raise ProjectionError(f"State is not constant on class {c} (spread {np.ptp(block):.3g} > {tol})")
        values[c] = block[0]
    return values


def class_min_max(p: Partition, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    lows = np.array([y[list(members)].min() for members in p.classes])
    highs = np.array([y[list(members)].max() for members in p.classes])
    return lows, highs


def consistent_initial(r: PreorderRelation, class_values: Sequence[float], p: Partition) -> np.ndarray:
    """Class-valued start that respects the preorder: y_i >= y_j whenever i dominates j."""
    if p.n != r.n:
        raise ParameterError(f"Partition covers {p.n} nodes, relation {r.n}")
    y = lift(p, np.asarray(class_values, dtype=float))
    bad = [(i, j) for i, j in r.pairs() if y[i] < y[j]]
    if bad:
        raise InconsistentInitialError(
            f"{len(bad)} dominance pairs violated, e.g. {bad[:5]}", bad
        )
    return y


def random_consistent_initial(r: PreorderRelation, seed: int) -> np.ndarray:
    """Seeded random start that respects the preorder.

    Each class draws a value and then takes the largest draw among the classes
    it dominates, so dominating classes never start lower.
    """
    p = equivalence_classes(r)
    draws = np.random.default_rng(seed).uniform(0.0, 1.0, size=p.K)
    representatives = [members[0] for members in p.classes]
    below = r.rel[np.ix_(representatives, representatives)]
    return consistent_initial(r, np.where(below, draws[None, :], 0.0).max(axis=1, initial=0.0), p)


def order_monitor(traj: Trajectory, r: PreorderRelation, tol: float = 1e-8) -> List[Violation]:
    """Every (t, i, j) with i dominating j but y_j(t) > y_i(t) + tol; empty when the order held."""
    if traj.n != r.n:
        raise ParameterError(f"Trajectory has {traj.n} nodes, relation {r.n}")
    pairs = r.pairs()
    if not pairs:
        return []
    dominators = np.array([i for i, _ in pairs], dtype=np.int64)
    dominated = np.array([j for _, j in pairs], dtype=np.int64)
    violations: List[Violation] = []
    for start in range(0, len(traj), MONITOR_BLOCK):
        block = traj.states[start:start + MONITOR_BLOCK]
        gaps = block[:, dominated] - block[:, dominators]
        steps, which = np.nonzero(gaps > tol)
        violations.extend(
            Violation(float(traj.times[start + k]), int(dominators[w]), int(dominated[w]), float(gaps[k, w]))
            for k, w in zip(steps, which)
        )
    if violations:
        worst = max(violations, key=lambda v: v.gap)
        logger.warning(f"Order monitor: {len(violations)} violations, worst gap {worst.gap:.3g} "
                       f"for ({worst.i}, {worst.j}) at t={worst.t:.6g}")
    return violations


def class_spread(traj: Trajectory, p: Partition) -> float:
    """Largest within-class spread over all recorded times."""
    if traj.n != p.n:
        raise ParameterError(f"Trajectory has {traj.n} nodes, partition {p.n}")
    return max((float(np.ptp(traj.states[:, list(m)], axis=1).max()) for m in p.classes), default=0.0)


def box_violation(traj: Trajectory) -> float:
    """Distance by which the trajectory leaves [0, 1]^N (0 when it stays inside)."""
    return float(max(0.0, -traj.states.min(initial=0.0), traj.states.max(initial=0.0) - 1.0))


class BoundRun(NamedTuple):
    lower: Trajectory
    upper: Trajectory
    full: Trajectory

    def bracket_gaps(self) -> Tuple[float, float]:
        """(largest amount full falls below lower, largest amount full exceeds upper)."""
        below = float(np.max(self.lower.states - self.full.states, initial=0.0))
        above = float(np.max(self.full.states - self.upper.states, initial=0.0))
        return max(below, 0.0), max(above, 0.0)

    def holds(self, tol: float = 1e-8) -> bool:
        below, above = self.bracket_gaps()
        return below <= tol and above <= tol


def bound_run(g: Graph, params: LogisticParams, y0: np.ndarray, p: Partition, workers: int = 1) -> BoundRun:
    """Full trajectory plus lifted quotient trajectories from the per-class min and max of y0.

    The logistic field is cooperative on [0,1]^N, so lower <= full <= upper.
    """
    y0 = np.asarray(y0, dtype=float)
    q = QuotientSystem.from_partition(g, p, params.gamma)
    low0, high0 = class_min_max(p, y0)
    jobs = [
        (quotient_system(q), low0),
        (quotient_system(q), high0),
        (logistic_system(g, params.gamma), y0),
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(integrate_rk4, field, start, params) for field, start in jobs]
            lower, upper, full = (f.result() for f in futures)
    else:
        lower, upper, full = (integrate_rk4(field, start, params) for field, start in jobs)
    return BoundRun(lower.lift(p), upper.lift(p), full)


class DynamicsError(Exception):
    """Base exception for dynamics errors."""
    pass

class ParameterError(DynamicsError):
    """Raised when rates, steps or dimensions are out of range."""
    pass

class IntegrationError(DynamicsError):
    """Raised when an integrator produces a non-finite state."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step

class ProjectionError(DynamicsError):
    """Raised when projecting a state that is not constant on classes."""
    pass

class InconsistentInitialError(DynamicsError):
    """Raised when class values contradict the preorder."""

    def __init__(self, message: str, pairs: List[Tuple[int, int]]):
        super().__init__(message)
        self.pairs = pairs
