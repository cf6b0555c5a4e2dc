from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np

from config import DynamicsSettings, ToleranceSettings, VerifySettings
from dynamics import (
    BoundRun,
    LogisticParams,
    QuotientSystem,
    class_min_max,
    integrate_rk4_batch,
    iterate_discrete_batch,
    lift,
    logistic_system,
    max_discrete_step,
    order_monitor,
    quotient_system,
    random_consistent_initial,
)
from graph_core import Graph, generate, generate_from_spec
from oracle import adapted_dominating_map_exists, automorphism_orbits
from preorder import equivalence_classes, max_inductive_preorder
from refinement import color_refinement, is_coarser_or_equal, is_equitable
from utils.timer_utils import format_duration, stopwatch

logger = logging.getLogger(__name__)

LabeledGraph = Tuple[str, Graph]

NAMED_SUITE = (
    "path:5", "cycle:6", "star:4", "complete:5", "complete_bipartite:2,3", "frucht",
    "asymmetric_tree", "random_regular:12,3:42", "erdos_renyi:10,0.3:1",
    "random_tree:9:7", "disjoint_union_cliques:3,2",
)

SMALL_NAMED_SUITE = (
    "path:3", "path:4", "cycle:4", "cycle:5", "star:3", "complete:2", "complete:4",
    "complete_bipartite:2,3", "disjoint_union_cliques:3,2", "disjoint_union_cliques:2,2,1",
)


@dataclass
class CheckResult:
    """Outcome of one verification check over a graph batch."""
    name: str
    graphs: int
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def preorder_matches_cep(g: Graph) -> bool:
    return equivalence_classes(max_inductive_preorder(g)) == color_refinement(g)


def orbits_match_cep(g: Graph) -> bool:
    return automorphism_orbits(g) == color_refinement(g)


def orbits_refine_cep(g: Graph) -> bool:
    orbits = automorphism_orbits(g)
    return is_equitable(g, orbits) and is_coarser_or_equal(color_refinement(g), orbits)


def adapted_maps_agree(g: Graph, max_depth: int) -> bool:
    """Finite-depth shadow: related pairs have adapted maps, oracle rejections are unrelated."""
    rel = max_inductive_preorder(g).rel
    for i in range(g.n):
        for j in range(g.n):
            for depth in range(max_depth + 1):
                exists = adapted_dominating_map_exists(g, j, i, depth)
                if rel[i, j] and not exists:
                    return False
                if not exists:
                    break
    return True


class DynamicsOutcome(NamedTuple):
    """Per-graph results of the batched dynamics checks; field names double as check names."""
    bounds_bracket: bool
    lumping_exact: bool
    order_preserved: bool


def dynamics_outcome(g: Graph, dynamics: DynamicsSettings, tolerances: ToleranceSettings,
                     seeds: int, seed: int = 0) -> DynamicsOutcome:
    """Order, lumping and bracketing checks for one graph from three batched integrations.

    The full RK4 run carries `seeds` preorder-consistent random starts, one
    class-constant start and one unconstrained random start as columns. The
    discrete map iterates the consistent starts, and one quotient run carries
    the class-constant start with the per-class min and max of the random one.
    """
    params = LogisticParams(dynamics.gamma, dynamics.horizon, dynamics.dt)
    r = max_inductive_preorder(g)
    p = color_refinement(g)
    q = QuotientSystem.from_partition(g, p, dynamics.gamma)
    rng = np.random.default_rng(seed)
    z0 = rng.uniform(0.0, 1.0, size=p.K)
    y_random = rng.uniform(0.0, 1.0, size=g.n)
    consistent = [random_consistent_initial(r, seed + k) for k in range(seeds)]

    full = integrate_rk4_batch(logistic_system(g, dynamics.gamma),
                               np.column_stack(consistent + [lift(p, z0), y_random]), params)
    discrete = []
    if seeds:
        h = max_discrete_step(g, dynamics.gamma)
        if dynamics.h is not None:
            h = min(dynamics.h, h)
        discrete = iterate_discrete_batch(g, dynamics.gamma, h, np.column_stack(consistent),
                                          dynamics.discrete_steps)
    low0, high0 = class_min_max(p, y_random)
    lumped, lower, upper = (
        t.lift(p) for t in integrate_rk4_batch(quotient_system(q), np.column_stack([z0, low0, high0]), params)
    )

    ordered = all(not order_monitor(t, r, tolerances.order) for t in full[:seeds] + discrete)
    lumping_error = float(np.max(np.abs(full[seeds].states - lumped.states), initial=0.0))
    bracketed = BoundRun(lower, upper, full[seeds + 1]).holds(tolerances.order)
    if lumping_error > tolerances.lumping:
        logger.warning(f"Lumping error {lumping_error:.3g} exceeds {tolerances.lumping} (n={g.n}, K={p.K})")
    return DynamicsOutcome(bracketed, lumping_error <= tolerances.lumping, ordered)


class Verifier:
    """Builds the seeded graph batches and runs the cross-checks over them."""

    def __init__(self, settings: VerifySettings, seed: int = 0,
                 dynamics: Optional[DynamicsSettings] = None, tolerances: Optional[ToleranceSettings] = None):
        self.settings = settings
        self.seed = seed
        self.dynamics = dynamics or DynamicsSettings()
        self.tolerances = tolerances or ToleranceSettings()

    def random_suite(self) -> List[LabeledGraph]:
        """Seeded Erdos-Renyi batch cycling through sizes and densities, plus the named generators."""
        s = self.settings
        suite = []
        for k in range(s.random_graphs):
            n = s.sizes[k % len(s.sizes)]
            p = s.densities[(k // len(s.sizes)) % len(s.densities)]
            spec = f"erdos_renyi:{n},{p}:{self.seed + k}"
            suite.append((spec, generate_from_spec(spec)))
        suite.extend((spec, generate_from_spec(spec)) for spec in NAMED_SUITE)
        return suite

    def tree_suite(self) -> List[LabeledGraph]:
        rng = np.random.default_rng(self.seed)
        suite = []
        for k in range(self.settings.trees):
            n = int(rng.integers(1, self.settings.max_tree_nodes + 1))
            spec = f"random_tree:{n}:{self.seed + k}"
            suite.append((spec, generate('random_tree', [n], self.seed + k)))
        return suite

    def small_suite(self) -> List[LabeledGraph]:
        rng = np.random.default_rng(self.seed + 1)
        suite = []
        for k in range(self.settings.small_graphs):
            n = int(rng.integers(1, self.settings.max_small_nodes + 1))
            p = round(float(rng.choice([0.3, 0.5, 0.7])), 1)
            spec = f"erdos_renyi:{n},{p}:{self.seed + k}"
            suite.append((spec, generate_from_spec(spec)))
        suite.extend(
            (spec, g) for spec, g in ((spec, generate_from_spec(spec)) for spec in SMALL_NAMED_SUITE)
            if g.n <= self.settings.max_small_nodes
        )
        return suite

    def _map(self, suite: List[LabeledGraph], check: Callable[[Graph], Any]) -> List[Any]:
        if self.settings.workers > 1:
            with ThreadPoolExecutor(max_workers=self.settings.workers) as pool:
                return list(pool.map(lambda item: check(item[1]), suite))
        return [check(g) for _, g in suite]

    def _result(self, name: str, suite: List[LabeledGraph], outcomes: Sequence[bool],
                seconds: float) -> CheckResult:
        result = CheckResult(name, len(suite), sorted(label for (label, _), ok in zip(suite, outcomes) if not ok))
        status = "PASS" if result.passed else "FAIL"
        logger.info(f"{name}: {status} on {len(suite)} graphs in {format_duration(seconds)}")
        return result

    def _run(self, name: str, suite: List[LabeledGraph], check: Callable[[Graph], bool]) -> CheckResult:
        with stopwatch() as elapsed:
            outcomes = self._map(suite, check)
        return self._result(name, suite, outcomes, elapsed[0])

    def run_dynamics(self) -> List[CheckResult]:
        """Order preservation, exact lumping and bracketing over the random suite."""
        suite = self.random_suite()
        seeds = self.settings.dynamics_seeds
        with stopwatch() as elapsed:
            outcomes = self._map(
                suite, lambda g: dynamics_outcome(g, self.dynamics, self.tolerances, seeds, self.seed)
            )
        return [
            self._result(name, suite, [o[k] for o in outcomes], elapsed[0])
            for k, name in enumerate(DynamicsOutcome._fields)
        ]

    def run_all(self) -> List[CheckResult]:
        trees = self.tree_suite()
        small = self.small_suite()
        depth = self.settings.max_depth
        results = [
            self._run("preorder_classes_equal_cep", self.random_suite(), preorder_matches_cep),
            self._run("tree_orbits_equal_cep", trees, orbits_match_cep),
            self._run("orbits_refine_cep", trees + small, orbits_refine_cep),
            self._run("adapted_map_soundness", small, lambda g: adapted_maps_agree(g, depth)),
        ]
        if self.settings.dynamics_seeds > 0:
            results.extend(self.run_dynamics())
        return sorted(results, key=lambda r: r.name)


def format_report(results: List[CheckResult]) -> str:
    """Fixed-width PASS/FAIL table followed by the failing graph specs."""
    lines = [f"{'check':<32}{'graphs':>8}{'failed':>8}  status"]
    for r in results:
        lines.append(f"{r.name:<32}{r.graphs:>8}{len(r.failures):>8}  {'PASS' if r.passed else 'FAIL'}")
    for r in results:
        for label in r.failures:
            lines.append(f"FAILED {r.name}: {label}")
    overall = "PASS" if all(r.passed for r in results) else "FAIL"
    lines.append(f"overall: {overall}")
    return "\n".join(lines) + "\n"
