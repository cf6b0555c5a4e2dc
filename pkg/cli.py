# cli.py: One function per subcommand; each writes machine-readable results plus a one-line summary.
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple
import json
import logging

import numpy as np

from config import RunConfig
from dynamics import (
    LogisticParams,
    ParameterError,
    QuotientSystem,
    Trajectory,
    bound_run,
    integrate_rk4,
    iterate_discrete,
    iterate_quotient_discrete,
    lift,
    logistic_system,
    max_discrete_step,
    order_monitor,
    quotient_system,
    violations_to_json,
)
from graph_core import Graph, generate_from_spec, load_graph
from preorder import PreorderRelation, condensation, equivalence_classes, max_inductive_preorder
from refinement import color_refinement, quotient_to_json
from verification import Verifier, format_report

logger = logging.getLogger(__name__)


@dataclass
class InitialState:
    """How simulate, quotient and bound pick y(0); at most one source may be set."""
    uniform: Optional[float] = None
    values: Optional[List[float]] = None
    random: bool = False
    class_values: Optional[List[float]] = None
    require_consistent: bool = False
    discrete: bool = False

    @property
    def has_source(self) -> bool:
        return (self.uniform is not None or self.values is not None or self.random
                or self.class_values is not None)


def load_run_graph(config: RunConfig) -> Graph:
    if config.graph_file is not None:
        graph = load_graph(Path(config.graph_file))
        source = config.graph_file
    else:
        graph = generate_from_spec(config.generator_spec, default_seed=config.seed)
        source = config.generator_spec
    logger.info(f"Graph {source}: n={graph.n}, edges={graph.edge_count}")
    return graph


def _output_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data: Any) -> None:
    with path.open('w') as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def _summary(text: str) -> None:
    logger.info(text)
    print(text)


def _params(config: RunConfig) -> LogisticParams:
    d = config.dynamics
    return LogisticParams(gamma=d.gamma, horizon=d.horizon, dt=d.dt)


def _discrete_h(config: RunConfig, g: Graph) -> float:
    return config.dynamics.h if config.dynamics.h is not None else max_discrete_step(g, config.dynamics.gamma)


def resolve_initial(g: Graph, initial: InitialState, r: PreorderRelation, seed: int) -> np.ndarray:
    """Initial state from the flags; class values are lifted over the preorder's equivalence classes."""
    sources = [initial.uniform is not None, initial.values is not None, initial.random,
               initial.class_values is not None]
    if sum(sources) > 1:
        raise CommandError("Give at most one of --y0, --y0-values, --y0-random, --y0-classes")
    if initial.class_values is not None:
        classes = equivalence_classes(r)
        if len(initial.class_values) != classes.K:
            raise CommandError(f"--y0-classes has {len(initial.class_values)} entries "
                               f"for {classes.K} equivalence classes")
        y0 = lift(classes, initial.class_values)
    elif initial.values is not None:
        y0 = np.asarray(initial.values, dtype=float)
        if len(y0) != g.n:
            raise CommandError(f"--y0-values has {len(y0)} entries for a graph with {g.n} nodes")
    elif initial.random:
        y0 = np.random.default_rng(seed).uniform(0.0, 1.0, size=g.n)
    else:
        y0 = np.full(g.n, 0.1 if initial.uniform is None else initial.uniform)
    if np.any((y0 < 0) | (y0 > 1)):
        raise ParameterError("Initial state must lie in [0, 1]^N")
    return y0


def order_conflicts(r: PreorderRelation, y0: np.ndarray) -> List[Tuple[int, int]]:
    return [(i, j) for i, j in r.pairs() if y0[i] < y0[j]]


def cmd_cep(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    g = load_run_graph(config)
    partition = color_refinement(g)
    _write_json(_output_dir(config) / "partition.json", partition.to_json())
    _summary(f"K={partition.K}, sizes [{','.join(str(s) for s in partition.sizes)}]")
    return 0


def cmd_preorder(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    g = load_run_graph(config)
    r = max_inductive_preorder(g)
    order = condensation(r)
    out = _output_dir(config)
    _write_json(out / "relation.json", r.to_json())
    _write_json(out / "partition.json", order.partition.to_json())
    (out / "condensation.dot").write_text(order.to_dot())
    _summary(f"classes={order.partition.K}, related pairs={len(r.pairs())}, "
             f"order edges={len(order.edges)}, passes={r.iterations}")
    return 0


def _evolve(config: RunConfig, g: Graph, y0: np.ndarray, discrete: bool) -> Trajectory:
    if discrete:
        return iterate_discrete(g, config.dynamics.gamma, _discrete_h(config, g), y0, config.dynamics.discrete_steps)
    return integrate_rk4(logistic_system(g, config.dynamics.gamma), y0, _params(config))


def cmd_simulate(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    initial = initial or InitialState()
    g = load_run_graph(config)
    r = max_inductive_preorder(g)
    y0 = resolve_initial(g, initial, r, config.seed)
    conflicts = order_conflicts(r, y0)
    if conflicts and initial.require_consistent:
        raise CommandError(f"Initial state violates {len(conflicts)} dominance pairs: {conflicts}")
    trajectory = _evolve(config, g, y0, initial.discrete)
    violations = order_monitor(trajectory, r, config.tolerances.order)
    out = _output_dir(config)
    trajectory.to_csv(out / "trajectory.csv")
    _write_json(out / "violations.json", violations_to_json(violations))
    _summary(f"steps={len(trajectory) - 1}, t_end={trajectory.times[-1]:.6g}, "
             f"violations={len(violations)}, consistent start={'yes' if not conflicts else 'no'}")
    return 1 if violations and not conflicts else 0


def cmd_quotient(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    initial = initial or InitialState()
    g = load_run_graph(config)
    partition = color_refinement(g)
    q = QuotientSystem.from_partition(g, partition, config.dynamics.gamma)
    y_start = resolve_initial(g, initial, max_inductive_preorder(g), config.seed)
    z0 = np.array([y_start[list(members)].mean() for members in partition.classes])
    if initial.discrete:
        h = _discrete_h(config, g)
        lumped = iterate_quotient_discrete(q, h, z0, config.dynamics.discrete_steps).lift(partition)
        full = iterate_discrete(g, q.gamma, h, lift(partition, z0), config.dynamics.discrete_steps)
    else:
        lumped = integrate_rk4(quotient_system(q), z0, _params(config)).lift(partition)
        full = integrate_rk4(logistic_system(g, q.gamma), lift(partition, z0), _params(config))
    error = float(np.max(np.abs(full.states - lumped.states), initial=0.0))
    out = _output_dir(config)
    _write_json(out / "quotient.json", quotient_to_json(q.S, q.sizes))
    lumped.to_csv(out / "trajectory.csv")
    _summary(f"K={q.K}, sizes [{','.join(str(s) for s in q.sizes)}], lumping error={error:.3g}")
    return 0 if error <= config.tolerances.lumping else 1


def cmd_bound(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    initial = initial or InitialState()
    if not initial.has_source:
        initial = replace(initial, random=True)
    g = load_run_graph(config)
    partition = color_refinement(g)
    y0 = resolve_initial(g, initial, max_inductive_preorder(g), config.seed)
    run = bound_run(g, _params(config), y0, partition, workers=config.verify.workers)
    below, above = run.bracket_gaps()
    ok = run.holds(config.tolerances.order)
    out = _output_dir(config)
    run.lower.to_csv(out / "lower.csv")
    run.upper.to_csv(out / "upper.csv")
    run.full.to_csv(out / "trajectory.csv")
    _write_json(out / "bound_report.json", {'max_below_lower': below, 'max_above_upper': above, 'ok': ok})
    _summary(f"bracketing {'holds' if ok else 'FAILS'}: below lower {below:.3g}, above upper {above:.3g}")
    return 0 if ok else 1


def cmd_verify(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    results = Verifier(config.verify, config.seed, config.dynamics, config.tolerances).run_all()
    report = format_report(results)
    (_output_dir(config) / "verify_report.txt").write_text(report)
    print(report, end="")
    passed = all(r.passed for r in results)
    _summary(f"verify: {sum(r.passed for r in results)}/{len(results)} checks passed")
    return 0 if passed else 1


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig, Optional[InitialState]], int]] = {
    'cep': cmd_cep,
    'preorder': cmd_preorder,
    'simulate': cmd_simulate,
    'quotient': cmd_quotient,
    'bound': cmd_bound,
    'verify': cmd_verify,
}


def run_command(config: RunConfig, initial: Optional[InitialState] = None) -> int:
    config.validate()
    return COMMAND_HANDLERS[config.command](config, initial)


class CommandError(Exception):
    """Raised when a command's contract is not met by its inputs."""
    pass
