"""Randomized benchmark harness.

Generates connected random networks of a given shape, runs the tree
construction presets over them with derived seeds, and formats the results
as a delimited table.  An invalid result anywhere aborts the experiment and
carries the event trace of the offending run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from statistics import fmean

from . import verify
from .algorithms import PRESETS, run_preset
from .incremental import EditSession, SessionConfig
from .model import BeliefNetwork, OperationError, build_initial_cluster_graph

SEED_STRIDE = 1_000_003
SEED_MASK = (1 << 63) - 1


class BenchError(RuntimeError):
    """Experiment aborted; ``trace`` holds the failing run's events."""

    def __init__(self, message: str, trace=()):
        self.trace = list(trace)
        super().__init__(message)


@dataclass(frozen=True)
class NetworkSpec:
    """Shape of a random network: size, density, cardinality range."""

    name: str
    variables: int
    arcs: int
    card_low: int = 2
    card_high: int = 2
    seed: int = 0

    def __post_init__(self):
        n = self.variables
        if n < 1:
            raise ValueError("need at least one variable")
        if not (max(0, n - 1) <= self.arcs <= n * (n - 1) // 2):
            raise ValueError(f"arc count {self.arcs} out of range for {n} variables")
        if not (2 <= self.card_low <= self.card_high):
            raise ValueError("cardinality range must satisfy 2 <= low <= high")


STANDARD_SPECS = (
    NetworkSpec("net43x66", 43, 66, 2, 2, seed=431),
    NetworkSpec("net58x79", 58, 79, 2, 2, seed=581),
    NetworkSpec("net25x45", 25, 45, 2, 4, seed=251),
)


def seed_sequence(master: int):
    """Infinite deterministic stream of derived seeds."""
    state = master & SEED_MASK
    index = 0
    while True:
        state = (state * SEED_STRIDE + index) & SEED_MASK
        index += 1
        yield state


def generate_random_network(spec: NetworkSpec, seed: int | None = None) -> BeliefNetwork:
    """Connected random network matching ``spec``, deterministic in the seed.

    Variables get a random topological order; a random spanning tree keeps
    the network connected and the remaining arcs are sampled uniformly from
    the forward pairs not already used.
    """
    rng = random.Random(spec.seed if seed is None else seed)
    n = spec.variables
    width = len(str(n - 1))
    names = [f"v{i:0{width}d}" for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    network = BeliefNetwork()
    for name in names:
        network.add_variable(name, rng.randint(spec.card_low, spec.card_high))
    tree_pairs = set()
    for i in range(1, n):
        j = rng.randrange(i)
        network.add_arc(order[j], order[i])
        tree_pairs.add((j, i))
    extras = [
        (j, i) for i in range(n) for j in range(i) if (j, i) not in tree_pairs
    ]
    for j, i in rng.sample(extras, spec.arcs - len(tree_pairs)):
        network.add_arc(order[j], order[i])
    return network


@dataclass(frozen=True)
class ExperimentResult:
    algorithm: str
    network: str
    costs: tuple[int, ...]
    seeds: tuple[int, ...]

    @property
    def min_cost(self) -> int:
        return min(self.costs)

    @property
    def median_cost(self) -> int:
        return sorted(self.costs)[(len(self.costs) - 1) // 2]

    @property
    def mean_cost(self) -> float:
        return fmean(self.costs)


def run_experiment(
    specs=STANDARD_SPECS,
    presets=("E", "D", "D2"),
    runs: int = 20,
    master_seed: int = 0,
) -> list[ExperimentResult]:
    if runs < 1:
        raise ValueError("need at least one run")
    for preset in presets:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}")
    seeds = seed_sequence(master_seed)
    results = []
    for spec in specs:
        network = generate_random_network(spec)
        for preset in presets:
            costs, used = [], []
            for run in range(runs):
                seed = next(seeds)
                graph = build_initial_cluster_graph(network)
                try:
                    report = run_preset(graph, preset, seed=seed)
                except OperationError as e:
                    raise BenchError(
                        f"{preset} on {spec.name} run {run} seed {seed}: {e}",
                        trace=graph.trace,
                    ) from e
                costs.append(report.cost_after)
                used.append(seed)
            results.append(
                ExperimentResult(preset, spec.name, tuple(costs), tuple(used))
            )
    return results


@dataclass(frozen=True)
class IncrementalResult:
    algorithm: str
    network: str
    edits: int
    restores: int
    final_cost: int


def run_incremental_experiment(
    spec: NetworkSpec,
    preset: str = "IE",
    master_seed: int = 0,
    shape: str = "chain",
) -> IncrementalResult:
    """Build a random network arc by arc inside an edit session.

    Arcs arrive in a contiguous order: each added arc shares a variable with
    the region built so far, chosen uniformly among the eligible arcs.  After
    every edit the family and path properties are checked; after every
    triggered restore the result must check out as a junction tree.
    """
    network = generate_random_network(spec)
    seeds = seed_sequence(master_seed)
    session = EditSession(config=SessionConfig(
        preset=preset, seed=next(seeds), retraction_shape=shape))
    rng = random.Random(next(seeds))
    pending = list(network.arcs())
    built: set[str] = set()
    edits = restores = 0

    def check(stage: str):
        for report in (verify.check_family_property(session.graph),
                       verify.check_path_property(session.graph)):
            if not report:
                raise BenchError(
                    f"{stage} on {spec.name}: {report.name} failed "
                    f"{report.witnesses[:3]}", trace=session.graph.trace)

    while pending:
        eligible = [a for a in pending if not built or built & set(a)]
        arc = rng.choice(eligible)
        pending.remove(arc)
        for v in arc:
            if v not in built:
                session.add_variable(v, network.cardinality(v))
                built.add(v)
                edits += 1
        session.add_arc(*arc)
        edits += 1
        check("add_arc")
        report = session.restore()
        if report.triggered:
            restores += 1
            tree = verify.check_junction_tree(session.graph.clone())
            if not tree:
                raise BenchError(
                    f"restore on {spec.name}: {tree.witnesses[:3]}",
                    trace=session.graph.trace)
    return IncrementalResult(preset, spec.name, edits, restores, session.graph.cost())


def format_table(results: list[ExperimentResult]) -> str:
    """Tab-separated run table followed by a commented summary block."""
    lines = ["algorithm\tnetwork\trun\tcost"]
    for r in results:
        for run, cost in enumerate(r.costs):
            lines.append(f"{r.algorithm}\t{r.network}\t{run}\t{cost}")
    lines.append("# summary")
    lines.append("# algorithm\tnetwork\tmin\tmedian\tmean")
    for r in results:
        lines.append(
            f"# {r.algorithm}\t{r.network}\t{r.min_cost}\t{r.median_cost}"
            f"\t{r.mean_cost:.1f}"
        )
    for note in qualitative_notes(results):
        lines.append(f"# note: {note}")
    return "\n".join(lines) + "\n"


def qualitative_notes(results: list[ExperimentResult]) -> list[str]:
    """Observations about the measured costs, reported rather than asserted."""
    by_network: dict[str, list[ExperimentResult]] = {}
    for r in results:
        by_network.setdefault(r.network, []).append(r)
    notes = []
    wins: dict[str, int] = {}
    for network in sorted(by_network):
        group = sorted(by_network[network], key=lambda r: (r.mean_cost, r.algorithm))
        ranking = " <= ".join(f"{r.algorithm} (mean {r.mean_cost:.1f})" for r in group)
        notes.append(f"{network}: {ranking}")
        wins[group[0].algorithm] = wins.get(group[0].algorithm, 0) + 1
    if len(by_network) > 1 and wins:
        best = max(sorted(wins), key=lambda a: wins[a])
        notes.append(
            f"{best} had the lowest mean cost on {wins[best]} of "
            f"{len(by_network)} networks"
        )
    return notes
