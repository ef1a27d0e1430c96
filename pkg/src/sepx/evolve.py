"""Regularized Evolution over attributed digraphs.

The loop is the aging variant: evaluate an offspring, append it, drop the
oldest member, so the population is a sliding window of the most recent
genotypes. Operator schedules:

* random_search: fresh rejection-sampled genotype per evaluation.
* mutation_only: tournament parent, mutated.
* std_x_alternating / sep_x_alternating: crossover on even variation steps,
  mutation on odd ones, so half the budget goes to each operator.

Crossover steps pick two parents by independent tournaments (identical
winners are resampled up to 10 times, then the step mutates instead),
record the parent pair's defect statistics, and accept only offspring that
are valid and at positive edit distance from both parents; when no such
offspring appears within the retry budget the step falls back to mutating
parent 1, so every step costs exactly one evaluation regardless.
"""

from __future__ import annotations

import csv
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .ged import CapacityError, ged_distance
from .graphs import AttributedGraph, GraphInputError
from .operators import (
    OperatorConfig,
    SepEditPath,
    always_valid,
    dag_io_validity,
    mutate,
    random_dag_io_graph,
    random_valid_graph,
    standard_crossover,
)
from .rng import DEFAULT_SEED, substream

__all__ = [
    "SCHEDULES",
    "FitnessSpec",
    "ValiditySpec",
    "RunConfig",
    "Individual",
    "EvalRecord",
    "ParentStats",
    "RunLog",
    "BatchReport",
    "regularized_evolution",
    "run_batch",
    "collect_parent_stats",
    "write_runs_csv",
    "write_stats_csv",
    "summary_dict",
]

SCHEDULES = ("random_search", "mutation_only", "std_x_alternating", "sep_x_alternating")

PAIR_RESAMPLES = 10


class EvalOutcome(NamedTuple):
    fitness: float
    distance: int
    edge_distance: int


@dataclass(frozen=True)
class FitnessSpec:
    """Distance-to-target fitness, optionally with Gaussian observation noise.

    direction is "min" for both built-in kinds; the loop consults it rather
    than assuming.
    """

    kind: str = "ged"
    target: AttributedGraph | None = None
    noise_sd: float = 0.0
    direction: str = "min"

    def __post_init__(self) -> None:
        if self.kind not in ("ged", "noisy_ged"):
            raise GraphInputError(f"unknown fitness kind {self.kind!r}")
        if self.target is None:
            raise GraphInputError("fitness requires a target graph")
        if self.noise_sd < 0:
            raise GraphInputError(f"noise_sd must be nonnegative, got {self.noise_sd}")
        if self.direction not in ("min", "max"):
            raise GraphInputError(f"direction must be 'min' or 'max', got {self.direction!r}")

    def evaluate(self, g: AttributedGraph, rng: np.random.Generator, max_order: int) -> EvalOutcome:
        d = ged_distance(g, self.target, max_order=max_order)
        fitness = float(d.total)
        if self.kind == "noisy_ged" and self.noise_sd > 0:
            fitness += float(rng.normal(0.0, self.noise_sd))
        return EvalOutcome(fitness, d.total, d.edge)


@dataclass(frozen=True)
class ValiditySpec:
    """Declarative validity so run configs stay picklable for process pools."""

    kind: str = "always"
    source_attr: int = 1
    sink_attr: int = 2
    edge_cap: int | None = None
    max_order: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("always", "dag_io"):
            raise GraphInputError(f"unknown validity kind {self.kind!r}")

    def build(self):
        if self.kind == "always":
            if self.max_order is None:
                return always_valid
            cap = self.max_order
            return lambda g: g.order <= cap
        return dag_io_validity(
            self.source_attr, self.sink_attr, edge_cap=self.edge_cap, max_order=self.max_order
        )

    def sample(self, order, rng, alphabet, edge_density, max_proposals: int = 10_000):
        """Draw one valid genotype; dag_io spaces use the constructive
        sampler because uniform rejection accepts almost nothing there."""
        predicate = self.build()
        if self.kind == "dag_io":
            for _ in range(max_proposals):
                g = random_dag_io_graph(
                    order,
                    rng,
                    source_attr=self.source_attr,
                    sink_attr=self.sink_attr,
                    alphabet=alphabet,
                    edge_density=edge_density,
                )
                if predicate(g):
                    return g
            raise RuntimeError(
                f"no valid dag_io graph of order {order} in {max_proposals} proposals"
            )
        return random_valid_graph(
            order, predicate, rng, alphabet=alphabet, edge_density=edge_density,
            max_proposals=max_proposals,
        )


@dataclass(frozen=True)
class RunConfig:
    fitness: FitnessSpec
    max_evaluations: int
    schedule: str = "mutation_only"
    population_size: int = 100
    tournament_size: int = 10
    seed: int = DEFAULT_SEED
    operators: OperatorConfig = OperatorConfig()
    validity: ValiditySpec = ValiditySpec()
    init_order: int | tuple[int, ...] | None = None
    edge_density: float = 0.3

    def __post_init__(self) -> None:
        if self.schedule not in SCHEDULES:
            raise GraphInputError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not 1 <= self.tournament_size <= self.population_size:
            raise GraphInputError(
                f"tournament_size must lie in [1, {self.population_size}], got {self.tournament_size}"
            )
        if self.max_evaluations < self.population_size:
            raise GraphInputError(
                f"max_evaluations must cover the initial population "
                f"({self.population_size}), got {self.max_evaluations}"
            )

    @property
    def init_orders(self) -> tuple[int, ...]:
        """Candidate orders for initial genotypes; a spread seeds the
        population with vertex-count diversity."""
        if self.init_order is None:
            return (self.fitness.target.order,)
        if isinstance(self.init_order, int):
            return (self.init_order,)
        return tuple(self.init_order)


@dataclass
class Individual:
    genotype: AttributedGraph
    fitness: float
    distance: int
    edge_distance: int
    birth_index: int


@dataclass(frozen=True)
class EvalRecord:
    index: int
    operator: str
    offspring_fitness: float
    best_fitness: float


@dataclass(frozen=True)
class ParentStats:
    """Defect statistics of a crossover parent pair, taken when the pair is
    fixed, before any offspring retries."""

    d_opt_p1: int
    d_p1_p2: int
    n1_edges: int
    n2_edges: int


@dataclass
class RunLog:
    run_id: int
    schedule: str
    records: list[EvalRecord] = field(default_factory=list)
    crossover_stats: list[ParentStats] = field(default_factory=list)
    success: bool = False
    hitting_time: int | None = None
    best_fitness: float = float("inf")
    metadata: dict = field(default_factory=dict)


def _run_metadata(cfg: RunConfig) -> dict:
    return {
        "alternation": "crossover_on_even_steps",
        "pair_selection": f"two_tournaments_reject_identical_x{PAIR_RESAMPLES}",
        "crossover_fallback": "mutate_parent_1_same_step",
        "init": "rejection_sampled_valid",
        "seed": cfg.seed,
        "schedule": cfg.schedule,
    }


def regularized_evolution(cfg: RunConfig, run_id: int = 0) -> RunLog:
    """Run one seeded evolution; all draws come from (seed, "run", run_id)."""
    rng = substream(cfg.seed, "run", run_id)
    validity = cfg.validity.build()
    minimize = cfg.fitness.direction == "min"
    max_order = cfg.operators.max_order
    log = RunLog(run_id=run_id, schedule=cfg.schedule, metadata=_run_metadata(cfg))

    population: deque[Individual] = deque()
    evals = 0
    births = 0

    def better(a: float, b: float) -> bool:
        return a < b if minimize else a > b

    def record(op: str, indiv: Individual) -> None:
        nonlocal evals
        evals += 1
        if better(indiv.fitness, log.best_fitness):
            log.best_fitness = indiv.fitness
        if indiv.distance == 0 and not log.success:
            log.success = True
            log.hitting_time = evals
        log.records.append(EvalRecord(evals, op, indiv.fitness, log.best_fitness))

    def spawn(g: AttributedGraph, op: str) -> Individual:
        nonlocal births
        outcome = cfg.fitness.evaluate(g, rng, max_order)
        indiv = Individual(g, outcome.fitness, outcome.distance, outcome.edge_distance, births)
        births += 1
        record(op, indiv)
        return indiv

    def fresh_genotype() -> AttributedGraph:
        orders = cfg.init_orders
        order = orders[int(rng.integers(len(orders)))] if len(orders) > 1 else orders[0]
        return cfg.validity.sample(order, rng, cfg.operators.alphabet, cfg.edge_density)

    def tournament() -> Individual:
        idx = rng.choice(len(population), size=cfg.tournament_size, replace=False)
        chosen = [population[int(i)] for i in idx]
        keys = [c.fitness if minimize else -c.fitness for c in chosen]
        return chosen[int(np.argmin(keys))]

    def valid_mutation(parent: Individual) -> AttributedGraph:
        for _ in range(cfg.operators.max_retries):
            child = mutate(parent.genotype, rng, cfg.operators)
            if validity(child):
                return child
        return parent.genotype  # give up; re-evaluating the parent still ages the population

    def crossover_child(p1: Individual, p2: Individual, kind: str) -> AttributedGraph | None:
        if kind == "sep_x_alternating":
            path = SepEditPath(p1.genotype, p2.genotype, max_order=max_order)
            d12 = path.result
            log.crossover_stats.append(
                ParentStats(p1.edge_distance, d12.edge_distance, p1.genotype.edge_count, p2.genotype.edge_count)
            )
            # one or zero edits cannot produce anything strictly between the
            # parents, so skip straight to the fallback
            if d12.distance <= 1:
                return None
            op = lambda a, b, r: path.sample(r)
        else:
            d12 = ged_distance(p1.genotype, p2.genotype, max_order=max_order)
            log.crossover_stats.append(
                ParentStats(p1.edge_distance, d12.edge, p1.genotype.edge_count, p2.genotype.edge_count)
            )
            op = standard_crossover
        for _ in range(cfg.operators.max_retries):
            child = op(p1.genotype, p2.genotype, rng)
            if not validity(child):
                continue
            if ged_distance(child, p1.genotype, max_order=max_order).total == 0:
                continue
            if ged_distance(child, p2.genotype, max_order=max_order).total == 0:
                continue
            return child
        return None

    # seed the population; each accepted genotype costs one evaluation
    while evals < cfg.max_evaluations and len(population) < cfg.population_size:
        population.append(spawn(fresh_genotype(), "init"))

    step = 0
    while evals < cfg.max_evaluations:
        if cfg.schedule == "random_search":
            population.append(spawn(fresh_genotype(), "random"))
        else:
            crossing = cfg.schedule in ("std_x_alternating", "sep_x_alternating") and step % 2 == 0
            child: AttributedGraph | None = None
            op_name = "mutation"
            if crossing:
                p1 = tournament()
                p2 = tournament()
                for _ in range(PAIR_RESAMPLES):
                    if p1 is not p2:
                        break
                    p2 = tournament()
                if p1 is not p2:
                    child = crossover_child(p1, p2, cfg.schedule)
                    if child is not None:
                        op_name = "sep_x" if cfg.schedule == "sep_x_alternating" else "std_x"
            else:
                p1 = tournament()
            if child is None:
                child = valid_mutation(p1)
            population.append(spawn(child, op_name))
        population.popleft()  # aging: drop the oldest
        step += 1
    return log


def collect_parent_stats(stats: Iterable[ParentStats]) -> tuple[dict, dict]:
    """Normalized relative-frequency tables over (d_opt_p1, d_p1_p2) and
    (n1_edges, n2_edges); both empty when no crossover happened."""
    d_counts: Counter = Counter()
    n_counts: Counter = Counter()
    total = 0
    for s in stats:
        d_counts[(s.d_opt_p1, s.d_p1_p2)] += 1
        n_counts[(s.n1_edges, s.n2_edges)] += 1
        total += 1
    if total == 0:
        return {}, {}
    d_table = {k: v / total for k, v in sorted(d_counts.items())}
    n_table = {k: v / total for k, v in sorted(n_counts.items())}
    return d_table, n_table


@dataclass
class BatchReport:
    schedule: str
    n_runs: int
    max_evaluations: int
    runs: tuple[RunLog, ...]
    failures: tuple[str, ...]
    eval_indices: np.ndarray
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray
    success_rate: float
    hitting_times: tuple[int, ...]
    stats_d: dict
    stats_n1: dict


def _one_run(args) -> RunLog:
    cfg, run_id = args
    return regularized_evolution(cfg, run_id)


def run_batch(cfg: RunConfig, n_runs: int, jobs: int = 1) -> BatchReport:
    """Execute n_runs independent seeded runs and aggregate.

    Runs derive their streams from (cfg.seed, "run", run_id), so results are
    identical whether they execute sequentially or across processes.
    """
    if n_runs < 1:
        raise GraphInputError(f"n_runs must be at least 1, got {n_runs}")
    tasks = [(cfg, i) for i in range(n_runs)]
    logs: list[RunLog] = []
    failures: list[str] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_one_run, task): task[1] for task in tasks}
            for fut in as_completed(futures):
                try:
                    logs.append(fut.result())
                except (CapacityError, RuntimeError) as exc:
                    failures.append(f"run {futures[fut]}: {exc}")
    else:
        for task in tasks:
            try:
                logs.append(_one_run(task))
            except (CapacityError, RuntimeError) as exc:
                failures.append(f"run {task[1]}: {exc}")

    completed = sorted(logs, key=lambda log: log.run_id)
    failures.sort()
    if not completed:
        raise RuntimeError("all runs failed: " + "; ".join(failures))
    curves = np.array([[r.best_fitness for r in log.records] for log in completed])
    eval_indices = np.arange(1, cfg.max_evaluations + 1)
    stats = [s for log in completed for s in log.crossover_stats]
    d_table, n_table = collect_parent_stats(stats)
    hits = tuple(log.hitting_time for log in completed if log.success)
    return BatchReport(
        schedule=cfg.schedule,
        n_runs=n_runs,
        max_evaluations=cfg.max_evaluations,
        runs=tuple(completed),
        failures=tuple(failures),
        eval_indices=eval_indices,
        median=np.median(curves, axis=0),
        q25=np.percentile(curves, 25, axis=0),
        q75=np.percentile(curves, 75, axis=0),
        success_rate=sum(log.success for log in completed) / len(completed),
        hitting_times=hits,
        stats_d=d_table,
        stats_n1=n_table,
    )


def write_runs_csv(report: BatchReport, sink) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["run_id", "eval", "best_fitness", "operator"])
    for log in report.runs:
        for rec in log.records:
            writer.writerow([log.run_id, rec.index, str(float(rec.best_fitness)), rec.operator])


def write_stats_csv(table: dict, columns: tuple[str, str, str], sink) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(list(columns))
    for (a, b), freq in table.items():
        writer.writerow([a, b, str(float(freq))])


def summary_dict(report: BatchReport) -> dict:
    final = -1  # last budget column
    return {
        "schedule": report.schedule,
        "n_runs": report.n_runs,
        "max_evaluations": report.max_evaluations,
        "success_rate": report.success_rate,
        "hitting_times": list(report.hitting_times),
        "failures": list(report.failures),
        "final_best_fitness": {
            "median": float(report.median[final]),
            "q25": float(report.q25[final]),
            "q75": float(report.q75[final]),
        },
    }
