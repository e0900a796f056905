"""Monte-Carlo ensembles over sampling schemes and edge budgets.

Seeds are derived per trial from ``(base_seed, stream, cell, trial)``, so a
cell's statistics do not depend on the order or concurrency of its trials.
Ground truth and comparison noise are drawn from their own streams; the
ground truth depends only on the trial index and is shared by every cell.
"""

import json
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._rng import derive_seed, make_rng
from .graph import (ComparisonRecord, build_pair_graph, graph_from_arrays,
                    is_connected, read_records_csv)
from .hodge import DisconnectedGraphError, GlobalScore, hodge_rank
from .io import write_table
from .sampling import (BudgetError, SamplerSpec, budget_from_p0, canonical_scheme,
                       floyd_sample, greedy_extend, n_pairs, sample,
                       uniform_spanning_tree)
from .spectral import (EstimatorInputs, estimate_with_replacement,
                       estimate_without_replacement, fiedler, solve_a)

METRICS = ("l2_centered",)
RANDOM_SCHEMES = ("with_replacement", "without_replacement", "greedy")
RESULT_HEADER = ("scheme", "p0", "m", "mean_l2", "std_l2", "mean_lambda2", "mean_dmin",
                 "connected_fraction", "trials_used")
SWEEP_HEADER = ("scheme", "n", "m", "p0", "lambda2_over_d", "dmin_over_d", "a1", "a2",
                "a_theorem1")

_TRUTH, _SAMPLER, _NOISE = 0, 1, 2


@dataclass(frozen=True, eq=False)
class GroundTruth:
    scores: np.ndarray


def generate_ground_truth(n, seed):
    """Draw ``n`` independent scores uniform on [0, 1]."""
    if n < 2:
        raise ValueError("need n >= 2")
    return GroundTruth(make_rng(seed).random(n))


def _scores(obj):
    if isinstance(obj, GroundTruth):
        return np.asarray(obj.scores, dtype=float)
    if isinstance(obj, GlobalScore):
        return np.asarray(obj.x, dtype=float)
    return np.asarray(obj, dtype=float)


def comparison_arrays(truth, graph, op, rng):
    """One binary comparison per unit of edge weight, flipped with probability ``op``."""
    if not 0.0 <= op <= 0.5:
        raise ValueError("outlier percentage must lie in [0, 0.5]")
    x = _scores(truth)
    reps = np.rint(graph.weights).astype(np.int64)
    if not np.array_equal(reps, graph.weights):
        raise ValueError("comparisons need integer edge multiplicities")
    i = np.repeat(graph.edges[:, 0], reps)
    j = np.repeat(graph.edges[:, 1], reps)
    values = np.sign(x[i] - x[j])
    flips = rng.random(len(values)) < op
    values[flips] = -values[flips]
    return i, j, values


def generate_comparisons(truth, graph, op, seed):
    """Simulated records consistent with ``truth`` on the sampled ``graph``.

    A pair sampled ``w`` times yields ``w`` independent records; each record
    agrees with the true order and is then negated with probability ``op``.
    """
    i, j, v = comparison_arrays(truth, graph, op, make_rng(seed))
    return [ComparisonRecord(a, b, c) for a, b, c in zip(i.tolist(), j.tolist(), v.tolist())]


def l2_distance(estimate, truth, rescale=False):
    """Euclidean distance between mean-centered score vectors.

    With ``rescale`` the centered estimate is first multiplied by the
    least-squares scalar fitting it to the centered truth.
    """
    x = _scores(estimate)
    y = _scores(truth)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    x = x - x.mean()
    y = y - y.mean()
    if rescale:
        denom = float(x @ x)
        x = x * (float(x @ y) / denom if denom > 0 else 0.0)
    return float(np.linalg.norm(x - y))


@dataclass(frozen=True)
class SamplerTemplate:
    """A sampling scheme without its ``n``, ``m`` and seed."""

    scheme: str
    transition_p0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", canonical_scheme(self.scheme))

    def budget(self, n, p0):
        """Edge budget for ``p0``, capped at ``C(n, 2)`` for simple-graph schemes."""
        m = budget_from_p0(n, p0)
        if self.scheme != "with_replacement":
            m = min(m, n_pairs(n))
        return m

    def spec(self, n, m, seed):
        return SamplerSpec(self.scheme, n, m, seed, self.transition_p0)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    samplers: Sequence[SamplerTemplate]
    p0_grid: Sequence[float]
    trials: int = 1000
    outlier_percentage: float = 0.0
    base_seed: int = 0
    metric: str = "l2_centered"
    rescale: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samplers", tuple(
            s if isinstance(s, SamplerTemplate) else SamplerTemplate(**s) for s in self.samplers))
        object.__setattr__(self, "p0_grid", tuple(float(p) for p in self.p0_grid))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(p < 1 for p in self.p0_grid):
            raise ValueError("every p0 in the grid must be >= 1")
        if not 0.0 <= self.outlier_percentage <= 0.5:
            raise ValueError("outlier_percentage must lie in [0, 0.5]")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")

    def to_dict(self):
        d = asdict(self)
        d["samplers"] = [asdict(s) for s in self.samplers]
        d["p0_grid"] = list(self.p0_grid)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class CellResult:
    scheme: str
    p0: float
    m: int
    mean_l2: float
    std_l2: float
    mean_lambda2: float
    mean_dmin: float
    connected_fraction: float
    trials_used: int

    def row(self):
        return [self.scheme, self.p0, self.m, self.mean_l2, self.std_l2, self.mean_lambda2,
                self.mean_dmin, self.connected_fraction, self.trials_used]


@dataclass
class ExperimentResult:
    cells: list
    config: Optional[ExperimentConfig] = None
    l2_samples: dict = field(default_factory=dict, repr=False)

    def cell(self, scheme, p0):
        scheme = canonical_scheme(scheme)
        for c in self.cells:
            if c.scheme == scheme and math.isclose(c.p0, p0):
                return c
        raise KeyError((scheme, p0))

    def write_csv(self, path):
        write_table(path, RESULT_HEADER, [c.row() for c in self.cells])


def _summarize(scheme, p0, m, outcomes):
    l2 = np.array([o[0] for o in outcomes if o[3]], dtype=float)
    lam = np.array([o[1] for o in outcomes], dtype=float)
    dmin = np.array([o[2] for o in outcomes], dtype=float)
    used = len(l2)
    mean = float(l2.mean()) if used else float("nan")
    std = float(l2.std(ddof=1)) if used > 1 else (0.0 if used == 1 else float("nan"))
    cell = CellResult(scheme, p0, m, mean, std, float(lam.mean()), float(dmin.mean()),
                      used / len(outcomes), used)
    return cell, l2


def _map(fn, tasks, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _simulation_trial(config, si, template, pi, m, trial):
    n, base = config.n, config.base_seed
    truth = generate_ground_truth(n, derive_seed(base, _TRUTH, trial))
    graph = sample(template.spec(n, m, derive_seed(base, _SAMPLER, si, pi, trial)))
    i, j, v = comparison_arrays(truth, graph, config.outlier_percentage,
                                make_rng(derive_seed(base, _NOISE, si, pi, trial)))
    summary = fiedler(graph)
    if not is_connected(graph):
        return float("nan"), summary.fiedler_value, summary.min_degree, False
    score = hodge_rank(graph_from_arrays(n, i, j, v))
    return (l2_distance(score, truth, config.rescale), summary.fiedler_value,
            summary.min_degree, True)


def run_ensemble(config, threads=1):
    """Run every (scheme, p0) cell of ``config`` and aggregate per cell.

    Disconnected trials count against ``connected_fraction`` and are left
    out of the L2 statistics; the Fiedler value and minimal degree averages
    include them.
    """
    cells, samples = [], {}
    for si, template in enumerate(config.samplers):
        for pi, p0 in enumerate(config.p0_grid):
            m = template.budget(config.n, p0)

            def task(trial, si=si, template=template, pi=pi, m=m):
                return _simulation_trial(config, si, template, pi, m, trial)

            outcomes = _map(task, range(config.trials), threads)
            cell, l2 = _summarize(template.scheme, p0, m, outcomes)
            cells.append(cell)
            samples[(template.scheme, p0)] = l2
    return ExperimentResult(cells, config, samples)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    n: int
    m: int
    p0: float
    lambda2_over_d: float
    dmin_over_d: float
    a1: float
    a2: float
    a_theorem1: float

    def row(self):
        return [self.scheme, self.n, self.m, self.p0, self.lambda2_over_d, self.dmin_over_d,
                self.a1, self.a2, self.a_theorem1]


def estimator_values(n, m):
    """``(a1, a2, a(p0))`` at the effective ``p0`` of an ``m``-edge budget.

    ``a2`` is NaN when the budget exceeds ``C(n, 2)`` (possible only with
    replacement), where no simple graph exists.
    """
    inputs = EstimatorInputs.from_budget(n, m)
    a1 = estimate_with_replacement(inputs)
    simple = n >= 3 and m <= n * (n - 1) // 2
    a2 = estimate_without_replacement(inputs) if simple else float("nan")
    a = solve_a(inputs.p0) if inputs.p0 >= 1 else float("nan")
    return a1, a2, a


def fiedler_sweep(n, p0_grid, trials, seed, schemes=RANDOM_SCHEMES, threads=1):
    """Mean ``lambda2 / (2m/n)`` and ``d_min / (2m/n)`` per (scheme, p0).

    Budgets are ``ceil(p0 (n - 1) log n / 2)``, capped at ``C(n, 2)`` for
    simple-graph schemes; estimator columns use the effective ``p0`` of the
    row's budget.
    """
    if any(p < 1 for p in p0_grid):
        raise ValueError("every p0 must be >= 1")
    rows = []
    for si, scheme in enumerate(schemes):
        template = SamplerTemplate(scheme)
        for pi, p0 in enumerate(p0_grid):
            m = template.budget(n, p0)
            d = 2.0 * m / n

            def task(trial, si=si, pi=pi, m=m, template=template):
                s = fiedler(sample(template.spec(n, m, derive_seed(seed, si, pi, trial))))
                return s.fiedler_value, s.min_degree

            out = np.array(_map(task, range(trials), threads))
            a1, a2, a = estimator_values(n, m)
            rows.append(SweepRow(template.scheme, n, m, float(p0), float(out[:, 0].mean() / d),
                                 float(out[:, 1].mean() / d), a1, a2, a))
    return rows


def write_sweep_csv(path, rows):
    write_table(path, SWEEP_HEADER, [r.row() for r in rows])


def count_complete_rounds(graph):
    """Number of complete comparison rounds: the smallest pair weight over all pairs.

    Zero when some pair was never compared.
    """
    if graph.num_edges < n_pairs(graph.n):
        return 0
    return int(graph.weights.min())


@dataclass
class Dataset:
    records: list
    graph: object
    truth: GlobalScore

    @property
    def n(self):
        return self.graph.n


def ingest_dataset(path, n=None):
    """Load a record file and score it on all data.

    The full-data HodgeRank score serves as reference truth for subsampling
    runs. ``n`` defaults to the largest index + 1.

    Raises
    ------
    DisconnectedGraphError
        If the aggregated full-data graph is disconnected.
    """
    records = read_records_csv(path, n)
    if n is None:
        n = max((max(r.i, r.j) for r in records), default=-1) + 1
    graph = build_pair_graph(n, records)
    try:
        truth = hodge_rank(graph)
    except DisconnectedGraphError as err:
        raise DisconnectedGraphError(
            err.labels, f"{path}: full-data graph is disconnected; components "
                        f"{err.components()}") from None
    return Dataset(records, graph, truth)


def _group_pairs(records):
    groups = defaultdict(list)
    for k, r in enumerate(records):
        groups[(min(r.i, r.j), max(r.i, r.j))].append(k)
    pairs = sorted(groups)
    return pairs, [groups[p] for p in pairs]


def subsample_records(records, scheme, m, seed, n=None):
    """Draw ``m`` pair selections from a record pool under ``scheme``.

    Each selected pair contributes one record chosen uniformly among the
    records on that pair; with replacement a pair may be selected (and a
    record reused) several times.
    """
    scheme = canonical_scheme(scheme)
    if scheme not in RANDOM_SCHEMES:
        raise ValueError(f"subsampling supports {', '.join(RANDOM_SCHEMES)}")
    if m < 1:
        raise BudgetError("m must be >= 1")
    pairs, members = _group_pairs(records)
    if n is None:
        n = max((p[1] for p in pairs), default=-1) + 1
    rng = make_rng(seed)
    npairs = len(pairs)
    if scheme == "with_replacement":
        if npairs == 0:
            raise BudgetError("no pairs to sample from")
        chosen = rng.integers(0, npairs, size=m)
    elif scheme == "without_replacement":
        if m > npairs:
            raise BudgetError(f"m = {m} exceeds the {npairs} distinct pairs available")
        chosen = floyd_sample(rng, npairs, m)
    else:
        if m > npairs or m < n - 1:
            raise BudgetError(
                f"greedy needs n - 1 <= m <= distinct pairs ({n - 1} <= {m} <= {npairs})")
        allowed = np.zeros((n, n), dtype=bool)
        for a, b in pairs:
            allowed[a, b] = allowed[b, a] = True
        tree = uniform_spanning_tree(rng, n, allowed)
        path = greedy_extend(n, tree, m, allowed=allowed)
        index = {p: k for k, p in enumerate(pairs)}
        chosen = np.array([index[tuple(e)] for e in path.edges.tolist()], dtype=np.int64)
    picks = rng.random(len(chosen))
    out = []
    for c, u in zip(chosen.tolist(), picks.tolist()):
        pool = members[c]
        out.append(records[pool[int(u * len(pool))]])
    return out


def run_dataset_ensemble(dataset, p0_grid, trials, seed, schemes=RANDOM_SCHEMES,
                         threads=1, rescale=False):
    """Subsample a real dataset repeatedly and compare against its full-data score."""
    n = dataset.n
    npairs = dataset.graph.num_edges
    cells, samples = [], {}
    for si, scheme in enumerate(schemes):
        scheme = canonical_scheme(scheme)
        for pi, p0 in enumerate(p0_grid):
            m = budget_from_p0(n, p0)
            if scheme != "with_replacement":
                m = min(m, npairs)

            def task(trial, si=si, pi=pi, m=m, scheme=scheme):
                sub = subsample_records(dataset.records, scheme, m,
                                        derive_seed(seed, si, pi, trial), n)
                graph = build_pair_graph(n, sub)
                summary = fiedler(graph)
                if not is_connected(graph):
                    return float("nan"), summary.fiedler_value, summary.min_degree, False
                return (l2_distance(hodge_rank(graph), dataset.truth, rescale),
                        summary.fiedler_value, summary.min_degree, True)

            cell, l2 = _summarize(scheme, float(p0), m, _map(task, range(trials), threads))
            cells.append(cell)
            samples[(scheme, float(p0))] = l2
    return ExperimentResult(cells, None, samples)
