"""Balanced partition search: the boundary-per-vertex objective, its exact
brute-force minimum on tiny windows, a simulated-annealing minimizer, and
the cluster-merge descent move with its exact objective decrement.

The objective of a k-part partition is the directed bichromatic incidence
count per vertex, identical to the colouring expansion, so a value of 0
means the parts are unions of connected components.  Feasible partitions
must hold every part's weight within eps of its target; eps = 0 is read as
"as equal as integrality allows" (part sizes floor/ceil of the targets),
since exact targets are unattainable whenever they are not integers.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .clusters import decompose
from .colourings import Colouring, expansion, subset_colouring
from .graphs import WindowGraph
from .rng import derive_rng


class KazhdanEmptyPartWarning(UserWarning):
    """A partition handed in with an empty part (weight zero)."""


class InfeasibleBalanceError(ValueError):
    """No integer part sizes meet the balance constraint."""


class InstanceTooLargeError(ValueError):
    """Brute force refused: the search space exceeds the guard."""


@dataclass(frozen=True)
class WeightVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("weight vector must be nonempty")
        if min(self.values) < 0:
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.values) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    def __len__(self) -> int:
        return len(self.values)


def uniform_weights(k: int) -> WeightVector:
    return WeightVector(tuple([1.0 / k] * k))


def d_infinity(a: WeightVector, b: WeightVector) -> float:
    if len(a) != len(b):
        raise ValueError("weight vectors must have equal length")
    return max(abs(x - y) for x, y in zip(a.values, b.values))


def weight_vector(partition: Colouring) -> WeightVector:
    counts = partition.counts().astype(float) / partition.window.n
    return WeightVector(tuple(counts))


def kazhdan_value(w: WindowGraph, partition: Colouring) -> float:
    """Directed cross-part incidences per vertex (equals the expansion).

    Empty parts are tolerated on finite windows but warned about, since the
    balance constraints they satisfy are degenerate.
    """
    if partition.window is not w:
        raise ValueError("partition belongs to a different window")
    if np.any(partition.counts() == 0):
        warnings.warn("partition has an empty part", KazhdanEmptyPartWarning, stacklevel=2)
    return expansion(partition)


# ----------------------------------------------------------------------
# Problems and feasibility
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class KazhdanProblem:
    window: WindowGraph
    k: int
    alpha: WeightVector
    eps: float
    budget: int = 4000
    restarts: int = 10
    t0: float | None = None  # default: the window degree bound
    cooling: float = 0.995
    seed: int = 0
    merge_move_period: int = 25

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one part")
        if len(self.alpha) != self.k:
            raise ValueError("alpha length must equal k")
        if not (0.0 <= self.eps < min(self.alpha.values)):
            raise ValueError("eps must satisfy 0 <= eps < min(alpha)")
        if self.budget < 1 or self.restarts < 1:
            raise ValueError("budget and restarts must be positive")


@dataclass(frozen=True)
class KazhdanResult:
    partition: Colouring
    value: float
    weights: WeightVector
    trace: tuple[tuple[int, int, float], ...]  # (restart, step, best value so far)
    certificate: bool  # set only by exhaustive search
    empty_parts: tuple[int, ...]


def feasible_size_windows(n: int, alpha: WeightVector, eps: float) -> list[tuple[int, int]]:
    """Admissible integer size range per part.

    eps > 0: integers in [n(alpha_i - eps), n(alpha_i + eps)], clamped to
    >= 1; rejected outright when empty or when no composition sums to n.
    eps = 0: the integrality allowance {floor(n alpha_i), ceil(n alpha_i)},
    which always admits a composition.
    """
    windows: list[tuple[int, int]] = []
    for a in alpha.values:
        target = n * a
        if eps == 0.0:
            lo, hi = math.floor(target), math.ceil(target)
        else:
            lo = max(1, math.ceil(n * (a - eps) - 1e-9))
            hi = math.floor(n * (a + eps) + 1e-9)
        windows.append((lo, hi))
    if any(lo > hi for lo, hi in windows) or not (
        sum(lo for lo, _ in windows) <= n <= sum(hi for _, hi in windows)
    ):
        raise InfeasibleBalanceError(
            f"no integer part sizes meet the balance constraint; "
            f"feasible class-size windows are {windows} and must compose to {n}"
        )
    return windows


def _initial_sizes(n: int, alpha: WeightVector, windows: list[tuple[int, int]]) -> list[int]:
    sizes = [lo for lo, _ in windows]
    remaining = n - sum(sizes)
    by_remainder = sorted(
        range(len(windows)), key=lambda i: (-(n * alpha.values[i] - windows[i][0]), i)
    )
    while remaining > 0:
        for i in by_remainder:
            if remaining == 0:
                break
            if sizes[i] < windows[i][1]:
                sizes[i] += 1
                remaining -= 1
    return sizes


def _bichromatic_count(w: WindowGraph, colours: np.ndarray) -> int:
    src, dst = w.edge_arrays
    if src.size == 0:
        return 0
    return int(np.count_nonzero(colours[src] != colours[dst]))


# ----------------------------------------------------------------------
# Exact search
# ----------------------------------------------------------------------


def brute_force_kazhdan(problem: KazhdanProblem) -> KazhdanResult:
    """Certified minimum over every admissible partition (k**n guarded)."""
    w, k = problem.window, problem.k
    if k**w.n > 10**7:
        raise InstanceTooLargeError(f"{k}**{w.n} assignments exceed the 10**7 guard")
    windows = feasible_size_windows(w.n, problem.alpha, problem.eps)
    edges = [(u, v) for u, entries in enumerate(w.adjacency) for v, _ in entries if u != v]

    best: tuple[int, tuple[int, ...]] | None = None
    for assignment in itertools.product(range(1, k + 1), repeat=w.n):
        counts = [0] * (k + 1)
        for colour in assignment:
            counts[colour] += 1
        if any(not (lo <= counts[i + 1] <= hi) for i, (lo, hi) in enumerate(windows)):
            continue
        cut = sum(1 for u, v in edges if assignment[u] != assignment[v])
        if best is None or (cut, assignment) < best:
            best = (cut, assignment)
    if best is None:
        raise InfeasibleBalanceError("no admissible partition exists")
    colours = np.asarray(best[1], dtype=np.int64)
    partition = Colouring(w, k, colours)
    counts = partition.counts()
    return KazhdanResult(
        partition=partition,
        value=best[0] / w.n,
        weights=weight_vector(partition),
        trace=(),
        certificate=True,
        empty_parts=tuple(int(i + 1) for i in range(k) if counts[i] == 0),
    )


# ----------------------------------------------------------------------
# Simulated annealing
# ----------------------------------------------------------------------


def _recolour_delta(w: WindowGraph, colours: np.ndarray, u: int, new: int) -> int:
    old = colours[u]
    if new == old:
        return 0
    delta = 0
    for v, _ in w.adjacency[u]:
        if v == u:
            continue  # loops are never bichromatic
        cv = int(colours[v])
        delta += int(cv != new) - int(cv != old)
    return 2 * delta


def anneal_kazhdan(problem: KazhdanProblem) -> KazhdanResult:
    """Heuristic minimizer: balance-preserving swaps, slack recolours, and an
    occasional cluster-merge move, under geometric cooling with restarts.

    Deterministic in the problem seed; restarts use derived streams and the
    final reduction is by (value, lexicographic colour sequence), so running
    restarts concurrently cannot change the answer.
    """
    w, k = problem.window, problem.k
    windows = feasible_size_windows(w.n, problem.alpha, problem.eps)
    sizes0 = _initial_sizes(w.n, problem.alpha, windows)
    t0 = problem.t0 if problem.t0 is not None else float(w.degree_bound)
    epoch_len = max(1, problem.budget // 50)

    overall_best: tuple[int, tuple[int, ...]] | None = None
    trace: list[tuple[int, int, float]] = []

    for restart in range(problem.restarts):
        rng = derive_rng(problem.seed, "anneal", restart)
        colours = np.repeat(np.arange(1, k + 1, dtype=np.int64), sizes0)
        rng.shuffle(colours)
        sizes = list(sizes0)
        count = _bichromatic_count(w, colours)
        best = (count, tuple(int(x) for x in colours))
        temperature = t0

        for step in range(problem.budget):
            kind = rng.random()
            if k == 1:
                break
            if kind < 0.05 and step % problem.merge_move_period == 0:
                accepted = _try_merge_move(w, colours, sizes, windows, rng)
                if accepted is not None:
                    count += accepted
            elif kind < 0.65:
                u = int(rng.integers(w.n))
                v = int(rng.integers(w.n))
                cu, cv = int(colours[u]), int(colours[v])
                if cu != cv:
                    d1 = _recolour_delta(w, colours, u, cv)
                    colours[u] = cv
                    d2 = _recolour_delta(w, colours, v, cu)
                    delta = d1 + d2
                    if delta <= 0 or rng.random() < math.exp(-(delta / w.n) / temperature):
                        colours[v] = cu
                        count += delta
                    else:
                        colours[u] = cu
            else:
                u = int(rng.integers(w.n))
                new = int(rng.integers(1, k + 1))
                old = int(colours[u])
                if new != old and sizes[old - 1] > windows[old - 1][0] and sizes[new - 1] < windows[new - 1][1]:
                    delta = _recolour_delta(w, colours, u, new)
                    if delta <= 0 or rng.random() < math.exp(-(delta / w.n) / temperature):
                        colours[u] = new
                        sizes[old - 1] -= 1
                        sizes[new - 1] += 1
                        count += delta
            temperature *= problem.cooling
            if count < best[0] or (count == best[0] and tuple(int(x) for x in colours) < best[1]):
                best = (count, tuple(int(x) for x in colours))
            if (step + 1) % epoch_len == 0:
                trace.append((restart, step + 1, best[0] / w.n))

        if overall_best is None or best < overall_best:
            overall_best = best

    assert overall_best is not None
    partition = Colouring(w, k, np.asarray(overall_best[1], dtype=np.int64))
    counts = partition.counts()
    return KazhdanResult(
        partition=partition,
        value=overall_best[0] / w.n,
        weights=weight_vector(partition),
        trace=tuple(trace),
        certificate=False,
        empty_parts=tuple(int(i + 1) for i in range(k) if counts[i] == 0),
    )


def _try_merge_move(w, colours, sizes, windows, rng) -> int | None:
    """Propose a full-cluster relocation; apply when balance survives.

    Returns the objective count delta when applied, else None.  The move
    recolours one source-part cluster adjacent to the target part, which
    can only delete boundary (the decrement identity), so it is always
    accepted when feasible.
    """
    k = len(sizes)
    r = int(rng.integers(1, k + 1))
    b = int(rng.integers(1, k + 1))
    if r == b:
        return None
    dec = decompose(w, subset_colouring(w, colours == r))
    if dec.count == 0:
        return None
    src, dst = w.edge_arrays
    touching = np.unique(dec.cluster_id[src[(dec.cluster_id[src] >= 0) & (colours[dst] == b)]])
    if touching.size == 0:
        return None
    cluster = int(touching[int(rng.integers(touching.size))])
    members = dec.vertices_of(cluster)
    moved = members.size
    if not (
        windows[r - 1][0] <= sizes[r - 1] - moved
        and sizes[b - 1] + moved <= windows[b - 1][1]
    ):
        return None
    boundary = int(np.count_nonzero((dec.cluster_id[src] == cluster) & (colours[dst] == b)))
    colours[members] = b
    sizes[r - 1] -= moved
    sizes[b - 1] += moved
    return -2 * boundary


# ----------------------------------------------------------------------
# Cluster-merge move (standalone, with the exact decrement report)
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MergeMoveResult:
    partition: Colouring
    decrement: float  # old value - new value, nonnegative
    decrement_count: int  # same, in directed incidence counts
    flipped_clusters: tuple[int, ...]
    no_adjacent_clusters: bool

    @property
    def identity(self) -> bool:
        return len(self.flipped_clusters) == 0


def cluster_merge_move(
    w: WindowGraph,
    partition: Colouring,
    from_part: int,
    to_part: int,
    eps: float,
    seed: int,
) -> MergeMoveResult:
    """Flip each from-part cluster adjacent to the target part with
    probability eps, recolouring it wholesale to the target part.

    Every flipped cluster deletes its boundary toward the target part and
    creates none (its other boundaries just change label), so the objective
    drops by exactly 2 * (flipped-to-target undirected edges) / n.  The
    reported decrement is asserted against a recomputation from scratch.
    """
    k = partition.d
    if not (1 <= from_part <= k and 1 <= to_part <= k):
        raise ValueError(f"parts must lie in 1..{k}")
    if from_part == to_part:
        raise ValueError("from_part and to_part must differ")
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0, 1]")

    colours = partition.colours
    dec = decompose(w, subset_colouring(w, colours == from_part))
    src, dst = w.edge_arrays
    boundary_edge = (dec.cluster_id[src] >= 0) & (colours[dst] == to_part)
    adjacent = np.unique(dec.cluster_id[src[boundary_edge]])
    if adjacent.size == 0:
        return MergeMoveResult(partition, 0.0, 0, (), no_adjacent_clusters=True)

    rng = derive_rng(seed, "cluster-merge")
    coin = rng.random(adjacent.size) < eps
    flipped = adjacent[coin]
    new_colours = colours.copy()
    flip_mask = np.isin(dec.cluster_id, flipped)
    new_colours[flip_mask] = to_part
    new_partition = Colouring(w, k, new_colours)

    decrement_count = 2 * int(
        np.count_nonzero(np.isin(dec.cluster_id[src], flipped) & (colours[dst] == to_part))
    )
    old_count = _bichromatic_count(w, colours)
    new_count = _bichromatic_count(w, new_colours)
    assert old_count - new_count == decrement_count, "merge decrement identity violated"

    return MergeMoveResult(
        partition=new_partition,
        decrement=decrement_count / w.n,
        decrement_count=decrement_count,
        flipped_clusters=tuple(int(c) for c in flipped),
        no_adjacent_clusters=False,
    )


# ----------------------------------------------------------------------
# Size profiles
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileRow:
    n: int
    value: float
    balance_gap: float  # d_inf between achieved weights and the uniform target
    wall_time: float


def kazhdan_profile(
    windows: list[WindowGraph],
    k: int,
    eps: float,
    budget: int = 4000,
    restarts: int = 10,
    seed: int = 0,
) -> tuple[ProfileRow, ...]:
    """Best found value per window size, for decay/plateau comparisons."""
    rows = []
    for w in windows:
        problem = KazhdanProblem(
            window=w, k=k, alpha=uniform_weights(k), eps=eps, budget=budget,
            restarts=restarts, seed=seed,
        )
        start = time.perf_counter()
        result = anneal_kazhdan(problem)
        rows.append(
            ProfileRow(
                n=w.n,
                value=result.value,
                balance_gap=d_infinity(result.weights, uniform_weights(k)),
                wall_time=time.perf_counter() - start,
            )
        )
    return tuple(rows)
