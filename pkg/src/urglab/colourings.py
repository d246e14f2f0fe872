"""Random d-colourings of windows: sampling models, intensity, balance,
expansion, and finite-pattern marginal estimation.

Colour values live in 1..d.  The d = 2 case doubles as a subset/percolation
mask with colour 1 as the "in" class.  Expansion counts *directed*
bichromatic incidences per vertex (the mean number of differently-coloured
neighbours seen from a uniform root), which is twice the undirected
bichromatic edge count over n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graphs import WindowGraph
from .reporting import EstimateReport, binomial_stderr
from .rng import derive_rng, derive_seed

IN = 1  # subset convention for d = 2 colourings
OUT = 2


@dataclass(frozen=True, eq=False)
class Colouring:
    window: WindowGraph
    d: int
    colours: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need at least one colour")
        arr = np.asarray(self.colours, dtype=np.int64)
        if arr.shape != (self.window.n,):
            raise ValueError("colour array length must equal the vertex count")
        if arr.size and (arr.min() < 1 or arr.max() > self.d):
            raise ValueError(f"colours must lie in 1..{self.d}")
        arr.setflags(write=False)
        object.__setattr__(self, "colours", arr)

    def counts(self) -> np.ndarray:
        """Occurrences of each colour 1..d."""
        return np.bincount(self.colours, minlength=self.d + 1)[1:]


def subset_colouring(window: WindowGraph, mask) -> Colouring:
    """d = 2 colouring from a boolean in-mask."""
    mask = np.asarray(mask, dtype=bool)
    return Colouring(window, 2, np.where(mask, IN, OUT))


def subset_mask(c: Colouring) -> np.ndarray:
    if c.d != 2:
        raise ValueError("subset view needs a 2-colouring")
    return c.colours == IN


# ----------------------------------------------------------------------
# Sampling models
# ----------------------------------------------------------------------

CUSTOM_SAMPLERS: dict[str, Callable[["ColouringModel", WindowGraph, int], np.ndarray]] = {}


@dataclass(frozen=True)
class ColouringModel:
    """How to draw a colouring: iid per vertex, one global colour, a fixed
    block assignment, or a registered custom sampler."""

    kind: str  # "bernoulli" | "constant" | "block" | "custom"
    d: int
    p: tuple[float, ...] | None = None
    blocks: tuple[int, ...] | None = None
    sampler: str | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need at least one colour")
        if self.kind == "bernoulli":
            if self.p is None or len(self.p) != self.d:
                raise ValueError("bernoulli model needs a length-d probability vector")
            if min(self.p) < 0 or abs(sum(self.p) - 1.0) > 1e-12:
                raise ValueError("probability vector must be nonnegative and sum to 1")
        elif self.kind == "block":
            if self.blocks is None:
                raise ValueError("block model needs an explicit assignment")
        elif self.kind == "custom":
            if self.sampler is None:
                raise ValueError("custom model needs a registered sampler id")
        elif self.kind != "constant":
            raise ValueError(f"unknown colouring model kind {self.kind!r}")


def bernoulli_model(p) -> ColouringModel:
    return ColouringModel("bernoulli", len(p), p=tuple(float(x) for x in p))


def uniform_bernoulli_model(d: int) -> ColouringModel:
    return bernoulli_model([1.0 / d] * d)


def constant_model(d: int) -> ColouringModel:
    return ColouringModel("constant", d)


def sample(model: ColouringModel, w: WindowGraph, seed: int) -> Colouring:
    """Draw one colouring; deterministic in (model, window, seed)."""
    rng = derive_rng(seed, "colouring-sample")
    if model.kind == "bernoulli":
        colours = rng.choice(np.arange(1, model.d + 1), size=w.n, p=np.asarray(model.p))
    elif model.kind == "constant":
        colours = np.full(w.n, rng.integers(1, model.d + 1), dtype=np.int64)
    elif model.kind == "block":
        if len(model.blocks) != w.n:
            raise ValueError("block assignment length must equal the vertex count")
        colours = np.asarray(model.blocks, dtype=np.int64)
    elif model.kind == "custom":
        if model.sampler not in CUSTOM_SAMPLERS:
            raise ValueError(f"no sampler registered under {model.sampler!r}")
        colours = CUSTOM_SAMPLERS[model.sampler](model, w, seed)
    else:  # pragma: no cover - rejected at construction
        raise ValueError(f"unknown colouring model kind {model.kind!r}")
    return Colouring(w, model.d, colours)


# ----------------------------------------------------------------------
# Statistics
# ----------------------------------------------------------------------


def intensity(c: Colouring, colour: int) -> float:
    """Fraction of vertices carrying ``colour`` (the uniform-root hit rate)."""
    if not (1 <= colour <= c.d):
        raise ValueError(f"colour must lie in 1..{c.d}")
    return float(np.count_nonzero(c.colours == colour)) / c.window.n


def is_delta_balanced(c: Colouring, delta: float) -> bool:
    """True iff every colour's intensity is within delta of 1/d."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    freqs = c.counts() / c.window.n
    return bool(np.max(np.abs(freqs - 1.0 / c.d)) <= delta + 1e-12)


def expansion(c: Colouring) -> float:
    """Directed bichromatic incidences per vertex.

    Zero exactly when every connected component is monochromatic; at most
    the degree bound, with equality only if every edge is bichromatic.
    """
    src, dst = c.window.edge_arrays
    if src.size == 0:
        return 0.0
    return float(np.count_nonzero(c.colours[src] != c.colours[dst])) / c.window.n


@dataclass(frozen=True)
class MarginalPattern:
    """Colour constraints at label-path offsets from a root.

    Each offset is a tuple of generator labels walked from the root; the
    empty tuple is the root itself.  Offsets must be distinct as paths.
    """

    constraints: tuple[tuple[tuple[str, ...], int], ...]

    def __post_init__(self):
        paths = [path for path, _ in self.constraints]
        if len(set(paths)) != len(paths):
            raise ValueError("pattern offsets must be distinct")

    def __len__(self) -> int:
        return len(self.constraints)


def resolve_pattern(w: WindowGraph, root: int, pattern: MarginalPattern) -> list[tuple[int, int]]:
    """(vertex, colour) constraints after walking each offset from ``root``."""
    resolved = []
    for path, colour in pattern.constraints:
        v = root
        for label in path:
            step = w.neighbours_by_label[v].get(label)
            if step is None:
                raise ValueError(f"label {label!r} missing at vertex {v}; offset unresolvable")
            v = step
        resolved.append((v, colour))
    return resolved


def marginal_estimate(
    model: ColouringModel,
    w: WindowGraph,
    pattern: MarginalPattern,
    trials: int,
    seed: int,
) -> EstimateReport:
    """Monte Carlo estimate of P[pattern holds at a uniform root].

    Each trial draws a fresh colouring and a uniform root from derived
    per-trial seeds; conflicting constraints that land on one vertex simply
    fail to match.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if len(pattern) > w.n:
        raise ValueError("pattern larger than window")
    hits = 0
    for i in range(trials):
        c = sample(model, w, derive_seed(seed, "marginal-colouring", i))
        root = int(derive_rng(seed, "marginal-root", i).integers(w.n))
        resolved = resolve_pattern(w, root, pattern)
        if all(c.colours[v] == colour for v, colour in resolved):
            hits += 1
    p_hat = hits / trials
    return EstimateReport(
        quantity=f"marginal[{len(pattern)} offsets]",
        estimate=p_hat,
        stderr=binomial_stderr(p_hat, trials),
        trials=trials,
        master_seed=seed,
    )


# serialization: {window_id, d, colours: run-length encoded}


def colouring_to_dict(c: Colouring) -> dict:
    runs: list[list[int]] = []
    for value in c.colours:
        v = int(value)
        if runs and runs[-1][0] == v:
            runs[-1][1] += 1
        else:
            runs.append([v, 1])
    return {"window_id": c.window.window_id, "d": c.d, "colours": runs}


def colouring_from_dict(data: dict, w: WindowGraph) -> Colouring:
    if data["window_id"] != w.window_id:
        raise ValueError("colouring was serialized for a different window")
    colours = np.concatenate([np.full(run, v, dtype=np.int64) for v, run in data["colours"]])
    return Colouring(w, data["d"], colours)
