"""
Search Service Module - Well-rounded sublattices of Z^n with a given index

Two strategies are provided. The probabilistic search samples n-tuples of
integer vectors of one squared length, keeps tuples whose determinant equals
the target index and verifies that the sampled length really is lambda1 of the
generated lattice. The exhaustive search walks every Hermite normal form of
the target determinant and serves as the oracle for small cases.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from services.errors import BoundsExceeded, HermiteViolation, UsageFailure
from services.lattice_service import (
    Lattice, WrKind, classify_wr, column_hnf, gauss_reduce_form, hermite_bound_holds,
    hermite_candidate_norms, shortest_vectors,
)
from services.runner_service import batch_rng, batch_sizes

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 10 ** 6
SEARCH_BLOCK = 4096
MAX_EXHAUSTIVE_N = 4
MAX_EXHAUSTIVE_INDEX = 10 ** 4
MAX_EXHAUSTIVE_BASES = 200_000


class SearchMode(str, Enum):
    PROBABILISTIC = "probabilistic"
    EXHAUSTIVE = "exhaustive"


@dataclass
class SearchConfig:
    """
    Parameters of a sublattice search.

    norm_candidates defaults to the whole Hermite interval of the target index;
    a given set must lie inside it.
    """

    n: int
    target_index: int
    norm_candidates: Optional[Tuple[int, ...]] = None
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    seed: int = 0
    mode: SearchMode = SearchMode.PROBABILISTIC
    stop_at_first_norm: bool = True
    block_size: int = SEARCH_BLOCK

    def __post_init__(self):
        interval = hermite_candidate_norms(self.n, self.target_index)
        if self.norm_candidates is None:
            self.norm_candidates = tuple(interval)
        else:
            self.norm_candidates = tuple(sorted(set(int(m) for m in self.norm_candidates)))
            outside = [m for m in self.norm_candidates if m not in interval]
            if outside:
                raise UsageFailure(
                    f"norms {outside} lie outside the interval [{interval.start}, {interval.stop - 1}]"
                    f" for n={self.n}, index={self.target_index}"
                )
        if self.max_iterations < 1:
            raise UsageFailure("max_iterations must be positive")
        self.mode = SearchMode(self.mode)


@dataclass(frozen=True)
class SearchHit:
    basis: Tuple[Tuple[int, ...], ...]
    lambda1: int
    index: int
    wr_class: WrKind
    iterations_used: int

    @property
    def lattice(self) -> Lattice:
        return Lattice.from_rows(self.basis)

    def to_dict(self) -> Dict:
        return {
            "basis": [list(row) for row in self.basis],
            "lambda1_sq": self.lambda1,
            "index": self.index,
            "wr_class": self.wr_class.value,
            "iterations_used": self.iterations_used,
        }


def vectors_of_norm(n: int, m: int) -> List[Tuple[int, ...]]:
    """
    Every v in Z^n with ||v||^2 = m, one per ± pair (first nonzero coordinate
    positive), in lexicographic order.
    """
    if m < 1:
        raise UsageFailure(f"squared norm must be positive, got {m}")
    found = []

    def extend(prefix, remaining, slots):
        signed = any(prefix)
        if slots == 1:
            r = math.isqrt(remaining)
            if r * r != remaining:
                return
            if r == 0:
                found.append(tuple(prefix) + (0,))
                return
            if signed:
                found.append(tuple(prefix) + (-r,))
            found.append(tuple(prefix) + (r,))
            return
        k = math.isqrt(remaining)
        for x in range(0 if not signed else -k, k + 1):
            extend(prefix + [x], remaining - x * x, slots - 1)

    extend([], m, n)
    return found


def _verify(hnf, m: int, index: int, iterations: int) -> Optional[SearchHit]:
    lattice = Lattice.from_rows(hnf)
    if shortest_vectors(lattice).lambda1 != m:
        return None
    wr = classify_wr(lattice)
    if not wr.is_wr:
        return None
    lower, _, upper, ok = hermite_bound_holds(lattice)
    if not ok:
        raise HermiteViolation(f"lattice {hnf} with lambda1 {m} lies outside [{lower}, {upper}]")
    return SearchHit(hnf, m, index, wr.kind, iterations)


def _sort_hits(hits: Sequence[SearchHit]) -> List[SearchHit]:
    return sorted(hits, key=lambda h: (-h.lambda1, h.basis))


# ---------------------------------------------------------------------------
# probabilistic search
# ---------------------------------------------------------------------------

def _sample_block(task) -> List[Tuple[int, Tuple]]:
    """
    One block of sampled n-tuples. Returns (position in block, HNF) for tuples
    whose determinant is the target index.
    """
    vectors, n, index, size, seed, norm_slot, block = task
    rng = batch_rng(seed, norm_slot, block)
    picks = rng.integers(0, len(vectors), size=(size, n))
    mats = vectors[picks]
    dets = np.linalg.det(mats.astype(float))
    matches = np.flatnonzero(np.abs(np.abs(dets) - index) < 0.5)
    found = []
    seen = set()
    for pos in matches:
        key = tuple(sorted(picks[pos].tolist()))
        if key in seen:
            continue
        seen.add(key)
        found.append((int(pos), column_hnf(mats[pos].T.tolist())))
    return found


def probabilistic_wr_search(config: SearchConfig, runner=None) -> List[SearchHit]:
    """
    Randomized search for WR sublattices of Z^n of index config.target_index.

    Norms are tried from largest to smallest, each with an equal share of
    max_iterations. Block b of norm slot k draws from the stream keyed by
    (seed, k, b), so the result is independent of the runner. An empty list
    means the budget was exhausted without a hit.

    Args:
        config: search parameters
        runner: optional TrialRunner for the sampling blocks

    Returns:
        List[SearchHit]: deduplicated hits sorted by (lambda1 desc, HNF)
    """
    norms = sorted(config.norm_candidates, reverse=True)
    share, extra = divmod(config.max_iterations, len(norms))
    seen = set()
    hits = []
    used = 0
    for slot, m in enumerate(norms):
        budget = share + (1 if slot < extra else 0)
        vectors = np.array(vectors_of_norm(config.n, m), dtype=np.int64)
        if len(vectors) < config.n or budget == 0:
            logger.debug("norm %d: %d vectors, skipped", m, len(vectors))
            continue

        sizes = batch_sizes(budget, config.block_size)
        tasks = [(vectors, config.n, config.target_index, size, config.seed, slot, b)
                 for b, size in enumerate(sizes)]
        results = runner.map(_sample_block, tasks) if runner is not None else [_sample_block(t) for t in tasks]

        offset = used
        found_here = 0
        for size, block in zip(sizes, results):
            for pos, hnf in block:
                if hnf in seen:
                    continue
                seen.add(hnf)
                hit = _verify(hnf, m, config.target_index, offset + pos + 1)
                if hit is not None:
                    hits.append(hit)
                    found_here += 1
            offset += size
        used += budget
        logger.info("norm %d: %d candidate bases, %d WR hits", m, len(seen), found_here)
        if found_here and config.stop_at_first_norm:
            break

    if not hits:
        logger.warning("search budget of %d iterations exhausted without a hit", config.max_iterations)
    return _sort_hits(hits)


# ---------------------------------------------------------------------------
# exhaustive search
# ---------------------------------------------------------------------------

def _ordered_factorizations(value: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (value,)
        return
    for d in range(1, value + 1):
        if value % d == 0:
            for rest in _ordered_factorizations(value // d, parts - 1):
                yield (d,) + rest


def count_hnf_bases(n: int, index: int) -> int:
    """Number of sublattices of Z^n with the given index."""
    return sum(math.prod(d[i] ** (n - 1 - i) for i in range(n))
               for d in _ordered_factorizations(index, n))


def hnf_bases(n: int, index: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """Every upper-triangular HNF with diagonal product index."""
    for diag in _ordered_factorizations(index, n):
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for values in itertools.product(*[range(diag[i]) for i, _ in slots]):
            h = [[0] * n for _ in range(n)]
            for i in range(n):
                h[i][i] = diag[i]
            for (i, j), v in zip(slots, values):
                h[i][j] = v
            yield tuple(tuple(row) for row in h)


def exhaustive_wr_search(config: SearchConfig) -> List[SearchHit]:
    """
    All WR sublattices of Z^n of the target index whose lambda1 is one of the
    config's norms.
    """
    n, index = config.n, config.target_index
    if n > MAX_EXHAUSTIVE_N or index > MAX_EXHAUSTIVE_INDEX:
        raise BoundsExceeded(f"exhaustive search is limited to n <= {MAX_EXHAUSTIVE_N}"
                             f" and index <= {MAX_EXHAUSTIVE_INDEX}")
    total = count_hnf_bases(n, index)
    if total > MAX_EXHAUSTIVE_BASES:
        raise BoundsExceeded(f"{total} sublattices of index {index} in Z^{n} exceed the limit of"
                             f" {MAX_EXHAUSTIVE_BASES}")

    allowed = set(config.norm_candidates)
    smallest = min(allowed)
    hits = []
    for count, h in enumerate(hnf_bases(n, index), start=1):
        columns = [[h[i][j] for i in range(n)] for j in range(n)]
        if min(sum(x * x for x in c) for c in columns) < smallest:
            continue
        if n == 2:
            a, _, c = gauss_reduce_form(columns[0][0] ** 2, columns[0][0] * columns[1][0],
                                        columns[1][0] ** 2 + columns[1][1] ** 2)
            if a != c or a not in allowed:
                continue
        lattice = Lattice.from_rows(h)
        lam = shortest_vectors(lattice).lambda1
        if lam not in allowed:
            continue
        hit = _verify(h, lam, index, count)
        if hit is not None:
            hits.append(hit)
    logger.info("exhaustive search over %d bases: %d WR sublattices", total, len(hits))
    return _sort_hits(hits)


def run_search(config: SearchConfig, runner=None) -> List[SearchHit]:
    if config.mode is SearchMode.EXHAUSTIVE:
        return exhaustive_wr_search(config)
    return probabilistic_wr_search(config, runner)
