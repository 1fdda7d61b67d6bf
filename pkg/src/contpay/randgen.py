"""Seeded random instances: arenas, bases, discount specs, and words.

Everything draws from a caller-supplied random.Random so experiment scripts
and the test suite stay reproducible.
"""

from __future__ import annotations

import random
from typing import Sequence

from .graph import MAX, MIN, Edge, GameGraph
from .payoff import ContractingBase, MultiDiscountedSpec
from .pwl import PiecewiseLinearMap
from .words import Alphabet, UPWord


def random_game(rng: random.Random, alphabet: Alphabet, max_nodes: int = 6,
                max_out: int = 3, min_nodes: int = 1,
                max_player_nodes: int | None = None) -> GameGraph:
    """Arena with random owners and random deduplicated out-edges.

    Every node gets between 1 and max_out distinct (label, target) pairs.
    With max_player_nodes set, at most that many nodes belong to Max.
    """
    n = rng.randint(min_nodes, max_nodes)
    owners = [rng.choice((MAX, MIN)) for _ in range(n)]
    if max_player_nodes is not None:
        max_idx = [u for u in range(n) if owners[u] == MAX]
        rng.shuffle(max_idx)
        for u in max_idx[max_player_nodes:]:
            owners[u] = MIN
    combos = [(a, t) for a in range(alphabet.size) for t in range(n)]
    edges = []
    for u in range(n):
        k = rng.randint(1, min(max_out, len(combos)))
        for a, t in rng.sample(combos, k):
            edges.append(Edge(u, a, t))
    return GameGraph(alphabet, owners, edges)


def random_multi_discounted(rng: random.Random, alphabet: Alphabet,
                            max_discount: float = 0.9,
                            reward_span: float = 1.0) -> MultiDiscountedSpec:
    lam = [rng.uniform(0.0, max_discount) for _ in range(alphabet.size)]
    w = [rng.uniform(-reward_span, reward_span) for _ in range(alphabet.size)]
    return MultiDiscountedSpec(alphabet, lam, w)


def random_map(rng: random.Random, lo: float = 0.0, hi: float = 1.0,
               max_breaks: int = 4, max_slope: float = 0.9) -> PiecewiseLinearMap:
    """Random non-decreasing contracting self-map of [lo, hi]."""
    k = rng.randint(0, max_breaks - 2)
    xs = [lo, hi]
    while len(xs) < k + 2:
        c = rng.uniform(lo, hi)
        if all(abs(c - x) > 0.05 * (hi - lo) for x in xs):
            xs.append(c)
    xs.sort()
    rises = [rng.uniform(0.0, max_slope) * (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    total = sum(rises)
    y0 = lo + rng.uniform(0.0, (hi - lo) - total)
    ys = [y0]
    for r in rises:
        ys.append(ys[-1] + r)
    return PiecewiseLinearMap(list(zip(xs, ys)), contracting=True)


def random_base(rng: random.Random, alphabet: Alphabet, lo: float = 0.0,
                hi: float = 1.0, max_breaks: int = 4,
                max_slope: float = 0.9) -> ContractingBase:
    maps = [random_map(rng, lo, hi, max_breaks, max_slope)
            for _ in range(alphabet.size)]
    return ContractingBase(alphabet, maps)


def random_post_map(rng: random.Random, lo: float, hi: float,
                    max_breaks: int = 5) -> PiecewiseLinearMap:
    """Random non-decreasing map on [lo, hi]; may have plateaus and steep parts."""
    k = rng.randint(2, max_breaks)
    xs = [lo, hi]
    while len(xs) < k:
        c = rng.uniform(lo, hi)
        if all(abs(c - x) > 0.02 * (hi - lo) for x in xs):
            xs.append(c)
    xs.sort()
    ys = [rng.uniform(-1.0, 1.0)]
    for _ in range(len(xs) - 1):
        ys.append(ys[-1] + max(0.0, rng.uniform(-0.3, 1.0)))
    return PiecewiseLinearMap(list(zip(xs, ys)))


def random_up_word(rng: random.Random, alphabet: Alphabet, max_prefix: int = 3,
                   max_cycle: int = 3) -> UPWord:
    p = tuple(rng.randrange(alphabet.size) for _ in range(rng.randint(0, max_prefix)))
    c = tuple(rng.randrange(alphabet.size) for _ in range(rng.randint(1, max_cycle)))
    return UPWord(p, c)


def random_payoff(rng: random.Random, alphabet: Alphabet, multi: bool):
    """Either a multi-discounted spec's base or a general contracting base."""
    if multi:
        from .payoff import from_multi_discounted

        return from_multi_discounted(random_multi_discounted(rng, alphabet))
    return random_base(rng, alphabet)


def all_short_words(alphabet: Alphabet, max_len: int) -> list:
    """Every finite word up to the length bound, shortest first."""
    import itertools

    out = []
    for k in range(max_len + 1):
        out.extend(itertools.product(range(alphabet.size), repeat=k))
    return out


def sample_up_words(alphabet: Alphabet, max_prefix: int, max_cycle: int,
                    cap: int | None = None) -> list:
    """Deterministic enumeration of short ultimately periodic words."""
    out = []
    for p in all_short_words(alphabet, max_prefix):
        for c in all_short_words(alphabet, max_cycle):
            if c:
                out.append(UPWord(p, c))
                if cap is not None and len(out) >= cap:
                    return out
    return out
