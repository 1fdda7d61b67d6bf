"""Equilibrium solvers for games with contracting-base payoffs.

All computation happens on the pre-post-map scale (the interval K of the
base): the per-letter shift maps act there and the one-step operator

    T(x)_u = max / min over edges e out of u of  f[lab(e)](x_target(e))

is a max-norm contraction with the base's margin.  Value iteration starts
from the constant-K_lo vector; tight-edge extraction and switching decisions
use a coarser comparison tolerance so round-off cannot oscillate a strategy.
Reported payoff values apply the post-map on top when one is present.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .graph import (
    MAX,
    MIN,
    Edge,
    GameGraph,
    GraphError,
    Lasso,
    PositionalStrategy,
    consistent_edges,
    first_edge_strategy,
    play,
)
from .payoff import ContractingBase, DEFAULT_EPS, DEFAULT_EPS_CMP
from .pwl import _eval_sorted, eval_pwl
from .words import UPWord


class SolverError(RuntimeError):
    """Non-convergence or non-termination; signals a broken contraction flag."""


class SizeCapError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class ValueVector:
    values: tuple
    eps: float

    def __getitem__(self, u: int) -> float:
        return self.values[u]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Equilibrium:
    sigma: PositionalStrategy
    tau: PositionalStrategy
    values: ValueVector  # pre-post-map scale
    method: str
    iterations: int
    residual: float


def reported_values(base: ContractingBase, values) -> tuple:
    """Values on the payoff scale: post-map applied when the base has one."""
    vals = values.values if isinstance(values, ValueVector) else tuple(values)
    if base.post_map is None:
        return vals
    return tuple(eval_pwl(base.post_map, v) for v in vals)


# -- the one-step operator ---------------------------------------------------------


def _rows(g: GameGraph, base: ContractingBase, allowed=None):
    """Per node, the (target, map-xs, map-ys, edge-index) rows it may use."""
    rows = []
    for u in range(g.node_count):
        lst = []
        for ei in g.out[u]:
            if allowed is not None and ei not in allowed:
                continue
            e = g.edges[ei]
            f = base.maps[e.letter]
            lst.append((e.dst, f.xs, f.ys, ei))
        if not lst:
            raise SolverError(f"node {u} has no allowed outgoing edge")
        rows.append(lst)
    return rows


def bellman_step(g: GameGraph, base: ContractingBase, x) -> list:
    """One application of T: max at Max nodes, min at Min nodes."""
    vals = x.values if isinstance(x, ValueVector) else x
    out = []
    for u in range(g.node_count):
        is_max = g.owners[u] == MAX
        best = None
        for ei in g.out[u]:
            e = g.edges[ei]
            f = base.maps[e.letter]
            v = _eval_sorted(f.xs, f.ys, vals[e.dst])
            if best is None or (v > best if is_max else v < best):
                best = v
        out.append(best)
    return out


def _iteration_cap(base: ContractingBase, eps: float) -> int:
    span = base.hi - base.lo
    margin = base.margin
    stop = eps * margin
    if margin >= 1.0 or stop >= span:
        return 4
    return max(4, int(math.ceil(math.log(stop / span) / math.log(1.0 - margin))) + 8)


def _value_iterate(g, base, maximize, allowed, eps, x0=None):
    """Iterate the (restricted) operator to its fixed point.

    maximize: per-node booleans; allowed: set of usable edge indices or None.
    Returns (values list, iterations).  Convergence within the a-priori cap
    is guaranteed by contraction; running past it raises SolverError.
    """
    rows = _rows(g, base, allowed)
    n = g.node_count
    stop = eps * base.margin
    cap = _iteration_cap(base, eps)
    x = list(x0) if x0 is not None else [base.lo] * n
    for it in range(cap):
        new = []
        delta = 0.0
        for u in range(n):
            if maximize[u]:
                best = -math.inf
                for dst, xs, ys, _ in rows[u]:
                    v = _eval_sorted(xs, ys, x[dst])
                    if v > best:
                        best = v
            else:
                best = math.inf
                for dst, xs, ys, _ in rows[u]:
                    v = _eval_sorted(xs, ys, x[dst])
                    if v < best:
                        best = v
            d = best - x[u]
            if d < 0.0:
                d = -d
            if d > delta:
                delta = d
            new.append(best)
        x = new
        if delta <= stop:
            return x, it + 1
    raise SolverError(
        f"value iteration did not converge within {cap} steps; "
        "the contraction margin flag is wrong"
    )


def _tight_strategy(g, base, x, owner, eps_cmp, allowed=None) -> PositionalStrategy:
    """Lowest-index tight edge per owned node; extremal edge as numeric fallback."""
    want_max = owner == MAX
    picks = {}
    for u in g.nodes_of(owner):
        chosen = None
        best_edge = None
        best_val = -math.inf if want_max else math.inf
        for ei in g.out[u]:
            if allowed is not None and ei not in allowed:
                continue
            e = g.edges[ei]
            f = base.maps[e.letter]
            v = _eval_sorted(f.xs, f.ys, x[e.dst])
            if chosen is None and abs(v - x[u]) <= eps_cmp:
                chosen = ei
            if (v > best_val) if want_max else (v < best_val):
                best_val = v
                best_edge = ei
        picks[u] = chosen if chosen is not None else best_edge
    return PositionalStrategy.of(owner, picks)


def _residual(g, base, x) -> float:
    step = bellman_step(g, base, x)
    return max(abs(a - b) for a, b in zip(step, x))


def solve_value_iteration(g: GameGraph, base: ContractingBase,
                          eps: float = DEFAULT_EPS,
                          eps_cmp: float = DEFAULT_EPS_CMP) -> Equilibrium:
    """Iterate T from the constant-K_lo vector, then extract tight strategies."""
    maximize = [o == MAX for o in g.owners]
    x, iters = _value_iterate(g, base, maximize, None, eps)
    sigma = _tight_strategy(g, base, x, MAX, eps_cmp)
    tau = _tight_strategy(g, base, x, MIN, eps_cmp)
    return Equilibrium(sigma, tau, ValueVector(tuple(x), eps), "vi", iters,
                       _residual(g, base, x))


def strategy_value(g: GameGraph, base: ContractingBase, strategy: PositionalStrategy,
                   eps: float = DEFAULT_EPS, x0=None) -> ValueVector:
    """Value vector of one positional strategy.

    For a Max strategy this is the all-min fixed point over the edges
    consistent with it (the opponent optimizes everywhere, the strategy owner
    is pinned); dually all-max for a Min strategy.
    """
    strategy.check(g)
    allowed = set(consistent_edges(g, strategy))
    maximize = [strategy.owner == MIN] * g.node_count
    x, _ = _value_iterate(g, base, maximize, allowed, eps, x0=x0)
    return ValueVector(tuple(x), eps)


def modified_cost(base: ContractingBase, x, e: Edge) -> float:
    """f[lab(e)](x_target) - x_source: slack of the edge against the value vector."""
    vals = x.values if isinstance(x, ValueVector) else x
    f = base.maps[e.letter]
    return _eval_sorted(f.xs, f.ys, vals[e.dst]) - vals[e.src]


def find_violating(g: GameGraph, base: ContractingBase, strategy: PositionalStrategy,
                   vals, eps_cmp: float = DEFAULT_EPS_CMP) -> list:
    """Improving switches for the strategy owner, best first.

    Max strategies: Max-sourced edges with cost above eps_cmp, descending.
    Min strategies: Min-sourced edges with cost below -eps_cmp, ascending.
    """
    own = strategy.owner
    found = []
    for ei, e in enumerate(g.edges):
        if g.owners[e.src] != own:
            continue
        c = modified_cost(base, vals, e)
        if own == MAX and c > eps_cmp:
            found.append((-c, ei))
        elif own == MIN and c < -eps_cmp:
            found.append((c, ei))
    found.sort()
    return [ei for _, ei in found]


def switch(g: GameGraph, strategy: PositionalStrategy, edge_index: int) -> PositionalStrategy:
    """Same strategy except the source node of the given edge now uses it."""
    e = g.edges[edge_index]
    if g.owners[e.src] != strategy.owner:
        raise GraphError(
            f"cannot switch a {strategy.owner} strategy to an edge owned by {g.owners[e.src]}"
        )
    picks = strategy.as_dict()
    picks[e.src] = edge_index
    return PositionalStrategy.of(strategy.owner, picks)


def _strategy_space_bound(g: GameGraph, owner: str) -> int:
    prod = 1
    for u in g.nodes_of(owner):
        prod *= len(g.out[u])
        if prod >= 10 ** 7:
            return 10 ** 7
    return prod


def strategy_improvement(g: GameGraph, base: ContractingBase, rule: str = "greedy",
                         eps: float = DEFAULT_EPS, eps_cmp: float = DEFAULT_EPS_CMP,
                         seed: int = 0, player: str = MAX,
                         start: PositionalStrategy | None = None) -> Equilibrium:
    """Iterated single-edge switching until no improving edge remains.

    Rules: "greedy" switches the edge with the largest cost, "random" a
    uniformly random improving edge under the seed, "all_single" evaluates
    every improving single switch and keeps the one with the best total
    value.  Each accepted switch strictly improves the total value by more
    than the comparison tolerance, so the loop terminates.
    """
    if rule not in ("greedy", "random", "all_single"):
        raise ValueError(f"unknown improvement rule {rule!r}")
    current = start if start is not None else first_edge_strategy(g, player)
    current.check(g)
    if current.owner != player:
        raise GraphError(f"start strategy owner {current.owner!r} != player {player!r}")
    rng = random.Random(seed)
    cap = 10 * _strategy_space_bound(g, player)
    sign = 1.0 if player == MAX else -1.0
    switches = 0
    vals = None
    while True:
        vals = strategy_value(g, base, current, eps,
                              x0=vals.values if vals is not None else None)
        improving = find_violating(g, base, current, vals, eps_cmp)
        if not improving:
            break
        if rule == "greedy":
            chosen = improving[0]
        elif rule == "random":
            chosen = improving[rng.randrange(len(improving))]
        else:  # all_single: steepest total-value ascent among single switches
            best_sum = None
            chosen = improving[0]
            for ei in improving:
                cand = switch(g, current, ei)
                s = sign * sum(strategy_value(g, base, cand, eps, x0=vals.values).values)
                if best_sum is None or s > best_sum + eps_cmp:
                    best_sum = s
                    chosen = ei
        current = switch(g, current, chosen)
        switches += 1
        if switches > cap:
            raise SolverError(
                f"strategy improvement exceeded {cap} switches; numerical trouble"
            )
    x = vals.values
    if player == MAX:
        sigma = current
        tau = _tight_strategy(g, base, x, MIN, eps_cmp, set(consistent_edges(g, sigma)))
    else:
        tau = current
        sigma = _tight_strategy(g, base, x, MAX, eps_cmp, set(consistent_edges(g, tau)))
    method = "si-" + rule if player == MAX else "si-" + rule + "-min"
    return Equilibrium(sigma, tau, ValueVector(x, eps), method, switches,
                       _residual(g, base, x))


def neighbor_compare(g: GameGraph, base: ContractingBase,
                     s1: PositionalStrategy, s2: PositionalStrategy,
                     eps: float = DEFAULT_EPS,
                     eps_cmp: float = DEFAULT_EPS_CMP) -> str:
    """Order the total values of two strategies differing at exactly one node.

    Builds the union subgraph of the edges consistent with either strategy;
    inside it one of the two dominates the other at every node, so comparing
    any node decides the order of the totals.  Returns "<", "=", or ">".
    """
    if s1.owner != s2.owner:
        raise GraphError("strategies must belong to the same player")
    d1, d2 = s1.as_dict(), s2.as_dict()
    differing = [u for u in d1 if d1[u] != d2.get(u)]
    if len(differing) != 1:
        raise GraphError(
            f"strategies must differ at exactly one node, differ at {len(differing)}"
        )
    union = sorted(set(consistent_edges(g, s1)) | set(consistent_edges(g, s2)))
    remap = {old: new for new, old in enumerate(union)}
    sub = GameGraph(g.alphabet, g.owners, [g.edges[i] for i in union])
    r1 = PositionalStrategy.of(s1.owner, {u: remap[e] for u, e in d1.items()})
    r2 = PositionalStrategy.of(s2.owner, {u: remap[e] for u, e in d2.items()})
    v1 = strategy_value(sub, base, r1, eps).values
    v2 = strategy_value(sub, base, r2, eps).values
    hi = max(a - b for a, b in zip(v1, v2))
    lo = min(a - b for a, b in zip(v1, v2))
    if hi <= eps_cmp and lo >= -eps_cmp:
        return "="
    if lo >= -eps_cmp:
        return ">"
    if hi <= eps_cmp:
        return "<"
    # Per-node dominance failed numerically; decide by the totals.
    return ">" if sum(v1) > sum(v2) else "<"


def random_switch_solve(g: GameGraph, base: ContractingBase, seed: int = 0,
                        eps: float = DEFAULT_EPS,
                        eps_cmp: float = DEFAULT_EPS_CMP) -> Equilibrium:
    """Strategy improvement switching a uniformly random improving edge per step."""
    eq = strategy_improvement(g, base, rule="random", eps=eps, eps_cmp=eps_cmp,
                              seed=seed)
    return Equilibrium(eq.sigma, eq.tau, eq.values, "rand", eq.iterations, eq.residual)


# -- exhaustive enumeration ---------------------------------------------------------


@dataclass(frozen=True)
class BruteForceResult:
    equilibrium: Equilibrium
    max_nodes: tuple
    min_nodes: tuple
    sigmas: tuple        # per Max strategy, the edge picked at each max_nodes[i]
    taus: tuple
    sigma_values: tuple  # per Max strategy, per node: min over Min responses
    tau_values: tuple    # per Min strategy, per node: max over Max responses
    lower: tuple         # per node: max over sigmas of sigma_values
    upper: tuple         # per node: min over taus of tau_values


def _word_evaluator(payoff):
    fn = getattr(payoff, "eval_raw", None)
    return fn if fn is not None else payoff.eval_word


def brute_force_solve(g: GameGraph, payoff, tol: float = 1e-9,
                      cap: int = 10 ** 6) -> BruteForceResult:
    """Enumerate every positional strategy pair and read off the equilibrium.

    Works against any word evaluator, not just contracting bases, since each
    play of two positional strategies is a lasso.  Refuses instances whose
    strategy-pair count exceeds the cap.
    """
    evaluate = _word_evaluator(payoff)
    n = g.node_count
    max_nodes = g.nodes_of(MAX)
    min_nodes = g.nodes_of(MIN)
    n_sigma = 1
    for u in max_nodes:
        n_sigma *= len(g.out[u])
    n_tau = 1
    for u in min_nodes:
        n_tau *= len(g.out[u])
    if n_sigma * n_tau > cap:
        raise SizeCapError(
            f"{n_sigma} x {n_tau} strategy pairs exceed the enumeration cap {cap}"
        )
    sigmas = list(itertools.product(*(g.out[u] for u in max_nodes)))
    taus = list(itertools.product(*(g.out[u] for u in min_nodes)))

    edges = g.edges
    word_cache: dict = {}

    def lasso_value(pick, start):
        where = {start: 0}
        trail = []
        node = start
        while True:
            ei = pick[node]
            trail.append(ei)
            node = edges[ei].dst
            if node in where:
                k = where[node]
                key = (tuple(edges[i].letter for i in trail[:k]),
                       tuple(edges[i].letter for i in trail[k:]))
                hit = word_cache.get(key)
                if hit is None:
                    hit = evaluate(UPWord(key[0], key[1]))
                    word_cache[key] = hit
                return hit
            where[node] = len(trail)

    inf = math.inf
    sigma_vals = [[inf] * n for _ in sigmas]
    tau_vals = [[-inf] * n for _ in taus]
    pick = [0] * n
    for si, s_choice in enumerate(sigmas):
        for u, ei in zip(max_nodes, s_choice):
            pick[u] = ei
        srow = sigma_vals[si]
        for ti, t_choice in enumerate(taus):
            for u, ei in zip(min_nodes, t_choice):
                pick[u] = ei
            trow = tau_vals[ti]
            for s in range(n):
                v = lasso_value(pick, s)
                if v < srow[s]:
                    srow[s] = v
                if v > trow[s]:
                    trow[s] = v

    lower = tuple(max(sigma_vals[si][u] for si in range(len(sigmas))) for u in range(n))
    upper = tuple(min(tau_vals[ti][u] for ti in range(len(taus))) for u in range(n))

    # For a positionally determined payoff some strategy attains the elementwise
    # optimum everywhere; otherwise fall back to the best totals and let the
    # residual expose the gap.
    best_si = next(
        (si for si in range(len(sigmas))
         if all(sigma_vals[si][u] >= lower[u] - tol for u in range(n))),
        None,
    )
    if best_si is None:
        best_si = max(range(len(sigmas)), key=lambda si: sum(sigma_vals[si]))
    best_ti = next(
        (ti for ti in range(len(taus))
         if all(tau_vals[ti][u] <= upper[u] + tol for u in range(n))),
        None,
    )
    if best_ti is None:
        best_ti = min(range(len(taus)), key=lambda ti: sum(tau_vals[ti]))
    sigma = PositionalStrategy.of(MAX, dict(zip(max_nodes, sigmas[best_si])))
    tau = PositionalStrategy.of(MIN, dict(zip(min_nodes, taus[best_ti])))
    residual = max(abs(a - b) for a, b in zip(lower, upper))
    eq = Equilibrium(sigma, tau, ValueVector(lower, tol), "brute", len(sigmas) * len(taus),
                     residual)
    return BruteForceResult(eq, max_nodes, min_nodes, tuple(sigmas), tuple(taus),
                            tuple(tuple(r) for r in sigma_vals),
                            tuple(tuple(r) for r in tau_vals), lower, upper)


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    gap: float
    worst_node: int
    sigma_values: tuple  # payoff scale
    tau_values: tuple
    tol: float


def verify_equilibrium(g: GameGraph, base: ContractingBase,
                       sigma: PositionalStrategy, tau: PositionalStrategy,
                       tol: float) -> VerifyReport:
    """Max-norm gap between the two strategies' value vectors on the payoff scale."""
    eps = min(DEFAULT_EPS, tol / 10.0)
    vs = reported_values(base, strategy_value(g, base, sigma, eps))
    vt = reported_values(base, strategy_value(g, base, tau, eps))
    gaps = [abs(a - b) for a, b in zip(vs, vt)]
    worst = max(range(len(gaps)), key=gaps.__getitem__)
    return VerifyReport(gaps[worst] <= tol, gaps[worst], worst, vs, vt, tol)


def equilibrium_to_json(g: GameGraph, base: ContractingBase, eq: Equilibrium) -> dict:
    vals = reported_values(base, eq.values)
    return {
        "values": {str(u): vals[u] for u in range(g.node_count)},
        "sigma": {str(u): e for u, e in eq.sigma.choice},
        "tau": {str(u): e for u, e in eq.tau.choice},
        "method": eq.method,
        "iterations": eq.iterations,
        "residual": eq.residual,
    }
