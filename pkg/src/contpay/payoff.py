"""Payoffs induced by non-decreasing contracting bases of piecewise-linear maps.

A :class:`ContractingBase` is a letter-indexed family of contracting
non-decreasing self-maps of a shared compact interval K = [lo, hi], plus an
optional non-decreasing post-map applied on top.  The value it assigns to an
ultimately periodic word ``u v^omega`` is

    post( f[u_1](f[u_2](... f[u_k]( x* )...)) )

where x* is the unique fixed point of the cycle composition
f[v_1] o f[v_2] o ... o f[v_n].  Values obey the shift rule
value(a w) = f[a](value_raw(w)) before the post-map is applied.

:class:`MultiDiscountedSpec` is the affine special case: per-letter discount
lambda(a) in [0, 1) and reward w(a), evaluated in closed form as

    sum_n lambda(a_1) * ... * lambda(a_{n-1}) * w(a_n).

The module also provides the word-indexed supremum metric

    d(x, y) = sup_w (2 - 2^{-|w|}) * |f[w](x) - f[w](y)|,

truncated at a depth where all longer compositions have image diameter at
most eps/6.  Under this metric every letter map is strictly contracting and
the monotone nesting x <= s <= t <= y  =>  d(s, t) <= d(x, y) holds.
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Sequence

import numpy as np

from .pwl import (
    DOMAIN_TOL,
    MIN_MARGIN,
    ContractionError,
    DomainError,
    PiecewiseLinearMap,
    _eval_sorted,
    compose_pwl,
    eval_pwl,
    pwl_fixed_point,
)
from .words import Alphabet, UPWord, format_word

DEFAULT_EPS = 1e-9      # convergence / truncation tolerance
DEFAULT_EPS_CMP = 1e-7  # comparison tolerance for tightness and ordering
PIECE_CAP = 10_000      # composed-map size beyond which iteration takes over
METRIC_WORD_CAP = 500_000


class PayoffFormatError(ValueError):
    """Malformed payoff JSON."""


class ContractingBase:
    """Letter-indexed contracting maps on a common interval, optional post-map."""

    def __init__(self, alphabet: Alphabet, maps: Sequence[PiecewiseLinearMap],
                 post_map: PiecewiseLinearMap | None = None):
        if len(maps) != alphabet.size:
            raise DomainError(
                f"need one map per letter: got {len(maps)} maps for alphabet of size {alphabet.size}"
            )
        lo, hi = maps[0].lo, maps[0].hi
        fixed = []
        for a, f in enumerate(maps):
            if f.lo != lo or f.hi != hi:
                raise DomainError(
                    f"map for letter {alphabet.name(a)!r} has domain [{f.lo}, {f.hi}], "
                    f"expected [{lo}, {hi}]"
                )
            if not f.is_self_map():
                raise DomainError(
                    f"map for letter {alphabet.name(a)!r} is not a self-map of [{lo}, {hi}]"
                )
            fixed.append(f.contracting_copy())
        if post_map is not None:
            if post_map.lo > lo + DOMAIN_TOL or post_map.hi < hi - DOMAIN_TOL:
                raise DomainError(
                    f"post-map domain [{post_map.lo}, {post_map.hi}] must cover [{lo}, {hi}]"
                )
        self.alphabet = alphabet
        self.maps = tuple(fixed)
        self.post_map = post_map
        self.lo = lo
        self.hi = hi
        self.margin = min(f.margin for f in self.maps)
        self.eval_error = 1e-12
        self._cycle_cache: dict = {}
        self._raw_cache: dict = {}
        self._metric_cache: dict = {}

    # -- evaluation ------------------------------------------------------------

    def map_for(self, letter: int) -> PiecewiseLinearMap:
        return self.maps[letter]

    def cycle_fixed_point(self, cycle: Sequence[int]) -> float:
        """Fixed point of f[c_1] o ... o f[c_k], cached per cycle."""
        key = tuple(cycle)
        hit = self._cycle_cache.get(key)
        if hit is not None:
            return hit
        composed = self._compose_capped(key)
        if composed is not None:
            x = pwl_fixed_point(composed)
        else:
            x = self._picard_cycle(key)
        self._cycle_cache[key] = x
        return x

    def _compose_capped(self, letters: Sequence[int]) -> PiecewiseLinearMap | None:
        f = self.maps[letters[0]]
        for a in letters[1:]:
            f = compose_pwl(f, self.maps[a])
            if len(f.xs) > PIECE_CAP:
                return None
        return f

    def _picard_cycle(self, letters: tuple, eps: float = DEFAULT_EPS) -> float:
        import math

        maps = self.maps
        x = 0.5 * (self.lo + self.hi)
        stop = eps * self.margin
        span = self.hi - self.lo
        if span <= stop:
            return x
        # One full cycle pass contracts by at least (1 - margin) ** len(letters).
        rate = len(letters) * math.log(1.0 - self.margin)
        cap = int(math.log(stop / span) / rate) + 3
        for _ in range(cap):
            nxt = x
            for a in reversed(letters):
                f = maps[a]
                nxt = _eval_sorted(f.xs, f.ys, nxt)
            if abs(nxt - x) <= stop:
                return nxt
            x = nxt
        raise ContractionError("cycle iteration failed to converge; margin flag is wrong")

    def eval_raw(self, word: UPWord) -> float:
        """Value before the post-map (the induced shift-deterministic payoff)."""
        key = (word.prefix, word.cycle)
        hit = self._raw_cache.get(key)
        if hit is not None:
            return hit
        x = self.cycle_fixed_point(word.cycle)
        maps = self.maps
        for a in reversed(word.prefix):
            f = maps[a]
            x = _eval_sorted(f.xs, f.ys, x)
        self._raw_cache[key] = x
        return x

    def eval_word(self, word: UPWord) -> float:
        """Payoff value of the word (post-map applied when present)."""
        x = self.eval_raw(word)
        if self.post_map is None:
            return x
        return eval_pwl(self.post_map, x)

    @property
    def value_bound(self) -> float:
        """An upper bound for |value| over all words."""
        if self.post_map is None:
            return max(abs(self.lo), abs(self.hi))
        return max(abs(eval_pwl(self.post_map, self.lo)),
                   abs(eval_pwl(self.post_map, self.hi)))

    def metric(self, eps: float) -> "CanonicalMetric":
        m = self._metric_cache.get(eps)
        if m is None:
            m = CanonicalMetric(self, eps)
            self._metric_cache[eps] = m
        return m


class MultiDiscountedSpec:
    """Per-letter discounts lambda(a) in [0, 1) and rewards w(a)."""

    def __init__(self, alphabet: Alphabet, lam: Sequence[float], w: Sequence[float]):
        lam = tuple(float(x) for x in lam)
        w = tuple(float(x) for x in w)
        if len(lam) != alphabet.size or len(w) != alphabet.size:
            raise DomainError("lambda and w must have one entry per letter")
        for a, l in enumerate(lam):
            if not 0.0 <= l < 1.0:
                raise DomainError(f"discount for {alphabet.name(a)!r} must be in [0, 1), got {l}")
        self.alphabet = alphabet
        self.lam = lam
        self.w = w
        # Smallest symmetric bound W with lambda*W + w <= W and -lambda*W + w >= -W,
        # floored at 1 so the interval [-W, W] is never degenerate.
        self.bound = max(1.0, max(abs(wa) / (1.0 - la) for la, wa in zip(lam, w)))
        self.eval_error = 1e-12

    def eval_word(self, word: UPWord) -> float:
        """Closed form: prefix sum plus Lambda_prefix * cycle sum / (1 - Lambda_cycle)."""
        lam, w = self.lam, self.w
        ssum = 0.0
        prod = 1.0
        for a in word.prefix:
            ssum += prod * w[a]
            prod *= lam[a]
        csum = 0.0
        cprod = 1.0
        for a in word.cycle:
            csum += cprod * w[a]
            cprod *= lam[a]
        return ssum + prod * csum / (1.0 - cprod)

    eval_raw = eval_word  # no post-map on this scale

    @property
    def value_bound(self) -> float:
        return self.bound


class FunctionPayoff:
    """Adapter turning an arbitrary word function into a payoff evaluator."""

    def __init__(self, alphabet: Alphabet, fn: Callable[[UPWord], float],
                 value_bound: float, eval_error: float = 1e-12, cache: bool = True):
        self.alphabet = alphabet
        self._fn = fn
        self.value_bound = value_bound
        self.eval_error = eval_error
        self._cache: dict | None = {} if cache else None

    def eval_word(self, word: UPWord) -> float:
        if self._cache is None:
            return self._fn(word)
        key = (word.prefix, word.cycle)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._fn(word)
            self._cache[key] = hit
        return hit

    eval_raw = eval_word


def eval_payoff(base: ContractingBase, word: UPWord) -> float:
    return base.eval_word(word)


def eval_payoff_raw(base: ContractingBase, word: UPWord) -> float:
    return base.eval_raw(word)


def eval_multi_discounted(spec: MultiDiscountedSpec, word: UPWord) -> float:
    return spec.eval_word(word)


def from_multi_discounted(spec: MultiDiscountedSpec) -> ContractingBase:
    """Affine base f_a(x) = lambda(a) x + w(a) on [-W, W]."""
    W = spec.bound
    maps = [
        PiecewiseLinearMap.affine(la, wa, -W, W, contracting=True)
        for la, wa in zip(spec.lam, spec.w)
    ]
    return ContractingBase(spec.alphabet, maps)


def compose_letters(base: ContractingBase, letters: Sequence[int]) -> PiecewiseLinearMap:
    """f[w] = f[w_1] o f[w_2] o ... o f[w_n]; identity for the empty word."""
    f = PiecewiseLinearMap.identity(base.lo, base.hi)
    for a in letters:
        f = compose_pwl(f, base.maps[a])
    return f


def diam_after(base: ContractingBase, letters: Sequence[int]) -> float:
    """Diameter of f[w](K): f[w](hi) - f[w](lo) since all maps are non-decreasing."""
    lo, hi = base.lo, base.hi
    for a in reversed(tuple(letters)):
        f = base.maps[a]
        lo = _eval_sorted(f.xs, f.ys, lo)
        hi = _eval_sorted(f.xs, f.ys, hi)
    return hi - lo


class CanonicalMetric:
    """Truncated word-supremum metric for a base, with a fixed word set.

    Words are enumerated breadth-first; a word is extended only while the
    diameter of its image of K exceeds eps/6, so every dropped term is at
    most eps/3 and the computed distance is within eps/3 of the full
    supremum.  The word set depends only on (base, eps), never on the
    evaluation points, which keeps symmetry, the triangle inequality, the
    monotone nesting property and d >= |x - y| exact for the truncation.
    """

    def __init__(self, base: ContractingBase, eps: float, word_cap: int = METRIC_WORD_CAP):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.base = base
        self.eps = eps
        cutoff = eps / 6.0
        ident = PiecewiseLinearMap.identity(base.lo, base.hi)
        entries = []  # (weight, xs array, ys array)
        frontier = [(0, ident)]
        while frontier:
            nxt = []
            for depth, f in frontier:
                weight = 2.0 - 2.0 ** (-depth)
                entries.append((weight, np.asarray(f.xs), np.asarray(f.ys)))
                if len(entries) > word_cap:
                    raise ValueError(
                        f"metric word set exceeded {word_cap} words; "
                        f"increase eps (slopes too close to 1 for eps={eps})"
                    )
                diam = f.ys[-1] - f.ys[0]
                if diam > cutoff:
                    for g in base.maps:
                        nxt.append((depth + 1, compose_pwl(f, g)))
            frontier = nxt
        self.entries = entries
        self.weights = np.asarray([e[0] for e in entries])

    @property
    def word_count(self) -> int:
        return len(self.entries)

    def distance(self, x: float, y: float) -> float:
        best = 0.0
        for weight, xs, ys in self.entries:
            t = weight * abs(float(np.interp(x, xs, ys)) - float(np.interp(y, xs, ys)))
            if t > best:
                best = t
        return best

    def values_matrix(self, points: Sequence[float]) -> np.ndarray:
        """Matrix of f[w](p), one row per enumerated word, for batch distances."""
        pts = np.asarray(points, dtype=float)
        out = np.empty((len(self.entries), len(pts)))
        for i, (_, xs, ys) in enumerate(self.entries):
            out[i] = np.interp(pts, xs, ys)
        return out

    def distance_from_matrix(self, mat: np.ndarray, i: int, j: int) -> float:
        return float(np.max(self.weights * np.abs(mat[:, i] - mat[:, j])))


def canonical_metric(base: ContractingBase, x: float, y: float, eps: float) -> float:
    """d(x, y) for the base's word-supremum metric, within eps/3 of the supremum."""
    if not (base.lo - DOMAIN_TOL <= x <= base.hi + DOMAIN_TOL):
        raise DomainError(f"{x} outside [{base.lo}, {base.hi}]")
    if not (base.lo - DOMAIN_TOL <= y <= base.hi + DOMAIN_TOL):
        raise DomainError(f"{y} outside [{base.lo}, {base.hi}]")
    return base.metric(eps).distance(x, y)


# -- JSON format ----------------------------------------------------------------

def payoff_to_json(payoff) -> dict:
    if isinstance(payoff, MultiDiscountedSpec):
        names = payoff.alphabet.names
        return {
            "kind": "multi_discounted",
            "lambda": {n: payoff.lam[i] for i, n in enumerate(names)},
            "w": {n: payoff.w[i] for i, n in enumerate(names)},
        }
    if isinstance(payoff, ContractingBase):
        names = payoff.alphabet.names
        post = None
        if payoff.post_map is not None:
            post = {
                "domain": [payoff.post_map.lo, payoff.post_map.hi],
                "breakpoints": [[x, y] for x, y in payoff.post_map.breakpoints],
            }
        return {
            "kind": "contracting_base",
            "domain": [payoff.lo, payoff.hi],
            "functions": {
                n: {"breakpoints": [[x, y] for x, y in payoff.maps[i].breakpoints]}
                for i, n in enumerate(names)
            },
            "post_map": post,
        }
    raise PayoffFormatError(f"cannot serialize payoff of type {type(payoff).__name__}")


def payoff_from_json(obj: dict, alphabet: Alphabet | None = None):
    """Parse a payoff object; with an explicit alphabet, labels are re-indexed to it."""
    try:
        kind = obj["kind"]
    except (TypeError, KeyError):
        raise PayoffFormatError("payoff object must carry a 'kind' field") from None
    if kind == "multi_discounted":
        lam_by = obj.get("lambda")
        w_by = obj.get("w")
        if not isinstance(lam_by, dict) or not isinstance(w_by, dict):
            raise PayoffFormatError("multi_discounted payoff needs 'lambda' and 'w' tables")
        if set(lam_by) != set(w_by):
            raise PayoffFormatError("'lambda' and 'w' must cover the same labels")
        if alphabet is None:
            alphabet = Alphabet(tuple(lam_by.keys()))
        elif set(alphabet.names) != set(lam_by):
            raise PayoffFormatError(
                f"payoff labels {sorted(lam_by)} do not match alphabet {sorted(alphabet.names)}"
            )
        try:
            return MultiDiscountedSpec(
                alphabet,
                [lam_by[n] for n in alphabet.names],
                [w_by[n] for n in alphabet.names],
            )
        except (DomainError, TypeError) as exc:
            raise PayoffFormatError(str(exc)) from None
    if kind == "contracting_base":
        fns = obj.get("functions")
        dom = obj.get("domain")
        if not isinstance(fns, dict) or not fns or not isinstance(dom, list) or len(dom) != 2:
            raise PayoffFormatError("contracting_base payoff needs 'domain' and 'functions'")
        if alphabet is None:
            alphabet = Alphabet(tuple(fns.keys()))
        elif set(alphabet.names) != set(fns):
            raise PayoffFormatError(
                f"payoff labels {sorted(fns)} do not match alphabet {sorted(alphabet.names)}"
            )
        try:
            maps = [
                PiecewiseLinearMap(fns[n]["breakpoints"], contracting=True)
                for n in alphabet.names
            ]
            post = None
            if obj.get("post_map") is not None:
                post = PiecewiseLinearMap(obj["post_map"]["breakpoints"])
            return ContractingBase(alphabet, maps, post)
        except (DomainError, ContractionError, KeyError, TypeError) as exc:
            raise PayoffFormatError(str(exc)) from None
    raise PayoffFormatError(f"unknown payoff kind {kind!r}")


def payoff_to_json_str(payoff) -> str:
    return json.dumps(payoff_to_json(payoff), separators=(", ", ": "))


def describe_word(word: UPWord, alphabet: Alphabet) -> str:
    return format_word(word, alphabet)
