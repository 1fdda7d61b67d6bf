"""Sampling-based property checkers for word payoffs.

Every checker works against a black-box evaluator: any object with an
``alphabet``, an ``eval_word(word) -> float`` method, and a ``value_bound``
attribute (``ContractingBase``, ``MultiDiscountedSpec`` and
``FunctionPayoff`` all qualify).  A returned witness is a concrete violating
tuple with its evaluated values and margin; ``None`` means no witness in the
given sample, never a proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .payoff import DEFAULT_EPS_CMP, FunctionPayoff
from .pwl import MIN_MARGIN
from .words import UPWord, prepend

ENUM_CAP = 10 ** 7  # word-enumeration budget for the averaging transform


class DegenerateAnchorError(ValueError):
    """Anchor words evaluate too close together to fit an affine shift."""


@dataclass(frozen=True)
class Witness:
    """A concrete violating tuple: words involved, their values, and the margin."""

    kind: str
    words: tuple
    values: tuple
    margin: float

    def revalidate(self, evaluate, tol: float = 1e-12) -> bool:
        """Re-evaluate the stored words and compare with the stored values."""
        fresh = tuple(evaluate(w) for w in self.words)
        return all(abs(a - b) <= tol for a, b in zip(fresh, self.values))


def check_prefix_monotone(payoff, prefixes: Sequence[tuple],
                          pairs: Sequence[tuple], tol: float) -> Witness | None:
    """Search for prefixes u, v reversing the order of a continuation pair.

    A witness has value(u b) - value(u c) > tol and value(v b) - value(v c)
    < -tol for some sampled pair (b, c).  Words evaluated once per (prefix,
    pair) combination; the first witness in sample order is returned.
    """
    prefixes = [tuple(u) for u in prefixes]
    for beta, gamma in pairs:
        gaps = []
        for u in prefixes:
            vb = payoff.eval_word(prepend(u, beta))
            vc = payoff.eval_word(prepend(u, gamma))
            gaps.append(vb - vc)
        for i, u in enumerate(prefixes):
            if gaps[i] <= tol:
                continue
            for j, v in enumerate(prefixes):
                if gaps[j] < -tol:
                    ub, uc = prepend(u, beta), prepend(u, gamma)
                    vb, vc = prepend(v, beta), prepend(v, gamma)
                    return Witness(
                        "prefix_monotone",
                        (u, v, beta, gamma),
                        (payoff.eval_word(ub), payoff.eval_word(uc),
                         payoff.eval_word(vb), payoff.eval_word(vc)),
                        min(gaps[i], -gaps[j]),
                    )
    return None


def check_shift_deterministic(payoff, samples: Sequence[UPWord],
                              letters: Sequence[int], tol_eq: float,
                              tol_gap: float) -> Witness | None:
    """Search for words with equal values driven apart by prepending a letter."""
    if tol_gap <= tol_eq:
        raise ValueError("tol_gap must exceed tol_eq")
    vals = [payoff.eval_word(w) for w in samples]
    for i, j in itertools.combinations(range(len(samples)), 2):
        if abs(vals[i] - vals[j]) > tol_eq:
            continue
        for a in letters:
            va = payoff.eval_word(prepend((a,), samples[i]))
            vb = payoff.eval_word(prepend((a,), samples[j]))
            if abs(va - vb) >= tol_gap:
                return Witness(
                    "shift_deterministic",
                    ((a,), samples[i], samples[j]),
                    (vals[i], vals[j], va, vb),
                    abs(va - vb),
                )
    return None


def check_fairly_mixing(payoff, u: Sequence[int], alpha: UPWord,
                        tol: float) -> bool:
    """Sandwich test: value(u alpha) between value(u^omega) and value(alpha)."""
    u = tuple(u)
    if not u:
        raise ValueError("the pumped word must be non-empty")
    vu = payoff.eval_word(UPWord((), u))
    va = payoff.eval_word(alpha)
    vm = payoff.eval_word(prepend(u, alpha))
    return min(vu, va) - tol <= vm <= max(vu, va) + tol


def check_fairly_mixing_blocks(payoff, blocks: Sequence[tuple], tol: float) -> bool:
    """Interleaving sandwich for a periodic schedule of non-empty blocks.

    The combined word x_0 x_1 x_2 ... with x_n = blocks[n mod k] must lie
    between the even-index interleave, the odd-index interleave, and the
    extremes of the per-block pumps.  All four words stay ultimately periodic
    because the schedule is.
    """
    blocks = [tuple(b) for b in blocks]
    if not blocks or any(not b for b in blocks):
        raise ValueError("blocks must be non-empty words")
    k = len(blocks)

    def interleave(start: int) -> UPWord:
        # Block indices start, start+2, ... repeat with period k / gcd(2, k).
        period = k if k % 2 else k // 2
        cyc = []
        for t in range(period):
            cyc.extend(blocks[(start + 2 * t) % k])
        return UPWord((), tuple(cyc))

    combined = UPWord((), tuple(itertools.chain.from_iterable(blocks)))
    v = payoff.eval_word(combined)
    ve = payoff.eval_word(interleave(0))
    vo = payoff.eval_word(interleave(1))
    pumps = [payoff.eval_word(UPWord((), b)) for b in blocks]
    return (min(ve, vo, min(pumps)) - tol <= v <= max(ve, vo, max(pumps)) + tol)


@dataclass(frozen=True)
class PsiValue:
    value: float
    tail_bound: float


def psi_transform(payoff, gamma: UPWord, depth: int) -> PsiValue:
    """Averaged payoff over all finite prefixed words up to the given depth.

    Sums (1/(m+1))^|w| * value(w gamma) over every word w with |w| <= depth,
    m being the alphabet size.  The dropped tail is bounded by
    value_bound * (m+1) * (m/(m+1))^(depth+1), which is reported alongside.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    m = payoff.alphabet.size
    terms = (m ** (depth + 1) - 1) // (m - 1) if m > 1 else depth + 1
    if terms > ENUM_CAP:
        raise ValueError(
            f"depth {depth} needs {terms} words, over the {ENUM_CAP} enumeration cap"
        )
    base_weight = 1.0 / (m + 1)
    total = 0.0
    for k in range(depth + 1):
        weight = base_weight ** k
        for w in itertools.product(range(m), repeat=k):
            total += weight * payoff.eval_word(prepend(w, gamma))
    tail = payoff.value_bound * (m + 1) * (m / (m + 1)) ** (depth + 1)
    return PsiValue(total, tail)


def psi_payoff(payoff, depth: int) -> FunctionPayoff:
    """The truncated averaging transform packaged as a payoff evaluator."""
    m = payoff.alphabet.size
    tail = payoff.value_bound * (m + 1) * (m / (m + 1)) ** (depth + 1)
    return FunctionPayoff(
        payoff.alphabet,
        lambda w: psi_transform(payoff, w, depth).value,
        value_bound=payoff.value_bound * (m + 1),
        eval_error=tail + 1e-12,
    )


def fit_affine_shift(payoff, a: int, gamma: UPWord, delta: UPWord,
                     tol: float = DEFAULT_EPS_CMP) -> tuple:
    """Solve value(a g) = lam * value(g) + w on the two anchor words."""
    vg = payoff.eval_word(gamma)
    vd = payoff.eval_word(delta)
    if abs(vg - vd) <= tol:
        raise DegenerateAnchorError(
            f"anchor values {vg} and {vd} coincide within {tol}; cannot fit a shift"
        )
    vag = payoff.eval_word(prepend((a,), gamma))
    vad = payoff.eval_word(prepend((a,), delta))
    lam = (vag - vad) / (vg - vd)
    return lam, vag - lam * vg


@dataclass(frozen=True)
class DetectorVerdict:
    kind: str  # "multi_discounted" | "not_multi_discounted" | "inconclusive"
    lam: tuple | None
    w: tuple | None
    witness: Witness | None
    max_residual: float


def detect_multi_discounted(payoff, anchors: tuple, test_words: Sequence[UPWord],
                            tol: float) -> DetectorVerdict:
    """Fit per-letter affine shifts on the anchors and probe their residuals.

    A residual beyond both tol and ten times the evaluator's error bound
    refutes the affine form.  If every residual passes and each fitted slope
    lies in [0, 1 - margin], the payoff is declared multi-discounted;
    otherwise the verdict is inconclusive.  A constant payoff (anchors
    degenerate) is multi-discounted with all-zero discounts.
    """
    m = payoff.alphabet.size
    eval_err = getattr(payoff, "eval_error", 1e-12)
    gamma, delta = anchors
    try:
        fits = [fit_affine_shift(payoff, a, gamma, delta) for a in range(m)]
    except DegenerateAnchorError:
        if all(abs(payoff.eval_word(w) - payoff.eval_word(gamma)) <= tol
               for w in test_words):
            c = payoff.eval_word
            fits = [(0.0, c(prepend((a,), gamma))) for a in range(m)]
            return DetectorVerdict("multi_discounted", tuple(f[0] for f in fits),
                                   tuple(f[1] for f in fits), None, 0.0)
        raise
    worst = 0.0
    for a in range(m):
        lam, w = fits[a]
        for beta in test_words:
            vb = payoff.eval_word(beta)
            vab = payoff.eval_word(prepend((a,), beta))
            r = abs(vab - lam * vb - w)
            worst = max(worst, r)
            if r > tol and r > 10.0 * eval_err:
                return DetectorVerdict(
                    "not_multi_discounted",
                    tuple(f[0] for f in fits), tuple(f[1] for f in fits),
                    Witness("multi_discounted", ((a,), beta), (vab, vb, lam, w), r),
                    worst,
                )
    if all(-tol <= fits[a][0] <= 1.0 - MIN_MARGIN for a in range(m)):
        return DetectorVerdict("multi_discounted", tuple(f[0] for f in fits),
                               tuple(f[1] for f in fits), None, worst)
    return DetectorVerdict("inconclusive", tuple(f[0] for f in fits),
                           tuple(f[1] for f in fits), None, worst)


def check_claim_identity(lam: float, mu: float, u: float, v: float, x: float) -> float:
    """Residual of the vanishing combination of the three shift-gap expressions.

    E_n compares n-fold applications of the affine shifts (lam, u) and
    (mu, v) to a common point x; the combination with coefficients
    (lam + mu + lam*mu), -(1 + lam + mu), 1 cancels identically.
    """
    e1 = (lam * x + u) - (mu * x + v)
    e2 = (lam * lam * x + (1 + lam) * u) - (mu * mu * x + (1 + mu) * v)
    e3 = (lam ** 3 * x + (1 + lam + lam * lam) * u) - (mu ** 3 * x + (1 + mu + mu * mu) * v)
    return (lam + mu + lam * mu) * e1 - (1 + lam + mu) * e2 + e3


@dataclass(frozen=True)
class ThreeLassoMdp:
    """One randomized choice over three lassos, reachable through one extra letter.

    dist_p and dist_q are the two action distributions over the lassos
    labeled beta, gamma, delta; the prefixed start adds the letter in front.
    """

    letter: int
    beta: UPWord
    gamma: UPWord
    delta: UPWord
    dist_p: tuple
    dist_q: tuple

    def __post_init__(self):
        for dist in (self.dist_p, self.dist_q):
            if len(dist) != 3 or any(p < 0 for p in dist):
                raise ValueError(f"distribution {dist} must be three non-negatives")
            if abs(sum(dist) - 1.0) > 1e-12:
                raise ValueError(f"distribution {dist} does not sum to 1")


def three_lasso_expectation(payoff, mdp: ThreeLassoMdp, prefixed: bool,
                            dist: str = "p") -> float:
    """Expected payoff of one action, from the prefixed or the bare start."""
    probs = mdp.dist_p if dist == "p" else mdp.dist_q
    words = (mdp.beta, mdp.gamma, mdp.delta)
    if prefixed:
        words = tuple(prepend((mdp.letter,), w) for w in words)
    return sum(p * payoff.eval_word(w) for p, w in zip(probs, words))


def _simplex_grid(step: float) -> np.ndarray:
    k = round(1.0 / step)
    pts = []
    for i in range(k + 1):
        for j in range(k + 1 - i):
            pts.append((i / k, j / k, (k - i - j) / k))
    return np.asarray(pts)


def find_mdp_violation(payoff, a: int, candidates: Sequence[tuple],
                       tol: float = 1e-3, step: float = 0.01) -> ThreeLassoMdp | None:
    """Search word triples and a distribution grid for opposed expectations.

    Looks for distributions p, q over a candidate triple with
    p-expectation > q-expectation from the bare start but strictly the other
    way round once the extra letter is prepended (both with margin tol).
    The grid walks the probability simplex with the given step.
    """
    grid = _simplex_grid(step)
    for triple in candidates:
        beta, gamma, delta = triple
        bare = np.asarray([payoff.eval_word(w) for w in (beta, gamma, delta)])
        pref = np.asarray([payoff.eval_word(prepend((a,), w))
                           for w in (beta, gamma, delta)])
        s = grid @ bare
        sa = grid @ pref
        order = np.argsort(s, kind="stable")
        s_sorted = s[order]
        sa_sorted = sa[order]
        # suffix minima of the prefixed expectation over ascending bare order
        sufmin = np.minimum.accumulate(sa_sorted[::-1])[::-1]
        sufarg = np.empty(len(order), dtype=int)
        best = len(order) - 1
        for i in range(len(order) - 1, -1, -1):
            if sa_sorted[i] <= sa_sorted[best]:
                best = i
            sufarg[i] = best
        for j in range(len(order)):
            k = int(np.searchsorted(s_sorted, s_sorted[j] + tol, side="right"))
            if k < len(order) and sufmin[k] < sa_sorted[j] - tol:
                p_idx = int(order[sufarg[k]])
                q_idx = int(order[j])
                return ThreeLassoMdp(a, beta, gamma, delta,
                                     tuple(float(x) for x in grid[p_idx]),
                                     tuple(float(x) for x in grid[q_idx]))
    return None


def verify_mdp_violation(payoff, mdp: ThreeLassoMdp) -> tuple:
    """Margins by which each action loses at one start: (bare, prefixed).

    Positive margins mean the q-action loses from the bare start and the
    p-action loses from the prefixed start, so neither is optimal alone.
    """
    bare_p = three_lasso_expectation(payoff, mdp, False, "p")
    bare_q = three_lasso_expectation(payoff, mdp, False, "q")
    pref_p = three_lasso_expectation(payoff, mdp, True, "p")
    pref_q = three_lasso_expectation(payoff, mdp, True, "q")
    return bare_p - bare_q, pref_q - pref_p
