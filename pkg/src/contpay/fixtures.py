"""Bundled demonstration fixtures.

These constructions pin down the regression numbers used by the demo
command and the acceptance suite: a three-letter base whose induced payoff
is positionally determined but provably not multi-discounted, the
three-choice arena that separates it from every affine payoff, and a
deliberately order-breaking evaluator for the falsification demos.
"""

from __future__ import annotations

from .graph import LassoChoiceArena, build_lasso_choice_game
from .payoff import ContractingBase, FunctionPayoff
from .pwl import PiecewiseLinearMap
from .words import Alphabet, UPWord, parse_word

NON_MULTI_LABELS = ("1", "2", "3")

# Values of the non-multi-discounted example payoff on its pinned words.
NON_MULTI_VALUES = (
    ("(3)", 1.0),
    ("1(3)", 0.5),
    ("2(3)", 0.49),
    ("11(3)", 0.25),
    ("22(3)", 0.26),
    ("111(3)", 0.125),
    ("222(3)", 0.11),
)


def non_multi_alphabet() -> Alphabet:
    return Alphabet(NON_MULTI_LABELS)


def non_multi_base() -> ContractingBase:
    """Halving map, a bent middle map, and a shifted halving map on [0, 1].

    The middle map's kinks make the induced payoff non-affine in a way no
    per-letter discounting can mimic: the order of the three word pairs
    1(3)/2(3), 11(3)/22(3), 111(3)/222(3) alternates, which is impossible
    for any multi-discounted payoff.
    """
    alphabet = non_multi_alphabet()
    f1 = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 1.0, contracting=True)
    f2 = PiecewiseLinearMap(
        [(0.0, 0.0), (0.26, 0.11), (0.49, 0.26), (1.0, 0.49)], contracting=True
    )
    f3 = PiecewiseLinearMap.affine(0.5, 0.5, 0.0, 1.0, contracting=True)
    return ContractingBase(alphabet, (f1, f2, f3))


def non_multi_word_values() -> list:
    """(word, pinned value) pairs for the example payoff."""
    alphabet = non_multi_alphabet()
    return [(parse_word(text, alphabet), v) for text, v in NON_MULTI_VALUES]


def three_choice_arena() -> LassoChoiceArena:
    """Three choice nodes, each picking between two disjoint labeled lassos.

    The left lassos spell 1(3), 22(3), 111(3) and the right ones 2(3),
    11(3), 222(3); under the example payoff going left is strictly better
    at every node, while any multi-discounted payoff prefers right somewhere.
    """
    alphabet = non_multi_alphabet()
    pairs = [
        (parse_word("1(3)", alphabet), parse_word("2(3)", alphabet)),
        (parse_word("22(3)", alphabet), parse_word("11(3)", alphabet)),
        (parse_word("111(3)", alphabet), parse_word("222(3)", alphabet)),
    ]
    return build_lasso_choice_game(alphabet, pairs)


THREE_CHOICE_VALUES = (0.5, 0.26, 0.125)  # optimal values at the choice nodes


def order_breaking_payoff() -> FunctionPayoff:
    """A payoff that is not prefix-monotone, for the falsification demos.

    Over labels ("1", "2") with underlying maps x/2 and x/2 + 1/2, the value
    is the induced one except that words starting with "2" are negated.
    Then (2)^omega scores below (1)^omega bare, but above it after a "1" is
    prepended.
    """
    alphabet = Alphabet(("1", "2"))
    f1 = PiecewiseLinearMap.affine(0.5, 0.0, 0.0, 1.0, contracting=True)
    f2 = PiecewiseLinearMap.affine(0.5, 0.5, 0.0, 1.0, contracting=True)
    base = ContractingBase(alphabet, (f1, f2))

    def value(word: UPWord) -> float:
        first = word.prefix[0] if word.prefix else word.cycle[0]
        v = base.eval_raw(word)
        return -v if first == 1 else v

    return FunctionPayoff(alphabet, value, value_bound=1.0)


def mdp_candidate_triples() -> list:
    """Word triples to probe for randomized-choice counterexamples."""
    alphabet = non_multi_alphabet()
    return [
        (parse_word("(3)", alphabet), parse_word("1(3)", alphabet),
         parse_word("11(3)", alphabet)),
        (parse_word("1(3)", alphabet), parse_word("11(3)", alphabet),
         parse_word("111(3)", alphabet)),
    ]
