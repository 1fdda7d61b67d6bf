import pytest
from hypothesis import given, strategies as st

from contpay.words import (
    Alphabet,
    UPWord,
    WordError,
    decision_bound,
    format_word,
    parse_letters,
    parse_word,
    prepend,
    unroll,
    up_equal,
)

AB = Alphabet(("a", "b"))
NUM = Alphabet(("1", "2", "3"))


def test_unroll_zero_length():
    assert unroll(UPWord((0,), (1,)), 0) == ()


def test_unroll_periodic_readoff():
    # epsilon (ab)^w, first five letters: a b a b a
    assert unroll(UPWord((), (0, 1)), 5) == (0, 1, 0, 1, 0)


def test_unroll_hand_case():
    # 13(3)^w unrolled to four letters reads 1333
    w = parse_word("13(3)", NUM)
    assert unroll(w, 4) == tuple(NUM.index(c) for c in "1333")


def test_up_equal_absorbed_prefix():
    assert up_equal(UPWord((0,), (1,)), UPWord((0, 1), (1,)))


def test_up_equal_rotated_cycle():
    assert up_equal(UPWord((), (0, 1)), UPWord((0,), (1, 0)))


def test_up_equal_differs_at_zero():
    assert not up_equal(UPWord((), (0,)), UPWord((), (1,)))


def test_prepend():
    w = UPWord((), (2,))
    assert prepend((), w) == w
    assert prepend((0,), w) == UPWord((0,), (2,))
    assert prepend((0, 1), UPWord((2,), (0, 1))) == UPWord((0, 1, 2), (0, 1))


def test_empty_cycle_rejected():
    with pytest.raises(WordError):
        UPWord((0,), ())


letters = st.integers(min_value=0, max_value=1)
finite_words = st.lists(letters, max_size=4).map(tuple)
up_words = st.tuples(finite_words, st.lists(letters, min_size=1, max_size=3).map(tuple)).map(
    lambda t: UPWord(*t)
)


@given(up_words, up_words, up_words)
def test_up_equal_is_an_equivalence(w1, w2, w3):
    assert up_equal(w1, w1)
    assert up_equal(w1, w2) == up_equal(w2, w1)
    if up_equal(w1, w2) and up_equal(w2, w3):
        assert up_equal(w1, w3)


@given(finite_words, up_words, st.integers(min_value=0, max_value=12))
def test_unroll_commutes_with_prepend(u, w, n):
    assert unroll(prepend(u, w), len(u) + n) == u + unroll(w, n)


@given(up_words, up_words)
def test_up_equal_extends_past_decision_bound(w1, w2):
    if up_equal(w1, w2):
        n = 3 * decision_bound(w1, w2)
        assert unroll(w1, n) == unroll(w2, n)


def test_parse_and_format_roundtrip():
    for text in ("(3)", "1(3)", "22(3)", "123(12)"):
        w = parse_word(text, NUM)
        assert format_word(w, NUM) == text


def test_parse_multichar_labels():
    alpha = Alphabet(("go", "stay"))
    w = parse_word("go.go(stay)", alpha)
    assert w == UPWord((0, 0), (1,))
    assert format_word(w, alpha) == "go.go(stay)"
    assert parse_word("(stay)", alpha) == UPWord((), (1,))


def test_parse_dotted_single_char():
    assert parse_letters("1.3", NUM) == (0, 2)


def test_parse_errors():
    with pytest.raises(WordError):
        parse_word("123", NUM)  # missing cycle
    with pytest.raises(WordError):
        parse_word("1()", NUM)  # empty cycle
    with pytest.raises(WordError):
        parse_word("4(3)", NUM)  # unknown label
    alpha = Alphabet(("go", "stay"))
    with pytest.raises(WordError):
        parse_word("gogo(stay)", alpha)  # multi-char labels need dots


def test_alphabet_validation():
    with pytest.raises(WordError):
        Alphabet(())
    with pytest.raises(WordError):
        Alphabet(("a", "a"))
    with pytest.raises(WordError):
        Alphabet(("a.b",))
    assert Alphabet.numeric(3).names == ("1", "2", "3")
