"""Finite and ultimately periodic words over a fixed finite alphabet.

Letters are dense integer ids 0..size-1; an :class:`Alphabet` keeps the
id -> label-name table.  An ultimately periodic word ``u v^omega`` is stored
as a (prefix, cycle) pair with a non-empty cycle.  No canonical form is
maintained: two representations of the same infinite word compare equal
through :func:`up_equal`, which unrolls both far enough to decide.

Text syntax for ultimately periodic words is ``u(v)``, e.g. ``22(3)`` or
``(ab)`` for an empty prefix.  Multi-character label names are separated by
dots: ``go.go(stay)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import lcm
from typing import Sequence

# A finite word is a plain tuple of letter ids.
FiniteWord = tuple


class WordError(ValueError):
    """Malformed word, unknown label, or alphabet mismatch."""


class Alphabet:
    """Immutable label table.  Letter ids are positions in ``names``."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not names:
            raise WordError("alphabet must contain at least one label")
        if len(set(names)) != len(names):
            raise WordError(f"duplicate labels in alphabet: {names}")
        for name in names:
            if not name or any(ch in name for ch in "()."):
                raise WordError(f"invalid label {name!r}: empty or contains '(', ')' or '.'")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def size(self) -> int:
        return len(self.names)

    @classmethod
    def numeric(cls, m: int) -> "Alphabet":
        """Alphabet with labels "1", "2", ..., str(m)."""
        return cls(tuple(str(i + 1) for i in range(m)))

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"unknown label {name!r} (alphabet {self.names})") from None

    def name(self, letter: int) -> str:
        if not 0 <= letter < len(self.names):
            raise WordError(f"letter id {letter} out of range for alphabet of size {self.size}")
        return self.names[letter]

    def check_word(self, letters: Sequence[int]) -> tuple:
        w = tuple(letters)
        for a in w:
            if not (isinstance(a, int) and 0 <= a < self.size):
                raise WordError(f"letter id {a!r} out of range for alphabet of size {self.size}")
        return w

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({self.names!r})"


@dataclass(frozen=True)
class UPWord:
    """Ultimately periodic word prefix . cycle^omega; cycle is non-empty.

    Structural equality/hashing compares the stored (prefix, cycle) pair;
    use :func:`up_equal` for equality of the infinite words themselves.
    """

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise WordError("cycle part of an ultimately periodic word must be non-empty")


def upword(prefix: Sequence[int], cycle: Sequence[int]) -> UPWord:
    return UPWord(tuple(prefix), tuple(cycle))


def unroll(w: UPWord, n: int) -> tuple:
    """First ``n`` letters of prefix . cycle . cycle . ..."""
    if n < 0:
        raise WordError(f"unroll length must be non-negative, got {n}")
    if n <= len(w.prefix):
        return w.prefix[:n]
    rest = n - len(w.prefix)
    k = len(w.cycle)
    reps, tail = divmod(rest, k)
    return w.prefix + w.cycle * reps + w.cycle[:tail]


def decision_bound(w1: UPWord, w2: UPWord) -> int:
    """Unroll length that decides equality of two ultimately periodic words."""
    return max(len(w1.prefix), len(w2.prefix)) + lcm(len(w1.cycle), len(w2.cycle))


def up_equal(w1: UPWord, w2: UPWord) -> bool:
    """Letter-wise equality of the two infinite words.

    Past position max(|prefix1|, |prefix2|) both words are periodic with
    periods |cycle1| and |cycle2|; agreement on a further window of
    lcm(|cycle1|, |cycle2|) letters forces agreement everywhere.
    """
    n = decision_bound(w1, w2)
    return unroll(w1, n) == unroll(w2, n)


def prepend(u: Sequence[int], w: UPWord) -> UPWord:
    """(u . prefix) cycle^omega."""
    return UPWord(tuple(u) + w.prefix, w.cycle)


_WORD_RE = re.compile(r"^([^()]*)\(([^()]+)\)$")


def parse_letters(text: str, alphabet: Alphabet) -> tuple:
    """Parse a finite word segment (no parentheses)."""
    if text == "":
        return ()
    if "." in text:
        parts = text.split(".")
        if any(p == "" for p in parts):
            raise WordError(f"empty label in {text!r}")
        return tuple(alphabet.index(p) for p in parts)
    if text in alphabet._index:
        return (alphabet.index(text),)
    if all(len(name) == 1 for name in alphabet.names):
        return tuple(alphabet.index(ch) for ch in text)
    raise WordError(
        f"cannot split {text!r}: multi-character labels must be separated by '.'"
    )


def parse_word(text: str, alphabet: Alphabet) -> UPWord:
    """Parse ``u(v)`` into an ultimately periodic word."""
    m = _WORD_RE.match(text.strip())
    if m is None:
        raise WordError(f"word {text!r} does not match the u(v) syntax")
    return UPWord(parse_letters(m.group(1), alphabet), parse_letters(m.group(2), alphabet))


def format_letters(letters: Sequence[int], alphabet: Alphabet) -> str:
    names = [alphabet.name(a) for a in letters]
    sep = "." if any(len(n) > 1 for n in alphabet.names) else ""
    return sep.join(names)


def format_word(w: UPWord, alphabet: Alphabet) -> str:
    return f"{format_letters(w.prefix, alphabet)}({format_letters(w.cycle, alphabet)})"
