"""Reduced words in a rank-n free group and the length-2/3 prefix alphabet.

Letters are signed integers: ``+i`` is the i-th generator, ``-i`` its
inverse, ``1 <= i <= n``.  Words are stored reduced (no adjacent
cancelling pair) and are immutable, so they hash and compare by value.

The module also enumerates the prefix alphabet: the squares ``x_i^2t``,
the products ``x_i^t x_j^2s`` (i != j) and the triples
``x_i^t x_j^s x_k^p`` (i != j, j != k), classified into five shapes.
Every reduced word of length >= 3 starts with exactly one element of
this alphabet; length-2 words with two distinct indices start with
none (they are proper prefixes of alphabet elements, handled as a
separate "fringe" wherever coverage matters).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


def letter_key(g: int) -> tuple[int, int]:
    """Canonical letter order: x1 < x1^-1 < x2 < x2^-1 < ..."""
    return (abs(g), 0 if g > 0 else 1)


@dataclass(frozen=True)
class Word:
    """A reduced word; ``letters`` is a tuple of nonzero signed indices."""

    n: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"rank must be >= 2, got {self.n}")
        for a, b in zip(self.letters, self.letters[1:]):
            if a == -b:
                raise ValueError(f"word {self.letters} is not reduced")
        for g in self.letters:
            if g == 0 or abs(g) > self.n:
                raise ValueError(f"letter {g} out of range for rank {self.n}")

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return inverse(self)

    def is_identity(self) -> bool:
        return not self.letters

    def sort_key(self):
        return tuple(letter_key(g) for g in self.letters)

    def __str__(self) -> str:
        return word_str(self)


def identity(n: int) -> Word:
    return Word(n, ())


def generator(n: int, i: int, exp: int = 1) -> Word:
    """The one-letter word x_i^exp with exp in {-1, +1}."""
    if exp not in (-1, 1):
        raise ValueError(f"exponent must be +-1, got {exp}")
    return Word(n, (i * exp,))


def reduce(raw: Sequence[int], n: int) -> Word:
    """Reduce a raw letter sequence; the unique reduced form, never longer."""
    for g in raw:
        if g == 0 or abs(g) > n:
            raise ValueError(f"letter {g} out of range for rank {n}")
    stack: list[int] = []
    for g in raw:
        if stack and stack[-1] == -g:
            stack.pop()
        else:
            stack.append(g)
    return Word(n, tuple(stack))


def multiply(u: Word, v: Word) -> Word:
    if u.n != v.n:
        raise ValueError(f"rank mismatch: {u.n} != {v.n}")
    return reduce(u.letters + v.letters, u.n)


def inverse(w: Word) -> Word:
    return Word(w.n, tuple(-g for g in reversed(w.letters)))


def starts_with(w: Word, prefix: Word) -> bool:
    """True iff the reduced word ``w`` has ``prefix`` as an initial segment."""
    if w.n != prefix.n:
        raise ValueError(f"rank mismatch: {w.n} != {prefix.n}")
    k = len(prefix.letters)
    return w.letters[:k] == prefix.letters


def word_str(w: Word) -> str:
    if not w.letters:
        return "e"
    return "*".join(f"x{abs(g)}" if g > 0 else f"x{abs(g)}^-1" for g in w.letters)


class PsiType(enum.Enum):
    """Shape of a prefix-alphabet element."""

    T1 = 1  # x_i^2t
    T2 = 2  # x_i^t x_j^2s
    T3 = 3  # x_i^t x_j^s x_i^t
    T4 = 4  # x_i^t x_j^s x_i^-t
    T5 = 5  # x_i^t x_j^s x_k^p, i, j, k distinct


@dataclass(frozen=True)
class PsiElement:
    word: Word
    ptype: PsiType


def classify_psi(w: Word) -> PsiType:
    """Classify a prefix-alphabet word; total and exclusive on the alphabet."""
    ls = w.letters
    if len(ls) == 2:
        if ls[0] == ls[1]:
            return PsiType.T1
        raise ValueError(f"{w} is not a prefix-alphabet element")
    if len(ls) == 3:
        a, b, c = ls
        if abs(a) == abs(b):
            raise ValueError(f"{w} is not a prefix-alphabet element")
        if b == c:
            return PsiType.T2
        if c == a:
            return PsiType.T3
        if c == -a:
            return PsiType.T4
        if abs(c) not in (abs(a), abs(b)):
            return PsiType.T5
    raise ValueError(f"{w} is not a prefix-alphabet element")


def psi_prefix(w: Word) -> Optional[Word]:
    """The unique alphabet element ``w`` starts with, or None.

    None covers the identity, single letters, and the length-2 fringe
    (two distinct indices): those words start with no alphabet element.
    """
    ls = w.letters
    if len(ls) < 2:
        return None
    if ls[0] == ls[1]:
        return Word(w.n, ls[:2])
    if len(ls) < 3:
        return None
    return Word(w.n, ls[:3])


def is_fringe(w: Word) -> bool:
    """Length-2 words with two distinct indices; outside every prefix class."""
    return len(w.letters) == 2 and w.letters[0] != w.letters[1]


def signed_letters(n: int) -> list[int]:
    """All 2n letters in canonical order."""
    return [i * s for i in range(1, n + 1) for s in (1, -1)]


def enumerate_psi(n: int) -> list[PsiElement]:
    """All prefix-alphabet elements, lexicographic in the letter order.

    Counts by shape are 2n, 4n(n-1), 4n(n-1), 4n(n-1), 8n(n-1)(n-2),
    totalling 2n + 4n(n-1) + 8n(n-1)^2.
    """
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    out: list[Word] = []
    for a in signed_letters(n):
        out.append(Word(n, (a, a)))
        for b in signed_letters(n):
            if abs(b) == abs(a):
                continue
            out.append(Word(n, (a, b, b)))
            for c in signed_letters(n):
                if c == -b or c == b:
                    continue
                out.append(Word(n, (a, b, c)))
    out.sort(key=Word.sort_key)
    return [PsiElement(w, classify_psi(w)) for w in out]


def psi_type_counts(n: int) -> dict[PsiType, int]:
    """Closed-form count of alphabet elements per shape."""
    return {
        PsiType.T1: 2 * n,
        PsiType.T2: 4 * n * (n - 1),
        PsiType.T3: 4 * n * (n - 1),
        PsiType.T4: 4 * n * (n - 1),
        PsiType.T5: 8 * n * (n - 1) * (n - 2),
    }


def psi_count(n: int) -> int:
    return 2 * n + 4 * n * (n - 1) + 8 * n * (n - 1) ** 2


def enumerate_ball(n: int, L: int) -> list[Word]:
    """All reduced words of length <= L, each exactly once, shortlex order."""
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    if L < 0:
        raise ValueError(f"ball radius must be >= 0, got {L}")
    letters = sorted(signed_letters(n), key=letter_key)
    out = [identity(n)]
    layer = [()]
    for _ in range(L):
        nxt = []
        for w in layer:
            last = w[-1] if w else 0
            for g in letters:
                if g != -last:
                    nxt.append(w + (g,))
        out.extend(Word(n, w) for w in nxt)
        layer = nxt
    return out


def ball_size(n: int, L: int) -> int:
    """1 + 2n((2n-1)^L - 1)/(2n-2)."""
    return 1 + 2 * n * ((2 * n - 1) ** L - 1) // (2 * n - 2)


def default_ball_length(n: int) -> int:
    # keeps exhaustive relation checks under ~1e6 words
    if n == 2:
        return 6
    if n == 3:
        return 5
    return 4


def gamma1(n: int) -> frozenset[Word]:
    """{1} together with all generators and inverses."""
    return frozenset([identity(n)]) | frozenset(
        Word(n, (g,)) for g in signed_letters(n)
    )


def gamma_star(n: int) -> list[Word]:
    """Identity, generators, and the length-3 conjugates x_i^t x_j^s x_i^-t."""
    out = [identity(n)]
    out.extend(Word(n, (g,)) for g in sorted(signed_letters(n), key=letter_key))
    for a in sorted(signed_letters(n), key=letter_key):
        for b in sorted(signed_letters(n), key=letter_key):
            if abs(b) != abs(a):
                out.append(Word(n, (a, b, -a)))
    return out


def random_reduced_word(rng, n: int, length: int) -> Word:
    """Uniform-ish random reduced word of exactly the given length."""
    letters: list[int] = []
    choices = signed_letters(n)
    for _ in range(length):
        g = choices[rng.integers(len(choices))]
        while letters and g == -letters[-1]:
            g = choices[rng.integers(len(choices))]
        letters.append(g)
    return Word(n, tuple(letters))
