"""Prefix-class relation collections and their exhaustive verification.

A relation is a triple (gamma, psi, Psi_r): left-translating the class of
words starting with ``psi`` by ``gamma`` yields exactly the words lying in
no class of ``Psi_r`` (up to a finite dot set of short words).  The big
collection G holds ten symmetric families, labelled 1a..5b by the shape of
``psi`` and the choice of ``gamma``; the working collection F keeps the
five families 1a, 2b, 3a, 4b, 5a, one relation per alphabet element.

Verification is a two-sided scan over a ball of reduced words.  Products
are computed exactly, so a pass at radius L is strong finite evidence for
the identity, not a proof; corrupting a relation's class set is detected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .words import (
    PsiElement,
    Word,
    classify_psi,
    enumerate_ball,
    enumerate_psi,
    gamma1,
    identity,
    inverse,
    is_fringe,
    letter_key,
    multiply,
    psi_count,
    psi_prefix,
    signed_letters,
    starts_with,
    word_str,
)


class RelationFamily(enum.Enum):
    R1A = "1a"
    R1B = "1b"
    R2A = "2a"
    R2B = "2b"
    R3A = "3a"
    R3B = "3b"
    R4A = "4a"
    R4B = "4b"
    R5A = "5a"
    R5B = "5b"


F_FAMILIES = frozenset(
    {
        RelationFamily.R1A,
        RelationFamily.R2B,
        RelationFamily.R3A,
        RelationFamily.R4B,
        RelationFamily.R5A,
    }
)


@dataclass(frozen=True)
class Relation:
    """One tagged relation instance.

    ``psi_set`` is the retained class set; ``dot_set`` the finite word set
    completing the identity (a subset of {1} and the single letters).
    """

    family: RelationFamily
    gamma: Word
    psi: PsiElement
    psi_set: frozenset[PsiElement]
    dot_set: frozenset[Word]

    @cached_property
    def psi_words(self) -> frozenset[Word]:
        return frozenset(p.word for p in self.psi_set)

    @cached_property
    def psi_in_set(self) -> bool:
        return self.psi.word in self.psi_words

    def label(self) -> str:
        return f"{self.family.value}[{word_str(self.gamma)}|{word_str(self.psi.word)}]"


class _PsiIndex:
    """Prefix lookup tables over the alphabet of one rank."""

    def __init__(self, n: int):
        self.n = n
        self.elements = enumerate_psi(n)
        self.by_word = {p.word: p for p in self.elements}
        self.all = frozenset(self.elements)
        self.by_first: dict[int, list[PsiElement]] = {}
        self.by_first2: dict[tuple[int, int], list[PsiElement]] = {}
        for p in self.elements:
            ls = p.word.letters
            self.by_first.setdefault(ls[0], []).append(p)
            self.by_first2.setdefault(ls[:2], []).append(p)

    def minus_first(self, a: int) -> frozenset[PsiElement]:
        return self.all - frozenset(self.by_first[a])

    def minus_first2(self, a: int, b: int) -> frozenset[PsiElement]:
        return self.all - frozenset(self.by_first2.get((a, b), []))

    def minus_words(self, words: Iterable[tuple[int, ...]]) -> frozenset[PsiElement]:
        drop = frozenset(self.by_word[Word(self.n, w)] for w in words)
        return self.all - drop

    def first_class(self, a: int) -> frozenset[PsiElement]:
        return frozenset(self.by_first[a])


def _ordered_letters(n: int) -> list[int]:
    return sorted(signed_letters(n), key=letter_key)


def build_G(n: int) -> list[Relation]:
    """All relations of the ten families, in family-then-index order."""
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    idx = _PsiIndex(n)
    g1 = gamma1(n)
    letters = _ordered_letters(n)
    rels: list[Relation] = []

    def add(family, gamma_letters, psi_letters, psi_set, dot_set):
        gamma = Word(n, gamma_letters)
        psi = idx.by_word[Word(n, psi_letters)]
        rels.append(Relation(family, gamma, psi, psi_set, dot_set))

    def pairs():
        for a in letters:
            for b in letters:
                if abs(b) != abs(a):
                    yield a, b

    def triples():
        for a in letters:
            for b in letters:
                if abs(b) == abs(a):
                    continue
                for c in letters:
                    if abs(c) != abs(a) and abs(c) != abs(b):
                        yield a, b, c

    for a in letters:
        add(RelationFamily.R1A, (-a,), (a, a), idx.minus_first(a),
            g1 - {Word(n, (a,))})
    for a, b in pairs():
        add(RelationFamily.R1B, (a, b, -a), (a, a),
            idx.minus_words([(a, b, a)]), g1)
    for a, b in pairs():
        add(RelationFamily.R2A, (-a,), (a, b, b), idx.minus_words([(b, b)]), g1)
    for a, b in pairs():
        add(RelationFamily.R2B, (a, -b, -a), (a, b, b), idx.minus_first2(a, b), g1)
    for a, b in pairs():
        add(RelationFamily.R3A, (-a,), (a, b, a), idx.minus_first2(b, a), g1)
    for a, b in pairs():
        add(RelationFamily.R3B, (a, -b, -a), (a, b, a), idx.minus_words([(a, a)]), g1)
    for a, b in pairs():
        add(RelationFamily.R4A, (-a,), (a, b, -a), idx.minus_first2(b, -a), g1)
    for a, b in pairs():
        add(RelationFamily.R4B, (a, -b, -a), (a, b, -a), idx.first_class(a),
            frozenset({Word(n, (a,))}))
    for a, b, c in triples():
        add(RelationFamily.R5A, (-a,), (a, b, c), idx.minus_first2(b, c), g1)
    for a, b, c in triples():
        add(RelationFamily.R5B, (a, -b, -a), (a, b, c), idx.minus_first2(a, c), g1)
    return rels


def build_F(n: int) -> list[Relation]:
    """The five-family subcollection; one relation per alphabet element."""
    rels = [r for r in build_G(n) if r.family in F_FAMILIES]
    assert len(rels) == psi_count(n)
    return rels


def family_counts(n: int) -> dict[RelationFamily, int]:
    """Closed-form relation counts per family."""
    two = 4 * n * (n - 1)
    five = 8 * n * (n - 1) * (n - 2)
    return {
        RelationFamily.R1A: 2 * n,
        RelationFamily.R1B: two,
        RelationFamily.R2A: two,
        RelationFamily.R2B: two,
        RelationFamily.R3A: two,
        RelationFamily.R3B: two,
        RelationFamily.R4A: two,
        RelationFamily.R4B: two,
        RelationFamily.R5A: five,
        RelationFamily.R5B: five,
    }


def count_report(n: int) -> dict:
    """Compare the per-family count sum with the aggregate closed form.

    Both are reported so any mismatch would surface; they agree identically.
    """
    per_family = family_counts(n)
    per_row_total = sum(per_family.values())
    aggregate = 2 * psi_count(n) + 2 * n * (2 * n - 3)
    return {
        "n": n,
        "per_family": {f.value: c for f, c in per_family.items()},
        "per_row_total": per_row_total,
        "aggregate_formula": aggregate,
        "match": per_row_total == aggregate,
    }


@dataclass
class VerificationReport:
    relation: Relation
    L: int
    forward_checked: int = 0
    backward_checked: int = 0
    fringe_skipped: int = 0
    forward_violations: int = 0
    backward_violations: int = 0
    violation_samples: list = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.violation_samples is None:
            self.violation_samples = []

    @property
    def passed(self) -> bool:
        return self.forward_violations == 0 and self.backward_violations == 0


class BallContext:
    """Shared ball enumeration with per-word prefix classes."""

    def __init__(self, n: int, L: int):
        self.n = n
        self.L = L
        self.words = enumerate_ball(n, L)
        self.prefixes = [psi_prefix(w) for w in self.words]
        self.by_prefix: dict[Word, list[Word]] = {}
        for w, pre in zip(self.words, self.prefixes):
            if pre is not None:
                self.by_prefix.setdefault(pre, []).append(w)


def verify_relation(
    rel: Relation, L: int, ctx: Optional[BallContext] = None
) -> VerificationReport:
    """Two-sided bounded check of the relation identity on the radius-L ball.

    Forward: every word of the psi class maps under gamma outside the dot
    set and outside every retained class.  Backward: every ball word
    outside the dot set and the retained classes is reached, i.e. maps
    under gamma^-1 into the psi class.  Length-2 words of two distinct
    indices belong to no class and are exempt from the backward scan
    (counted in ``fringe_skipped``); the identity quantifies over class
    members only.
    """
    need = max(len(rel.psi.word), len(rel.gamma)) + 1
    if L < need:
        raise ValueError(f"ball radius {L} too small; need at least {need}")
    if ctx is None:
        ctx = BallContext(rel.gamma.n, L)
    elif ctx.n != rel.gamma.n or ctx.L < L:
        raise ValueError("ball context does not match the relation")

    rep = VerificationReport(rel, L)
    psi_word = rel.psi.word
    psi_words = rel.psi_words
    gamma = rel.gamma
    gamma_inv = inverse(gamma)

    for w in ctx.by_prefix.get(psi_word, ()):
        rep.forward_checked += 1
        u = multiply(gamma, w)
        if u in rel.dot_set or psi_prefix(u) in psi_words:
            rep.forward_violations += 1
            if len(rep.violation_samples) < 8:
                rep.violation_samples.append(("forward", w))

    for v, pre in zip(ctx.words, ctx.prefixes):
        if v in rel.dot_set or (pre is not None and pre in psi_words):
            continue
        if pre is None and len(v) == 2:
            rep.fringe_skipped += 1
            continue
        rep.backward_checked += 1
        if not starts_with(multiply(gamma_inv, v), psi_word):
            rep.backward_violations += 1
            if len(rep.violation_samples) < 8:
                rep.violation_samples.append(("backward", v))
    return rep


def verify_all(rels: Sequence[Relation], L: int) -> list[VerificationReport]:
    if not rels:
        return []
    ctx = BallContext(rels[0].gamma.n, L)
    return [verify_relation(r, L, ctx) for r in rels]


def partition_T(n: int, i0: int, t0: int, j0: int, s0: int) -> list[Relation]:
    """The 4b subfamily whose class sets partition the whole alphabet.

    Takes the 4b relations with psi = x_i^t x_j0^s0 x_i^-t over all
    (i, t), i != j0, together with those with psi = x_j0^s x_i0^t0 x_j0^-s
    for both s.  Their retained sets are the 2n first-letter classes.
    """
    if not (1 <= i0 <= n and 1 <= j0 <= n) or i0 == j0:
        raise ValueError(f"need distinct indices in 1..{n}, got {i0}, {j0}")
    if t0 not in (-1, 1) or s0 not in (-1, 1):
        raise ValueError("signs must be +-1")
    idx = _PsiIndex(n)
    b0 = j0 * s0
    wanted: list[tuple[int, int]] = []
    for a in _ordered_letters(n):
        if abs(a) != j0:
            wanted.append((a, b0))
    for s in (1, -1):
        wanted.append((j0 * s, i0 * t0))
    rels = []
    for a, b in wanted:
        gamma = Word(n, (a, -b, -a))
        psi = idx.by_word[Word(n, (a, b, -a))]
        rels.append(
            Relation(RelationFamily.R4B, gamma, psi, idx.first_class(a),
                     frozenset({Word(n, (a,))}))
        )
    return rels


def serialize_relations(rels: Iterable[Relation]) -> str:
    """Line-oriented dump: family, gamma, psi, class-set size and members."""
    lines = []
    for r in rels:
        members = ",".join(
            word_str(w) for w in sorted(r.psi_words, key=Word.sort_key)
        )
        lines.append(
            f"{r.family.value}\t{word_str(r.gamma)}\t{word_str(r.psi.word)}"
            f"\t{len(r.psi_set)}\t{members}"
        )
    return "\n".join(lines) + "\n"
