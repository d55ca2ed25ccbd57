import dataclasses
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from loxobound.relations import (
    BallContext,
    F_FAMILIES,
    Relation,
    RelationFamily,
    build_F,
    build_G,
    count_report,
    family_counts,
    partition_T,
    serialize_relations,
    verify_all,
    verify_relation,
)
from loxobound.words import (
    PsiType,
    Word,
    enumerate_psi,
    psi_count,
    word_str,
)

DATA = Path(__file__).parent / "data"


def classes_removed(n, rel):
    """Alphabet elements missing from the relation's retained set."""
    return {p.word for p in enumerate_psi(n)} - rel.psi_words


class TestBuildG:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_family_counts(self, n):
        G = build_G(n)
        got = Counter(r.family for r in G)
        for fam, expect in family_counts(n).items():
            assert got[fam] == expect, fam

    def test_n2_totals(self):
        G = build_G(2)
        assert len(G) == 60
        got = Counter(r.family.value for r in G)
        assert [got[k] for k in ("1a", "1b", "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b")] == [
            4, 8, 8, 8, 8, 8, 8, 8, 0, 0]

    def test_n3_total(self):
        assert len(build_G(3)) == 2 * 126 + 6 * 3

    @pytest.mark.parametrize("n", range(2, 9))
    def test_count_report_consistent(self, n):
        rep = count_report(n)
        assert rep["match"], rep
        assert rep["per_row_total"] == len(build_G(n)) if n <= 4 else True

    def test_rank_too_small(self):
        with pytest.raises(ValueError):
            build_G(1)

    def test_worked_example_instance(self):
        # gamma = x1^-1 against psi = x1 x2 x3 drops exactly the classes
        # whose words start with x2 x3
        G = build_G(3)
        hits = [
            r for r in G
            if r.gamma == Word(3, (-1,)) and r.psi.word == Word(3, (1, 2, 3))
        ]
        assert len(hits) == 1
        r = hits[0]
        assert r.family == RelationFamily.R5A
        expected_removed = {Word(3, (2, 3, 3))} | {
            Word(3, (2, 3, g)) for g in (1, -1, 2, -2)
        }
        assert classes_removed(3, r) == expected_removed

    def test_psi_membership_split(self):
        # 1a/2b exclude their own psi; 3a/4b/5a retain it
        for n in (2, 3):
            for r in build_F(n):
                if r.family in (RelationFamily.R1A, RelationFamily.R2B):
                    assert not r.psi_in_set
                else:
                    assert r.psi_in_set

    def test_gamma_in_gamma_star(self):
        for r in build_G(2):
            ls = r.gamma.letters
            assert len(ls) in (1, 3)
            if len(ls) == 3:
                assert ls[2] == -ls[0] and abs(ls[1]) != abs(ls[0])


class TestBuildF:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_size_equals_alphabet(self, n):
        assert len(build_F(n)) == psi_count(n)

    def test_families(self):
        assert {r.family for r in build_F(3)} == F_FAMILIES

    def test_subset_of_G(self):
        G = build_G(2)
        for r in build_F(2):
            assert r in G

    def test_one_relation_per_alphabet_element(self):
        F = build_F(3)
        assert len({r.psi.word for r in F}) == len(F)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_retained_set_sizes(self, n):
        total = psi_count(n)
        corner = 1 + 6 * (n - 1) + 4 * (n - 1) * (n - 2)
        expected = {
            RelationFamily.R1A: total - corner,
            RelationFamily.R2B: total - (2 * n - 1),
            RelationFamily.R3A: total - (2 * n - 1),
            RelationFamily.R4B: corner,
            RelationFamily.R5A: total - (2 * n - 1),
        }
        for r in build_F(n):
            assert len(r.psi_set) == expected[r.family], r.label()

    def test_n2_sizes_from_row_sums(self):
        sizes = {r.family.value: len(r.psi_set) for r in build_F(2)}
        assert sizes["4b"] == 7
        assert sizes["1a"] == 28 - 7
        assert sizes["2b"] == sizes["3a"] == 25

    @pytest.mark.parametrize("n", [2, 3])
    def test_removed_type_profile(self, n):
        # 2b/3a/5a drop one type-2, one type-3, one type-4 and 2(n-2)
        # type-5 elements; 1a drops the full first-letter class
        from loxobound.words import classify_psi

        for r in build_F(n):
            removed = Counter(classify_psi(w) for w in classes_removed(n, r))
            if r.family in (RelationFamily.R2B, RelationFamily.R3A, RelationFamily.R5A):
                assert removed == Counter({
                    PsiType.T2: 1, PsiType.T3: 1, PsiType.T4: 1,
                    PsiType.T5: 2 * (n - 2),
                }) - Counter()  # Counter drops zero entries
            elif r.family == RelationFamily.R1A:
                assert removed[PsiType.T1] == 1
                assert removed[PsiType.T2] == removed[PsiType.T3] == removed[PsiType.T4] == 2 * (n - 1)
                assert removed[PsiType.T5] == 4 * (n - 1) * (n - 2)

    def test_golden_serialization_n2(self):
        golden = (DATA / "relations_F_n2.txt").read_text()
        assert serialize_relations(build_F(2)) == golden


class TestVerifyRelation:
    def test_all_G2_pass_at_6(self):
        reps = verify_all(build_G(2), 6)
        assert all(r.passed for r in reps)
        assert all(r.forward_checked > 0 and r.backward_checked > 0 for r in reps)

    def test_sample_G3_pass_at_5(self):
        G = build_G(3)
        ctx = BallContext(3, 5)
        for r in G[::9]:
            assert verify_relation(r, 5, ctx).passed

    def test_drop_member_detected(self):
        r = next(r for r in build_G(2) if r.family == RelationFamily.R3A)
        bad = dataclasses.replace(r, psi_set=frozenset(list(r.psi_set)[1:]))
        rep = verify_relation(bad, 6)
        assert not rep.passed
        assert rep.backward_violations > 0

    def test_add_member_detected(self):
        r = next(r for r in build_G(2) if r.family == RelationFamily.R3A)
        extra = next(
            p for p in enumerate_psi(2) if p not in r.psi_set and p != r.psi
        )
        bad = dataclasses.replace(r, psi_set=r.psi_set | {extra})
        rep = verify_relation(bad, 6)
        assert not rep.passed
        assert rep.forward_violations > 0

    def test_ball_too_small(self):
        r = build_G(2)[0]
        with pytest.raises(ValueError):
            verify_relation(r, 2)

    def test_fringe_accounting(self):
        # the 4n(n-1) two-letter mixed words never enter the backward scan
        r = next(r for r in build_G(2) if r.family == RelationFamily.R2A)
        rep = verify_relation(r, 6)
        assert rep.fringe_skipped == 8

    def test_context_rank_mismatch(self):
        ctx = BallContext(2, 6)
        r = build_G(3)[0]
        with pytest.raises(ValueError):
            verify_relation(r, 5, ctx)


class TestPartitionT:
    def test_n2_partition(self):
        T = partition_T(2, 1, 1, 2, 1)
        assert len(T) == 4
        assert sum(len(r.psi_set) for r in T) == 28
        seen = set()
        for r in T:
            assert not (seen & r.psi_words)
            seen |= r.psi_words
        assert seen == {p.word for p in enumerate_psi(2)}

    def test_n3_partition(self):
        T = partition_T(3, 1, -1, 3, 1)
        assert sum(len(r.psi_set) for r in T) == 126
        seen = set()
        for r in T:
            assert not (seen & r.psi_words)
            seen |= r.psi_words
        assert seen == {p.word for p in enumerate_psi(3)}

    def test_members_are_4b_instances(self):
        G = build_G(2)
        for r in partition_T(2, 1, 1, 2, 1):
            assert r in G
            assert r.family == RelationFamily.R4B

    def test_bad_indices(self):
        with pytest.raises(ValueError):
            partition_T(2, 1, 1, 1, 1)
        with pytest.raises(ValueError):
            partition_T(2, 1, 2, 2, 1)
        with pytest.raises(ValueError):
            partition_T(2, 0, 1, 2, 1)
