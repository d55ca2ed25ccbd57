import math

import numpy as np
import pytest

from loxobound.displacement import (
    DisplacementSystem,
    F_system,
    G_system,
    apply_tau,
    basis,
    candidate_y,
    descent_direction,
    f_r,
    grad_f_r,
    hessian_form,
    in_convexity_region,
    max_F,
    max_G,
    random_interior_point,
    uniform_point,
)
from loxobound.quartic import alpha
from loxobound.relations import RelationFamily, build_F, build_G
from loxobound.words import PsiType

ALPHA = {2: 24.86921440872407, 3: 120.54814306765165}


def raw_value(x, rel, values):
    b = x.basis
    xr = values[b.index_of(rel.psi)]
    Xr = sum(values[b.index[w]] for w in rel.psi_words)
    return (1 - xr) * (1 - Xr) / (xr * Xr)


class TestValues:
    def test_uniform_4b(self):
        x = uniform_point(2)
        rel = next(r for r in build_F(2) if r.family == RelationFamily.R4B)
        got = f_r(x, rel)
        assert got.value == pytest.approx(81.0, rel=1e-12)
        assert got.x_r == pytest.approx(1 / 28)
        assert got.X_r == pytest.approx(7 / 28)

    def test_uniform_1a(self):
        x = uniform_point(2)
        rel = next(r for r in build_F(2) if r.family == RelationFamily.R1A)
        got = f_r(x, rel)
        assert got.X_r == pytest.approx(21 / 28)
        assert got.value == pytest.approx(9.0, rel=1e-12)

    def test_value_consistency_invariant(self):
        rng = np.random.default_rng(2)
        x = random_interior_point(rng, 2)
        for rel in build_F(2):
            dv = f_r(x, rel)
            assert dv.value == pytest.approx(
                (1 - dv.x_r) * (1 - dv.X_r) / (dv.x_r * dv.X_r), rel=1e-12
            )
            assert dv.value > 0

    def test_rank_mismatch(self):
        with pytest.raises(ValueError):
            f_r(uniform_point(2), build_F(3)[0])

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        x = random_interior_point(rng, 3)
        sys_g = G_system(3)
        vals = sys_g.values(x.values)
        for i in (0, 17, 100, 269):
            assert vals[i] == pytest.approx(f_r(x, sys_g.relations[i]).value, rel=1e-12)


class TestCandidatePoint:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_sums_to_one(self, n):
        y = candidate_y(n, alpha(n).value)
        assert abs(math.fsum(y.values.tolist()) - 1.0) < 1e-9

    @pytest.mark.parametrize("n", range(2, 7))
    def test_equalizes_working_collection(self, n):
        an = alpha(n).value
        y = candidate_y(n, an)
        vals = F_system(n).values(y.values)
        assert np.all(np.abs(vals - an) <= 1e-9 * an)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_dominates_full_collection(self, n):
        an = alpha(n).value
        y = candidate_y(n, an)
        assert np.all(G_system(n).values(y.values) <= an + 1e-9)

    def test_n2_conjugate_coordinate(self):
        y = candidate_y(2, ALPHA[2])
        p4 = next(p for p in y.basis.elements if p.ptype == PsiType.T4)
        assert y.coord(p4) == pytest.approx(3 / (3 + ALPHA[2]), rel=1e-12)
        assert y.coord(p4) == pytest.approx(0.10765, abs=5e-5)

    def test_alpha_out_of_bracket_rejected(self):
        with pytest.raises(ValueError):
            candidate_y(2, 8.0)
        with pytest.raises(ValueError):
            candidate_y(2, 30.0**3)


class TestMaxFunctions:
    def test_at_candidate_point(self):
        y = candidate_y(2, ALPHA[2])
        vF, hitsF = max_F(y)
        vG, hitsG = max_G(y)
        assert vF == pytest.approx(ALPHA[2], rel=1e-9)
        assert vG == pytest.approx(ALPHA[2], rel=1e-9)
        assert len(hitsF) == 28

    def test_uniform_argmax_is_4b(self):
        v, hits = max_F(uniform_point(2))
        assert v == pytest.approx(81.0)
        assert len(hits) == 8
        assert all(r.family == RelationFamily.R4B for r in hits)

    def test_F_below_G(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            x = random_interior_point(rng, 2)
            assert max_F(x)[0] <= max_G(x)[0] + 1e-12

    def test_strictly_above_one(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            assert max_F(random_interior_point(rng, 2))[0] > 1.0


class TestGradient:
    @pytest.mark.parametrize("n", [2, 3])
    def test_finite_difference_agreement(self, n):
        """Tangent-projected central differences at step 1e-6, one
        relation per family, several random interior points."""
        rng = np.random.default_rng(10)
        by_family = {}
        for rel in build_F(n):
            by_family.setdefault(rel.family, rel)
        h = 1e-6
        for rel in by_family.values():
            for _ in range(10):
                x = random_interior_point(rng, n)
                g = grad_f_r(x, rel)
                fd = np.zeros_like(g)
                for i in range(len(fd)):
                    vp = x.values.copy()
                    vp[i] += h
                    vm = x.values.copy()
                    vm[i] -= h
                    fd[i] = (raw_value(x, rel, vp) - raw_value(x, rel, vm)) / (2 * h)
                gt = g - g.mean()
                ft = fd - fd.mean()
                scale = np.abs(gt).max()
                assert np.abs(gt - ft).max() <= 1e-5 * scale

    def test_zero_off_support(self):
        rng = np.random.default_rng(11)
        x = random_interior_point(rng, 2)
        for rel in build_F(2)[:6]:
            g = grad_f_r(x, rel)
            support = set(x.basis.indices(rel.psi_set).tolist())
            support.add(x.basis.index_of(rel.psi))
            for i in range(len(g)):
                if i not in support:
                    assert g[i] == 0.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_descent_direction_sign_split(self, n):
        rng = np.random.default_rng(12)
        u = descent_direction(n)
        assert abs(u.sum()) < 1e-9
        for _ in range(100):
            x = random_interior_point(rng, n)
            for rel in build_F(n):
                d = float(grad_f_r(x, rel) @ u)
                if rel.family == RelationFamily.R4B:
                    assert d > 0.0
                else:
                    assert d < 0.0


class TestConvexityRegion:
    def test_predicate_matches_definition(self):
        rng = np.random.default_rng(13)
        x = random_interior_point(rng, 2)
        for rel in build_F(2):
            dv = f_r(x, rel)
            assert in_convexity_region(x, rel) == (
                dv.x_r + dv.X_r - dv.x_r * dv.X_r < 0.75
            )

    def test_hessian_psd_on_tangent_slices(self):
        rng = np.random.default_rng(14)
        rels = [r for r in build_F(2) if r.family == RelationFamily.R4B]
        found = 0
        while found < 100:
            x = random_interior_point(rng, 2)
            rel = rels[found % len(rels)]
            if not in_convexity_region(x, rel):
                continue
            found += 1
            u = rng.normal(size=28)
            v = rng.normal(size=28)
            u -= u.mean()
            v -= v.mean()
            m = np.array(
                [
                    [hessian_form(x, rel, u, u), hessian_form(x, rel, u, v)],
                    [hessian_form(x, rel, v, u), hessian_form(x, rel, v, v)],
                ]
            )
            eig = np.linalg.eigvalsh(m)
            assert eig.min() >= -1e-8 * max(abs(eig).max(), 1.0)

    def test_hessian_form_matches_fd(self):
        rng = np.random.default_rng(15)
        x = random_interior_point(rng, 2)
        rel = build_F(2)[3]
        u = rng.normal(size=28)
        u -= u.mean()
        h = 1e-5
        vp = x.values + h * u
        vm = x.values - h * u
        fd = (
            raw_value(x, rel, vp) - 2 * raw_value(x, rel, x.values) + raw_value(x, rel, vm)
        ) / h**2
        assert hessian_form(x, rel, u, u) == pytest.approx(fd, rel=1e-4)


class TestSymmetry:
    @pytest.mark.parametrize("n", [2, 3])
    def test_letter_swap_preserves_value_multiset(self, n):
        rng = np.random.default_rng(16)
        sys_f = F_system(n)
        for _ in range(50):
            x = random_interior_point(rng, n)
            i1 = int(rng.integers(1, n + 1))
            i2 = int(rng.integers(1, n + 1))
            while i2 == i1:
                i2 = int(rng.integers(1, n + 1))
            t1 = int(rng.choice([-1, 1]))
            t2 = int(rng.choice([-1, 1]))
            tx = apply_tau(x, i1, t1, i2, t2)
            va = np.sort(sys_f.values(x.values))
            vb = np.sort(sys_f.values(tx.values))
            assert np.allclose(va, vb, rtol=1e-10)
            assert max_F(tx)[0] == pytest.approx(max_F(x)[0], rel=1e-10)

    def test_type_1b_dominated_by_1a(self):
        """Each 1b value is bounded by the matching 1a value everywhere."""
        rng = np.random.default_rng(18)
        G = build_G(2)
        ones_a = {r.psi.word: r for r in G if r.family == RelationFamily.R1A}
        ones_b = [r for r in G if r.family == RelationFamily.R1B]
        for _ in range(1000):
            x = random_interior_point(rng, 2)
            for rb in ones_b:
                ra = ones_a[rb.psi.word]
                assert f_r(x, ra).value >= f_r(x, rb).value


class TestLowerBoundLink:
    def test_half_log_matches_two_parameter_bound(self):
        # f_r at x equals the exponentiated two-parameter bound with
        # a = x_r and b = 1 - X_r
        from loxobound.hyperbolic import disp_lower_bound

        rng = np.random.default_rng(19)
        for _ in range(50):
            x = random_interior_point(rng, 2)
            for rel in build_F(2)[:10]:
                dv = f_r(x, rel)
                got = disp_lower_bound(dv.x_r, 1.0 - dv.X_r)
                assert got == pytest.approx(0.5 * math.log(dv.value), rel=1e-12)
