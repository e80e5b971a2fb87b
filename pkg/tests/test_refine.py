import random

import pytest

from coverforge import fields as F
from coverforge import geometry as G
from coverforge import refine as RF
from coverforge.rationals import Q
from coverforge.sampling import SamplePlan


def iv(lo, hi):
    return G.BoxUnion(1, [G.Box([(Q(lo), Q(hi))])])


def tu_partition():
    """(t, 1-t) clamped, on the unit interval."""
    t = F.Clamp01(F.Coord(1, 0))
    u = F.Clamp01(F.Sub(F.Const(1, 1), F.Coord(1, 0)))
    return F.PositivePartition(["a", "b"], [t, u], iv(0, 1))


class TestMather:
    def test_single_constant_member(self):
        p = F.PositivePartition(["x"], [F.Const(1, 1)], G.whole_space(1))
        g = RF.mather(p)
        assert g.members[0].eval((Q(17),)) == 1

    def test_two_member_values(self):
        g = RF.mather(tu_partition())
        vals = [f.eval((Q(3, 4),)) for f in g.members]
        assert vals == [1, 0]
        vals = [f.eval((Q(1, 2),)) for f in g.members]
        assert vals == [Q(1, 2), Q(1, 2)]

    def test_sum_exactly_one_and_subordination(self):
        p = tu_partition()
        g = RF.mather(p)
        rng = random.Random(5)
        mu = F.MaxOf(list(p.members))
        for _ in range(500):
            x = (Q(rng.randrange(1, 64), 64),)
            vals = [f.eval(x) for f in g.members]
            assert sum(vals) == 1
            m = mu.eval(x)
            for gv, fv in zip(vals, [f.eval(x) for f in p.members]):
                if gv > 0:
                    assert 2 * fv >= m > 0

    def test_local_finiteness_witness(self):
        p = tu_partition()
        g = RF.mather(p)
        x = (Q(9, 10),)
        J, VJ = g.local_finiteness_witness(x)
        assert VJ.contains(x)
        # members outside J vanish on sampled points of V_J
        rng = random.Random(6)
        outside = [f for lab, f in zip(g.labels, g.members) if lab not in J]
        for _ in range(300):
            y = (Q(rng.randrange(-32, 96), 64),)
            if VJ.contains(y):
                for f in outside:
                    assert f.eval(y) == 0


class TestDisjointify:
    def _cover(self):
        amb = iv(0, 1)
        p = RF.mather(tu_partition())
        els = [G.FieldOpen(f) for f in tu_partition().members]
        return RF.Cover(amb, ["a", "b"], els, partition=p)

    def test_proof_formula_values(self):
        # at a point where the normalized members are (3/5, 2/5)
        t = F.Clamp01(F.Coord(1, 0))
        u = F.Clamp01(F.Sub(F.Const(1, 1), F.Coord(1, 0)))
        pou = F.PartitionOfUnity(["a", "b"], [t, u], iv(0, 1))
        cov = RF.Cover(iv(0, 1), ["a", "b"], [G.FieldOpen(t), G.FieldOpen(u)], partition=pou)
        refined, card = RF.disjointify(cov)
        x = (Q(3, 5),)
        got = {lab: f.eval(x) for lab, f in zip(refined.partition.labels, refined.partition.members)}
        assert got[("a",)] == Q(1, 5)
        assert got[("b",)] == 0
        assert got[("a", "b")] == Q(2, 5)
        assert card == {("a",): 1, ("b",): 1, ("a", "b"): 2}

    def test_equal_cardinality_disjoint_and_positive(self):
        cov = self._cover()
        refined, card = RF.disjointify(cov)
        rng = random.Random(8)
        for _ in range(1000):
            x = (Q(rng.randrange(1, 128), 128),)
            vals = {lab: f.eval(x) for lab, f in zip(refined.partition.labels, refined.partition.members)}
            by_size = {}
            for lab, v in vals.items():
                if v > 0:
                    by_size.setdefault(card[lab], []).append(lab)
            for size, labs in by_size.items():
                assert len(labs) == 1, (x, labs)
            assert sum(vals.values()) > 0

    def test_refinement_witnesses(self):
        cov = self._cover()
        refined, _ = RF.disjointify(cov)
        refines = refined.notes["refines"]
        rng = random.Random(9)
        for _ in range(500):
            x = (Q(rng.randrange(-32, 160), 128),)
            for lab, elt in zip(refined.labels, refined.elements):
                if elt.contains(x):
                    for orig in refines[lab]:
                        assert cov.element(orig).contains(x)

    def test_single_member(self):
        f0 = F.Const(1, 1)
        pou = F.PartitionOfUnity(["x"], [f0], G.whole_space(1))
        cov = RF.Cover(G.whole_space(1), ["x"], [G.whole_space(1)], partition=pou)
        refined, card = RF.disjointify(cov)
        assert len(refined) == 1
        assert refined.partition.members[0].eval((Q(3),)) == 1
        assert refined.elements[0].contains((Q(100),))
        assert card == {("x",): 1}

    def test_contradictory_inequalities_give_empty_overlap(self):
        cov = self._cover()
        refined, _ = RF.disjointify(cov)
        va = refined.element(("a",))
        vb = refined.element(("b",))
        rng = random.Random(10)
        for _ in range(2000):
            x = (Q(rng.randrange(-64, 192), 128),)
            assert not (va.contains(x) and vb.contains(x))

    def test_large_index_unsupported(self):
        n = RF.MAX_DISJOINTIFY_INDEX + 1
        members = [F.Const(1, 1)] * n
        pou = F.PartitionOfUnity(list(range(n)), members, G.whole_space(1))
        cov = RF.Cover(
            G.whole_space(1), list(range(n)), [G.whole_space(1)] * n, partition=pou
        )
        with pytest.raises(RF.RefineError, match="unsupported"):
            RF.disjointify(cov)


class TestZigzagParams:
    def test_default_values(self):
        p = RF.default_zigzag_params()
        assert p.alpha(-2) == Q(3, 8)
        assert p.beta(-2) == Q(1, 4)
        assert p.gamma(-2) == Q(1, 8)
        assert p.alpha(-1) == Q(3, 64)
        assert p.validate(-2, 14)

    def test_margin_example(self):
        p = RF.default_zigzag_params()
        assert p.beta(0) == Q(2, 512)
        assert p.alpha(0) == Q(3, 512)
        assert p.beta(0) < p.alpha(0)

    def test_invalid_params_rejected(self):
        bad = RF.ZigzagParams(lambda i: Q(1, 2), lambda i: Q(1, 3), lambda i: Q(1, 4))
        with pytest.raises(RF.RefineError):
            bad.validate(-2, 3)


def constant_chain(n=4):
    amb = G.whole_space(1)
    members = [F.Const(1, 1)] + [F.Const(1, 0)] * (n - 1)
    pou = F.PartitionOfUnity(list(range(n)), members, amb)
    return RF.Cover(amb, list(range(n)), [amb] * n, partition=pou, tags={"chain"})


class TestZigzagRefine:
    def test_degenerate_chain(self):
        zz = RF.zigzag_refine(constant_chain())
        x = (Q(17),)
        assert zz.elements[0].contains(x)
        assert zz.elements[1].contains(x)
        assert not zz.elements[2].contains(x)
        assert not zz.elements[3].contains(x)

    def test_margins_recorded_exact(self):
        zz = RF.zigzag_refine(constant_chain())
        m = zz.notes["zigzag_margins"]
        assert m[(0, 2)] == Q(3, 512) - Q(2, 512)
        assert all(v > 0 for v in m.values())

    def test_coverage_and_disjointness_sampled(self):
        chain = _tent_chain()
        zz = RF.zigzag_refine(chain)
        total = zz.partition.member_sum()
        rng = random.Random(12)
        n = len(zz)
        for _ in range(800):
            x = (Q(rng.randrange(-144, 144), 16),)
            if chain.ambient.contains(x):
                assert total.eval(x) > 0
            active = [i for i in range(n) if zz.elements[i].contains(x)]
            for i, j in zip(active, active[1:]):
                assert j - i <= 1

    def test_prefix_union_identity(self):
        # union of P_0..P_k equals {g_k > alpha_k} at sampled points
        chain = _tent_chain()
        zz = RF.zigzag_refine(chain)
        params = RF.default_zigzag_params()
        pou = chain.partition
        rng = random.Random(14)
        n = len(zz)
        for k in range(min(n, 9)):
            gk = F.Add(pou.members[: k + 1]) if k else pou.members[0]
            for _ in range(150):
                x = (Q(rng.randrange(-144, 144), 16),)
                lhs = any(zz.elements[i].contains(x) for i in range(k + 1))
                rhs = gk.eval(x) > params.alpha(k)
                assert lhs == rhs

    def test_needs_chain_tag(self):
        c = constant_chain()
        c.tags.discard("chain")
        with pytest.raises(RF.RefineError):
            RF.zigzag_refine(c)


def _tent_chain():
    """Chain from a staircase of intervals with a mather partition."""
    amb = iv(-8, 8)
    boxes = [iv(-1, 1), iv(-2, 2), iv(-4, 4), iv(-8, 8)]
    cov = RF.Cover(amb, list(range(4)), boxes)
    p = F.tent_partition(cov)
    chain = RF.chain_from_countable(cov.with_partition(RF.mather(p)))
    return chain


class TestChainFromCountable:
    def test_two_member_supports(self):
        # weight (t, 1-t) by a tent so the members vanish outside (0,1);
        # the prefix supports are then A_0 = {f_0 > 0} = (0,1) = A_1
        T = F.Tent(G.Box([(Q(0), Q(1))]))
        t = F.Mul(F.Clamp01(F.Coord(1, 0)), T)
        u = F.Mul(F.Clamp01(F.Sub(F.Const(1, 1), F.Coord(1, 0))), T)
        p = F.PositivePartition([0, 1], [t, u], iv(0, 1))
        cov = RF.Cover(iv(0, 1), [0, 1], [G.FieldOpen(t), G.FieldOpen(u)], partition=p)
        chain = RF.chain_from_countable(cov)
        rng = random.Random(15)
        for _ in range(500):
            x = (Q(rng.randrange(-32, 96), 64),)
            assert chain.elements[0].contains(x) == (0 < x[0] < 1)
            assert chain.elements[1].contains(x) == (0 < x[0] < 1)

    def test_tent_chain_supports(self):
        amb = iv(-1, 2)
        cov = RF.Cover(amb, ["u", "v"], [iv(-1, 1), iv(0, 2)])
        cov = cov.with_partition(F.tent_partition(cov))
        chain = RF.chain_from_countable(cov)
        rng = random.Random(16)
        for _ in range(500):
            x = (Q(rng.randrange(-48, 48), 16),)
            assert chain.elements[0].contains(x) == (-1 < x[0] < 1)
            assert chain.elements[1].contains(x) == (-1 < x[0] < 2)

    def test_inclusions_tagged(self):
        chain = _tent_chain()
        assert "chain" in chain.tags
        plan = SamplePlan(G.Box([(Q(-9), Q(9))]), Q(1, 4), 200, 17)
        rep = chain.check(plan)
        assert rep.ok


def test_cover_check_reports_tiers():
    amb = iv(-1, 2)
    cov = RF.Cover(amb, ["u", "v"], [iv(-1, 1), iv(0, 2)])
    cov = cov.with_partition(F.tent_partition(cov))
    plan = SamplePlan(G.Box([(Q(-2), Q(3))]), Q(1, 8), 300, 19)
    rep = cov.check(plan)
    assert rep.ok
    names = [c.name for c in rep.checks]
    assert any("coverage" in n for n in names)
    assert any("compatibility" in n for n in names)


def test_cover_check_detects_gap():
    amb = iv(0, 2)
    cov = RF.Cover(amb, ["u", "v"], [iv(0, 1), iv(1, 2)])
    plan = SamplePlan(G.Box([(Q(0), Q(2))]), Q(1, 8), 100, 21)
    rep = cov.check(plan)
    assert not rep.ok
    assert rep.failures()[0].witness == (Q(1),)


def test_ensure_pou_idempotent():
    chain = _tent_chain()
    again = RF.ensure_pou(chain)
    assert again.partition is chain.partition
