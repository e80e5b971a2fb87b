import random

import pytest

from coverforge import fields as F
from coverforge import geometry as G
from coverforge.rationals import Q, sqrt_upper


def box1(lo, hi):
    return G.Box([(Q(lo), Q(hi))])


def iv(lo, hi):
    return G.BoxUnion(1, [box1(lo, hi)])


def test_eval_const():
    assert F.Const(1, 1).eval((Q(7),)) == 1


def test_eval_tent_center():
    assert F.Tent(box1(0, 1)).eval((Q(1, 2),)) == Q(1, 2)


def test_eval_tent_capped():
    assert F.Tent(box1(0, 4)).eval((Q(2),)) == 1


def test_eval_lattice_sum_of_tents():
    fam = G.LatticeBoxFamily(box1(-1, 1), [(0, Q(1))])
    f = F.LatticeSum(fam, F.Tent(box1(-1, 1)))
    # two active translates: tent(-1,1) gives 3/4, tent(0,2) gives 1/4
    assert f.eval((Q(1, 4),)) == 1
    assert F.Tent(box1(-1, 1)).eval((Q(1, 4),)) == Q(3, 4)
    assert F.Tent(box1(0, 2)).eval((Q(1, 4),)) == Q(1, 4)


def _field_corpus():
    t1 = F.Tent(box1(0, 2))
    t2 = F.Tent(box1(1, 4))
    t3 = F.Tent(G.Box([(Q(-3), Q(-1))]))
    fam = G.LatticeBoxFamily(box1(-1, 1), [(0, Q(2))])
    return [
        t1,
        F.Add([t1, t2, t3]),
        F.MinOf([t1, t2]),
        F.MaxOf([t1, t2, t3]),
        F.pos_sub(t1, t2),
        F.Mul(t1, t2),
        F.Clamp01(F.Sub(F.Const(1, 1), F.Coord(1, 0))),
        F.LatticeSum(fam, F.Tent(box1(-1, 1))),
        F.Div(F.pos_sub(t1, t2), F.Add([F.pos_sub(t1, t2), t2])),
    ]


def test_lipschitz_soundness():
    # |f(x) - f(y)| <= L ||x - y|| compared exactly via squares
    rng = random.Random(23)
    cell = box1(-5, 5)
    for f in _field_corpus():
        L = f.lipschitz(cell)
        if L is None:
            continue
        for _ in range(1200):
            x = (Q(rng.randrange(-80, 80), 16),)
            y = (Q(rng.randrange(-80, 80), 16),)
            d = f.eval(x) - f.eval(y)
            assert d * d <= L * L * (x[0] - y[0]) ** 2


def test_range_soundness():
    rng = random.Random(29)
    for f in _field_corpus():
        for _ in range(40):
            a = Q(rng.randrange(-96, 80), 16)
            w = Q(rng.randrange(1, 64), 16)
            cell = box1(a, a + w)
            lo, hi = f.bounds(cell)
            for _ in range(25):
                x = (a + w * Q(rng.randrange(1, 64), 64),)
                v = f.eval(x)
                assert lo <= v <= hi


def test_tent_partition_compatibility_exact():
    amb = iv(-1, 2)
    elements = [iv(-1, 1), iv(0, 2)]
    cover = type("C", (), {"labels": ["a", "b"], "elements": elements, "ambient": amb})
    p = F.tent_partition(cover)
    rng = random.Random(31)
    for _ in range(2000):
        x = (Q(rng.randrange(-64, 64), 16),)
        for f, target in zip(p.members, p.targets):
            if f.eval(x) > 0:
                assert target.contains(x)


def test_tent_partition_rejects_field_elements():
    amb = iv(0, 1)
    felt = G.FieldOpen(F.Tent(box1(0, 1)))
    cover = type("C", (), {"labels": ["a"], "elements": [felt], "ambient": amb})
    with pytest.raises(F.FieldError, match="unsupported"):
        F.tent_partition(cover)


def test_partial_sum_singleton_and_empty():
    t = F.Clamp01(F.Coord(1, 0))
    u = F.Clamp01(F.Sub(F.Const(1, 1), F.Coord(1, 0)))
    p = F.PositivePartition([0, 1], [t, u], iv(0, 1))
    assert F.partial_sum(p, lambda i: i % 2 == 0) is t
    empty = F.partial_sum(p, lambda i: i > 5)
    assert isinstance(empty, F.Const) and empty.value == 0


def test_partial_sum_pair():
    amb = iv(-1, 2)
    elements = [iv(-1, 1), iv(0, 2)]
    cover = type("C", (), {"labels": [0, 1], "elements": elements, "ambient": amb})
    p = F.tent_partition(cover)
    g1 = F.partial_sum(p, lambda i: i <= 1)
    assert g1.eval((Q(1, 4),)) == 1


def test_interning_dedupes_equal_trees():
    a = F.Add([F.Tent(box1(0, 1)), F.Const(1, 2)])
    b = F.Add([F.Tent(box1(0, 1)), F.Const(1, 2)])
    assert a is b


def test_div_outside_denominator_support_is_zero():
    t = F.Tent(box1(0, 1))
    g = F.Div(t, t)
    assert g.eval((Q(1, 2),)) == 1
    assert g.eval((Q(5),)) == 0
    lo, hi = g.bounds(box1(-10, 10))
    assert lo >= 0 and hi <= 1


def test_nonneg_structure():
    t = F.Tent(box1(0, 1))
    assert t.is_nonneg()
    assert not F.Sub(t, t).is_nonneg()
    assert F.pos_sub(t, t).is_nonneg()
    assert not F.Coord(1, 0).is_nonneg()


def test_tent_lipschitz_scales_with_finite_axes():
    t = F.Tent(G.Box([(Q(0), Q(1)), (Q(0), Q(1)), (Q(0), Q(1))]))
    cell = G.Box([(Q(-1), Q(2))] * 3)
    assert t.lipschitz(cell) >= sqrt_upper(Q(3), 20) - Q(1, 1000)


def test_field_json_roundtrip():
    for f in _field_corpus():
        data = F.field_to_json(f)
        back = F.field_from_json(data)
        assert back is f  # interning makes the roundtrip identity


def test_support_subset_rules():
    t1 = F.Tent(box1(0, 2))
    t2 = F.Tent(box1(1, 4))
    assert F.support_subset(t1, iv(0, 2)) is True
    assert F.support_subset(t1, iv(0, 1)) is None
    s = F.Add([t1, t2])
    assert F.support_subset(s, iv(0, 4)) is True
    assert F.support_subset(F.pos_sub(t1, t2), iv(0, 2)) is True
    # {min > 0} lies inside each factor's region
    assert F.support_subset(F.MinOf([t1, t2]), iv(1, 4)) is True
    # target-side sum decomposition
    target = G.FieldOpen(F.Add([t1, t2]))
    assert F.support_subset(t1, target) is True
