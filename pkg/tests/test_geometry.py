import random

import pytest
from hypothesis import given, settings, strategies as st

from coverforge import geometry as G
from coverforge.fields import Tent
from coverforge.rationals import INF, NEG_INF, Q
from coverforge.sampling import SamplePlan


def interval(lo, hi):
    return G.BoxUnion(1, [G.Box([(Q(lo), Q(hi))])])


def test_interval_intersection_overlap():
    out = G.intersect(interval(0, 2), interval(1, 3))
    assert out.boxes == (G.Box([(Q(1), Q(2))]),)


def test_interval_intersection_separated():
    out = G.intersect(interval(0, 1), interval(2, 3))
    assert out.boxes == ()


def canonical_slabs_1d():
    U = G.Symbolic(1, [G.LatticeBoxFamily(G.Box([(Q(0), Q(3))]), [(0, Q(4))])])
    V = G.Symbolic(1, [G.LatticeBoxFamily(G.Box([(Q(2), Q(5))]), [(0, Q(4))])])
    return U, V


def test_canonical_slab_intersection_membership():
    # the slab intersection is a union of width-1 period-4 families; exact
    # membership must agree with pointwise conjunction
    U, V = canonical_slabs_1d()
    UV = G.intersect(U, V)
    for fam in UV.families:
        lo, hi = fam.base.ivs[0]
        assert hi - lo == 1
        assert fam.periods[0][1] == 4
    rng = random.Random(2)
    for _ in range(500):
        x = (Q(rng.randrange(-400, 400), 16),)
        assert UV.contains(x) == (U.contains(x) and V.contains(x))
    # the classical representative family (4j+2, 4j+3) is present
    assert any(fam.base.ivs[0] == (Q(2), Q(3)) for fam in UV.families)


def test_subset_interval_yes():
    v = G.subset_of(interval(0, 1), interval(0, 2))
    assert v.kind == "exact_yes"


def test_subset_interval_no_witness():
    v = G.subset_of(interval(0, 3), interval(0, 2))
    assert v.kind == "exact_no"
    assert v.witness == (Q(5, 2),)


def test_subset_field_refuted_by_sample():
    a = G.FieldOpen(Tent(G.Box([(Q(0), Q(1))])))
    b = interval(0, Q(1, 2))
    plan = SamplePlan(G.Box([(Q(-1), Q(2))]), Q(1, 8), 200, 3)
    v = G.subset_of(a, b, plan.window, plan)
    assert v.kind == "refuted"
    x = v.witness
    assert a.contains(x) and not b.contains(x)
    # the value the refutation rests on is an exact rational fact
    assert a.field.eval((Q(3, 4),)) == Q(1, 4)
    assert not b.contains((Q(3, 4),))


def test_covers_canonical_slabs():
    U, V = canonical_slabs_1d()
    window = G.Box([(Q(-10), Q(10))])
    plan = SamplePlan(window, Q(1, 4), 100, 5)
    v = G.covers([U, V], G.whole_space(1), window, plan)
    assert v.kind == "certified_window"


def test_covers_gap_refuted_at_point():
    window = G.Box([(Q(0), Q(2))])
    plan = SamplePlan(window, Q(1, 4), 100, 5)
    v = G.covers([interval(0, 1), interval(1, 2)], interval(0, 2), window, plan)
    assert v.kind == "refuted"
    assert v.witness == (Q(1),)


def test_covers_identity():
    window = G.Box([(Q(-5), Q(5)), (Q(-5), Q(5))])
    plan = SamplePlan(window, Q(1), 10, 1)
    v = G.covers([G.whole_space(2)], G.whole_space(2), window, plan)
    assert v.kind == "certified_window"


def _random_box_union(rng, max_boxes=3):
    boxes = []
    for _ in range(rng.randrange(1, max_boxes + 1)):
        a = Q(rng.randrange(-64, 60), 8)
        b = a + Q(rng.randrange(1, 40), 8)
        c = Q(rng.randrange(-64, 60), 8)
        d = c + Q(rng.randrange(1, 40), 8)
        boxes.append(G.Box([(a, b), (c, d)]))
    return G.BoxUnion(2, boxes)


def test_box_arithmetic_exactness_bulk():
    # membership in intersect(a, b) equals membership in a AND b
    rng = random.Random(11)
    for _ in range(10):
        a = _random_box_union(rng)
        b = _random_box_union(rng)
        ab = G.intersect(a, b)
        for _ in range(1000):
            x = (Q(rng.randrange(-80, 80), 8), Q(rng.randrange(-80, 80), 8))
            assert ab.contains(x) == (a.contains(x) and b.contains(x))


def test_subset_soundness_never_contradicted():
    rng = random.Random(13)
    window = G.Box([(Q(-9), Q(9)), (Q(-9), Q(9))])
    for _ in range(20):
        a = _random_box_union(rng)
        b = _random_box_union(rng)
        v = G.subset_of(a, b)
        pts = [
            (Q(rng.randrange(-80, 80), 8), Q(rng.randrange(-80, 80), 8))
            for _ in range(500)
        ]
        if v.is_yes:
            assert not any(a.contains(x) and not b.contains(x) for x in pts)
        else:
            assert a.contains(v.witness) and not b.contains(v.witness)


def test_lattice_enumeration_complete():
    fam = G.LatticeBoxFamily(G.Box([(Q(-1), Q(1)), (NEG_INF, INF)]), [(0, Q(3))])
    window = G.Box([(Q(-10), Q(10)), (Q(-10), Q(10))])
    instances = [inst for _, inst in fam.instances_meeting(window)]
    rng = random.Random(7)
    sym = G.Symbolic(2, [fam])
    for _ in range(2000):
        x = (Q(rng.randrange(-160, 160), 16), Q(rng.randrange(-160, 160), 16))
        if sym.contains(x):
            assert any(inst.contains(x) for inst in instances)


@given(
    st.integers(-40, 40),
    st.integers(1, 40),
    st.integers(-40, 40),
    st.integers(1, 40),
)
@settings(max_examples=150, deadline=None)
def test_gbox_subtract_partition(a0, aw, b0, bw):
    # every witness point of a difference lies in a and not in b
    a = (G.giv(Q(a0), Q(a0 + aw), True, True),)
    b = (G.giv(Q(b0), Q(b0 + bw), True, True),)
    pieces = G.gbox_subtract(a, b)
    for piece in pieces:
        x = G.gbox_point(piece)
        assert Q(a0) < x[0] < Q(a0 + aw)
        assert not (Q(b0) < x[0] < Q(b0 + bw))


def test_degenerate_box_rejected():
    with pytest.raises(G.GeometryError):
        G.Box([(Q(1), Q(1))])


def test_dimension_mismatch():
    with pytest.raises(G.DimensionMismatch):
        G.intersect(interval(0, 1), G.whole_space(2))


def test_openset_json_roundtrip():
    U, V = canonical_slabs_1d()
    for s in [U, V, interval(0, 2), G.empty_set(3), G.whole_space(2)]:
        data = G.openset_to_json(s)
        back = G.openset_from_json(data)
        assert back == s


def test_unbounded_box_json():
    b = G.Box([(NEG_INF, Q(1)), (Q(0), INF)])
    assert G.box_from_json(G.box_to_json(b)) == b
