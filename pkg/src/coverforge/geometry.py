"""Exact and symbolic open subsets of R^n.

Three backends:

* ``BoxUnion`` -- finite unions of open axis-aligned boxes with rational
  (or infinite) endpoints.  All set operations are exact, implemented on a
  small region engine over *generalized* boxes whose facets carry
  open/closed flags, so that measure-zero gaps (e.g. the point 1 between
  (0,1) and (1,2)) are detected and witnessed.
* ``Symbolic`` -- finitely many lattice-translated box families plus
  finitely many plain boxes.  Families are locally finite by construction:
  each integer index coordinate translates exactly one axis by a nonzero
  rational step, and the translated axis has finite width.  Window
  enumeration is therefore finite and complete.
* ``FieldOpen`` -- the strict positivity set {h > 0} of a continuous
  nonnegative scalar field.  Questions about these sets are answered by
  branch-and-bound over interval/Lipschitz bounds (certified on a window)
  or by sampling (refutation only), never claimed exact.

Verification verdicts are stratified accordingly: EXACT answers come only
from box arithmetic, CERTIFIED answers hold on the inspected window, and
HEURISTIC answers merely record that sampling found no counterexample.
"""

from dataclasses import dataclass
from typing import Optional

from .rationals import (
    INF,
    NEG_INF,
    Q,
    format_q,
    is_finite,
    parse_q,
    q_ceil,
    q_floor,
)


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class UnsupportedOperation(GeometryError):
    """Raised where an operand combination has no implemented exact form."""


# ---------------------------------------------------------------------------
# open boxes


class Box:
    """Open axis-aligned box; per-axis (lo, hi) with lo < hi, ends open.

    Finite endpoints are exact rationals; +-inf endpoints are permitted.
    Empty boxes are not representable -- the empty set is BoxUnion([]).
    """

    __slots__ = ("ivs",)

    def __init__(self, ivs):
        ivs = tuple(
            (lo if not is_finite(lo) else Q(lo), hi if not is_finite(hi) else Q(hi))
            for lo, hi in ivs
        )
        for lo, hi in ivs:
            if not lo < hi:
                raise GeometryError("degenerate box interval [%s, %s]" % (lo, hi))
        self.ivs = ivs

    @property
    def dim(self):
        return len(self.ivs)

    def __eq__(self, other):
        return isinstance(other, Box) and self.ivs == other.ivs

    def __hash__(self):
        return hash(self.ivs)

    def __repr__(self):
        parts = "x".join(
            "(%s,%s)" % (format_q(lo), format_q(hi)) for lo, hi in self.ivs
        )
        return "Box[%s]" % parts

    def contains(self, x):
        return all(lo < xi < hi for (lo, hi), xi in zip(self.ivs, x))

    def is_bounded(self):
        return all(is_finite(lo) and is_finite(hi) for lo, hi in self.ivs)

    def widths(self):
        return [
            hi - lo if is_finite(lo) and is_finite(hi) else INF
            for lo, hi in self.ivs
        ]

    def intersect(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch()
        ivs = []
        for (alo, ahi), (blo, bhi) in zip(self.ivs, other.ivs):
            lo, hi = max(alo, blo), min(ahi, bhi)
            if not lo < hi:
                return None
            ivs.append((lo, hi))
        return Box(ivs)

    def contains_box(self, other):
        return all(
            alo <= blo and bhi <= ahi
            for (alo, ahi), (blo, bhi) in zip(self.ivs, other.ivs)
        )

    def translate(self, offset):
        return Box(
            [
                (lo if not is_finite(lo) else lo + o, hi if not is_finite(hi) else hi + o)
                for (lo, hi), o in zip(self.ivs, offset)
            ]
        )

    def interior_point(self):
        """Some rational point inside the box."""
        pt = []
        for lo, hi in self.ivs:
            if is_finite(lo) and is_finite(hi):
                pt.append((lo + hi) / 2)
            elif is_finite(lo):
                pt.append(lo + 1)
            elif is_finite(hi):
                pt.append(hi - 1)
            else:
                pt.append(Q(0))
        return tuple(pt)

    def split(self):
        """Bisect along the widest axis (bounded axes only)."""
        widths = self.widths()
        axis = max(range(self.dim), key=lambda j: widths[j])
        lo, hi = self.ivs[axis]
        mid = (lo + hi) / 2
        left = list(self.ivs)
        right = list(self.ivs)
        left[axis] = (lo, mid)
        right[axis] = (mid, hi)
        return Box(left), Box(right)


def full_box(dim):
    return Box([(NEG_INF, INF)] * dim)


# ---------------------------------------------------------------------------
# region engine: generalized boxes with open/closed facets
#
# A GIv is (lo, hi, lo_open, hi_open); empty iff lo > hi or lo == hi with an
# open end.  Point intervals [a, a] are legal, which is what lets subtraction
# of open boxes expose measure-zero gaps.

GIv = tuple


def giv(lo, hi, lo_open, hi_open):
    return (lo, hi, lo_open, hi_open)


def giv_is_empty(iv):
    lo, hi, lo_open, hi_open = iv
    if lo > hi:
        return True
    if lo == hi and (lo_open or hi_open):
        return True
    return False


def giv_intersect(a, b):
    alo, ahi, alo_o, ahi_o = a
    blo, bhi, blo_o, bhi_o = b
    if alo > blo:
        lo, lo_o = alo, alo_o
    elif blo > alo:
        lo, lo_o = blo, blo_o
    else:
        lo, lo_o = alo, alo_o or blo_o
    if ahi < bhi:
        hi, hi_o = ahi, ahi_o
    elif bhi < ahi:
        hi, hi_o = bhi, bhi_o
    else:
        hi, hi_o = ahi, ahi_o or bhi_o
    iv = (lo, hi, lo_o, hi_o)
    return None if giv_is_empty(iv) else iv


def gbox_is_empty(gb):
    return any(giv_is_empty(iv) for iv in gb)


def gbox_intersect(a, b):
    out = []
    for x, y in zip(a, b):
        iv = giv_intersect(x, y)
        if iv is None:
            return None
        out.append(iv)
    return tuple(out)


def gbox_subtract(a, b):
    """a \\ b as a list of disjoint generalized boxes."""
    if gbox_intersect(a, b) is None:
        return [a]
    pieces = []
    mid_prefix = []
    for axis, (aiv, biv) in enumerate(zip(a, b)):
        alo, ahi, alo_o, ahi_o = aiv
        blo, bhi, blo_o, bhi_o = biv
        # part of a strictly left of b on this axis
        left = giv_intersect(aiv, (NEG_INF, blo, True, not blo_o))
        if left is not None:
            pieces.append(tuple(mid_prefix + [left] + list(a[axis + 1 :])))
        right = giv_intersect(aiv, (bhi, INF, not bhi_o, True))
        if right is not None:
            pieces.append(tuple(mid_prefix + [right] + list(a[axis + 1 :])))
        mid = giv_intersect(aiv, biv)
        if mid is None:
            break
        mid_prefix.append(mid)
    return pieces


def region_subtract(region, gboxes):
    """Subtract each generalized box from every piece of the region."""
    for b in gboxes:
        nxt = []
        for piece in region:
            nxt.extend(gbox_subtract(piece, b))
        region = nxt
        if not region:
            break
    return region


def gbox_point(gb):
    """A rational point inside a nonempty generalized box."""
    pt = []
    for lo, hi, lo_o, hi_o in gb:
        if lo == hi:
            pt.append(lo)
        elif is_finite(lo) and is_finite(hi):
            pt.append((lo + hi) / 2)
        elif is_finite(lo):
            pt.append(lo + 1)
        elif is_finite(hi):
            pt.append(hi - 1)
        else:
            pt.append(Q(0))
    return tuple(pt)


def gbox_dist_sq(x, gb):
    """Squared distance from point x to the closure of a generalized box."""
    total = Q(0)
    for xi, (lo, hi, _, _) in zip(x, gb):
        if is_finite(lo) and xi < lo:
            total += (lo - xi) ** 2
        elif is_finite(hi) and xi > hi:
            total += (xi - hi) ** 2
    return total


def box_to_gbox(box):
    return tuple(giv(lo, hi, True, True) for lo, hi in box.ivs)


# ---------------------------------------------------------------------------
# lattice box families


class LatticeBoxFamily:
    """Integer-translated family of a template box.

    Index coordinate t in 0..arity-1 translates axis ``periods[t][0]`` by
    ``periods[t][1] * m_t``.  Axes are distinct per index coordinate and
    the template is finite on each translated axis, which makes the family
    locally finite: any bounded window meets finitely many instances.
    """

    __slots__ = ("base", "periods")

    def __init__(self, base, periods):
        periods = tuple((int(axis), Q(step)) for axis, step in periods)
        axes = [axis for axis, _ in periods]
        if len(set(axes)) != len(axes):
            raise GeometryError("one axis driven by two index coordinates")
        for axis, step in periods:
            if not (0 <= axis < base.dim):
                raise GeometryError("period axis out of range")
            if step == 0:
                raise GeometryError("zero lattice period")
            lo, hi = base.ivs[axis]
            if not (is_finite(lo) and is_finite(hi)):
                raise GeometryError("translated axis must have finite width")
        self.base = base
        self.periods = periods

    @property
    def dim(self):
        return self.base.dim

    @property
    def arity(self):
        return len(self.periods)

    def __eq__(self, other):
        return (
            isinstance(other, LatticeBoxFamily)
            and self.base == other.base
            and self.periods == other.periods
        )

    def __hash__(self):
        return hash((self.base, self.periods))

    def __repr__(self):
        return "LatticeBoxFamily(%r, periods=%r)" % (self.base, self.periods)

    def offset(self, m):
        off = [Q(0)] * self.dim
        for (axis, step), mt in zip(self.periods, m):
            off[axis] = step * mt
        return off

    def instance(self, m):
        return self.base.translate(self.offset(m))

    def index_ranges(self, window, closed=False):
        """Per-coordinate integer ranges whose instances meet the window."""
        ranges = []
        for axis, step in self.periods:
            lo, hi = self.base.ivs[axis]
            wlo, whi = window.ivs[axis]
            if not (is_finite(wlo) and is_finite(whi)):
                raise GeometryError("window must be bounded on translated axes")
            # lo + step*m < whi and hi + step*m > wlo  (or <=, >= if closed)
            if step > 0:
                m_hi = (whi - lo) / step
                m_lo = (wlo - hi) / step
            else:
                m_hi = (wlo - hi) / step
                m_lo = (whi - lo) / step
            if closed:
                lo_i, hi_i = q_ceil(m_lo), q_floor(m_hi)
            else:
                lo_i = q_floor(m_lo) + 1
                hi_i = q_ceil(m_hi) - 1
            ranges.append(range(lo_i, hi_i + 1))
        return ranges

    def instances_meeting(self, window, closed=False):
        """All (m, instance) whose instance meets the (bounded) window."""
        out = []

        def rec(prefix, ranges):
            if not ranges:
                m = tuple(prefix)
                out.append((m, self.instance(m)))
                return
            for v in ranges[0]:
                rec(prefix + [v], ranges[1:])

        rec([], self.index_ranges(window, closed=closed))
        return out

    def contains(self, x):
        for axis, step in self.periods:
            lo, hi = self.base.ivs[axis]
            # need lo + step*m < x_ax < hi + step*m for an integer m
            t_lo = (x[axis] - hi) / step
            t_hi = (x[axis] - lo) / step
            if step < 0:
                t_lo, t_hi = t_hi, t_lo
            # integer strictly inside (t_lo, t_hi)
            m = q_floor(t_hi)
            if m == t_hi:
                m -= 1
            if not m > t_lo:
                return False
        # non-translated axes must match the template directly
        translated = {axis for axis, _ in self.periods}
        for axis in range(self.dim):
            if axis in translated:
                continue
            lo, hi = self.base.ivs[axis]
            if not lo < x[axis] < hi:
                return False
        return True

    def translate(self, offset):
        return LatticeBoxFamily(self.base.translate(offset), self.periods)


# ---------------------------------------------------------------------------
# open sets


class OpenSet:
    dim = None

    def contains(self, x):
        raise NotImplementedError


class BoxUnion(OpenSet):
    """Finite union of open boxes; the canonical exact backend."""

    __slots__ = ("dim", "boxes")

    def __init__(self, dim, boxes=()):
        boxes = tuple(boxes)
        for b in boxes:
            if b.dim != dim:
                raise DimensionMismatch()
        self.dim = dim
        self.boxes = boxes

    def __repr__(self):
        return "BoxUnion(%d, %r)" % (self.dim, list(self.boxes))

    def __eq__(self, other):
        return (
            isinstance(other, BoxUnion)
            and self.dim == other.dim
            and self.boxes == other.boxes
        )

    def __hash__(self):
        return hash((self.dim, self.boxes))

    def contains(self, x):
        return any(b.contains(x) for b in self.boxes)

    def is_empty_obviously(self):
        return not self.boxes

    def gboxes(self):
        return [box_to_gbox(b) for b in self.boxes]


class Symbolic(OpenSet):
    """Union of lattice box families with finitely many extra boxes."""

    __slots__ = ("dim", "families", "boxes")

    def __init__(self, dim, families=(), boxes=()):
        families = tuple(families)
        boxes = tuple(boxes)
        for f in families:
            if f.dim != dim:
                raise DimensionMismatch()
        for b in boxes:
            if b.dim != dim:
                raise DimensionMismatch()
        self.dim = dim
        self.families = families
        self.boxes = boxes

    def __repr__(self):
        return "Symbolic(%d, %r, %r)" % (self.dim, list(self.families), list(self.boxes))

    def __eq__(self, other):
        return (
            isinstance(other, Symbolic)
            and self.dim == other.dim
            and frozenset(self.families) == frozenset(other.families)
            and frozenset(self.boxes) == frozenset(other.boxes)
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.families), frozenset(self.boxes)))

    def contains(self, x):
        return any(f.contains(x) for f in self.families) or any(
            b.contains(x) for b in self.boxes
        )

    def materialize(self, window, closed=False):
        """Finite BoxUnion of all constituents meeting the bounded window."""
        boxes = [b for b in self.boxes if b.intersect(window) is not None]
        for f in self.families:
            boxes.extend(inst for _, inst in f.instances_meeting(window, closed=closed))
        return BoxUnion(self.dim, boxes)


class FieldOpen(OpenSet):
    """{x : h(x) > 0} for a continuous nonnegative scalar field h."""

    __slots__ = ("field",)

    def __init__(self, field):
        if not field.is_nonneg():
            raise GeometryError("FieldOpen needs a nonnegative field")
        self.field = field

    @property
    def dim(self):
        return self.field.dim

    def __repr__(self):
        return "FieldOpen(%r)" % (self.field,)

    def contains(self, x):
        return self.field.eval(x) > 0


def empty_set(dim):
    return BoxUnion(dim, ())


def whole_space(dim):
    return BoxUnion(dim, (full_box(dim),))


def open_set_kind(s):
    if isinstance(s, BoxUnion):
        return "boxes"
    if isinstance(s, Symbolic):
        return "symbolic"
    if isinstance(s, FieldOpen):
        return "field"
    raise GeometryError("unknown open set %r" % (s,))


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class SubsetVerdict:
    kind: str  # exact_yes | exact_no | certified_window | refuted | inconclusive
    witness: Optional[tuple] = None

    @property
    def is_yes(self):
        return self.kind in ("exact_yes", "certified_window")

    @property
    def is_no(self):
        return self.kind in ("exact_no", "refuted")


@dataclass(frozen=True)
class CoverVerdict:
    kind: str  # certified_window | refuted | inconclusive
    witness: Optional[tuple] = None
    samples: int = 0


# ---------------------------------------------------------------------------
# intersection


def _indicator_field(s):
    # lazy import: fields builds on geometry
    from . import fields

    return fields.indicator_of(s)


def intersect(a, b):
    """Set-theoretic intersection of two open sets of equal dimension.

    BoxUnion x BoxUnion is exact; Symbolic operands stay symbolic when the
    lattice structure permits (equal periods on a shared axis, or a box
    operand that is either unbounded across all translated axes or bounded
    so the family materializes finitely); any FieldOpen operand produces
    FieldOpen(min) over indicator-compatible fields.
    """
    if a.dim != b.dim:
        raise DimensionMismatch()
    if isinstance(a, FieldOpen) or isinstance(b, FieldOpen):
        from . import fields

        return FieldOpen(fields.MinOf([_indicator_field(a), _indicator_field(b)]))
    if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
        out = []
        for x in a.boxes:
            for y in b.boxes:
                z = x.intersect(y)
                if z is not None:
                    out.append(z)
        return BoxUnion(a.dim, out)
    # at least one Symbolic
    if isinstance(a, BoxUnion):
        a, b = b, a
    if isinstance(b, BoxUnion):
        fams, boxes = [], []
        for box in b.boxes:
            for base in a.boxes:
                z = base.intersect(box)
                if z is not None:
                    boxes.append(z)
            for fam in a.families:
                fams_, boxes_ = _family_intersect_box(fam, box)
                fams.extend(fams_)
                boxes.extend(boxes_)
        return Symbolic(a.dim, fams, boxes) if fams else BoxUnion(a.dim, boxes)
    # Symbolic x Symbolic
    fams, boxes = [], []
    for box in b.boxes:
        part = intersect(a, BoxUnion(a.dim, [box]))
        fams.extend(getattr(part, "families", ()))
        boxes.extend(part.boxes)
    for fam in b.families:
        for base in a.boxes:
            fams_, boxes_ = _family_intersect_box(fam, base)
            fams.extend(fams_)
            boxes.extend(boxes_)
        for fam2 in a.families:
            fams.extend(_family_intersect_family(fam2, fam))
    return Symbolic(a.dim, fams, boxes)


def _family_intersect_box(fam, box):
    """Family cap box -> (families, boxes)."""
    unbounded_on_periods = all(
        not is_finite(box.ivs[axis][0]) and not is_finite(box.ivs[axis][1])
        for axis, _ in fam.periods
    )
    if unbounded_on_periods:
        z = fam.base.intersect(box)
        return ([LatticeBoxFamily(z, fam.periods)], []) if z is not None else ([], [])
    bounded_on_periods = all(
        is_finite(box.ivs[axis][0]) and is_finite(box.ivs[axis][1])
        for axis, _ in fam.periods
    )
    if bounded_on_periods:
        out = []
        for _, inst in fam.instances_meeting(box):
            z = inst.intersect(box)
            if z is not None:
                out.append(z)
        return [], out
    raise UnsupportedOperation(
        "box operand must be bounded or unbounded across each translated axis"
    )


def _family_intersect_family(fa, fb):
    """Exact intersection of two families sharing period structure."""
    if fa.periods != fb.periods:
        raise UnsupportedOperation("lattice families with different periods")
    # relative integer shift s: base_a cap (base_b + s*steps), finitely many
    out = []
    shift_ranges = []
    for axis, step in fa.periods:
        alo, ahi = fa.base.ivs[axis]
        blo, bhi = fb.base.ivs[axis]
        # need alo < bhi + step*s and blo + step*s < ahi
        if step > 0:
            s_lo, s_hi = (alo - bhi) / step, (ahi - blo) / step
        else:
            s_lo, s_hi = (ahi - blo) / step, (alo - bhi) / step
        shift_ranges.append(range(q_floor(s_lo) + 1, q_ceil(s_hi)))

    def rec(prefix, rest):
        if not rest:
            z = fa.base.intersect(fb.instance(prefix))
            if z is not None:
                out.append(LatticeBoxFamily(z, fa.periods))
            return
        for s in rest[0]:
            rec(prefix + [s], rest[1:])

    rec([], shift_ranges)
    return out


# ---------------------------------------------------------------------------
# subset tests


def _as_boxes_on(s, window, closed=False):
    if isinstance(s, BoxUnion):
        return s
    if isinstance(s, Symbolic):
        return s.materialize(window, closed=closed)
    raise UnsupportedOperation("not a box-backed set")


def subset_of(a, b, window=None, plan=None):
    """Decide a <= b.  Exact verdicts come only from box arithmetic;
    FieldOpen operands get branch-and-bound (certified on the window) or
    sampling (refutation / inconclusive)."""
    if a.dim != b.dim:
        raise DimensionMismatch()
    box_a = isinstance(a, (BoxUnion, Symbolic))
    box_b = isinstance(b, (BoxUnion, Symbolic))
    if box_a and box_b:
        if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
            diff = region_subtract([box_to_gbox(x) for x in a.boxes], BoxUnion.gboxes(b))
            if not diff:
                return SubsetVerdict("exact_yes")
            return SubsetVerdict("exact_no", witness=gbox_point(diff[0]))
        if window is None:
            raise GeometryError("symbolic subset test needs a window")
        am = _as_boxes_on(a, window)
        clipped = [box_to_gbox(x.intersect(window)) for x in am.boxes if x.intersect(window)]
        bm = _as_boxes_on(b, window, closed=True)
        diff = region_subtract(clipped, bm.gboxes())
        if not diff:
            return SubsetVerdict("certified_window")
        return SubsetVerdict("exact_no", witness=gbox_point(diff[0]))
    if window is None or plan is None:
        raise GeometryError("field subset test needs window and budget")
    return _bb_subset(a, b, window, plan)


def _field_bounds_on(s, cell):
    """Range of the defining field on a cell, or membership-derived bounds."""
    if isinstance(s, FieldOpen):
        return s.field.bounds(cell)
    raise UnsupportedOperation


def _cell_inside(s, cell):
    """True if the whole open cell certainly lies inside s."""
    if isinstance(s, (BoxUnion, Symbolic)):
        v = subset_of(BoxUnion(cell.dim, [cell]), s, window=cell, plan=None)
        return v.is_yes
    lo, _ = s.field.bounds(cell)
    return lo > 0


def _cell_outside(s, cell):
    """True if the open cell certainly misses s."""
    if isinstance(s, (BoxUnion, Symbolic)):
        m = s if isinstance(s, BoxUnion) else s.materialize(cell, closed=True)
        return all(cell.intersect(b) is None for b in m.boxes)
    _, hi = s.field.bounds(cell)
    return hi <= 0


def _bb_subset(a, b, window, plan):
    min_width = plan.step
    queue = [window]
    pending = []
    iterations = 0
    cap = plan.cell_cap
    while queue:
        iterations += 1
        if iterations > cap:
            pending.append(queue.pop())
            continue
        cell = queue.pop()
        if _cell_outside(a, cell):
            continue
        if _cell_inside(b, cell):
            continue
        if max(w for w in cell.widths()) > min_width:
            queue.extend(cell.split())
        else:
            pending.append(cell)
    if not pending:
        return SubsetVerdict("certified_window")
    # sampling refutation pass over undecided cells and the global plan
    for x in plan.points():
        if a.contains(x) and not b.contains(x):
            return SubsetVerdict("refuted", witness=x)
    for cell in pending[: plan.count]:
        x = cell.interior_point()
        if a.contains(x) and not b.contains(x):
            return SubsetVerdict("refuted", witness=x)
    return SubsetVerdict("inconclusive")


# ---------------------------------------------------------------------------
# coverage


def covers(members, ambient, window, plan):
    """Does the union of members cover ambient (within the window)?

    Box-backed inputs are decided by exact region arithmetic (reported as
    certified-on-window, with exact witnesses on refutation).  FieldOpen
    inputs use branch-and-bound on the member fields, falling back to
    sample refutation.
    """
    if window is None or not window.is_bounded():
        raise GeometryError("coverage check needs a bounded window")
    for m in members:
        if m.dim != ambient.dim:
            raise DimensionMismatch()
    box_members = all(isinstance(m, (BoxUnion, Symbolic)) for m in members)
    box_ambient = isinstance(ambient, (BoxUnion, Symbolic))
    if box_members and box_ambient:
        amb = _as_boxes_on(ambient, window)
        remaining = []
        for x in amb.boxes:
            z = x.intersect(window)
            if z is not None:
                remaining.append(box_to_gbox(z))
        for m in members:
            if not remaining:
                break
            mm = _as_boxes_on(m, window, closed=True)
            remaining = region_subtract(remaining, mm.gboxes())
        if not remaining:
            return CoverVerdict("certified_window")
        return CoverVerdict("refuted", witness=gbox_point(remaining[0]))
    return _bb_covers(members, ambient, window, plan)


def _bb_covers(members, ambient, window, plan):
    min_width = plan.step
    queue = [window]
    pending = []
    iterations = 0
    cap = plan.cell_cap
    while queue:
        iterations += 1
        if iterations > cap:
            pending.extend(queue)
            break
        cell = queue.pop()
        if _cell_outside(ambient, cell):
            continue
        if any(_cell_inside(m, cell) for m in members):
            continue
        if max(w for w in cell.widths()) > min_width:
            queue.extend(cell.split())
        else:
            pending.append(cell)
    if not pending:
        return CoverVerdict("certified_window")
    checked = 0
    for x in plan.points():
        if ambient.contains(x):
            checked += 1
            if not any(m.contains(x) for m in members):
                return CoverVerdict("refuted", witness=x, samples=checked)
    for cell in pending[: plan.count]:
        x = cell.interior_point()
        if ambient.contains(x) and not any(m.contains(x) for m in members):
            return CoverVerdict("refuted", witness=x, samples=checked)
    return CoverVerdict("inconclusive", samples=checked)


# ---------------------------------------------------------------------------
# JSON encoding (rationals as strings, infinities as "+inf"/"-inf")


def box_to_json(box):
    return [[format_q(lo), format_q(hi)] for lo, hi in box.ivs]


def box_from_json(data):
    return Box([(parse_q(lo), parse_q(hi)) for lo, hi in data])


def family_to_json(fam):
    return {
        "template": box_to_json(fam.base),
        "index_arity": fam.arity,
        "periods": [{"axis": axis, "step": format_q(step)} for axis, step in fam.periods],
    }


def family_from_json(data):
    return LatticeBoxFamily(
        box_from_json(data["template"]),
        [(p["axis"], parse_q(p["step"])) for p in data["periods"]],
    )


def openset_to_json(s):
    if isinstance(s, BoxUnion):
        return {"dim": s.dim, "boxes": [box_to_json(b) for b in s.boxes]}
    if isinstance(s, Symbolic):
        return {
            "dim": s.dim,
            "boxes": [box_to_json(b) for b in s.boxes],
            "families": [family_to_json(f) for f in s.families],
        }
    if isinstance(s, FieldOpen):
        from . import fields

        return {"dim": s.dim, "field": fields.field_to_json(s.field)}
    raise GeometryError("unknown open set")


def openset_from_json(data):
    dim = data["dim"]
    if "field" in data:
        from . import fields

        return FieldOpen(fields.field_from_json(data["field"]))
    boxes = [box_from_json(b) for b in data.get("boxes", [])]
    if data.get("families"):
        return Symbolic(dim, [family_from_json(f) for f in data["families"]], boxes)
    return BoxUnion(dim, boxes)
