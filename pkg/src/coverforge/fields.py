"""Expression trees for continuous nonnegative scalar functions on R^n.

Every node supports exact rational point evaluation, conservative interval
range bounds over a box, and (where meaningful) a Lipschitz-constant bound
over a bounded box.  Continuity is structural: subtraction only ever
reaches partitions inside max(0, .) guards, and division only appears as
the normalization N/D with 0 <= N <= D pointwise, evaluated as 0 where the
denominator vanishes (so the value is continuous on {D > 0}, which always
contains the ambient set the field is used on).

The partition machinery lives here as well: tent partitions for box
covers, positivity/compatibility verification, and partial sums.
"""

from .geometry import (
    Box,
    BoxUnion,
    FieldOpen,
    GeometryError,
    LatticeBoxFamily,
    Symbolic,
    box_from_json,
    box_to_json,
    family_from_json,
    family_to_json,
)
from .plfun import PLFunction
from .rationals import INF, NEG_INF, Q, format_q, is_finite, parse_q, sqrt_lower, sqrt_upper


class FieldError(ValueError):
    pass


class FieldEvalError(FieldError):
    """Exact evaluation impossible at this point (irrational value)."""


# interval helpers that never do arithmetic on the inf sentinels


def _iv_add(a, b):
    (alo, ahi), (blo, bhi) = a, b
    lo = NEG_INF if not (is_finite(alo) and is_finite(blo)) else alo + blo
    hi = INF if not (is_finite(ahi) and is_finite(bhi)) else ahi + bhi
    return lo, hi


def _iv_neg(a):
    lo, hi = a
    return (-hi if is_finite(hi) else NEG_INF, -lo if is_finite(lo) else INF)


def _mul_end(x, y):
    if not is_finite(x) or not is_finite(y):
        if x == 0 or y == 0:
            return Q(0)
        sign = (1 if x > 0 else -1) * (1 if y > 0 else -1)
        return INF if sign > 0 else NEG_INF
    return x * y


def _iv_mul(a, b):
    corners = [_mul_end(x, y) for x in a for y in b]
    return min(corners), max(corners)


def _abs_hi(iv):
    lo, hi = iv
    if not is_finite(lo) or not is_finite(hi):
        return INF
    return max(abs(lo), abs(hi))


# Hash-consing: constructors return a canonical instance per structural
# shape, with child identity standing in for deep structural keys.  Equal
# trees are therefore the *same object*, equality is identity, and per-point
# evaluation memoizes by id in O(1).
_INTERN = {}


class ScalarField:
    """Base expression node; immutable, interned, safe for concurrent reads."""

    __slots__ = ("dim", "_nn")

    def __new__(cls, *args, **kwargs):
        sig = cls._intern_sig(*args, **kwargs)
        if sig is None:
            return super().__new__(cls)
        key = (cls.__name__,) + sig
        inst = _INTERN.get(key)
        if inst is None:
            inst = super().__new__(cls)
            _INTERN[key] = inst
        return inst

    @staticmethod
    def _intern_sig(*args, **kwargs):
        return None

    def __init__(self, dim):
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_nn", None)

    def eval(self, x, memo=None):
        if memo is None:
            return self._eval(x, {})
        key = id(self)
        if key not in memo:
            memo[key] = self._eval(x, memo)
        return memo[key]

    def _eval(self, x, memo):
        raise NotImplementedError

    def bounds(self, box):
        raise NotImplementedError

    def lipschitz(self, box):
        return None

    def is_nonneg(self):
        v = self._nn
        if v is None:
            v = self._nonneg()
            object.__setattr__(self, "_nn", v)
        return v

    def _nonneg(self):
        return False

    def children(self):
        return ()

    def __repr__(self):
        return "<field %s dim=%s>" % (type(self).__name__, self.dim)


class Const(ScalarField):
    __slots__ = ("value",)

    @staticmethod
    def _intern_sig(dim, value):
        return (dim, Q(value))

    def __init__(self, dim, value):
        super().__init__(dim)
        object.__setattr__(self, "value", Q(value))

    def _eval(self, x, memo):
        return self.value

    def bounds(self, box):
        return self.value, self.value

    def lipschitz(self, box):
        return Q(0)

    def _nonneg(self):
        return self.value >= 0




class Coord(ScalarField):
    __slots__ = ("axis",)

    @staticmethod
    def _intern_sig(dim, axis):
        return (dim, axis)

    def __init__(self, dim, axis):
        super().__init__(dim)
        if not 0 <= axis < dim:
            raise FieldError("axis out of range")
        object.__setattr__(self, "axis", axis)

    def _eval(self, x, memo):
        return Q(x[self.axis])

    def bounds(self, box):
        return box.ivs[self.axis]

    def lipschitz(self, box):
        return Q(1)




class Add(ScalarField):
    __slots__ = ("terms",)

    @staticmethod
    def _intern_sig(terms):
        return (tuple(id(t) for t in terms),)

    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise FieldError("empty sum; use Const 0")
        super().__init__(terms[0].dim)
        for t in terms:
            if t.dim != self.dim:
                raise FieldError("dimension mismatch in sum")
        object.__setattr__(self, "terms", terms)

    def _eval(self, x, memo):
        return sum((t.eval(x, memo) for t in self.terms), Q(0))

    def bounds(self, box):
        iv = (Q(0), Q(0))
        for t in self.terms:
            iv = _iv_add(iv, t.bounds(box))
        return iv

    def lipschitz(self, box):
        total = Q(0)
        for t in self.terms:
            L = t.lipschitz(box)
            if L is None:
                return None
            total += L
        return total

    def _nonneg(self):
        return all(t.is_nonneg() for t in self.terms)

    def children(self):
        return self.terms




class Sub(ScalarField):
    """Difference node; only reachable inside max(0, .) guards."""

    __slots__ = ("a", "b")

    @staticmethod
    def _intern_sig(a, b):
        return (id(a), id(b))

    def __init__(self, a, b):
        if a.dim != b.dim:
            raise FieldError("dimension mismatch")
        super().__init__(a.dim)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _eval(self, x, memo):
        return self.a.eval(x, memo) - self.b.eval(x, memo)

    def bounds(self, box):
        return _iv_add(self.a.bounds(box), _iv_neg(self.b.bounds(box)))

    def lipschitz(self, box):
        la, lb = self.a.lipschitz(box), self.b.lipschitz(box)
        if la is None or lb is None:
            return None
        return la + lb

    def children(self):
        return (self.a, self.b)




class Mul(ScalarField):
    __slots__ = ("a", "b")

    @staticmethod
    def _intern_sig(a, b):
        return (id(a), id(b))

    def __init__(self, a, b):
        if a.dim != b.dim:
            raise FieldError("dimension mismatch")
        super().__init__(a.dim)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _eval(self, x, memo):
        return self.a.eval(x, memo) * self.b.eval(x, memo)

    def bounds(self, box):
        return _iv_mul(self.a.bounds(box), self.b.bounds(box))

    def lipschitz(self, box):
        la, lb = self.a.lipschitz(box), self.b.lipschitz(box)
        if la is None or lb is None:
            return None
        ma, mb = _abs_hi(self.a.bounds(box)), _abs_hi(self.b.bounds(box))
        if not (is_finite(ma) and is_finite(mb)):
            return None
        return la * mb + lb * ma

    def _nonneg(self):
        return self.a.is_nonneg() and self.b.is_nonneg()

    def children(self):
        return (self.a, self.b)




class MinOf(ScalarField):
    __slots__ = ("terms",)

    @staticmethod
    def _intern_sig(terms):
        return (tuple(id(t) for t in terms),)

    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise FieldError("empty min")
        super().__init__(terms[0].dim)
        for t in terms:
            if t.dim != self.dim:
                raise FieldError("dimension mismatch in min")
        object.__setattr__(self, "terms", terms)

    def _eval(self, x, memo):
        return min(t.eval(x, memo) for t in self.terms)

    def bounds(self, box):
        ivs = [t.bounds(box) for t in self.terms]
        return min(lo for lo, _ in ivs), min(hi for _, hi in ivs)

    def lipschitz(self, box):
        ls = [t.lipschitz(box) for t in self.terms]
        if any(L is None for L in ls):
            return None
        return max(ls)

    def _nonneg(self):
        return all(t.is_nonneg() for t in self.terms)

    def children(self):
        return self.terms




class MaxOf(ScalarField):
    __slots__ = ("terms",)

    @staticmethod
    def _intern_sig(terms):
        return (tuple(id(t) for t in terms),)

    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise FieldError("empty max")
        super().__init__(terms[0].dim)
        for t in terms:
            if t.dim != self.dim:
                raise FieldError("dimension mismatch in max")
        object.__setattr__(self, "terms", terms)

    def _eval(self, x, memo):
        return max(t.eval(x, memo) for t in self.terms)

    def bounds(self, box):
        ivs = [t.bounds(box) for t in self.terms]
        return max(lo for lo, _ in ivs), max(hi for _, hi in ivs)

    def lipschitz(self, box):
        ls = [t.lipschitz(box) for t in self.terms]
        if any(L is None for L in ls):
            return None
        return max(ls)

    def _nonneg(self):
        return any(t.is_nonneg() for t in self.terms)

    def children(self):
        return self.terms




class PosPart(ScalarField):
    """max(0, inner); the guard that keeps subtraction continuous-total."""

    __slots__ = ("inner",)

    @staticmethod
    def _intern_sig(inner):
        return (id(inner),)

    def __init__(self, inner):
        super().__init__(inner.dim)
        object.__setattr__(self, "inner", inner)

    def _eval(self, x, memo):
        v = self.inner.eval(x, memo)
        return v if v > 0 else Q(0)

    def bounds(self, box):
        lo, hi = self.inner.bounds(box)
        return max(Q(0), lo), max(Q(0), hi)

    def lipschitz(self, box):
        return self.inner.lipschitz(box)

    def _nonneg(self):
        return True

    def children(self):
        return (self.inner,)




class Clamp01(ScalarField):
    __slots__ = ("inner",)

    @staticmethod
    def _intern_sig(inner):
        return (id(inner),)

    def __init__(self, inner):
        super().__init__(inner.dim)
        object.__setattr__(self, "inner", inner)

    def _eval(self, x, memo):
        v = self.inner.eval(x, memo)
        if v < 0:
            return Q(0)
        if v > 1:
            return Q(1)
        return v

    def bounds(self, box):
        lo, hi = self.inner.bounds(box)
        clamp = lambda v: Q(0) if v < 0 else (Q(1) if v > 1 else v)
        return clamp(lo), clamp(hi)

    def lipschitz(self, box):
        return self.inner.lipschitz(box)

    def _nonneg(self):
        return True

    def children(self):
        return (self.inner,)




class Tent(ScalarField):
    """Product over axes of max(0, min(x_j - lo_j, hi_j - x_j, 1)).

    Unbounded sides drop their margin term; the cap at 1 keeps lattice sums
    uniformly bounded with per-axis Lipschitz constant 1.  Support is
    exactly the open box.
    """

    __slots__ = ("box",)

    @staticmethod
    def _intern_sig(box):
        return (box.ivs,)

    def __init__(self, box):
        super().__init__(box.dim)
        object.__setattr__(self, "box", box)

    def _margin(self, axis, t):
        lo, hi = self.box.ivs[axis]
        m = Q(1)
        if is_finite(lo):
            m = min(m, t - lo)
        if is_finite(hi):
            m = min(m, hi - t)
        return m

    def _eval(self, x, memo):
        v = Q(1)
        for axis in range(self.dim):
            m = self._margin(axis, Q(x[axis]))
            if m <= 0:
                return Q(0)
            v *= m if m < 1 else Q(1)
        return v

    def bounds(self, box):
        lo_prod, hi_prod = Q(1), Q(1)
        for axis in range(self.dim):
            clo, chi = box.ivs[axis]
            blo, bhi = self.box.ivs[axis]
            candidates = []
            for c in (clo, chi):
                if is_finite(c):
                    candidates.append(self._margin(axis, c))
                else:
                    # margin tends to -inf (finite side) or stays 1
                    candidates.append(
                        NEG_INF if (is_finite(blo) or is_finite(bhi)) else Q(1)
                    )
            m_lo = min(candidates)
            # concave margin: interior maxima at plateau/midpoint candidates
            interior = []
            if is_finite(blo) and is_finite(bhi):
                interior.append((blo + bhi) / 2)
            if is_finite(blo):
                interior.append(blo + 1)
            if is_finite(bhi):
                interior.append(bhi - 1)
            m_hi = max(candidates)
            for p in interior:
                if clo < p < chi:
                    m_hi = max(m_hi, self._margin(axis, p))
            f_lo = max(Q(0), m_lo) if is_finite(m_lo) else Q(0)
            f_hi = max(Q(0), m_hi) if is_finite(m_hi) else Q(0)
            lo_prod *= min(f_lo, Q(1))
            hi_prod *= min(f_hi, Q(1))
            if hi_prod == 0:
                return Q(0), Q(0)
        return lo_prod, hi_prod

    def lipschitz(self, box):
        k = sum(
            1
            for lo, hi in self.box.ivs
            if is_finite(lo) or is_finite(hi)
        )
        return sqrt_upper(Q(max(k, 1)), 20)

    def _nonneg(self):
        return True




class NormSq(ScalarField):
    __slots__ = ()

    @staticmethod
    def _intern_sig(dim):
        return (dim,)

    def _eval(self, x, memo):
        return sum((Q(t) ** 2 for t in x), Q(0))

    def bounds(self, box):
        lo_sum, hi_sum = Q(0), Q(0)
        for lo, hi in box.ivs:
            if not (is_finite(lo) and is_finite(hi)):
                return (Q(0), INF)
            if lo <= 0 <= hi:
                axis_lo = Q(0)
            else:
                axis_lo = min(lo * lo, hi * hi)
            lo_sum += axis_lo
            hi_sum += max(lo * lo, hi * hi)
        return lo_sum, hi_sum

    def lipschitz(self, box):
        hi = self.bounds(box)[1]
        if not is_finite(hi):
            return None
        return 2 * sqrt_upper(hi, 20)

    def _nonneg(self):
        return True




class Norm(ScalarField):
    """Euclidean norm.  Exact evaluation exists only where the value is
    rational; bounds and the Lipschitz constant (1) are always available.
    Kept for completeness; no construction in this package depends on it.
    """

    __slots__ = ()

    @staticmethod
    def _intern_sig(dim):
        return (dim,)

    def _eval(self, x, memo):
        from .rationals import exact_sqrt, is_perfect_square

        s = sum((Q(t) ** 2 for t in x), Q(0))
        if not is_perfect_square(s):
            raise FieldEvalError("irrational norm at %r" % (x,))
        return exact_sqrt(s)

    def bounds(self, box):
        lo, hi = NormSq(self.dim).bounds(box)
        return sqrt_lower(lo, 30), (INF if not is_finite(hi) else sqrt_upper(hi, 30))

    def lipschitz(self, box):
        return Q(1)

    def _nonneg(self):
        return True




class ComposePL(ScalarField):
    """pl(inner) for a monotone piecewise linear pl."""

    __slots__ = ("pl", "inner", "_mono")

    @staticmethod
    def _intern_sig(pl, inner):
        return (pl.key(), id(inner))

    def __init__(self, pl, inner):
        if not (pl.is_nondecreasing() or pl.is_nonincreasing()):
            raise FieldError("composition requires a monotone PL function")
        super().__init__(inner.dim)
        object.__setattr__(self, "pl", pl)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "_mono", 1 if pl.is_nondecreasing() else -1)

    def _eval(self, x, memo):
        return self.pl(self.inner.eval(x, memo))

    def bounds(self, box):
        ilo, ihi = self.inner.bounds(box)
        vlo = self.pl(ilo) if is_finite(ilo) else self._limit(False)
        vhi = self.pl(ihi) if is_finite(ihi) else self._limit(True)
        return (vlo, vhi) if self._mono > 0 else (vhi, vlo)

    def _limit(self, right):
        if right:
            if self.pl.right_slope in (None, 0):
                return self.pl.vs[-1]
            return INF if self.pl.right_slope > 0 else NEG_INF
        return self.pl.vs[0]

    def lipschitz(self, box):
        li = self.inner.lipschitz(box)
        if li is None:
            return None
        return self.pl.max_abs_slope() * li

    def _nonneg(self):
        try:
            return self.pl.min_value() >= 0
        except Exception:
            return False

    def children(self):
        return (self.inner,)




class LatticeSum(ScalarField):
    """Locally finite sum of lattice translates of a template field.

    The template's support must lie in the family's template box, so the
    translate for index m is supported in instance m and only instances
    whose closure contains the query point contribute.
    """

    __slots__ = ("family", "template")

    @staticmethod
    def _intern_sig(family, template):
        return (family.base.ivs, family.periods, id(template))

    def __init__(self, family, template):
        if family.dim != template.dim:
            raise FieldError("dimension mismatch")
        super().__init__(family.dim)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "template", template)

    def _active(self, x):
        window = Box([(Q(t), Q(t) + 1) for t in x]).translate([Q(-1, 2)] * self.dim)
        return self.family.instances_meeting(window, closed=True)

    def _eval(self, x, memo):
        total = Q(0)
        x = tuple(Q(t) for t in x)
        for m, inst in self._active(x):
            off = self.family.offset(m)
            shifted = tuple(t - o for t, o in zip(x, off))
            total += self.template.eval(shifted)
        return total

    def bounds(self, box):
        if not all(
            is_finite(box.ivs[axis][0]) and is_finite(box.ivs[axis][1])
            for axis, _ in self.family.periods
        ):
            return (Q(0), INF) if self.template.is_nonneg() else (NEG_INF, INF)
        lo_sum, hi_sum = Q(0), Q(0)
        for m, _ in self.family.instances_meeting(box, closed=True):
            off = self.family.offset(m)
            shifted = box.translate([-o for o in off])
            lo, hi = self.template.bounds(shifted)
            lo_sum += min(lo, Q(0)) if not self.template.is_nonneg() else max(lo, Q(0))
            hi_sum += max(hi, Q(0))
        return lo_sum, hi_sum

    def lipschitz(self, box):
        if not all(
            is_finite(box.ivs[axis][0]) and is_finite(box.ivs[axis][1])
            for axis, _ in self.family.periods
        ):
            return None
        total = Q(0)
        for m, _ in self.family.instances_meeting(box, closed=True):
            off = self.family.offset(m)
            L = self.template.lipschitz(box.translate([-o for o in off]))
            if L is None:
                return None
            total += L
        return total

    def _nonneg(self):
        return self.template.is_nonneg()

    def children(self):
        return (self.template,)




class Div(ScalarField):
    """num/den with 0 <= num <= den pointwise; value 0 where den = 0.

    Continuous on {den > 0}; used only for partition normalization, where
    the denominator is the full partition sum and is positive on the
    ambient set.
    """

    __slots__ = ("num", "den")

    @staticmethod
    def _intern_sig(num, den):
        return (id(num), id(den))

    def __init__(self, num, den):
        if num.dim != den.dim:
            raise FieldError("dimension mismatch")
        if not (num.is_nonneg() and den.is_nonneg()):
            raise FieldError("normalization requires nonnegative num and den")
        super().__init__(num.dim)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def _eval(self, x, memo):
        d = self.den.eval(x, memo)
        if d <= 0:
            return Q(0)
        n = self.num.eval(x, memo)
        return n / d

    def bounds(self, box):
        nlo, nhi = self.num.bounds(box)
        dlo, dhi = self.den.bounds(box)
        if nhi <= 0:
            return Q(0), Q(0)
        if dlo > 0:
            hi = Q(1) if not is_finite(nhi) else min(Q(1), nhi / dlo)
            lo = Q(0)
            if is_finite(dhi) and dhi > 0 and is_finite(nlo):
                lo = max(Q(0), min(Q(1), nlo / dhi))
            return lo, hi
        return Q(0), Q(1)

    def lipschitz(self, box):
        dlo, dhi = self.den.bounds(box)
        if dlo <= 0:
            return None
        ln, ld = self.num.lipschitz(box), self.den.lipschitz(box)
        if ln is None or ld is None:
            return None
        nhi = self.num.bounds(box)[1]
        if not (is_finite(dhi) and is_finite(nhi)):
            return None
        return (ln * dhi + nhi * ld) / (dlo * dlo)

    def _nonneg(self):
        return True

    def children(self):
        return (self.num, self.den)




def const(dim, v):
    return Const(dim, v)


def pos_sub(a, b):
    """The guarded difference max(0, a - b)."""
    return PosPart(Sub(a, b))


def indicator_of(s):
    """A nonnegative field whose support is exactly the open set s."""
    if isinstance(s, FieldOpen):
        return s.field
    if isinstance(s, BoxUnion):
        if not s.boxes:
            return Const(s.dim, 0)
        return MaxOf([Tent(b) for b in s.boxes]) if len(s.boxes) > 1 else Tent(s.boxes[0])
    if isinstance(s, Symbolic):
        terms = [LatticeSum(f, Tent(f.base)) for f in s.families]
        terms.extend(Tent(b) for b in s.boxes)
        if not terms:
            return Const(s.dim, 0)
        return Add(terms) if len(terms) > 1 else terms[0]
    raise FieldError("no indicator for %r" % (s,))


# ---------------------------------------------------------------------------
# partitions


class PositivePartition:
    """Indexed nonnegative fields with everywhere-positive total on ambient.

    Positivity is *verified* (certified on a window or by sampling, tier
    recorded by the caller), never assumed.  When targets are present the
    compatibility {f_i > 0} <= U_i is part of the contract.
    """

    def __init__(self, labels, members, ambient, targets=None):
        labels = list(labels)
        members = list(members)
        if len(labels) != len(members):
            raise FieldError("labels and members must align")
        for f in members:
            if not f.is_nonneg():
                raise FieldError("partition members must be nonnegative")
            if f.dim != ambient.dim:
                raise FieldError("dimension mismatch")
        if targets is not None and len(targets) != len(members):
            raise FieldError("targets must align with members")
        self.labels = labels
        self.members = members
        self.ambient = ambient
        self.targets = list(targets) if targets is not None else None

    def __len__(self):
        return len(self.members)

    def member_sum(self):
        if not self.members:
            return Const(self.ambient.dim, 0)
        if len(self.members) == 1:
            return self.members[0]
        return Add(self.members)

    def eval_members(self, x, memo=None):
        memo = {} if memo is None else memo
        return [f.eval(x, memo) for f in self.members]

    def sums_to_one(self):
        return False


class PartitionOfUnity(PositivePartition):
    """A positive partition with total exactly 1 on the ambient set,
    plus an on-demand local finiteness witness."""

    def __init__(self, labels, members, ambient, targets=None, witness_fn=None):
        super().__init__(labels, members, ambient, targets)
        self.witness_fn = witness_fn

    def sums_to_one(self):
        return True

    def local_finiteness_witness(self, x):
        """(J, V_J) with x in V_J and members outside J vanishing on V_J."""
        if self.witness_fn is None:
            raise FieldError("no local finiteness witness recorded")
        return self.witness_fn(x)


def tent_partition(cover):
    """Tent-based compatible positive partition for a box-backed cover.

    Each member is the sum of tents over the element's constituent boxes
    (lattice families contribute locally finite tent sums), so strict
    positivity of f_i happens exactly on U_i and compatibility holds by
    construction.  Positivity of the total is the caller's obligation to
    verify against the ambient.
    """
    members = []
    for label, elt in zip(cover.labels, cover.elements):
        if isinstance(elt, FieldOpen):
            raise FieldError(
                "unsupported: no canonical tent for a field-defined element (%r)"
                % (label,)
            )
        members.append(indicator_of(elt))
    return PositivePartition(
        list(cover.labels), members, cover.ambient, targets=list(cover.elements)
    )


def partial_sum(partition, predicate):
    """Pointwise sum of the members selected by predicate, as a field."""
    chosen = [
        f for label, f in zip(partition.labels, partition.members) if predicate(label)
    ]
    if not chosen:
        return Const(partition.ambient.dim, 0)
    if len(chosen) == 1:
        return chosen[0]
    return Add(chosen)


# ---------------------------------------------------------------------------
# structural support queries (used by the certificate verifier)


_SUPPORT_MEMO = {}


def _target_ref(target):
    # FieldOpen wrappers are transient; the interned field is the identity
    return target.field if isinstance(target, FieldOpen) else target


def support_subset(field, target):
    """True if {field > 0} <= target holds by structure alone, else None.

    The rules are the sound ones only: {a - b > 0} <= {a > 0} for b >= 0,
    {min > 0} inside each factor's region, {sum > 0} inside the union of
    the terms' regions, tent supports inside boxes, and target-side
    decompositions of min/max/sum indicator fields.  Anything the rules
    cannot settle falls back to sampling at the caller.  Interned nodes
    make the memo by identity exact.
    """
    ref = _target_ref(target)
    key = (id(field), id(ref), isinstance(target, FieldOpen))
    hit = _SUPPORT_MEMO.get(key)
    # pin both referents in the memo value: id-keyed caching is only sound
    # while the keyed objects stay alive
    if hit is not None and hit[0] is field and hit[1] is ref:
        return hit[2]
    _SUPPORT_MEMO[key] = (field, ref, None)
    out = _support_subset(field, target)
    _SUPPORT_MEMO[key] = (field, ref, out)
    return out


def _support_subset(field, target):
    if isinstance(target, FieldOpen):
        tf = target.field
        if field == tf:
            return True
        # {e > 0} <= {max(...) > 0} if e matches a term; likewise sums of
        # nonnegative terms; min requires e inside every factor's region.
        if isinstance(tf, MaxOf) and any(field == t for t in tf.terms):
            return True
        if (
            isinstance(tf, Add)
            and all(t.is_nonneg() for t in tf.terms)
            and any(field == t for t in tf.terms)
        ):
            return True
        if isinstance(tf, MinOf):
            ok = True
            for t in tf.terms:
                if field == t:
                    continue
                if not t.is_nonneg() or support_subset(field, FieldOpen(t)) is not True:
                    ok = False
                    break
            if ok:
                return True
    if isinstance(field, Const):
        return None if field.value > 0 else True
    if isinstance(field, Tent):
        if isinstance(target, (BoxUnion, Symbolic)):
            return _box_subset_exact(BoxUnion(field.dim, [field.box]), target)
        return _recurse_target(field, target)
    if isinstance(field, Sub):
        if field.b.is_nonneg() and support_subset(field.a, target) is True:
            return True
        return None
    if isinstance(field, (Add, MaxOf)):
        # {sum > 0} and {max > 0} both lie in the union of term regions
        if all(support_subset(t, target) is True for t in field.terms):
            return True
        return None
    if isinstance(field, MinOf):
        for t in field.terms:
            if support_subset(t, target) is True:
                return True
        return None
    if isinstance(field, Mul):
        if field.a.is_nonneg() and field.b.is_nonneg():
            for t in (field.a, field.b):
                if support_subset(t, target) is True:
                    return True
        return None
    if isinstance(field, (PosPart, Clamp01)):
        return support_subset(field.children()[0], target)
    if isinstance(field, Div):
        return support_subset(field.num, target)
    if isinstance(field, ComposePL):
        return None
    if isinstance(field, LatticeSum):
        if isinstance(target, Symbolic):
            for fam in target.families:
                if fam == field.family and isinstance(field.template, Tent):
                    if field.template.box == fam.base:
                        return True
        return _recurse_target(field, target)
    return None


def _recurse_target(field, target):
    if isinstance(target, FieldOpen):
        return None
    return None


def _box_subset_exact(a, b):
    from . import geometry

    try:
        v = geometry.subset_of(a, b, window=None, plan=None)
        return True if v.kind == "exact_yes" else None
    except geometry.GeometryError:
        return None


# ---------------------------------------------------------------------------
# JSON


def field_to_json(f):
    if isinstance(f, Const):
        return {"op": "const", "dim": f.dim, "value": format_q(f.value)}
    if isinstance(f, Coord):
        return {"op": "coord", "dim": f.dim, "axis": f.axis}
    if isinstance(f, Add):
        return {"op": "sum", "terms": [field_to_json(t) for t in f.terms]}
    if isinstance(f, Sub):
        return {"op": "sub", "a": field_to_json(f.a), "b": field_to_json(f.b)}
    if isinstance(f, Mul):
        return {"op": "mul", "a": field_to_json(f.a), "b": field_to_json(f.b)}
    if isinstance(f, MinOf):
        return {"op": "min", "terms": [field_to_json(t) for t in f.terms]}
    if isinstance(f, MaxOf):
        return {"op": "max", "terms": [field_to_json(t) for t in f.terms]}
    if isinstance(f, PosPart):
        return {"op": "pos", "inner": field_to_json(f.inner)}
    if isinstance(f, Clamp01):
        return {"op": "clamp01", "inner": field_to_json(f.inner)}
    if isinstance(f, Tent):
        return {"op": "tent", "box": box_to_json(f.box), "dim": f.dim}
    if isinstance(f, NormSq):
        return {"op": "normsq", "dim": f.dim}
    if isinstance(f, Norm):
        return {"op": "norm", "dim": f.dim}
    if isinstance(f, ComposePL):
        return {"op": "pl", "pl": f.pl.to_json(), "inner": field_to_json(f.inner)}
    if isinstance(f, LatticeSum):
        return {
            "op": "lattice_sum",
            "family": family_to_json(f.family),
            "template": field_to_json(f.template),
        }
    if isinstance(f, Div):
        return {"op": "div", "num": field_to_json(f.num), "den": field_to_json(f.den)}
    raise FieldError("cannot serialize %r" % (f,))


def field_from_json(data):
    op = data["op"]
    if op == "const":
        return Const(data["dim"], parse_q(data["value"]))
    if op == "coord":
        return Coord(data["dim"], data["axis"])
    if op == "sum":
        return Add([field_from_json(t) for t in data["terms"]])
    if op == "sub":
        return Sub(field_from_json(data["a"]), field_from_json(data["b"]))
    if op == "mul":
        return Mul(field_from_json(data["a"]), field_from_json(data["b"]))
    if op == "min":
        return MinOf([field_from_json(t) for t in data["terms"]])
    if op == "max":
        return MaxOf([field_from_json(t) for t in data["terms"]])
    if op == "pos":
        return PosPart(field_from_json(data["inner"]))
    if op == "clamp01":
        return Clamp01(field_from_json(data["inner"]))
    if op == "tent":
        return Tent(box_from_json(data["box"]))
    if op == "normsq":
        return NormSq(data["dim"])
    if op == "norm":
        return Norm(data["dim"])
    if op == "pl":
        return ComposePL(PLFunction.from_json(data["pl"]), field_from_json(data["inner"]))
    if op == "lattice_sum":
        return LatticeSum(
            family_from_json(data["family"]), field_from_json(data["template"])
        )
    if op == "div":
        return Div(field_from_json(data["num"]), field_from_json(data["den"]))
    raise FieldError("unknown field op %r" % (op,))
