"""Decomposition certificates and their independent verifier.

A certificate is a tree whose leaves assert membership of a cover in one
of the two generating classes (two-element covers with a compatible
positive partition, or pairwise-disjoint covers) and whose internal nodes
apply the two saturation moves (coarsening along a refinement, composing
covers of cover elements) plus ambient isomorphisms.

Construction and verification are deliberately decoupled: every node
stores its cover, partitions and witnesses inline, and ``verify`` re-checks
each node's side conditions from that data alone.  Sampled checks stream
all plan points through one shared evaluation memo per point, so a full
tree costs one evaluation per distinct field node per point.
"""

import itertools
import time

from . import fields as F
from . import geometry as G
from . import refine as RF
from . import report as R
from .rationals import Q


class CertifyError(ValueError):
    pass


class MalformedCertificate(CertifyError):
    pass


# ---------------------------------------------------------------------------
# node classes


class CertNode:
    kind = None

    def __init__(self, cover):
        self.cover = cover

    def children(self):
        return ()

    def leaves(self):
        out = []
        stack = [self]
        while stack:
            n = stack.pop()
            kids = n.children()
            if kids:
                stack.extend(kids)
            else:
                out.append(n)
        return out


class AxiomTwoElement(CertNode):
    kind = "two_element"

    def __init__(self, cover):
        if len(cover) != 2:
            raise MalformedCertificate("two-element axiom needs exactly 2 elements")
        if cover.partition is None:
            raise MalformedCertificate("two-element axiom needs a compatible partition")
        super().__init__(cover)


class AxiomDisjoint(CertNode):
    kind = "disjoint"

    def __init__(self, cover, pair_witnesses=None):
        # pair_witnesses: {(label_a, label_b): descriptor}
        super().__init__(cover)
        self.pair_witnesses = dict(pair_witnesses or {})


class Coarsen(CertNode):
    kind = "coarsen"

    def __init__(self, cover, child, refinement_map, witnesses=None):
        super().__init__(cover)
        self.child = child
        self.refinement_map = dict(refinement_map)
        self.witnesses = dict(witnesses or {})
        for lab in child.cover.labels:
            if lab not in self.refinement_map:
                raise MalformedCertificate("refinement map misses label %r" % (lab,))
            if self.refinement_map[lab] not in cover.labels:
                raise MalformedCertificate("refinement target %r missing" % (lab,))

    def children(self):
        return (self.child,)


class Compose(CertNode):
    kind = "compose"

    def __init__(self, cover, outer, inner):
        super().__init__(cover)
        self.outer = outer
        self.inner = dict(inner)
        for lab in outer.cover.labels:
            if lab not in self.inner:
                raise MalformedCertificate("missing inner certificate for %r" % (lab,))
        expected = [
            (olab, ilab)
            for olab in outer.cover.labels
            for ilab in self.inner[olab].cover.labels
        ]
        if list(cover.labels) != expected:
            raise MalformedCertificate("composed family index mismatch")

    def children(self):
        return (self.outer,) + tuple(self.inner[lab] for lab in self.outer.cover.labels)


class Iso(CertNode):
    kind = "iso"

    def __init__(self, cover, child, iso):
        super().__init__(cover)
        self.child = child
        self.iso = iso
        if len(child.cover) != len(cover):
            raise MalformedCertificate("iso must preserve the index")

    def children(self):
        return (self.child,)


# ---------------------------------------------------------------------------
# streaming sampled checks


_CHUNK = 1024


class _Pending:
    __slots__ = ("check", "kind", "args", "samples")

    def __init__(self, check, kind, args):
        self.check = check
        self.kind = kind
        self.args = args
        self.samples = 0

    def process(self, cache):
        if self.check.tier == R.FAILED:
            return
        pts = cache.points
        kind = self.kind
        if kind == "subset":
            a, b = self.args
            ma = cache.member_mask(a)
            mb = cache.member_mask(b)
            for i, inside in enumerate(ma):
                if inside:
                    self.samples += 1
                    if not mb[i]:
                        self._fail(pts[i])
                        return
        elif kind == "coverage":
            ambient, members = self.args
            ma = cache.member_mask(ambient)
            union = None
            for m in members:
                mm = cache.member_mask(m)
                union = mm if union is None else [u or v for u, v in zip(union, mm)]
            if union is None:
                union = [False] * len(pts)
            for i, inside in enumerate(ma):
                if inside:
                    self.samples += 1
                    if not union[i]:
                        self._fail(pts[i])
                        return
        elif kind == "compat":
            field, target = self.args
            pos = cache.positive(field)
            mt = cache.member_mask(target)
            for i, p in enumerate(pos):
                if p:
                    self.samples += 1
                    if not mt[i]:
                        self._fail(pts[i])
                        return
        elif kind == "positivity":
            total, ambient = self.args
            ma = cache.member_mask(ambient)
            vals = cache.values(total)
            margin = self.check.margin
            for i, inside in enumerate(ma):
                if inside:
                    self.samples += 1
                    v = vals[i]
                    if v <= 0:
                        self._fail(pts[i])
                        return
                    if margin is None or v < margin:
                        margin = v
            self.check.margin = margin
        elif kind == "disjoint":
            a, b = self.args
            ma = cache.member_mask(a)
            mb = cache.member_mask(b)
            for i, inside in enumerate(ma):
                if inside:
                    self.samples += 1
                    if mb[i]:
                        self._fail(pts[i])
                        return
        else:  # custom: fn(point) -> True/False/None
            fn = self.args
            for x in pts:
                v = fn(x)
                if v is None:
                    continue
                self.samples += 1
                if v is False:
                    self._fail(x)
                    return

    def _fail(self, x):
        self.check.tier = R.FAILED
        self.check.witness = x

    def finalize(self):
        if self.check.tier != R.FAILED:
            self.check.samples = self.samples


class _Sampler:
    """Collects sampled checks; chunked batch evaluation feeds them all."""

    def __init__(self, plan):
        self.plan = plan
        self.pending = []

    def _add(self, rep, name, kind, args):
        chk = rep.add(R.Check(name, R.HEURISTIC))
        self.pending.append(_Pending(chk, kind, args))

    def subset(self, rep, name, a, b):
        self._add(rep, name, "subset", (a, b))

    def coverage(self, rep, name, ambient, members):
        self._add(rep, name, "coverage", (ambient, list(members)))

    def compat(self, rep, name, field, target):
        self._add(rep, name, "compat", (field, target))

    def positivity(self, rep, name, total, ambient):
        self._add(rep, name, "positivity", (total, ambient))

    def disjoint(self, rep, name, a, b):
        self._add(rep, name, "disjoint", (a, b))

    def custom(self, rep, name, fn):
        self._add(rep, name, "custom", fn)

    def run(self):
        from .batcheval import ChunkCache

        points = self.plan.points()
        for start in range(0, len(points), _CHUNK):
            chunk = points[start : start + _CHUNK]
            if not chunk:
                break
            cache = ChunkCache(chunk)
            for p in self.pending:
                p.process(cache)
        for p in self.pending:
            p.finalize()


# ---------------------------------------------------------------------------
# structural helpers


def _box_backed(s):
    return isinstance(s, (G.BoxUnion, G.Symbolic))


def same_set(a, b, plan, sampler, rep, name):
    """Record a check that a and b denote the same open set."""
    if a is b or a == b:
        rep.add(R.Check(name, R.EXACT, detail="identical"))
        return
    if isinstance(a, G.FieldOpen) and isinstance(b, G.FieldOpen) and a.field == b.field:
        rep.add(R.Check(name, R.EXACT, detail="same field"))
        return
    if _box_backed(a) and _box_backed(b):
        va = G.subset_of(a, b, plan.window, plan)
        vb = G.subset_of(b, a, plan.window, plan)
        if va.is_no or vb.is_no:
            w = va.witness if va.is_no else vb.witness
            rep.add(R.Check(name, R.FAILED, witness=w))
        else:
            tier = R.EXACT if va.kind == vb.kind == "exact_yes" else R.CERTIFIED
            rep.add(R.Check(name, tier))
        return
    sampler.subset(rep, name + " (fwd)", a, b)
    sampler.subset(rep, name + " (bwd)", b, a)


def check_subset(a, b, plan, sampler, rep, name, hint=None):
    if hint == "identity" and (a is b or a == b):
        rep.add(R.Check(name, R.EXACT, detail="identity"))
        return
    if isinstance(a, G.FieldOpen):
        if F.support_subset(a.field, b) is True:
            rep.add(R.Check(name, R.EXACT, detail="structural support"))
            return
    if _box_backed(a) and _box_backed(b):
        try:
            v = G.subset_of(a, b, plan.window, plan)
        except G.GeometryError:
            v = G.SubsetVerdict("inconclusive")
        if v.kind == "exact_yes":
            rep.add(R.Check(name, R.EXACT))
            return
        if v.kind == "certified_window":
            rep.add(R.Check(name, R.CERTIFIED))
            return
        if v.is_no:
            rep.add(R.Check(name, R.FAILED, witness=v.witness))
            return
    sampler.subset(rep, name, a, b)


def _requires_positive(field, expr):
    """{field > 0} <= {expr > 0}, by structure."""
    if field == expr:
        return True
    if isinstance(field, (F.PosPart, F.Clamp01)):
        return _requires_positive(field.children()[0], expr)
    if isinstance(field, F.MinOf):
        return any(_requires_positive(t, expr) for t in field.terms)
    if isinstance(field, F.Mul):
        if field.a.is_nonneg() and field.b.is_nonneg():
            return any(_requires_positive(t, expr) for t in (field.a, field.b))
        return False
    if isinstance(field, F.Div):
        return _requires_positive(field.num, expr)
    return False


def _prefix_dominated(small, large):
    """small <= large pointwise, for sums of shared nonnegative terms."""
    if small == large:
        return True
    small_terms = list(small.terms) if isinstance(small, F.Add) else [small]
    large_terms = list(large.terms) if isinstance(large, F.Add) else [large]
    remaining = list(large_terms)
    for t in small_terms:
        if t in remaining:
            remaining.remove(t)
        else:
            return False
    return all(t.is_nonneg() for t in remaining)


def _negated(expr):
    if isinstance(expr, F.Sub):
        return F.Sub(expr.b, expr.a)
    raise CertifyError("cannot negate %r" % (expr,))


def check_disjoint_pair(a, b, fa, fb, witness, plan, sampler, rep, name):
    """Disjointness of two elements given an optional analytic witness."""
    if _box_backed(a) and _box_backed(b):
        try:
            inter = G.intersect(a, b)
        except G.UnsupportedOperation:
            inter = None
        if inter is not None:
            if isinstance(inter, G.BoxUnion) and not inter.boxes:
                rep.add(R.Check(name, R.EXACT, detail="box arithmetic"))
                return
            if isinstance(inter, G.Symbolic) and not inter.families and not inter.boxes:
                rep.add(R.Check(name, R.EXACT, detail="lattice arithmetic"))
                return
            mat = inter if isinstance(inter, G.BoxUnion) else inter.materialize(plan.window)
            hit = [x for x in (b2.intersect(plan.window) for b2 in mat.boxes) if x]
            if not hit:
                rep.add(R.Check(name, R.CERTIFIED))
            else:
                rep.add(R.Check(name, R.FAILED, witness=hit[0].interior_point()))
            return
    if witness is not None and witness.get("kind") == "inequality":
        k, l = witness["fk"], witness["fl"]
        d = F.Sub(k, l)
        if (
            fa is not None
            and fb is not None
            and _requires_positive(fa, d)
            and _requires_positive(fb, _negated(d))
        ):
            rep.add(R.Check(name, R.EXACT, detail="contradictory inequalities"))
            return
    if witness is not None and witness.get("kind") == "margin":
        ga, alpha = witness["g_low"], witness["alpha"]
        gb, beta = witness["g_high"], witness["beta"]
        ok = (
            beta <= alpha
            and fa is not None
            and fb is not None
            and _requires_positive(fa, F.Sub(ga, F.Const(ga.dim, alpha)))
            and _requires_positive(fb, F.Sub(F.Const(gb.dim, beta), gb))
            and _prefix_dominated(ga, gb)
        )
        if ok:
            rep.add(
                R.Check(name, R.EXACT, detail="margin inequality", margin=alpha - beta)
            )
            return
    sampler.disjoint(rep, name, a, b)


def check_coverage(ambient, members, plan, sampler, rep, name):
    if _box_backed(ambient) and all(_box_backed(m) for m in members):
        cv = G.covers(members, ambient, plan.window, plan)
        if cv.kind == "certified_window":
            rep.add(R.Check(name, R.CERTIFIED))
        elif cv.kind == "refuted":
            rep.add(R.Check(name, R.FAILED, witness=cv.witness))
        else:
            rep.add(R.Check(name, R.HEURISTIC, samples=cv.samples))
        return
    sampler.coverage(rep, name, ambient, members)


def check_compat(partition, plan, sampler, rep):
    if partition.targets is None:
        rep.add(R.Check("partition targets", R.FAILED, detail="no targets recorded"))
        return
    for label, f, target in zip(
        partition.labels, partition.members, partition.targets
    ):
        name = "compatibility %s" % (label,)
        if F.support_subset(f, target) is True:
            rep.add(R.Check(name, R.EXACT, detail="structural support"))
        else:
            sampler.compat(rep, name, f, target)


# ---------------------------------------------------------------------------
# the verifier


class VerificationReport:
    def __init__(self, entries, seconds):
        self.entries = entries  # list of (path, kind, CheckReport)
        self.seconds = seconds

    @property
    def tier(self):
        return R.weakest(rep.tier for _, _, rep in self.entries)

    @property
    def ok(self):
        return self.tier != R.FAILED

    def failures(self):
        out = []
        for path, kind, rep in self.entries:
            for c in rep.failures():
                out.append((path, kind, c))
        return out

    def lines(self):
        out = []
        for path, kind, rep in self.entries:
            out.append("%s [%s] -> %s" % (path, kind, rep.tier.upper()))
            for line in rep.lines():
                out.append("  " + line)
        out.append("aggregate: %s (%.2fs)" % (self.tier.upper(), self.seconds))
        return out

    def summary(self):
        return "aggregate=%s nodes=%d time=%.2fs" % (
            self.tier.upper(),
            len(self.entries),
            self.seconds,
        )


def verify(cert, plan):
    """Re-check every node of a certificate against its stored data.

    Node checks depend only on node-local data; sampled facts stream all
    plan points through a shared per-point memo.  Sampling can only refute
    (a sampled failure is re-checked exactly by construction: membership
    of the witness point is an exact rational computation).
    """
    t0 = time.time()
    sampler = _Sampler(plan)
    entries = []

    def walk(node, path):
        rep = R.CheckReport()
        entries.append((path, node.kind, rep))
        if node.kind == "two_element":
            _check_two_element(node, plan, sampler, rep)
        elif node.kind == "disjoint":
            _check_axiom_disjoint(node, plan, sampler, rep)
        elif node.kind == "coarsen":
            _check_coarsen(node, plan, sampler, rep)
            walk(node.child, path + "/refined")
        elif node.kind == "compose":
            _check_compose(node, plan, sampler, rep)
            walk(node.outer, path + "/outer")
            for lab in node.outer.cover.labels:
                walk(node.inner[lab], path + "/inner[%s]" % (lab,))
        elif node.kind == "iso":
            _check_iso(node, plan, sampler, rep)
            walk(node.child, path + "/image")
        else:
            raise MalformedCertificate("unknown node kind %r" % (node.kind,))

    walk(cert, "root")
    sampler.run()
    return VerificationReport(entries, time.time() - t0)


def _check_two_element(node, plan, sampler, rep):
    cover = node.cover
    if len(cover) != 2:
        rep.add(R.Check("arity", R.FAILED, detail="expected 2 elements"))
        return
    rep.add(R.Check("arity", R.EXACT))
    check_coverage(cover.ambient, cover.elements, plan, sampler, rep, "coverage")
    if cover.partition is None:
        rep.add(R.Check("partition", R.FAILED, detail="missing"))
        return
    check_compat(cover.partition, plan, sampler, rep)
    sampler.positivity(
        rep, "partition positivity", cover.partition.member_sum(), cover.ambient
    )


def _check_axiom_disjoint(node, plan, sampler, rep):
    cover = node.cover
    check_coverage(cover.ambient, cover.elements, plan, sampler, rep, "coverage")
    fields_by_label = {}
    if cover.partition is not None:
        fields_by_label = dict(zip(cover.partition.labels, cover.partition.members))
    for (la, a), (lb, b) in itertools.combinations(zip(cover.labels, cover.elements), 2):
        wit = node.pair_witnesses.get((la, lb)) or node.pair_witnesses.get((lb, la))
        fa = fields_by_label.get(la)
        fb = fields_by_label.get(lb)
        if fa is None and isinstance(a, G.FieldOpen):
            fa = a.field
        if fb is None and isinstance(b, G.FieldOpen):
            fb = b.field
        check_disjoint_pair(
            a, b, fa, fb, wit, plan, sampler, rep, "disjoint %s | %s" % (la, lb)
        )


def _check_coarsen(node, plan, sampler, rep):
    child_cover = node.child.cover
    same_set(
        child_cover.ambient, node.cover.ambient, plan, sampler, rep, "shared ambient"
    )
    for lab in child_cover.labels:
        target_lab = node.refinement_map[lab]
        check_subset(
            child_cover.element(lab),
            node.cover.element(target_lab),
            plan,
            sampler,
            rep,
            "refines %s into %s" % (lab, target_lab),
            hint=node.witnesses.get(lab),
        )


def _check_compose(node, plan, sampler, rep):
    outer_cover = node.outer.cover
    same_set(
        outer_cover.ambient, node.cover.ambient, plan, sampler, rep, "shared ambient"
    )
    pos = 0
    for olab in outer_cover.labels:
        inner = node.inner[olab]
        same_set(
            inner.cover.ambient,
            outer_cover.element(olab),
            plan,
            sampler,
            rep,
            "inner ambient matches element %s" % (olab,),
        )
        for ilab in inner.cover.labels:
            got = node.cover.elements[pos]
            want = inner.cover.element(ilab)
            if got is want or got == want:
                pos += 1
                continue
            rep.add(
                R.Check(
                    "composed element (%s,%s)" % (olab, ilab),
                    R.FAILED,
                    detail="family mismatch",
                )
            )
            pos += 1
    rep.add(R.Check("composed family assembled", R.EXACT))


def _check_iso(node, plan, sampler, rep):
    iso = node.iso
    for c in iso.self_checks(plan):
        rep.add(c)
    child_cover = node.child.cover
    for lab in node.cover.labels:
        want = iso.image_set(node.cover.element(lab))
        got = child_cover.element(lab)
        name = "image of element %s" % (lab,)
        if got == want or _same_mapped(got, want):
            rep.add(R.Check(name, R.EXACT, detail="image matches"))
        else:
            same_set(got, want, plan, sampler, rep, name)


def _same_mapped(a, b):
    return (
        hasattr(a, "base_set")
        and hasattr(b, "base_set")
        and a.base_set == b.base_set
        and a.map_key() == b.map_key()
    )


# ---------------------------------------------------------------------------
# decomposition constructions


def _union_of(dim, elements):
    if not elements:
        return G.empty_set(dim)
    if all(isinstance(e, G.BoxUnion) for e in elements):
        boxes = []
        for e in elements:
            boxes.extend(e.boxes)
        return G.BoxUnion(dim, boxes)
    if all(isinstance(e, (G.BoxUnion, G.Symbolic)) for e in elements):
        fams, boxes = [], []
        for e in elements:
            boxes.extend(e.boxes)
            fams.extend(getattr(e, "families", ()))
        return G.Symbolic(dim, fams, boxes)
    parts = [F.indicator_of(e) for e in elements]
    return G.FieldOpen(parts[0] if len(parts) == 1 else F.Add(parts))


def decompose_zigzag(z):
    """Zigzag cover -> Compose(two-element {A,B}, disjoint evens/odds),
    coarsened back to the original indexing."""
    if "zigzag" not in z.tags:
        raise CertifyError("decompose_zigzag needs a zigzag-tagged cover")
    if z.partition is None:
        raise CertifyError("zigzag decomposition needs a partition")
    n = len(z)
    if n == 0:
        return AxiomDisjoint(z)
    dim = z.dim
    evens = [i for i in range(n) if i % 2 == 0]
    odds = [i for i in range(n) if i % 2 == 1]
    margins = z.notes.get("zigzag_margins", {})

    def parity_cover(idxs):
        elements = [z.elements[i] for i in idxs]
        labels = [z.labels[i] for i in idxs]
        members = [z.partition.members[i] for i in idxs]
        amb = _union_of(dim, elements)
        part = F.PositivePartition(labels, members, amb, targets=list(elements))
        witnesses = {}
        for a, b in itertools.combinations(range(len(idxs)), 2):
            i, j = idxs[a], idxs[b]
            if (i, j) in margins:
                witnesses[(labels[a], labels[b])] = _margin_witness(z, i, j)
        return (
            Cover_like(amb, labels, elements, part, notes=z.notes),
            witnesses,
        )

    even_cover, even_wit = parity_cover(evens)
    odd_cover, odd_wit = parity_cover(odds)
    hA = F.partial_sum(z.partition, lambda lab: z.labels.index(lab) % 2 == 0)
    hB = F.partial_sum(z.partition, lambda lab: z.labels.index(lab) % 2 == 1)
    A, B = even_cover.ambient, odd_cover.ambient
    te_cover = RF.Cover(
        z.ambient,
        ["even", "odd"],
        [A, B],
        partition=F.PositivePartition(
            ["even", "odd"], [hA, hB], z.ambient, targets=[A, B]
        ),
    )
    te = AxiomTwoElement(te_cover)
    even_node = AxiomDisjoint(even_cover, even_wit)
    odd_node = AxiomDisjoint(odd_cover, odd_wit)
    composed_labels = [("even", lab) for lab in even_cover.labels] + [
        ("odd", lab) for lab in odd_cover.labels
    ]
    composed_elements = [even_cover.element(lab) for lab in even_cover.labels] + [
        odd_cover.element(lab) for lab in odd_cover.labels
    ]
    comp_cover = RF.Cover(z.ambient, composed_labels, composed_elements)
    comp = Compose(comp_cover, te, {"even": even_node, "odd": odd_node})
    refinement = {(par, lab): lab for par, lab in composed_labels}
    witnesses = {lab: "identity" for lab in composed_labels}
    return Coarsen(z, comp, refinement, witnesses)


def _margin_witness(z, i, j):
    meta = z.notes.get("zigzag_fields")
    if meta is None:
        raise CertifyError("zigzag cover lacks recorded fields")
    return {
        "kind": "margin",
        "g_low": meta["g"][i],
        "alpha": meta["alpha"][i],
        "g_high": meta["g"][j - 2],
        "beta": meta["beta"][j - 2],
        "params": z.notes.get("zigzag_params"),
    }


def Cover_like(ambient, labels, elements, partition=None, notes=None):
    return RF.Cover(ambient, labels, elements, partition=partition, notes=notes)


def decompose_chain(c, params=None):
    """Chain cover -> zigzag refinement -> zigzag certificate -> coarsen."""
    if "chain" not in c.tags:
        raise CertifyError("decompose_chain needs a chain-tagged cover")
    n = len(c)
    if n == 0:
        return AxiomDisjoint(c)
    cpou = RF.ensure_pou(c)
    zz = RF.zigzag_refine(cpou, params)
    child = decompose_zigzag(zz)
    refinement = {i: c.labels[i] for i in range(n)}
    return Coarsen(c, child, refinement)


def decompose_finite(c):
    """Finite cover with positive partition, by the size recursion:
    split off the last element against A = {sum of the others > 0} cap
    (union of the others), recurse inside A."""
    if c.partition is None:
        raise CertifyError("decompose_finite needs a positive partition")
    if any(not isinstance(lab, (int, str, tuple)) for lab in c.labels):
        raise CertifyError("finite decomposition needs concrete labels")
    return _finite_rec(
        c.ambient, list(c.labels), list(c.elements), list(c.partition.members)
    )


def _finite_rec(ambient, labels, elements, members):
    dim = ambient.dim
    n = len(labels)
    cover = RF.Cover(
        ambient,
        labels,
        elements,
        partition=F.PositivePartition(labels, members, ambient, targets=list(elements)),
        tags={"finite"},
    )
    if n == 0:
        return AxiomDisjoint(RF.Cover(ambient, [], []))
    if n == 1:
        # {A, U_0} with A empty; inner certs: empty cover of A, singleton U_0
        empty = G.empty_set(dim)
        zero = F.Const(dim, 0)
        te_cover = RF.Cover(
            ambient,
            ["rest", "last"],
            [empty, elements[0]],
            partition=F.PositivePartition(
                ["rest", "last"], [zero, members[0]], ambient, targets=[empty, elements[0]]
            ),
        )
        te = AxiomTwoElement(te_cover)
        inner = {
            "rest": AxiomDisjoint(RF.Cover(empty, [], [])),
            "last": AxiomDisjoint(RF.Cover(elements[0], [labels[0]], [elements[0]])),
        }
        comp_cover = RF.Cover(ambient, [("last", labels[0])], [elements[0]])
        comp = Compose(comp_cover, te, inner)
        return Coarsen(cover, comp, {("last", labels[0]): labels[0]}, {("last", labels[0]): "identity"})
    prefix_members = members[:-1]
    S = prefix_members[0] if len(prefix_members) == 1 else F.Add(prefix_members)
    union_prefix = _union_of(dim, elements[:-1])
    A = G.intersect(G.FieldOpen(S), union_prefix)
    te_cover = RF.Cover(
        ambient,
        ["rest", "last"],
        [A, elements[-1]],
        partition=F.PositivePartition(
            ["rest", "last"], [S, members[-1]], ambient, targets=[A, elements[-1]]
        ),
    )
    te = AxiomTwoElement(te_cover)
    inner_elements = [G.intersect(e, A) for e in elements[:-1]]
    rest_node = _finite_rec(A, labels[:-1], inner_elements, prefix_members)
    last_node = AxiomDisjoint(RF.Cover(elements[-1], [labels[-1]], [elements[-1]]))
    comp_labels = [("rest", lab) for lab in labels[:-1]] + [("last", labels[-1])]
    comp_elements = inner_elements + [elements[-1]]
    comp_cover = RF.Cover(ambient, comp_labels, comp_elements)
    comp = Compose(comp_cover, te, {"rest": rest_node, "last": last_node})
    refinement = {("rest", lab): lab for lab in labels[:-1]}
    refinement[("last", labels[-1])] = labels[-1]
    witnesses = {("last", labels[-1]): "identity"}
    return Coarsen(cover, comp, refinement, witnesses)


def decompose_countable(c, order=None):
    """Enumerated cover -> chain of prefix unions, finite covers of each
    chain stage, composed and coarsened back onto the input."""
    if c.partition is None:
        raise CertifyError("decompose_countable needs a positive partition")
    n = len(c)
    if n == 0:
        return AxiomDisjoint(c)
    order = list(range(n)) if order is None else list(order)
    chain = RF.chain_from_countable(c, order)
    chain_cert = decompose_chain(chain)
    members = [c.partition.members[k] for k in order]
    elements = [c.elements[k] for k in order]
    labels = [c.labels[k] for k in order]
    inner = {}
    comp_labels = []
    comp_elements = []
    for i in range(n):
        A_i = chain.elements[i]
        stage_elements = [G.intersect(elements[k], A_i) for k in range(i + 1)]
        stage_labels = [labels[k] for k in range(i + 1)]
        stage_members = [members[k] for k in range(i + 1)]
        stage_cover = RF.Cover(
            A_i,
            stage_labels,
            stage_elements,
            partition=F.PositivePartition(
                stage_labels, stage_members, A_i, targets=list(stage_elements)
            ),
            tags={"finite"},
        )
        inner[i] = decompose_finite(stage_cover)
        comp_labels.extend((i, lab) for lab in stage_labels)
        comp_elements.extend(stage_elements)
    comp_cover = RF.Cover(c.ambient, comp_labels, comp_elements)
    comp = Compose(comp_cover, chain_cert, inner)
    refinement = {(i, lab): lab for i, lab in comp_labels}
    return Coarsen(c, comp, refinement)


def decompose(c):
    """Arbitrary finite cover with positive partition: mather, disjointify,
    group by cardinality, countable path for the groups, disjoint leaves
    for each cardinality class, compose, coarsen onto the input."""
    if c.partition is None:
        raise CertifyError("decompose needs a positive partition")
    if "disjoint" in c.tags:
        child = AxiomDisjoint(
            RF.Cover(
                c.ambient,
                list(c.labels),
                list(c.elements),
                partition=c.partition,
                tags={"disjoint"},
            )
        )
        return Coarsen(
            c,
            child,
            {lab: lab for lab in c.labels},
            {lab: "identity" for lab in c.labels},
        )
    pou = RF.mather(c.partition)
    cpou = c.with_partition(pou)
    refined, card = RF.disjointify(cpou)
    by_card = {}
    for lab in refined.labels:
        by_card.setdefault(card[lab], []).append(lab)
    ks = sorted(by_card)
    g_by_label = dict(zip(refined.partition.labels, refined.partition.members))
    w_labels, w_elements, w_members = [], [], []
    disjoint_nodes = {}
    for k in ks:
        labs = by_card[k]
        gs = [g_by_label[lab] for lab in labs]
        hk = gs[0] if len(gs) == 1 else F.Add(gs)
        Wk = G.FieldOpen(hk)
        w_labels.append(k)
        w_elements.append(Wk)
        w_members.append(hk)
        pair_wit = {}
        pairs = refined.notes.get("contradictory_pairs", [])
        labset = set(labs)
        orig_members = dict(zip(cpou.labels, pou.members))
        for (la, lb, korig, lorig) in pairs:
            if la in labset and lb in labset:
                pair_wit[(la, lb)] = {
                    "kind": "inequality",
                    "fk": orig_members[korig],
                    "fl": orig_members[lorig],
                }
        class_cover = RF.Cover(
            Wk,
            labs,
            [refined.element(lab) for lab in labs],
            partition=F.PositivePartition(
                labs, gs, Wk, targets=[refined.element(lab) for lab in labs]
            ),
            tags={"disjoint"},
        )
        disjoint_nodes[k] = AxiomDisjoint(class_cover, pair_wit)
    w_cover = RF.Cover(
        c.ambient,
        w_labels,
        w_elements,
        partition=F.PositivePartition(
            w_labels, w_members, c.ambient, targets=list(w_elements)
        ),
    )
    w_cert = decompose_countable(w_cover)
    comp_labels = []
    comp_elements = []
    for k in ks:
        for lab in by_card[k]:
            comp_labels.append((k, lab))
            comp_elements.append(refined.element(lab))
    comp_cover = RF.Cover(c.ambient, comp_labels, comp_elements)
    comp = Compose(comp_cover, w_cert, disjoint_nodes)
    refines = refined.notes.get("refines", {})
    refinement = {}
    for k, lab in comp_labels:
        refinement[(k, lab)] = refines[lab][0]
    return Coarsen(c, comp, refinement)
