"""Cover refinement engines.

Three constructions, each turning one shape of cover into a more
manageable one while tracking the witnesses that later certificate
verification re-checks:

* ``mather``: positive partition -> locally finite partition of unity,
  subordinate to the induced cover, via g_i = max(0, 2 f_i - mu).
* ``disjointify``: finite partition of unity -> refinement indexed by
  nonempty subsets, disjoint within each cardinality class.
* ``zigzag_refine`` / ``chain_from_countable``: increasing chains and
  their zigzag refinements P_i with P_i cap P_j empty for |i - j| > 1.
"""

import itertools

from . import fields as F
from . import geometry as G
from . import report as R
from .rationals import Q


class RefineError(ValueError):
    pass


class Cover:
    """Indexed family of open sets over an ambient open set.

    ``partition`` (optional) must share the index labels.  ``tags`` mark
    verified shape facts (disjoint / chain / zigzag / finite); ``notes``
    carries construction witnesses that the verifier re-checks rather
    than trusts (disjointness margins, refinement maps, subset hints).
    """

    def __init__(self, ambient, labels, elements, partition=None, tags=(), notes=None):
        labels = list(labels)
        elements = list(elements)
        if len(labels) != len(elements):
            raise RefineError("labels and elements must align")
        if len(set(labels)) != len(labels):
            raise RefineError("duplicate labels")
        for e in elements:
            if e.dim != ambient.dim:
                raise G.DimensionMismatch()
        if partition is not None and list(partition.labels) != labels:
            raise RefineError("partition index does not match cover index")
        self.ambient = ambient
        self.labels = labels
        self.elements = elements
        self.partition = partition
        self.tags = set(tags)
        self.notes = dict(notes or {})

    @property
    def dim(self):
        return self.ambient.dim

    def __len__(self):
        return len(self.elements)

    def element(self, label):
        return self.elements[self.labels.index(label)]

    def with_partition(self, partition):
        return Cover(
            self.ambient, self.labels, self.elements, partition, self.tags, self.notes
        )

    def check(self, plan):
        """Verify the cover invariants; each check records its tier."""
        rep = R.CheckReport()
        window = plan.window
        for label, elt in zip(self.labels, self.elements):
            rep.add(_check_subset(elt, self.ambient, plan, "element %s in ambient" % (label,)))
        cv = G.covers(self.elements, self.ambient, window, plan)
        rep.add(_coverage_check(cv, "coverage"))
        if self.partition is not None:
            rep.add(_positivity_check(self.partition, plan, "partition positivity"))
            for c in _compat_checks(self.partition, plan):
                rep.add(c)
        if "chain" in self.tags:
            for i in range(len(self) - 1):
                rep.add(
                    _check_subset(
                        self.elements[i],
                        self.elements[i + 1],
                        plan,
                        "chain inclusion %d in %d" % (i, i + 1),
                    )
                )
        if "zigzag" in self.tags:
            for c in _zigzag_disjoint_checks(self, plan):
                rep.add(c)
        if "disjoint" in self.tags:
            for c in _pairwise_disjoint_checks(self.elements, self.labels, plan):
                rep.add(c)
        return rep


def _check_subset(a, b, plan, name):
    hint = F.support_subset(a.field, b) if isinstance(a, G.FieldOpen) else None
    if hint is True:
        return R.Check(name, R.EXACT, detail="structural support")
    try:
        v = G.subset_of(a, b, plan.window, plan)
    except G.UnsupportedOperation:
        v = G.SubsetVerdict("inconclusive")
    if v.kind == "exact_yes":
        return R.Check(name, R.EXACT)
    if v.kind == "certified_window":
        return R.Check(name, R.CERTIFIED)
    if v.is_no:
        return R.Check(name, R.FAILED, witness=v.witness)
    # sampling fallback for the inconclusive case
    bad = _sample_subset_violation(a, b, plan)
    if bad is not None:
        return R.Check(name, R.FAILED, witness=bad)
    return R.Check(name, R.HEURISTIC, samples=plan.count)


def _sample_subset_violation(a, b, plan):
    for x in plan.points():
        if a.contains(x) and not b.contains(x):
            return x
    return None


def _coverage_check(cv, name):
    if cv.kind == "certified_window":
        return R.Check(name, R.CERTIFIED)
    if cv.kind == "refuted":
        return R.Check(name, R.FAILED, witness=cv.witness)
    return R.Check(name, R.HEURISTIC, samples=cv.samples)


def _positivity_check(partition, plan, name):
    total = partition.member_sum()
    ambient = partition.ambient
    worst = None
    checked = 0
    for x in plan.points():
        if not ambient.contains(x):
            continue
        checked += 1
        v = total.eval(x)
        if v <= 0:
            return R.Check(name, R.FAILED, witness=x)
        worst = v if worst is None else min(worst, v)
    return R.Check(name, R.HEURISTIC, samples=checked, margin=worst)


def _compat_checks(partition, plan):
    if partition.targets is None:
        return
    for label, f, target in zip(partition.labels, partition.members, partition.targets):
        name = "compatibility %s" % (label,)
        if F.support_subset(f, target) is True:
            yield R.Check(name, R.EXACT, detail="structural support")
            continue
        bad = None
        for x in plan.points():
            if f.eval(x) > 0 and not target.contains(x):
                bad = x
                break
        if bad is not None:
            yield R.Check(name, R.FAILED, witness=bad)
        else:
            yield R.Check(name, R.HEURISTIC, samples=plan.count)


def _pairwise_disjoint_checks(elements, labels, plan):
    for (la, a), (lb, b) in itertools.combinations(zip(labels, elements), 2):
        name = "disjoint %s | %s" % (la, lb)
        if isinstance(a, (G.BoxUnion, G.Symbolic)) and isinstance(b, (G.BoxUnion, G.Symbolic)):
            inter = G.intersect(a, b)
            if isinstance(inter, G.BoxUnion) and not inter.boxes:
                yield R.Check(name, R.EXACT)
                continue
            if isinstance(inter, G.Symbolic) and not inter.families and not inter.boxes:
                yield R.Check(name, R.EXACT)
                continue
            mat = inter if isinstance(inter, G.BoxUnion) else inter.materialize(plan.window)
            empty_on_window = all(box.intersect(plan.window) is None for box in mat.boxes)
            if empty_on_window:
                yield R.Check(name, R.CERTIFIED)
            else:
                w = next(
                    box.intersect(plan.window).interior_point()
                    for box in mat.boxes
                    if box.intersect(plan.window) is not None
                )
                yield R.Check(name, R.FAILED, witness=w)
            continue
        bad = None
        for x in plan.points():
            if a.contains(x) and b.contains(x):
                bad = x
                break
        if bad is not None:
            yield R.Check(name, R.FAILED, witness=bad)
        else:
            yield R.Check(name, R.HEURISTIC, samples=plan.count)


def _zigzag_disjoint_checks(cover, plan):
    margins = cover.notes.get("zigzag_margins", {})
    n = len(cover)
    for i in range(n):
        for j in range(i + 2, n):
            name = "zigzag disjoint %d | %d" % (i, j)
            if (i, j) in margins:
                yield R.Check(name, R.EXACT, detail="margin inequality", margin=margins[(i, j)])
                continue
            a, b = cover.elements[i], cover.elements[j]
            bad = None
            for x in plan.points():
                if a.contains(x) and b.contains(x):
                    bad = x
                    break
            if bad is not None:
                yield R.Check(name, R.FAILED, witness=bad)
            else:
                yield R.Check(name, R.HEURISTIC, samples=plan.count)


# ---------------------------------------------------------------------------
# Mather normalization


def mather(partition):
    """Positive partition -> locally finite partition of unity.

    With mu = max_i f_i (unnormalized) the paper's normalize-then-improve
    construction collapses to g_i = N_i / sum_j N_j with
    N_i = max(0, 2 f_i - mu): the first normalization cancels.  Wherever
    g_i > 0 we get f_i >= mu/2 > 0 exactly, so g is subordinate to the
    induced cover of f.  A local finiteness witness is produced per query
    point: J = {i : f_i(x) > 0} and V_J = {mu/2 - sum_{i not in J} f_i > 0}.
    """
    members = partition.members
    if not members:
        raise RefineError("empty partition")
    dim = partition.ambient.dim
    two = F.Const(dim, 2)
    mu = members[0] if len(members) == 1 else F.MaxOf(list(members))
    numerators = [F.pos_sub(F.Mul(two, f), mu) for f in members]
    total = numerators[0] if len(numerators) == 1 else F.Add(numerators)
    normalized = [F.Div(n, total) for n in numerators]
    targets = (
        list(partition.targets)
        if partition.targets is not None
        else [G.FieldOpen(f) for f in members]
    )

    def witness_fn(x):
        vals = [f.eval(x) for f in members]
        J = [lab for lab, v in zip(partition.labels, vals) if v > 0]
        if not J:
            raise RefineError("witness query outside the partition support")
        outside = [
            f for f, v in zip(members, vals) if v <= 0
        ]
        half_mu = F.Mul(F.Const(dim, Q(1, 2)), mu)
        if outside:
            h = F.pos_sub(half_mu, F.Add(outside) if len(outside) > 1 else outside[0])
        else:
            h = half_mu
        return J, G.FieldOpen(h)

    return F.PartitionOfUnity(
        list(partition.labels),
        normalized,
        partition.ambient,
        targets=targets,
        witness_fn=witness_fn,
    )


# ---------------------------------------------------------------------------
# disjoint refinement over finite subsets

MAX_DISJOINTIFY_INDEX = 14


def disjointify(cover):
    """Refine a cover with partition of unity into per-cardinality disjoint
    families indexed by nonempty subsets of the original index.

    V_j = {x : f_k(x) > f_l(x) for all k in j, l outside j} with partition
    g_j = max(0, min_{k in j, l not in j} (f_k - f_l)); for the full subset
    the empty min is replaced by g_I = min_i f_i, whose support still lies
    in every U_k, so refinement witnesses exist for all subsets.
    Returns (refined cover, cardinality map).
    """
    pou = cover.partition
    if pou is None or not pou.sums_to_one():
        raise RefineError("disjointify needs a partition of unity")
    n = len(pou)
    if n == 0:
        raise RefineError("empty cover")
    if n > MAX_DISJOINTIFY_INDEX:
        raise RefineError(
            "unsupported: %d-element index would enumerate 2^%d subsets" % (n, n)
        )
    dim = cover.dim
    labels = list(cover.labels)
    members = list(pou.members)
    sub_labels = []
    sub_elements = []
    sub_fields = []
    cardinality = {}
    refines = {}
    positions = list(range(n))
    for size in range(1, n + 1):
        for combo in itertools.combinations(positions, size):
            j = frozenset(combo)
            label = tuple(labels[k] for k in combo)
            if size == n:
                g = members[0] if n == 1 else F.MinOf(members)
            else:
                diffs = [
                    F.Sub(members[k], members[l])
                    for k in combo
                    for l in positions
                    if l not in j
                ]
                g = F.PosPart(F.MinOf(diffs) if len(diffs) > 1 else diffs[0])
            sub_labels.append(label)
            sub_elements.append(G.FieldOpen(g))
            sub_fields.append(g)
            cardinality[label] = size
            refines[label] = [labels[k] for k in combo]
    partition = F.PositivePartition(
        sub_labels, sub_fields, cover.ambient, targets=list(sub_elements)
    )
    disjoint_pairs = []
    for a, b in itertools.combinations(range(len(sub_labels)), 2):
        ja = frozenset(labels.index(x) for x in sub_labels[a])
        jb = frozenset(labels.index(x) for x in sub_labels[b])
        if len(ja) != len(jb):
            continue
        k = min(ja - jb)
        l = min(jb - ja)
        disjoint_pairs.append((sub_labels[a], sub_labels[b], labels[k], labels[l]))
    refined = Cover(
        cover.ambient,
        sub_labels,
        sub_elements,
        partition=partition,
        tags={"finite"},
        notes={
            "refines": refines,
            "parent_labels": labels,
            "contradictory_pairs": disjoint_pairs,
        },
    )
    return refined, cardinality


# ---------------------------------------------------------------------------
# chains and zigzags


class ZigzagParams:
    """Sequences alpha > beta > gamma interleaved across indices >= -2.

    The gamma sequence participates only in the ordering constraint; no
    formula consumes it.
    """

    def __init__(self, alpha, beta, gamma, name="custom"):
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.name = name

    def validate(self, lo=-2, hi=14):
        """Exact rational ordering check on the index range [lo, hi]."""
        if self.alpha(lo) >= 1:
            raise RefineError("alpha_%d must be < 1" % lo)
        for i in range(lo, hi + 1):
            a, b, g = self.alpha(i), self.beta(i), self.gamma(i)
            a1, b1 = self.alpha(i + 1), self.beta(i + 1)
            if not (1 > a > b > g > a1 > b1 > 0):
                raise RefineError("ordering fails at index %d" % i)
        return True


def default_zigzag_params():
    """alpha_i = 3*8^-(i+3), beta_i = 2*8^-(i+3), gamma_i = 8^-(i+3).

    The factor-8 decay makes the ordering constraints and the disjointness
    margin beta_{j-2} < alpha_i (j >= i+2) exact rational facts."""
    return ZigzagParams(
        lambda i: 3 * Q(8) ** (-(i + 3)),
        lambda i: 2 * Q(8) ** (-(i + 3)),
        lambda i: Q(8) ** (-(i + 3)),
        name="default-8",
    )


def chain_from_countable(cover, order=None):
    """Prefix-sum chain A_i = {f_0 + ... + f_i > 0} for an enumerated cover.

    Inclusions A_i <= A_{i+1} hold syntactically (one more nonnegative
    term) and the original partition is compatible with the chain.
    """
    p = cover.partition
    if p is None:
        raise RefineError("chain construction needs a positive partition")
    n = len(p)
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise RefineError("order must enumerate the index")
    members = [p.members[k] for k in order]
    elements = []
    for i in range(n):
        prefix = members[: i + 1]
        g = prefix[0] if len(prefix) == 1 else F.Add(prefix)
        elements.append(G.FieldOpen(g))
    partition = type(p)(
        list(range(n)),
        members,
        cover.ambient,
        targets=list(elements),
        **({"witness_fn": getattr(p, "witness_fn", None)} if p.sums_to_one() else {}),
    )
    return Cover(
        cover.ambient,
        list(range(n)),
        elements,
        partition=partition,
        tags={"chain", "finite"},
        notes={
            "chain_source": [cover.labels[k] for k in order],
            "chain_syntactic": True,
        },
    )


def zigzag_refine(chain, params=None):
    """Chain -> zigzag cover P_i with an explicit compatible partition.

    P_i = {g_{i-2} < beta_{i-2}} cap {g_i > alpha_i} realized as the
    support of h_i = 2^-i * max(0, beta_{i-2} - g_{i-2}) * max(0, g_i - alpha_i)
    with g_{-1} = g_{-2} = 0.  Disjointness of P_i and P_j for j >= i+2 is
    the exact margin beta_{j-2} <= alpha_i recorded per pair.
    """
    if "chain" not in chain.tags:
        raise RefineError("zigzag refinement needs a verified chain")
    pou = chain.partition
    if pou is None or not pou.sums_to_one():
        raise RefineError("zigzag refinement needs a partition of unity")
    params = params or default_zigzag_params()
    n = len(chain)
    params.validate(-2, n + 1)
    dim = chain.dim
    zero = F.Const(dim, 0)

    def g(i):
        if i < 0:
            return zero
        prefix = pou.members[: min(i, n - 1) + 1]
        return prefix[0] if len(prefix) == 1 else F.Add(prefix)

    elements = []
    hs = []
    for i in range(n):
        left = F.pos_sub(F.Const(dim, params.beta(i - 2)), g(i - 2))
        right = F.pos_sub(g(i), F.Const(dim, params.alpha(i)))
        h = F.Mul(F.Const(dim, Q(1, 2**i)), F.Mul(left, right))
        hs.append(h)
        elements.append(G.FieldOpen(h))
    margins = {}
    for i in range(n):
        for j in range(i + 2, n):
            gap = params.alpha(i) - params.beta(j - 2)
            if gap <= 0:
                raise RefineError("margin failure at pair (%d, %d)" % (i, j))
            margins[(i, j)] = gap
    partition = F.PositivePartition(
        list(range(n)), hs, chain.ambient, targets=list(elements)
    )
    return Cover(
        chain.ambient,
        list(range(n)),
        elements,
        partition=partition,
        tags={"zigzag", "finite"},
        notes={
            "zigzag_margins": margins,
            "zigzag_params": params.name,
            "zigzag_chain_labels": list(chain.labels),
            "zigzag_fields": {
                "g": {i: g(i) for i in range(-2, n)},
                "alpha": {i: params.alpha(i) for i in range(-2, n)},
                "beta": {i: params.beta(i) for i in range(-2, n)},
            },
        },
    )


def ensure_pou(cover):
    """Cover whose partition is a partition of unity (mather if needed)."""
    p = cover.partition
    if p is None:
        raise RefineError("cover carries no partition")
    if p.sums_to_one():
        return cover
    return cover.with_partition(mather(p))
