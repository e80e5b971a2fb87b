"""Piecewise linear functions with exact rational breakpoints and values.

Constant to the left of the first breakpoint; constant or linear (given
slope) to the right of the last.  Monotone instances can be inverted and
root-solved exactly, which is what the rescaling construction relies on.
"""

from .rationals import Q


class PLError(ValueError):
    pass


class PLFunction:
    __slots__ = ("xs", "vs", "right_slope")

    def __init__(self, xs, vs, right_slope=None):
        xs = tuple(Q(x) for x in xs)
        vs = tuple(Q(v) for v in vs)
        if len(xs) != len(vs) or not xs:
            raise PLError("breakpoints and values must align and be nonempty")
        for a, b in zip(xs, xs[1:]):
            if not a < b:
                raise PLError("breakpoints must be strictly increasing")
        self.xs = xs
        self.vs = vs
        self.right_slope = None if right_slope is None else Q(right_slope)

    def __repr__(self):
        return "PLFunction(%s points, right_slope=%s)" % (
            len(self.xs),
            self.right_slope,
        )

    def key(self):
        return ("pl", self.xs, self.vs, self.right_slope)

    def __eq__(self, other):
        return isinstance(other, PLFunction) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __call__(self, x):
        x = Q(x)
        xs, vs = self.xs, self.vs
        if x <= xs[0]:
            return vs[0]
        if x >= xs[-1]:
            if self.right_slope is None:
                return vs[-1]
            return vs[-1] + self.right_slope * (x - xs[-1])
        lo, hi = 0, len(xs) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        t = (x - xs[lo]) / (xs[hi] - xs[lo])
        return vs[lo] + t * (vs[hi] - vs[lo])

    def segment_slopes(self):
        out = [
            (v2 - v1) / (x2 - x1)
            for (x1, v1), (x2, v2) in zip(zip(self.xs, self.vs), zip(self.xs[1:], self.vs[1:]))
        ]
        if self.right_slope is not None:
            out.append(self.right_slope)
        return out

    def is_nondecreasing(self):
        return all(s >= 0 for s in self.segment_slopes())

    def is_nonincreasing(self):
        return all(s <= 0 for s in self.segment_slopes())

    def is_strictly_increasing(self):
        slopes = self.segment_slopes()
        interior = slopes[: len(self.xs) - 1]
        ok_interior = all(s > 0 for s in interior)
        ok_right = self.right_slope is None or self.right_slope > 0
        return ok_interior and ok_right and len(self.xs) >= 1

    def max_abs_slope(self):
        slopes = self.segment_slopes()
        return max((abs(s) for s in slopes), default=Q(0))

    def min_value(self):
        """Infimum over all of R; PLError if unbounded below."""
        m = min(self.vs)
        if self.right_slope is not None and self.right_slope < 0:
            raise PLError("unbounded below on the right")
        return m

    def solve_increasing(self, target):
        """Exact x with f(x) = target for a nondecreasing f that attains it.

        Returns the leftmost solution >= the first breakpoint region.
        """
        target = Q(target)
        if not self.is_nondecreasing():
            raise PLError("solve_increasing needs a nondecreasing function")
        if target < self.vs[0]:
            raise PLError("target below range")
        if target == self.vs[0]:
            return self.xs[0]
        for (x1, v1), (x2, v2) in zip(
            zip(self.xs, self.vs), zip(self.xs[1:], self.vs[1:])
        ):
            if v1 <= target <= v2:
                if v2 == v1:
                    return x1
                return x1 + (target - v1) * (x2 - x1) / (v2 - v1)
        if self.right_slope is not None and self.right_slope > 0:
            return self.xs[-1] + (target - self.vs[-1]) / self.right_slope
        raise PLError("target above range")

    def to_json(self):
        from .rationals import format_q

        return {
            "breakpoints": [format_q(x) for x in self.xs],
            "values": [format_q(v) for v in self.vs],
            "right_slope": None if self.right_slope is None else format_q(self.right_slope),
        }

    @staticmethod
    def from_json(data):
        from .rationals import parse_q

        rs = data.get("right_slope")
        return PLFunction(
            [parse_q(x) for x in data["breakpoints"]],
            [parse_q(v) for v in data["values"]],
            None if rs is None else parse_q(rs),
        )


def constant_pl(value):
    return PLFunction([Q(0)], [Q(value)], None)
