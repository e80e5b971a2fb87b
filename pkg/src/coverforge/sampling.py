"""Deterministic sample plans for verification.

A plan fixes a bounded window, a grid step (also the minimum cell size of
branch-and-bound), a random sample count and a seed.  Identical plans
produce identical point sequences; all points are exact rationals on the
dyadic grid of resolution 2^-16 within the window.
"""

import random

from .geometry import Box, GeometryError
from .rationals import Q, format_q, is_finite, parse_q, q_ceil, q_floor

_RES = 1 << 16


class SamplePlan:
    __slots__ = ("window", "step", "count", "seed", "cell_cap")

    def __init__(self, window, step, count, seed, cell_cap=50000):
        if not window.is_bounded():
            raise GeometryError("sample window must be bounded")
        step = Q(step)
        if step <= 0:
            raise GeometryError("grid step must be positive")
        if count < 0:
            raise GeometryError("sample count must be nonnegative")
        self.window = window
        self.step = step
        self.count = int(count)
        self.seed = int(seed)
        self.cell_cap = cell_cap

    def with_window(self, window):
        return SamplePlan(window, self.step, self.count, self.seed, self.cell_cap)

    def points(self):
        """Seeded random rational points strictly inside the window."""
        rng = random.Random(self.seed)
        pts = []
        ivs = self.window.ivs
        for _ in range(self.count):
            pts.append(
                tuple(
                    lo + (hi - lo) * Q(rng.randrange(1, _RES), _RES) for lo, hi in ivs
                )
            )
        return pts

    def point_matrix(self):
        """Points as (numerators, common denominator) for batch evaluation."""
        den = 1
        for lo, hi in self.window.ivs:
            den_lo = int(Q(lo).denominator)
            den_hi = int(Q(hi).denominator)
            for d in (den_lo, den_hi):
                den = den * d // _gcd(den, d)
        den *= _RES
        rows = []
        rng = random.Random(self.seed)
        for _ in range(self.count):
            row = []
            for lo, hi in self.window.ivs:
                r = rng.randrange(1, _RES)
                val = lo + (hi - lo) * Q(r, _RES)
                row.append(int(val.numerator) * (den // int(val.denominator)))
            rows.append(row)
        return rows, den

    def grid_points(self):
        """Lattice of multiples of step strictly inside the window."""
        axes = []
        for lo, hi in self.window.ivs:
            k_lo = q_floor(lo / self.step) + 1
            k_hi = q_ceil(hi / self.step) - 1
            axes.append([self.step * k for k in range(k_lo, k_hi + 1)])
        pts = [()]
        for axis_vals in axes:
            pts = [p + (v,) for p in pts for v in axis_vals]
        return pts

    def to_json(self):
        return {
            "window": [[format_q(lo), format_q(hi)] for lo, hi in self.window.ivs],
            "step": format_q(self.step),
            "count": self.count,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(data):
        window = Box([(parse_q(lo), parse_q(hi)) for lo, hi in data["window"]])
        return SamplePlan(window, parse_q(data["step"]), data["count"], data["seed"])


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a
