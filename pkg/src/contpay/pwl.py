"""Non-decreasing piecewise-linear maps on a compact interval.

A map is stored as breakpoints (x_0, y_0), ..., (x_k, y_k) with strictly
increasing x, x_0 and x_k being the domain ends, and non-decreasing y.
Between breakpoints the map interpolates linearly; at a breakpoint it
returns the stored y exactly.

A map may be declared *contracting*, which requires every piece slope to be
at most 1 - margin for a positive margin (default minimum 1e-6).  For such
maps the unique fixed point is computed exactly by solving x = a*x + b on
the piece where the residual y - x changes sign.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterable, Sequence

DOMAIN_TOL = 1e-12   # arguments this close to the domain ends are clamped
MERGE_TOL = 1e-12    # breakpoint x-values closer than this merge on composition
MIN_MARGIN = 1e-6    # smallest accepted contraction margin 1 - slope


class DomainError(ValueError):
    """Argument outside the map's domain, or incompatible domains."""


class ContractionError(ValueError):
    """Operation requires a contracting map and the map is not one."""


class PiecewiseLinearMap:
    __slots__ = ("xs", "ys", "margin")

    def __init__(self, breakpoints: Iterable[Sequence[float]], *,
                 contracting: bool = False, min_margin: float = MIN_MARGIN):
        pts = [(float(x), float(y)) for x, y in breakpoints]
        if len(pts) < 2:
            raise DomainError("a piecewise-linear map needs at least two breakpoints")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        for i in range(len(xs) - 1):
            if xs[i + 1] <= xs[i]:
                raise DomainError(
                    f"breakpoint x-values must be strictly increasing, got {xs[i]} then {xs[i + 1]}"
                )
            if ys[i + 1] < ys[i]:
                # Repair sub-ulp inversions from upstream float evaluation,
                # reject anything larger.
                if ys[i] - ys[i + 1] <= 1e-9 * (abs(ys[i]) + 1.0):
                    ys[i + 1] = ys[i]
                else:
                    raise DomainError(
                        f"map is not non-decreasing: y drops from {ys[i]} to {ys[i + 1]}"
                    )
        self.xs = tuple(xs)
        self.ys = tuple(ys)
        if contracting:
            top = self.max_slope()
            if top > 1.0 - min_margin:
                raise ContractionError(
                    f"piece slope {top} exceeds 1 - {min_margin}; map is not contracting"
                )
            self.margin = 1.0 - top
        else:
            self.margin = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def affine(cls, slope: float, intercept: float, lo: float, hi: float, *,
               contracting: bool | None = None) -> "PiecewiseLinearMap":
        if contracting is None:
            contracting = 0.0 <= slope <= 1.0 - MIN_MARGIN
        return cls([(lo, slope * lo + intercept), (hi, slope * hi + intercept)],
                   contracting=contracting)

    @classmethod
    def identity(cls, lo: float, hi: float) -> "PiecewiseLinearMap":
        return cls([(lo, lo), (hi, hi)])

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> "PiecewiseLinearMap":
        return cls([(lo, value), (hi, value)], contracting=True)

    # -- basic queries ---------------------------------------------------------

    @property
    def lo(self) -> float:
        return self.xs[0]

    @property
    def hi(self) -> float:
        return self.xs[-1]

    @property
    def breakpoints(self) -> tuple:
        return tuple(zip(self.xs, self.ys))

    @property
    def is_contracting(self) -> bool:
        return self.margin is not None

    def max_slope(self) -> float:
        return max(
            (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            for i in range(len(self.xs) - 1)
        )

    def contracting_copy(self, min_margin: float = MIN_MARGIN) -> "PiecewiseLinearMap":
        if self.is_contracting:
            return self
        return PiecewiseLinearMap(self.breakpoints, contracting=True, min_margin=min_margin)

    def is_self_map(self, tol: float = DOMAIN_TOL) -> bool:
        return (self.ys[0] >= self.lo - tol and self.ys[-1] <= self.hi + tol
                and min(self.ys) >= self.lo - tol and max(self.ys) <= self.hi + tol)

    def __call__(self, x: float) -> float:
        return eval_pwl(self, x)

    def __repr__(self) -> str:
        tag = f", margin={self.margin:g}" if self.is_contracting else ""
        return f"PiecewiseLinearMap({list(self.breakpoints)!r}{tag})"


def _eval_sorted(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    """Interpolate at x assuming xs[0] <= x <= xs[-1].  Exact at breakpoints."""
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    i = bisect_right(xs, x) - 1
    return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])


def eval_pwl(f: PiecewiseLinearMap, x: float) -> float:
    """Evaluate f at x; x may miss the domain by at most DOMAIN_TOL."""
    if x < f.xs[0] - DOMAIN_TOL or x > f.xs[-1] + DOMAIN_TOL:
        raise DomainError(f"argument {x} outside domain [{f.xs[0]}, {f.xs[-1]}]")
    return _eval_sorted(f.xs, f.ys, x)


def compose_pwl(f: PiecewiseLinearMap, g: PiecewiseLinearMap) -> PiecewiseLinearMap:
    """Exact composition f(g(x)) on the domain of g.

    Breakpoints of the result are g's breakpoints plus the preimages under g
    of f's breakpoint levels, so each resulting piece is genuinely linear.
    Requires the range of g to lie in the domain of f.
    """
    if g.ys[0] < f.xs[0] - DOMAIN_TOL or g.ys[-1] > f.xs[-1] + DOMAIN_TOL:
        raise DomainError(
            f"range of inner map [{g.ys[0]}, {g.ys[-1]}] not contained in "
            f"domain of outer map [{f.xs[0]}, {f.xs[-1]}]"
        )
    candidates = list(g.xs)
    for i in range(len(g.xs) - 1):
        y0, y1 = g.ys[i], g.ys[i + 1]
        if y1 <= y0:
            continue
        x0, x1 = g.xs[i], g.xs[i + 1]
        scale = (x1 - x0) / (y1 - y0)
        for u in f.xs:
            if y0 < u < y1:
                candidates.append(x0 + (u - y0) * scale)
    candidates.sort()
    merged = [candidates[0]]
    for c in candidates[1:]:
        if c - merged[-1] > MERGE_TOL:
            merged.append(c)
    merged[0] = g.xs[0]
    merged[-1] = g.xs[-1]

    flo, fhi = f.xs[0], f.xs[-1]
    pts = []
    for x in merged:
        v = _eval_sorted(g.xs, g.ys, x)
        if v < flo:
            v = flo
        elif v > fhi:
            v = fhi
        pts.append((x, _eval_sorted(f.xs, f.ys, v)))
    both = f.is_contracting and g.is_contracting
    return PiecewiseLinearMap(pts, contracting=both)


def pwl_fixed_point(f: PiecewiseLinearMap) -> float:
    """The unique x* with f(x*) = x* for a contracting self-map.

    The residual r(x) = f(x) - x is continuous, strictly decreasing (every
    slope is below 1), non-negative at the left end and non-positive at the
    right end for a self-map, so it has exactly one zero.  The zero is found
    by scanning breakpoints for the sign change and solving the affine piece.
    """
    if not f.is_contracting:
        raise ContractionError("fixed point requires a contracting map")
    xs, ys = f.xs, f.ys
    r0 = ys[0] - xs[0]
    if r0 < -DOMAIN_TOL or ys[-1] - xs[-1] > DOMAIN_TOL:
        raise DomainError("map is not a self-map of its domain; no fixed point inside")
    if r0 <= 0.0:
        return xs[0]
    for i in range(len(xs) - 1):
        r1 = ys[i + 1] - xs[i + 1]
        if r1 == 0.0:
            return xs[i + 1]
        if r1 < 0.0:
            ri = ys[i] - xs[i]
            denom = (xs[i + 1] - xs[i]) - (ys[i + 1] - ys[i])  # positive: slope < 1
            return xs[i] + ri * (xs[i + 1] - xs[i]) / denom
    return xs[-1]
