"""Sound verification restricted to a box.

Two methods share the :class:`~trilemma.exact.Verdict` type:

``ibp``
    interval bound propagation, linear in the number of weights. Certified
    or Unknown, never Violated.
``exact_on_box``
    the complete region-wise verifier run on the box only.

Neither says anything about inputs outside the box.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .exact import LinearSpec, Verdict, VerifyStats, verify_full
from .network import DimensionError, Network, vec
from .regions import DEFAULT_REGION_CAP, Box, FullSpace

IBP = "ibp"
EXACT_ON_BOX = "exact_on_box"
METHODS = (IBP, EXACT_ON_BOX)

ZERO = Fraction(0)


@dataclass(frozen=True)
class IntervalVector:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = vec(self.lo), vec(self.hi)
        if len(lo) != len(hi):
            raise DimensionError("interval bounds differ in length")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("interval with lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __len__(self):
        return len(self.lo)

    def contains(self, y) -> bool:
        return all(l <= v <= h for l, v, h in zip(self.lo, y, self.hi))

    def contains_interval(self, other: IntervalVector) -> bool:
        return all(l <= ol and oh <= h for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi))

    def dot_bounds(self, c) -> tuple:
        """Interval of ``c . y`` over the box."""
        lo = hi = ZERO
        for ci, l, h in zip(c, self.lo, self.hi):
            if ci >= 0:
                lo += ci * l
                hi += ci * h
            else:
                lo += ci * h
                hi += ci * l
        return lo, hi


def _affine_interval(layer, lo, hi):
    """Exact interval image of ``W h + b`` for ``h`` in ``[lo, hi]``."""
    new_lo, new_hi = [], []
    for row, b in zip(layer.weights, layer.bias):
        l = h = b
        for w, a_lo, a_hi in zip(row, lo, hi):
            if w >= 0:
                l += w * a_lo
                h += w * a_hi
            else:
                l += w * a_hi
                h += w * a_lo
        new_lo.append(l)
        new_hi.append(h)
    return new_lo, new_hi


def ibp_operation_count(net: Network) -> int:
    """Weight multiplications per IBP pass (two per weight, one per bound)."""
    return sum(2 * l.out_dim * l.in_dim for l in net.layers)


def ibp_bounds(net: Network, box: Box) -> IntervalVector:
    """Sound output enclosure of ``f`` over ``box`` by interval arithmetic."""
    if not isinstance(box, Box):
        raise TypeError("IBP needs a Box domain")
    if box.dimension != net.input_dim:
        raise DimensionError(f"box has dimension {box.dimension}, network expects {net.input_dim}")
    lo, hi = list(box.lower), list(box.upper)
    for layer in net.hidden_layers:
        lo, hi = _affine_interval(layer, lo, hi)
        lo = [max(v, ZERO) for v in lo]
        hi = [max(v, ZERO) for v in hi]
    lo, hi = _affine_interval(net.output_layer, lo, hi)
    return IntervalVector(lo, hi)


def verify_bounded(
    net: Network, spec: LinearSpec, box: Box, method: str = IBP, cap: int = DEFAULT_REGION_CAP
) -> Verdict:
    spec.check_dims(net)
    if method == IBP:
        t0 = time.perf_counter()
        _, upper = ibp_bounds(net, box).dot_bounds(spec.c)
        stats = VerifyStats(elapsed=time.perf_counter() - t0)
        return Verdict.certified(stats) if upper <= spec.b else Verdict.unknown(stats)
    if method == EXACT_ON_BOX:
        return verify_full(net, spec, box, cap)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def generality_gap_witness(net: Network, spec: LinearSpec, box: Box, cap: int = DEFAULT_REGION_CAP):
    """A violating input outside ``box`` for a net certified on ``box``, or None.

    The search runs the complete verifier on the whole input space; since
    the box is certified, any witness it returns lies outside the box.
    """
    verdict = verify_full(net, spec, FullSpace(net.input_dim), cap)
    if not verdict.is_violated:
        return None
    if box.contains(verdict.witness):
        raise ValueError("spec is violated inside the box; the net is not certified there")
    return verdict.witness
