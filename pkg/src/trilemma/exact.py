"""Sound and complete verification of linear output specs.

The verifier enumerates every linear region of the network over the domain
and solves one exact LP per region. It never answers Unknown; its cost is
the region count, which grows exponentially with depth.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .lp import ConstraintSystem, Optimal, Unbounded, solve_max
from .network import DimensionError, Layer, Network, dot, fmt, forward, to_fraction, vec
from .regions import DEFAULT_REGION_CAP, EnumStats, FullSpace, enumerate_regions

CERTIFIED = "certified"
VIOLATED = "violated"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class LinearSpec:
    """``c . f(x) <= b`` for every ``x`` in the domain."""

    c: tuple
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", vec(self.c))
        object.__setattr__(self, "b", to_fraction(self.b))

    def value(self, y) -> Fraction:
        return dot(self.c, y)

    def margin(self, net: Network, x) -> Fraction:
        """``c . f(x) - b``; positive means violated at ``x``."""
        return self.value(forward(net, x)) - self.b

    def holds_at(self, net: Network, x) -> bool:
        return self.margin(net, x) <= 0

    def check_dims(self, net: Network) -> None:
        if len(self.c) != net.output_dim:
            raise DimensionError(
                f"spec has {len(self.c)} coefficients, network has {net.output_dim} outputs"
            )

    def to_dict(self) -> dict:
        return {"c": [fmt(v) for v in self.c], "b": fmt(self.b)}


@dataclass
class VerifyStats:
    regions_examined: int = 0
    lp_calls: int = 0
    elapsed: float = 0.0

    def to_dict(self):
        return {
            "regions_examined": self.regions_examined,
            "lp_calls": self.lp_calls,
            "elapsed_seconds": self.elapsed,
        }


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[tuple] = None
    margin: Optional[Fraction] = None
    stats: VerifyStats = field(default_factory=VerifyStats, compare=False)

    @classmethod
    def certified(cls, stats=None):
        return cls(CERTIFIED, stats=stats or VerifyStats())

    @classmethod
    def unknown(cls, stats=None):
        return cls(UNKNOWN, stats=stats or VerifyStats())

    @classmethod
    def violated(cls, witness, margin, stats=None):
        if margin <= 0:
            raise ValueError("a violation needs a positive margin")
        return cls(VIOLATED, tuple(witness), margin, stats or VerifyStats())

    @property
    def is_certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def is_violated(self) -> bool:
        return self.status == VIOLATED

    def binary(self) -> str:
        """Collapse to aligned/unaligned. Only Certified maps to aligned."""
        return "aligned" if self.status == CERTIFIED else "unaligned"

    def to_dict(self) -> dict:
        out = {"status": self.status, "binary": self.binary(), "stats": self.stats.to_dict()}
        if self.witness is not None:
            out["witness"] = [fmt(v) for v in self.witness]
            out["margin"] = fmt(self.margin)
        return out


def _violation_in_region(region, spec: LinearSpec, net: Network, stats: VerifyStats):
    """Witness point with ``c.f(x) > b`` inside the region's closure, or None."""
    A, c0 = region.affine
    # c.(A x + c0) = g.x + g0
    g = tuple(dot(spec.c, [A[i][j] for i in range(len(A))]) for j in range(len(A[0])))
    g0 = dot(spec.c, c0)
    stats.lp_calls += 1
    out = solve_max(g, region.constraints)
    if isinstance(out, Optimal):
        if out.value + g0 > spec.b:
            return out.point
        return None
    if isinstance(out, Unbounded):
        step = Fraction(1)
        while True:
            x = tuple(p + step * r for p, r in zip(out.base_point, out.ray))
            if dot(g, x) + g0 > spec.b:
                return x
            step *= 2
    raise AssertionError("a region's constraint system cannot be infeasible")


def verify_regions(net: Network, regions, specs, stats: VerifyStats):
    """Check several specs over one region stream; first violation wins.

    Returns ``(spec_index, witness)`` or ``None`` when every spec holds.
    """
    for region in regions:
        stats.regions_examined += 1
        for k, spec in enumerate(specs):
            x = _violation_in_region(region, spec, net, stats)
            if x is not None:
                return k, x
    return None


def verify_full(net: Network, spec: LinearSpec, dom, cap: int = DEFAULT_REGION_CAP) -> Verdict:
    """Decide ``c.f(x) <= b`` on all of ``dom`` exactly.

    Returns Certified, or Violated with an exact witness. Raises
    :class:`~trilemma.regions.RegionCapExceeded` rather than guessing.
    """
    spec.check_dims(net)
    stats = VerifyStats()
    enum_stats = EnumStats()
    t0 = time.perf_counter()
    try:
        hit = verify_regions(net, enumerate_regions(net, dom, cap, enum_stats), [spec], stats)
    finally:
        stats.lp_calls += enum_stats.lp_calls
        stats.elapsed = time.perf_counter() - t0
    if hit is None:
        return Verdict.certified(stats)
    x = hit[1]
    margin = spec.margin(net, x)
    return Verdict.violated(x, margin, stats)


def max_over_domain(net: Network, c, dom, cap: int = DEFAULT_REGION_CAP):
    """Exact ``max c.f(x)`` over ``dom`` as ``(value, argmax)``, or None if unbounded."""
    c = vec(c)
    best = None
    for region in enumerate_regions(net, dom, cap):
        A, c0 = region.affine
        g = tuple(dot(c, [A[i][j] for i in range(len(A))]) for j in range(net.input_dim))
        out = solve_max(g, region.constraints)
        if isinstance(out, Unbounded):
            return None
        value = out.value + dot(c, c0)
        if best is None or value > best[0]:
            best = (value, out.point)
    return best


# stacked difference network --------------------------------------------


def _identity_block(m):
    return [[int(i == j) for j in range(m)] for i in range(m)]


def deepen(net: Network) -> Network:
    """Same function with one more hidden layer, via ``y = ReLU(y) - ReLU(-y)``."""
    out = net.output_layer
    m = out.out_dim
    W = list(out.weights) + [tuple(-v for v in row) for row in out.weights]
    b = list(out.bias) + [-v for v in out.bias]
    eye = _identity_block(m)
    last = [row + [-v for v in row] for row in eye]
    return Network(net.input_dim, net.hidden_layers + (Layer(W, b), Layer(last, [0] * m)))


def _block_diag(W1, W2):
    c1 = len(W1[0]) if W1 else 0
    c2 = len(W2[0]) if W2 else 0
    top = [list(r) + [0] * c2 for r in W1]
    bottom = [[0] * c1 + list(r) for r in W2]
    return top + bottom


def stacked_difference(net1: Network, net2: Network) -> Network:
    """Network computing ``f1(x) - f2(x)`` (side-by-side copies, exact)."""
    if net1.input_dim != net2.input_dim or net1.output_dim != net2.output_dim:
        raise DimensionError("networks must agree on input and output dimensions")
    while len(net1.layers) < len(net2.layers):
        net1 = deepen(net1)
    while len(net2.layers) < len(net1.layers):
        net2 = deepen(net2)
    layers = []
    hidden = list(zip(net1.hidden_layers, net2.hidden_layers))
    for k, (l1, l2) in enumerate(hidden):
        if k == 0:
            W = list(l1.weights) + list(l2.weights)
        else:
            W = _block_diag(l1.weights, l2.weights)
        layers.append(Layer(W, list(l1.bias) + list(l2.bias)))
    o1, o2 = net1.output_layer, net2.output_layer
    if hidden:
        W = [list(r1) + [-v for v in r2] for r1, r2 in zip(o1.weights, o2.weights)]
    else:
        W = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(o1.weights, o2.weights)]
    bias = [a - b for a, b in zip(o1.bias, o2.bias)]
    layers.append(Layer(W, bias))
    return Network(net1.input_dim, tuple(layers))


def equivalence_check(net1: Network, net2: Network, dom, cap: int = DEFAULT_REGION_CAP):
    """Exact check that ``f1 = f2`` on ``dom``.

    Returns ``(True, None)`` or ``(False, x)`` with ``f1(x) != f2(x)``.
    """
    g = stacked_difference(net1, net2)
    m = g.output_dim
    specs = []
    for i in range(m):
        e = [int(j == i) for j in range(m)]
        specs.append(LinearSpec(e, 0))
        specs.append(LinearSpec([-v for v in e], 0))
    stats = VerifyStats()
    hit = verify_regions(g, enumerate_regions(g, dom, cap), specs, stats)
    if hit is None:
        return True, None
    x = hit[1]
    if forward(net1, x) == forward(net2, x):
        raise AssertionError("equivalence witness does not separate the networks")
    return False, x
