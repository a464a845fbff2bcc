"""Linear regions of a ReLU network over a domain.

A region is the set of points sharing one activation pattern, kept only when
it has nonempty interior (relative to the domain). Region constraints are the
closures of the pattern inequalities, intersected with the domain.

:func:`enumerate_regions` walks the region adjacency graph: for each facet of
a known region it finds a point in the facet's relative interior with an LP,
then reads the pattern on the far side with a lexicographic perturbation
``x_f + s*d + s^2*e_1 + ... `` evaluated symbolically in ``s``. This handles
coincident hyperplanes (several bits flipping at once) without any tolerance.
:func:`enumerate_regions_exhaustive` tries all ``2^N`` patterns and is kept
as an oracle.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .lp import ConstraintSystem, Infeasible, Optimal, solve_max
from .network import DimensionError, Network, dot, pattern_affine_maps, vec

DEFAULT_REGION_CAP = 10**6
DEFAULT_ORACLE_CAP = 12
ZERO = Fraction(0)
ONE = Fraction(1)


class RegionCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"region count exceeded the cap of {cap}")
        self.cap = cap


@dataclass(frozen=True)
class FullSpace:
    dimension: int

    def rows(self):
        return []

    def center(self):
        return tuple(ZERO for _ in range(self.dimension))

    def contains(self, x) -> bool:
        return len(x) == self.dimension

    def to_dict(self):
        return {"kind": "full"}


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo, hi = vec(self.lower), vec(self.upper)
        if len(lo) != len(hi) or not lo:
            raise DimensionError("box bounds must be nonempty and of equal length")
        if any(l > u for l, u in zip(lo, hi)):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def rows(self):
        """``x_i <= u_i`` and ``-x_i <= -l_i`` for every coordinate."""
        n = self.dimension
        out = []
        for i in range(n):
            e = tuple(ONE if j == i else ZERO for j in range(n))
            out.append((e, self.upper[i]))
            out.append((tuple(-v for v in e), -self.lower[i]))
        return out

    def center(self):
        return tuple((l + u) / 2 for l, u in zip(self.lower, self.upper))

    def contains(self, x) -> bool:
        return all(l <= v <= u for l, v, u in zip(self.lower, x, self.upper))

    def to_dict(self):
        from .network import fmt

        return {
            "kind": "box",
            "lower": [fmt(v) for v in self.lower],
            "upper": [fmt(v) for v in self.upper],
        }


def domain_from_dict(data: dict, dimension: Optional[int] = None):
    kind = data.get("kind")
    if kind == "full":
        if dimension is None:
            dimension = int(data["dimension"])
        return FullSpace(dimension)
    if kind == "box":
        return Box(data["lower"], data["upper"])
    raise ValueError(f"unknown domain kind {kind!r}")


@dataclass
class EnumStats:
    lp_calls: int = 0
    regions: int = 0


@dataclass(frozen=True)
class Region:
    pattern: tuple
    constraints: ConstraintSystem
    affine: tuple
    # (a, beta) of the nonconstant neuron rows, as a.x <= beta, with their neuron index
    neuron_rows: tuple = field(default=(), repr=False, compare=False)

    def interior_point(self) -> tuple:
        """A point strictly inside the region (all nonconstant rows strict)."""
        n = self.constraints.dimension
        out = _interior_lp(n, self.constraints.rows)
        if out is None:
            raise ValueError("region has empty interior")
        return out[0]

    def evaluate(self, x) -> tuple:
        A, c = self.affine
        return tuple(dot(row, x) + ci for row, ci in zip(A, c))


def _check_domain(net: Network, dom) -> None:
    if dom.dimension != net.input_dim:
        raise DimensionError(
            f"domain has dimension {dom.dimension}, network input_dim is {net.input_dim}"
        )
    if isinstance(dom, Box) and any(l == u for l, u in zip(dom.lower, dom.upper)):
        raise ValueError("region enumeration needs a box with lower < upper in every coordinate")


def pattern_rows(net: Network, pattern):
    """Constraint rows of an activation pattern.

    Returns ``(rows, affine)`` with ``rows = [(k, a, beta), ...]`` meaning
    ``a.x <= beta`` for neuron ``k``, or ``None`` when a neuron whose
    pre-activation is constant contradicts its bit.
    """
    pre, affine = pattern_affine_maps(net, pattern)
    rows = []
    for k, ((a, beta), bit) in enumerate(zip(pre, pattern)):
        if not any(a):
            if (beta > 0) != bool(bit):
                return None
            continue
        if bit:
            rows.append((k, tuple(-v for v in a), beta))
        else:
            rows.append((k, a, -beta))
    return rows, affine


def _interior_lp(n, rows, stats: Optional[EnumStats] = None):
    """Maximize a common margin ``t <= 1`` over ``a.x + t <= b``.

    Returns ``(x, t)`` when ``t > 0`` and ``None`` otherwise.
    """
    lp_rows = [(tuple(a) + (ONE,), b) for a, b in rows]
    lp_rows.append((tuple(ZERO for _ in range(n)) + (ONE,), ONE))
    if stats is not None:
        stats.lp_calls += 1
    out = solve_max([0] * n + [1], ConstraintSystem(n + 1, lp_rows))
    if isinstance(out, Optimal) and out.value > 0:
        return out.point[:n], out.value
    return None


def _row_key(row):
    """Scale-free key: equal keys iff the rows are positive multiples."""
    a, b = row
    lead = abs(next(v for v in a if v != 0))
    return tuple(v / lead for v in a) + (b / lead,)


def pattern_along_curve(net: Network, coeffs) -> tuple:
    """Activation pattern of ``x(s) = sum_k s^k coeffs[k]`` for small ``s > 0``.

    Each pre-activation is a polynomial in ``s``; its sign for small ``s`` is
    the sign of its lowest-order nonzero coefficient.
    """
    h = [vec(v) for v in coeffs]
    bits = []
    for layer in net.hidden_layers:
        z = [[dot(row, hk) for row in layer.weights] for hk in h]
        z[0] = [v + b for v, b in zip(z[0], layer.bias)]
        on = []
        for i in range(layer.out_dim):
            sign = next((zk[i] for zk in z if zk[i] != 0), ZERO)
            on.append(sign > 0)
        bits.extend(on)
        h = [tuple(v if active else ZERO for v, active in zip(zk, on)) for zk in z]
    return tuple(bits)


def _unit_vectors(n):
    return [tuple(ONE if j == i else ZERO for j in range(n)) for i in range(n)]


def _make_region(net, dom, pattern, built) -> Region:
    rows, affine = built
    cs = ConstraintSystem(net.input_dim, [(a, b) for _, a, b in rows] + dom.rows())
    return Region(pattern, cs, affine, tuple(rows))


def seed_pattern(net: Network, dom) -> tuple:
    """Pattern of a full-dimensional region touching the domain's center."""
    return pattern_along_curve(net, [dom.center()] + _unit_vectors(net.input_dim))


def _neighbors(net, dom, region: Region, stats: EnumStats):
    n = net.input_dim
    rows = [(a, b) for _, a, b in region.neuron_rows]
    keys = [_row_key(r) for r in rows]
    dom_rows = dom.rows()
    dom_keys = {_row_key(r) for r in dom_rows}
    for i, ri in enumerate(rows):
        if keys[i] in keys[:i]:
            continue  # same facet, already explored
        if keys[i] in dom_keys:
            continue  # facet lies on the domain boundary
        a, b = ri
        strict = [r for r, k in zip(rows, keys) if k != keys[i]] + dom_rows
        lp_rows = [(tuple(r[0]) + (ONE,), r[1]) for r in strict]
        lp_rows.append((tuple(a) + (ZERO,), b))
        lp_rows.append((tuple(-v for v in a) + (ZERO,), -b))
        lp_rows.append((tuple(ZERO for _ in range(n)) + (ONE,), ONE))
        stats.lp_calls += 1
        out = solve_max([0] * n + [1], ConstraintSystem(n + 1, lp_rows))
        if not (isinstance(out, Optimal) and out.value > 0):
            continue
        x_f = out.point[:n]
        yield pattern_along_curve(net, [x_f, a] + _unit_vectors(n))


def enumerate_regions(
    net: Network, dom, cap: int = DEFAULT_REGION_CAP, stats: Optional[EnumStats] = None
) -> Iterator[Region]:
    """Yield every full-dimensional linear region meeting ``dom`` exactly once.

    Raises :class:`RegionCapExceeded` once more than ``cap`` regions are found.
    """
    _check_domain(net, dom)
    stats = stats if stats is not None else EnumStats()
    seed = seed_pattern(net, dom)
    seen = {seed}
    queue = deque([seed])
    while queue:
        p = queue.popleft()
        built = pattern_rows(net, p)
        if built is None:  # cannot happen for curve-derived patterns
            raise AssertionError(f"pattern {p} has contradictory constant neurons")
        region = _make_region(net, dom, p, built)
        stats.regions += 1
        yield region
        for q in _neighbors(net, dom, region, stats):
            if q not in seen:
                seen.add(q)
                if len(seen) > cap:
                    raise RegionCapExceeded(cap)
                queue.append(q)


def count_regions(net: Network, dom, cap: int = DEFAULT_REGION_CAP, stats=None) -> int:
    return sum(1 for _ in enumerate_regions(net, dom, cap, stats))


def region_is_feasible(net: Network, dom, pattern, stats=None) -> Optional[Region]:
    """Build the region of ``pattern`` if it has nonempty interior in ``dom``."""
    built = pattern_rows(net, pattern)
    if built is None:
        return None
    rows = [(a, b) for _, a, b in built[0]]
    if _interior_lp(net.input_dim, rows + dom.rows(), stats) is None:
        return None
    return _make_region(net, dom, tuple(pattern), built)


def enumerate_regions_exhaustive(
    net: Network, dom, cap: int = DEFAULT_ORACLE_CAP, stats: Optional[EnumStats] = None
) -> Iterator[Region]:
    """Test all ``2^N`` patterns for a nonempty interior. Oracle only."""
    _check_domain(net, dom)
    if net.n_hidden > cap:
        raise RegionCapExceeded(cap)
    for bits in itertools.product((False, True), repeat=net.n_hidden):
        region = region_is_feasible(net, dom, bits, stats)
        if region is not None:
            yield region


def montufar_expression(n: int, L: int, d: int) -> Fraction:
    """Reference growth value ``(n/L)^(L(d-1))``, exact."""
    if min(n, L, d) < 1:
        raise ValueError("n, L, d must be positive")
    return Fraction(n, L) ** (L * (d - 1))
