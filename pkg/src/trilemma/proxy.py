"""Proxy scoring on a finite evaluation support.

The proxy is the exact fraction of support points where the spec holds. It
is defined for every network and costs one forward pass per point, but it
only ever sees ``{f(x) : x in S}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import LinearSpec, verify_full
from .network import DimensionError, Network, fmt, forward, to_fraction, vec
from .regions import DEFAULT_REGION_CAP, Box

ALIGNED = "aligned"
UNALIGNED = "unaligned"


@dataclass(frozen=True)
class EvalSupport:
    points: tuple
    seed: Optional[int] = None

    def __post_init__(self):
        pts = tuple(vec(p) for p in self.points)
        if not pts:
            raise ValueError("evaluation support must be nonempty")
        if len({len(p) for p in pts}) != 1:
            raise DimensionError("support points differ in dimension")
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return len(self.points[0])

    def __len__(self):
        return len(self.points)

    def to_dict(self) -> dict:
        out = {"points": [[fmt(v) for v in p] for p in self.points]}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


@dataclass(frozen=True)
class ProxyResult:
    score: Fraction
    tau: Fraction
    verdict: str

    def to_dict(self):
        return {"score": fmt(self.score), "tau": fmt(self.tau), "verdict": self.verdict}


def sample_support(box: Box, size: int, seed: int, denom: int = 1000) -> EvalSupport:
    """``size`` seeded rational points in ``box`` on a ``1/denom`` lattice."""
    rng = random.Random(seed)
    pts = []
    for _ in range(size):
        pts.append(
            tuple(
                l + (u - l) * Fraction(rng.randint(0, denom), denom)
                for l, u in zip(box.lower, box.upper)
            )
        )
    return EvalSupport(pts, seed)


def proxy_score(net: Network, spec: LinearSpec, support: EvalSupport) -> Fraction:
    spec.check_dims(net)
    if support.dimension != net.input_dim:
        raise DimensionError("support dimension does not match the network input")
    passed = sum(1 for x in support.points if spec.value(forward(net, x)) <= spec.b)
    return Fraction(passed, len(support))


def proxy_verdict(score, tau) -> str:
    """Aligned iff ``score >= tau``."""
    score, tau = to_fraction(score), to_fraction(tau)
    if not (0 <= score <= 1 and 0 <= tau <= 1):
        raise ValueError("score and tau must lie in [0, 1]")
    return ALIGNED if score >= tau else UNALIGNED


def proxy_result(net: Network, spec: LinearSpec, support: EvalSupport, tau) -> ProxyResult:
    score = proxy_score(net, spec, support)
    return ProxyResult(score, to_fraction(tau), proxy_verdict(score, tau))


def true_objective(net: Network, spec: LinearSpec, dom, cap: int = DEFAULT_REGION_CAP) -> int:
    """Indicator of the spec holding on all of ``dom`` (exact)."""
    return 1 if verify_full(net, spec, dom, cap).is_certified else 0


def proxy_gap(
    net: Network, spec: LinearSpec, support: EvalSupport, dom, cap: int = DEFAULT_REGION_CAP
) -> Fraction:
    """``|A* - proxy|`` with A* the exact indicator."""
    return abs(true_objective(net, spec, dom, cap) - proxy_score(net, spec, support))
