"""Exact patching of 1-D ReLU networks.

Every continuous piecewise-linear function of one variable is computed
exactly by a one-hidden-layer ReLU network. That lets us build a network
that copies ``theta1`` on small neighbourhoods of a finite support and
copies ``theta2`` everywhere else, then check that a support-only proxy
cannot tell it from ``theta1`` while the exact verifier rejects it.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact import LinearSpec, Verdict, verify_full
from .network import DimensionError, Network, fmt, forward, to_fraction, vec
from .proxy import ALIGNED, EvalSupport, proxy_gap, proxy_score, proxy_verdict
from .regions import DEFAULT_REGION_CAP, FullSpace, enumerate_regions

ZERO = Fraction(0)


@dataclass(frozen=True)
class PWLFunction:
    """Continuous piecewise-linear function of one variable.

    Linear interpolation between breakpoints, extended by ``left_slope`` and
    ``right_slope`` outside them. At least one breakpoint anchors the values.
    """

    breakpoints: tuple
    values: tuple
    left_slope: Fraction
    right_slope: Fraction

    def __post_init__(self):
        bps, vals = vec(self.breakpoints), vec(self.values)
        if not bps or len(bps) != len(vals):
            raise ValueError("need at least one breakpoint and one value per breakpoint")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "left_slope", to_fraction(self.left_slope))
        object.__setattr__(self, "right_slope", to_fraction(self.right_slope))

    def __call__(self, x) -> Fraction:
        x = to_fraction(x)
        bps, vals = self.breakpoints, self.values
        if x <= bps[0]:
            return vals[0] + self.left_slope * (x - bps[0])
        if x >= bps[-1]:
            return vals[-1] + self.right_slope * (x - bps[-1])
        k = bisect.bisect_right(bps, x)
        x0, x1 = bps[k - 1], bps[k]
        v0, v1 = vals[k - 1], vals[k]
        return v0 + (v1 - v0) * (x - x0) / (x1 - x0)

    def segment_slopes(self) -> list:
        """Slopes left of, between, and right of the breakpoints."""
        bps, vals = self.breakpoints, self.values
        inner = [(vals[k + 1] - vals[k]) / (bps[k + 1] - bps[k]) for k in range(len(bps) - 1)]
        return [self.left_slope] + inner + [self.right_slope]

    def normalized(self) -> PWLFunction:
        """Drop breakpoints where the slope does not change (keeps at least one)."""
        slopes = self.segment_slopes()
        keep = [k for k in range(len(self.breakpoints)) if slopes[k] != slopes[k + 1]]
        if not keep:
            keep = [0]
        return PWLFunction(
            [self.breakpoints[k] for k in keep],
            [self.values[k] for k in keep],
            self.left_slope,
            self.right_slope,
        )

    @classmethod
    def constant(cls, value) -> PWLFunction:
        return cls([0], [value], 0, 0)

    def to_dict(self):
        return {
            "breakpoints": [fmt(v) for v in self.breakpoints],
            "values": [fmt(v) for v in self.values],
            "left_slope": fmt(self.left_slope),
            "right_slope": fmt(self.right_slope),
        }


def _check_scalar_net(net: Network):
    if net.input_dim != 1 or net.output_dim != 1:
        raise DimensionError("1-D input and 1-D output required")


def _interval(region) -> tuple:
    """``(lo, hi)`` of a 1-D region, with ``None`` for an infinite end."""
    lo = hi = None
    for (a,), b in region.constraints.rows:
        if a > 0:
            hi = b / a if hi is None else min(hi, b / a)
        elif a < 0:
            lo = b / a if lo is None else max(lo, b / a)
    return lo, hi


def pwl_from_network_1d(net: Network, dom=None, cap: int = DEFAULT_REGION_CAP) -> PWLFunction:
    """Exact piecewise-linear form of a 1-D network over ``dom``.

    Outside a box domain the result extends the end pieces linearly.
    """
    _check_scalar_net(net)
    dom = dom if dom is not None else FullSpace(1)
    pieces = []
    for region in enumerate_regions(net, dom, cap):
        lo, hi = _interval(region)
        pieces.append((lo, hi, region.affine[0][0][0]))
    pieces.sort(key=lambda p: (p[0] is not None, p[0]))
    bps = [p[1] for p in pieces[:-1]]
    if not bps:
        anchor = pieces[0][0] if pieces[0][0] is not None else ZERO
        bps = [anchor]
    vals = [forward(net, [x])[0] for x in bps]
    return PWLFunction(bps, vals, pieces[0][2], pieces[-1][2]).normalized()


def compile_pwl_to_network(f: PWLFunction) -> Network:
    """One-hidden-layer ReLU network computing ``f`` exactly.

    ``f(x) = v0 - s_left ReLU(b0 - x) + s_1 ReLU(x - b0) + sum_k (s_{k+1} - s_k) ReLU(x - b_k)``
    """
    bps, slopes = f.breakpoints, f.segment_slopes()
    b0 = bps[0]
    units = [(-1, b0, -slopes[0]), (1, -b0, slopes[1])]
    for k in range(1, len(bps)):
        units.append((1, -bps[k], slopes[k + 1] - slopes[k]))
    units = [u for u in units if u[2] != 0]
    if not units:
        units = [(0, 0, 0)]
    W1 = [[w] for w, _, _ in units]
    b1 = [b for _, b, _ in units]
    W2 = [[c for _, _, c in units]]
    return Network.from_lists(1, [(W1, b1), (W2, [f.values[0]])])


@dataclass(frozen=True)
class PatchPlan:
    support: Optional[EvalSupport]
    epsilon: Fraction
    plateau: Optional[Fraction] = None

    def __post_init__(self):
        eps = to_fraction(self.epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        plateau = eps / 2 if self.plateau is None else to_fraction(self.plateau)
        if not 0 < plateau < eps:
            raise ValueError("plateau must satisfy 0 < plateau < epsilon")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "plateau", plateau)
        if self.support is not None:
            if self.support.dimension != 1:
                raise DimensionError("patching needs 1-D support points")
            pts = self.centers()
            if any(b - a <= 2 * eps for a, b in zip(pts, pts[1:])):
                raise ValueError("support points must be more than 2*epsilon apart")

    def centers(self) -> list:
        if self.support is None:
            return []
        return sorted(p[0] for p in self.support.points)

    def outside(self, x) -> bool:
        """True if ``x`` is outside every closed epsilon-neighbourhood."""
        x = to_fraction(x)
        return all(abs(x - s) > self.epsilon for s in self.centers())

    def gaps(self) -> list:
        """Open intervals outside the neighbourhoods; ``None`` marks an infinite end."""
        cs = self.centers()
        if not cs:
            return [(None, None)]
        eps = self.epsilon
        out = [(None, cs[0] - eps)]
        out += [(a + eps, b - eps) for a, b in zip(cs, cs[1:])]
        out.append((cs[-1] + eps, None))
        return out

    def to_dict(self):
        return {
            "support": self.support.to_dict() if self.support is not None else None,
            "epsilon": fmt(self.epsilon),
            "plateau": fmt(self.plateau),
        }


def patch(f1: PWLFunction, f2: PWLFunction, plan: PatchPlan) -> PWLFunction:
    """``f1`` on each plateau ``[s-p, s+p]``, ``f2`` off the ``[s-eps, s+eps]``, linear between."""
    eps, p = plan.epsilon, plan.plateau
    nodes = {}
    centers = plan.centers()
    for x in f2.breakpoints:
        if plan.outside(x):
            nodes[x] = f2(x)
    for s in centers:
        nodes[s - eps] = f2(s - eps)
        nodes[s + eps] = f2(s + eps)
        nodes[s - p] = f1(s - p)
        nodes[s + p] = f1(s + p)
        for x in f1.breakpoints:
            if s - p < x < s + p:
                nodes[x] = f1(x)
    xs = sorted(nodes)
    return PWLFunction(xs, [nodes[x] for x in xs], f2.left_slope, f2.right_slope).normalized()


def violation_outside(f: PWLFunction, spec: LinearSpec, plan: PatchPlan):
    """A point outside every neighbourhood where ``c f(x) > b``, or None.

    ``f`` is linear between breakpoints, so the supremum over each gap is
    reached at a breakpoint, approached at a gap end, or unbounded at an
    infinite end. Each case yields an exact point.
    """
    (c0,) = spec.c

    def margin(x):
        return c0 * f(x) - spec.b

    for lo, hi in plan.gaps():
        inner = [x for x in f.breakpoints if (lo is None or x > lo) and (hi is None or x < hi)]
        for x in inner:
            if margin(x) > 0:
                return x
        if lo is not None and margin(lo) > 0:
            nxt = inner[0] if inner else hi
            step = (nxt - lo) / 2 if nxt is not None else Fraction(1)
            while margin(lo + step) <= 0:
                step /= 2
            return lo + step
        if hi is not None and margin(hi) > 0:
            prv = inner[-1] if inner else lo
            step = (hi - prv) / 2 if prv is not None else Fraction(1)
            while margin(hi - step) <= 0:
                step /= 2
            return hi - step
        if lo is None and c0 * f.left_slope < 0:
            start = inner[0] if inner else (hi if hi is not None else f.breakpoints[0])
            step = Fraction(1)
            while margin(start - step) <= 0:
                step *= 2
            return start - step
        if hi is None and c0 * f.right_slope > 0:
            start = inner[-1] if inner else (lo if lo is not None else f.breakpoints[-1])
            step = Fraction(1)
            while margin(start + step) <= 0:
                step *= 2
            return start + step
    return None


class PreconditionError(ValueError):
    def __init__(self, leg: str, message: str):
        super().__init__(f"{leg}: {message}")
        self.leg = leg


@dataclass
class DemonstrationReport:
    theta1: Network
    theta2: Network
    theta_prime: Network
    plan: PatchPlan
    spec: LinearSpec
    tau: Fraction
    score_theta1: Fraction
    score_theta_prime: Fraction
    verdict_theta_prime: Verdict
    off_support_witness: Optional[tuple]
    gap: Fraction
    assertions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.assertions) and all(self.assertions.values())

    def to_dict(self) -> dict:
        return {
            "theta1": self.theta1.to_dict(),
            "theta2": self.theta2.to_dict(),
            "theta_prime": self.theta_prime.to_dict(),
            "plan": self.plan.to_dict(),
            "spec": self.spec.to_dict(),
            "tau": fmt(self.tau),
            "proxy_score_theta1": fmt(self.score_theta1),
            "proxy_score_theta_prime": fmt(self.score_theta_prime),
            "exact_verdict_theta_prime": self.verdict_theta_prime.to_dict(),
            "off_support_witness": (
                [fmt(v) for v in self.off_support_witness] if self.off_support_witness else None
            ),
            "proxy_gap": fmt(self.gap),
            "assertions": dict(self.assertions),
            "passed": self.passed,
        }


def build_unsound_pair(
    theta1: Network,
    theta2: Network,
    plan: PatchPlan,
    spec: LinearSpec,
    tau,
    cap: int = DEFAULT_REGION_CAP,
) -> DemonstrationReport:
    """Patch ``theta1`` onto ``theta2`` around the support and collect the evidence.

    Raises :class:`PreconditionError` when ``theta1`` is not certified or
    ``theta2`` has no violation away from the neighbourhoods.
    """
    for net in (theta1, theta2):
        _check_scalar_net(net)
    spec.check_dims(theta1)
    if plan.support is None:
        raise PreconditionError("support", "the plan has no support points")
    tau = to_fraction(tau)
    full = FullSpace(1)
    if not verify_full(theta1, spec, full, cap).is_certified:
        raise PreconditionError("theta1", "not certified on the whole input space")
    f1 = pwl_from_network_1d(theta1, full, cap)
    f2 = pwl_from_network_1d(theta2, full, cap)
    if violation_outside(f2, spec, plan) is None:
        raise PreconditionError("theta2", "no violation outside the patched neighbourhoods")

    theta_p = compile_pwl_to_network(patch(f1, f2, plan))
    support = plan.support

    same_on_support = all(forward(theta_p, x) == forward(theta1, x) for x in support.points)
    score1 = proxy_score(theta1, spec, support)
    score_p = proxy_score(theta_p, spec, support)
    verdict_p = verify_full(theta_p, spec, full, cap)
    witness = None
    if verdict_p.is_violated:
        if plan.outside(verdict_p.witness[0]):
            witness = verdict_p.witness
        else:
            x = violation_outside(pwl_from_network_1d(theta_p, full, cap), spec, plan)
            witness = (x,) if x is not None else None
    gap = proxy_gap(theta_p, spec, support, full, cap)
    assertions = {
        "on_support_agreement": same_on_support and score_p == score1,
        "proxy_verdict_parity": proxy_verdict(score1, tau) == ALIGNED
        and proxy_verdict(score_p, tau) == ALIGNED,
        "exact_violation_off_support": verdict_p.is_violated
        and witness is not None
        and plan.outside(witness[0])
        and spec.margin(theta_p, witness) > 0,
        "proxy_gap_one": gap == 1,
    }
    return DemonstrationReport(
        theta1, theta2, theta_p, plan, spec, tau, score1, score_p, verdict_p, witness, gap, assertions
    )
