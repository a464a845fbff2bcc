"""Experiment runner for the three verification tracks.

Each track pairs two properties that a verifier can have at once and shows
the third one failing, with machine-checked evidence:

``sg_not_t``  sound and general (exact region search) but the work grows
              exponentially on the sawtooth family
``st_not_g``  sound and tractable (box-bounded, IBP, proxy) but blind to
              function-preserving reparameterizations and to inputs off the box
``gt_not_s``  general and tractable (finite-support proxy) but fooled by a
              network patched to agree with a certified one on the support

Everything is seeded; the only nondeterministic fields are wall-clock times,
whose keys end in ``_seconds`` or ``_measured``.
"""

from __future__ import annotations

import csv
import gc
import math
import platform
import random
import statistics
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .bounded import EXACT_ON_BOX, IBP, generality_gap_witness, ibp_bounds, ibp_operation_count, verify_bounded
from .diagonal import (
    PatchPlan,
    PreconditionError,
    build_unsound_pair,
    pwl_from_network_1d,
    violation_outside,
)
from .exact import LinearSpec, equivalence_check, max_over_domain, verify_full
from .formats import write_json
from .generators import abs_net, constant_net, random_network, random_paired_network, relu_net, sawtooth
from .network import Network, fmt, to_fraction
from .proxy import EvalSupport, proxy_result, sample_support
from .regions import DEFAULT_REGION_CAP, Box, EnumStats, FullSpace, RegionCapExceeded, count_regions, montufar_expression
from .symmetry import (
    Permutation,
    apply_transform,
    canonicalize,
    generic_probes,
    has_distinct_rows,
    random_symmetric_partner,
    representation_distance,
    synthetic_alignment_objective,
)

GENERATION_RETRIES = 200
IBP_REPEATS = 20
IBP_BATCHES = 5
IBP_EXPONENT_LIMIT = 1.25  # measured time ~ N^k; linear means k <= 1 up to noise


@dataclass
class TrilemmaConfig:
    seed: int = 0
    region_cap: int = DEFAULT_REGION_CAP  # bounds the depth sweep only
    delta: Fraction = Fraction(0)
    tau: Fraction = Fraction(1)
    grid_density: int = 100  # generic probes per symmetric pair
    depth_sweep: list = field(default_factory=lambda: list(range(1, 11)))
    output_dir: str = "trilemma_out"
    n_pairs: int = 100
    n_triples: int = 50
    support_sizes: list = field(default_factory=lambda: [1, 4, 16])

    def __post_init__(self):
        self.delta = to_fraction(self.delta)
        self.tau = to_fraction(self.tau)
        self.depth_sweep = [int(v) for v in self.depth_sweep]
        self.support_sizes = [int(v) for v in self.support_sizes]
        for name in ("region_cap", "grid_density", "n_pairs", "n_triples"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.depth_sweep or self.depth_sweep[0] < 1:
            raise ValueError("depth_sweep must be nonempty with depths >= 1")
        if any(b <= a for a, b in zip(self.depth_sweep, self.depth_sweep[1:])):
            raise ValueError("depth_sweep must be increasing")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")
        if any(s < 1 for s in self.support_sizes):
            raise ValueError("support sizes must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> TrilemmaConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["delta"] = fmt(self.delta)
        out["tau"] = fmt(self.tau)
        return out


def _rng(cfg: TrilemmaConfig, track: str) -> random.Random:
    return random.Random(f"{cfg.seed}:{track}")


# sound + general, not tractable -----------------------------------------


def _ibp_seconds(net, box) -> float:
    """Best-of-batches mean time of one IBP pass (less sensitive to noise)."""
    best = float("inf")
    gc.collect()
    gc.disable()
    try:
        for _ in range(IBP_BATCHES):
            t0 = time.perf_counter()
            for _ in range(IBP_REPEATS):
                ibp_bounds(net, box)
            best = min(best, (time.perf_counter() - t0) / IBP_REPEATS)
    finally:
        gc.enable()
    return best


def growth_exponent(xs, ys) -> float:
    """Median pairwise slope of ``log y`` against ``log x`` (robust to timing noise)."""
    slopes = [
        math.log(ys[j] / ys[i]) / math.log(xs[j] / xs[i])
        for i in range(len(xs))
        for j in range(i + 1, len(xs))
        if xs[j] != xs[i]
    ]
    return statistics.median(slopes) if slopes else 0.0


def experiment_sg_not_t(cfg: TrilemmaConfig) -> dict:
    """Sawtooth depth sweep: region count, exact work and IBP work per depth."""
    box = Box([0], [1])
    spec = LinearSpec([1], 1)
    rows = []
    truncated = False
    for L in cfg.depth_sweep:
        net = sawtooth(L)
        row = {
            "depth": L,
            "neurons": net.n_hidden,
            "expected_regions": 2**L,
            "montufar_reference": fmt(montufar_expression(net.n_hidden, L, 2)),
        }
        try:
            stats = EnumStats()
            row["regions"] = count_regions(net, box, cfg.region_cap, stats)
            row["enum_lp_calls"] = stats.lp_calls
            verdict = verify_full(net, spec, box, cfg.region_cap)
        except RegionCapExceeded:
            row["status"] = "cap_reached"
            rows.append(row)
            truncated = True
            break
        row["exact_verdict"] = verdict.status
        row["exact_lp_calls"] = verdict.stats.lp_calls
        row["exact_seconds"] = verdict.stats.elapsed
        ibp = verify_bounded(net, spec, box, IBP)
        row["ibp_verdict"] = ibp.status
        row["ibp_binary"] = ibp.binary()
        row["ibp_ops"] = ibp_operation_count(net)
        row["ibp_seconds"] = _ibp_seconds(net, box)
        row["status"] = "ok"
        rows.append(row)

    done = [r for r in rows if r["status"] == "ok"]
    steps = list(zip(done, done[1:]))
    ibp_exponent = growth_exponent([r["neurons"] for r in done], [r["ibp_seconds"] for r in done])
    assertions = {
        "region_count_exact": all(r["regions"] == r["expected_regions"] for r in done),
        "regions_double_per_step": all(
            b["regions"] >= a["regions"] * 2 ** (b["depth"] - a["depth"]) for a, b in steps
        ),
        "exact_work_doubles_per_step": all(
            b["exact_lp_calls"] >= a["exact_lp_calls"] * 2 ** (b["depth"] - a["depth"])
            for a, b in steps
        ),
        # ops/neuron never increases, i.e. IBP work is at most linear in N
        "ibp_work_linear": all(
            b["ibp_ops"] * a["neurons"] <= a["ibp_ops"] * b["neurons"] for a, b in steps
        ),
        "ibp_time_linear": len(done) < 2 or ibp_exponent <= IBP_EXPONENT_LIMIT,
        "exact_certifies": all(r["exact_verdict"] == "certified" for r in done),
    }
    return {
        "rows": rows,
        "truncated": truncated,
        "ibp_exponent_measured": ibp_exponent,
        "assertions": assertions,
    }


# sound + tractable, not general ----------------------------------------


def _pair_spec(rng, net: Network, box: Box, cap: int) -> LinearSpec:
    """Spec ``c y <= b`` with ``b`` the exact max over the box, so it is certified there."""
    c = [rng.choice([1, -1])]
    value, _ = max_over_domain(net, c, box, cap)
    return LinearSpec(c, value + Fraction(rng.randint(0, 4), 4))


def _verdicts(net, spec, box, support, tau, cap) -> dict:
    return {
        "exact_full": verify_full(net, spec, FullSpace(net.input_dim), cap),
        "exact_on_box": verify_bounded(net, spec, box, EXACT_ON_BOX, cap),
        "ibp": verify_bounded(net, spec, box, IBP),
        "proxy": proxy_result(net, spec, support, tau),
    }


def _verdict_key(v):
    return getattr(v, "status", None) or v.verdict


def symmetric_pair_exhibit(
    net: Network,
    partner: Network,
    transforms,
    spec: LinearSpec,
    box: Box,
    support: EvalSupport,
    cfg: TrilemmaConfig,
    probe_seed: int,
) -> dict:
    """All checks for one (net, partner) pair."""
    cap = DEFAULT_REGION_CAP
    n = net.input_dim
    equivalent, eq_witness = equivalence_check(net, partner, FullSpace(n), cap)
    probes = generic_probes([net, partner], Box([-4] * n, [4] * n), cfg.grid_density, probe_seed)
    positive = sum(1 for x in probes if representation_distance(net, partner, x) > 0)
    a1, a2 = synthetic_alignment_objective(net), synthetic_alignment_objective(partner)
    v1 = _verdicts(net, spec, box, support, cfg.tau, cap)
    v2 = _verdicts(partner, spec, box, support, cfg.tau, cap)
    witness = generality_gap_witness(net, spec, box, cap) if v1["exact_on_box"].is_certified else None
    distinct = has_distinct_rows(net)
    assertions = {
        "equivalence_certified": equivalent,
        "distance_positive_at_all_probes": positive == len(probes),
        "synthetic_objective_differs": (a1 != a2) if distinct else True,
        "verdicts_identical": all(_verdict_key(v1[k]) == _verdict_key(v2[k]) for k in v1),
        # when the full-space verdict is a violation, the box-certified net must
        # have a witness off the box
        "generality_gap_consistent": v1["exact_on_box"].is_certified
        and ((witness is not None) == v1["exact_full"].is_violated)
        and (witness is None or not box.contains(witness)),
    }
    return {
        "network": net.to_dict(),
        "partner": partner.to_dict(),
        "transforms": [t.to_dict() for t in transforms],
        "spec": spec.to_dict(),
        "box": box.to_dict(),
        "equivalence_witness": [fmt(v) for v in eq_witness] if eq_witness else None,
        "probes": len(probes),
        "probes_with_positive_distance": positive,
        "distinct_rows": distinct,
        "synthetic_objective": [a1, a2],
        "verdicts": {k: [v1[k].to_dict(), v2[k].to_dict()] for k in v1},
        "gap_witness": [fmt(v) for v in witness] if witness else None,
        "assertions": assertions,
        "passed": all(assertions.values()),
    }


def _random_pair_net(rng) -> Network:
    n = rng.choice([1, 2])
    depth = rng.choice([1, 2])
    widths = [rng.randint(2, 3) for _ in range(depth)]
    net, _ = canonicalize(random_paired_network(rng, n, widths))
    return net


def experiment_st_not_g(cfg: TrilemmaConfig) -> dict:
    rng = _rng(cfg, "st_not_g")
    pairs = []

    # the |x| exhibit, certified on [-1, 1] for y <= 1 and violated at |x| > 1
    net, _ = canonicalize(abs_net())
    partner, transforms = random_symmetric_partner(net, rng.randrange(2**32))
    box = Box([-1], [1])
    support = sample_support(box, 16, rng.randrange(2**32))
    abs_pair = symmetric_pair_exhibit(
        net, partner, transforms, LinearSpec([1], 1), box, support, cfg, rng.randrange(2**32)
    )
    abs_pair["name"] = "abs"

    for k in range(cfg.n_pairs):
        net = _random_pair_net(rng)
        partner, transforms = random_symmetric_partner(net, rng.randrange(2**32))
        n = net.input_dim
        box = Box([-2] * n, [2] * n)
        spec = _pair_spec(rng, net, box, DEFAULT_REGION_CAP)
        support = sample_support(box, 16, rng.randrange(2**32))
        ex = symmetric_pair_exhibit(net, partner, transforms, spec, box, support, cfg, rng.randrange(2**32))
        ex["name"] = f"pair-{k}"
        pairs.append(ex)

    # bounded verifier off its box: ReLU(x - 1) <= 0 holds on [-1, 1] only
    relu = relu_net(1, -1)
    gap_box = Box([-1], [1])
    gap_spec = LinearSpec([1], 0)
    gap_verdict = verify_bounded(relu, gap_spec, gap_box, EXACT_ON_BOX)
    gap_witness = generality_gap_witness(relu, gap_spec, gap_box)
    gap_exhibit = {
        "network": relu.to_dict(),
        "spec": gap_spec.to_dict(),
        "box": gap_box.to_dict(),
        "box_verdict": gap_verdict.to_dict(),
        "ibp_verdict": verify_bounded(relu, gap_spec, gap_box, IBP).to_dict(),
        "witness": [fmt(v) for v in gap_witness] if gap_witness else None,
    }

    # identity control: nothing moves, nothing to exhibit
    control_net = pairs[0]["network"] if pairs else None
    base = Network.from_dict(control_net) if control_net else abs_net()
    ident = apply_transform(base, Permutation(0, range(base.hidden_widths[0])))
    control = {
        "objective_unchanged": synthetic_alignment_objective(ident)
        == synthetic_alignment_objective(base),
        "network_unchanged": ident == base,
        "exhibits": "skipped",
    }

    passed = sum(1 for p in pairs if p["passed"])
    assertions = {
        "abs_pair_passes": abs_pair["passed"] and abs_pair["gap_witness"] is not None,
        "all_pairs_pass": passed == len(pairs),
        "gap_exhibit_found": gap_verdict.is_certified
        and gap_witness is not None
        and not gap_box.contains(gap_witness),
        "identity_control": control["objective_unchanged"] and control["network_unchanged"],
    }
    return {
        "abs_pair": abs_pair,
        "pairs": pairs,
        "pairs_passed": passed,
        "random_gap_exhibits": sum(1 for p in pairs if p["gap_witness"]),
        "gap_exhibit": gap_exhibit,
        "identity_control": control,
        "assertions": assertions,
    }


# general + tractable, not sound ----------------------------------------


def _random_1d_net(rng) -> Network:
    depth = rng.choice([1, 2])
    return random_network(rng, 1, [rng.randint(1, 4) for _ in range(depth)])


def _certified_net_and_spec(rng, cap: int):
    """Random 1-D net with a spec it satisfies everywhere."""
    for _ in range(GENERATION_RETRIES):
        net = _random_1d_net(rng)
        f = pwl_from_network_1d(net, FullSpace(1), cap)
        slack = Fraction(rng.randint(0, 4), 4)
        if f.left_slope >= 0 and f.right_slope <= 0:
            return net, LinearSpec([1], max(f.values) + slack)
        if f.left_slope <= 0 and f.right_slope >= 0:
            return net, LinearSpec([-1], -min(f.values) + slack)
    raise RuntimeError("no globally certified network after bounded retries")


def _support(rng, size: int, half_width: int) -> EvalSupport:
    grid = [Fraction(k, 2) for k in range(-2 * half_width, 2 * half_width + 1)]
    if size > len(grid):
        raise ValueError(f"support of size {size} does not fit on the grid")
    return EvalSupport([(p,) for p in sorted(rng.sample(grid, size))])


def random_triple(rng, size: int, cap: int, half_width: int = 4):
    """``(theta1, theta2, plan, spec)`` meeting the patching preconditions."""
    theta1, spec = _certified_net_and_spec(rng, cap)
    plan = PatchPlan(_support(rng, size, half_width), Fraction(1, 8))
    for _ in range(GENERATION_RETRIES):
        theta2 = _random_1d_net(rng)
        f2 = pwl_from_network_1d(theta2, FullSpace(1), cap)
        if violation_outside(f2, spec, plan) is not None:
            return theta1, theta2, plan, spec
    raise RuntimeError("no violating theta2 after bounded retries")


def _report_row(name, report) -> dict:
    out = report.to_dict()
    out["name"] = name
    return out


def experiment_gt_not_s(cfg: TrilemmaConfig) -> dict:
    rng = _rng(cfg, "gt_not_s")
    cap = DEFAULT_REGION_CAP
    reports, errors = [], []

    plan = PatchPlan(EvalSupport([(0,)]), Fraction(1, 4))
    baseline = build_unsound_pair(constant_net(0), constant_net(1), plan, LinearSpec([1], 0), cfg.tau, cap)
    baseline_row = _report_row("baseline", baseline)

    def run(name, size, half_width):
        try:
            t1, t2, pl, spec = random_triple(rng, size, cap, half_width)
            reports.append(_report_row(name, build_unsound_pair(t1, t2, pl, spec, cfg.tau, cap)))
        except (RuntimeError, PreconditionError) as exc:
            errors.append({"name": name, "error": str(exc)})

    for k in range(cfg.n_triples):
        run(f"triple-{k}", rng.randint(1, 6), 4)
    sweep_start = len(reports)
    for size in cfg.support_sizes:
        run(f"support-{size}", size, max(4, size))
    sweep = reports[sweep_start:]

    gaps = {}
    for r in reports:
        gaps[r["proxy_gap"]] = gaps.get(r["proxy_gap"], 0) + 1
    passed = sum(1 for r in reports if r["passed"])
    assertions = {
        "baseline_passes": baseline.passed and baseline.gap == 1,
        "all_triples_pass": passed == len(reports) and not errors,
        "all_gaps_one": all(r["proxy_gap"] == "1" for r in reports),
        "gap_one_at_every_support_size": len(sweep) == len(cfg.support_sizes)
        and all(r["proxy_gap"] == "1" for r in sweep),
    }
    return {
        "baseline": baseline_row,
        "reports": reports,
        "generation_errors": errors,
        "passed": passed,
        "gap_distribution": gaps,
        "assertions": assertions,
    }


# suite ------------------------------------------------------------------

TRACKS = (
    ("sg_not_t", "S+G", "T", experiment_sg_not_t),
    ("st_not_g", "S+T", "G", experiment_st_not_g),
    ("gt_not_s", "G+T", "S", experiment_gt_not_s),
)


def environment_fingerprint() -> dict:
    try:
        import gmpy2

        gmp = gmpy2.version()
    except ImportError:  # pragma: no cover
        gmp = None
    return {
        "python": sys.version.split()[0],
        "implementation": platform.python_implementation(),
        "platform": platform.platform(),
        "gmpy2": gmp,
    }


def run_trilemma_suite(cfg: TrilemmaConfig, write: bool = False) -> dict:
    """Run all tracks; a failing track is recorded without stopping the others."""
    tracks, summary = {}, []
    t_suite = time.perf_counter()
    for name, held, fails, fn in TRACKS:
        t0 = time.perf_counter()
        try:
            result = fn(cfg)
            result["error"] = None
        except Exception as exc:  # noqa: BLE001 - recorded in the report
            result = {"assertions": {}, "error": f"{type(exc).__name__}: {exc}"}
            result["traceback"] = traceback.format_exc()
        result["wall_seconds"] = time.perf_counter() - t0
        result["passed"] = result["error"] is None and bool(result["assertions"]) and all(
            result["assertions"].values()
        )
        tracks[name] = result
        summary.append(
            {
                "pair_held": held,
                "fails": fails,
                "track": name,
                "evidence": sorted(k for k, v in result["assertions"].items() if v),
                "failed_checks": sorted(k for k, v in result["assertions"].items() if not v),
                "truncated": bool(result.get("truncated")),
                "passed": result["passed"],
            }
        )
    report = {
        "config": cfg.to_dict(),
        "environment": environment_fingerprint(),
        "summary": summary,
        "tracks": tracks,
        "passed": all(row["passed"] for row in summary),
        "truncated": any(row["truncated"] for row in summary),
        "wall_seconds": time.perf_counter() - t_suite,
    }
    if write:
        write_report(report, cfg.output_dir)
    return report


def _write_csv(path: Path, rows, columns):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (";".join(v) if isinstance(v, list) else v) for k, v in row.items()})


def write_report(report: dict, output_dir) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report)
    _write_csv(
        out / "summary.csv",
        report["summary"],
        ["pair_held", "fails", "track", "passed", "truncated", "evidence", "failed_checks"],
    )
    tracks = report["tracks"]
    if "rows" in tracks.get("sg_not_t", {}):
        cols = [
            "depth", "neurons", "regions", "expected_regions", "enum_lp_calls", "exact_lp_calls",
            "exact_seconds", "exact_verdict", "ibp_ops", "ibp_seconds", "ibp_verdict", "ibp_binary",
            "montufar_reference", "status",
        ]
        _write_csv(out / "sg_not_t.csv", tracks["sg_not_t"]["rows"], cols)
    if "pairs" in tracks.get("st_not_g", {}):
        rows = []
        st = tracks["st_not_g"]
        for p in [st["abs_pair"]] + st["pairs"]:
            row = {"name": p["name"], "passed": p["passed"], "probes": p["probes"]}
            row["positive_distance"] = p["probes_with_positive_distance"]
            row["gap_witness"] = p["gap_witness"]
            row.update(p["assertions"])
            rows.append(row)
        cols = ["name", "passed", "probes", "positive_distance", "gap_witness"]
        cols += list(st["abs_pair"]["assertions"])
        _write_csv(out / "st_not_g.csv", rows, cols)
    if "reports" in tracks.get("gt_not_s", {}):
        gt = tracks["gt_not_s"]
        rows = []
        for r in [gt["baseline"]] + gt["reports"]:
            row = {"name": r["name"], "passed": r["passed"], "proxy_gap": r["proxy_gap"]}
            row["support_size"] = len(r["plan"]["support"]["points"])
            row["witness"] = r["off_support_witness"]
            row.update(r["assertions"])
            rows.append(row)
        cols = ["name", "passed", "support_size", "proxy_gap", "witness"]
        cols += list(gt["baseline"]["assertions"])
        _write_csv(out / "gt_not_s.csv", rows, cols)
    return out


def strip_timing(obj):
    """Copy of a report without wall-clock fields, for reproducibility checks."""
    if isinstance(obj, dict):
        return {
            k: strip_timing(v)
            for k, v in obj.items()
            if not k.endswith(("_seconds", "_measured")) and k not in ("environment", "traceback")
        }
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
