"""JSON file formats for networks, specs, supports, plans and transforms.

Rationals are written as "p/q" strings. On input, JSON numbers and decimal
strings are also accepted and converted exactly.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .diagonal import PatchPlan
from .exact import LinearSpec
from .network import Network, fmt, to_fraction
from .proxy import EvalSupport
from .regions import FullSpace, domain_from_dict


class FormatError(ValueError):
    """Input file is unreadable or does not match the expected schema."""


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"), parse_float=Fraction)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, default=_default) + "\n", encoding="utf-8")


def _default(obj):
    if isinstance(obj, Fraction):
        return fmt(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _wrap(fn, what, data):
    try:
        return fn(data)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad {what}: {exc}") from exc


def load_network(path) -> Network:
    return _wrap(Network.from_dict, "network", read_json(path))


def parse_spec(data: dict, input_dim: int):
    """``(LinearSpec, domain)`` from a spec document."""

    def build(d):
        spec = LinearSpec(d["c"], d["b"])
        dom = domain_from_dict(d.get("domain", {"kind": "full"}), input_dim)
        return spec, dom

    return _wrap(build, "spec", data)


def spec_to_dict(spec: LinearSpec, dom) -> dict:
    out = spec.to_dict()
    out["domain"] = dom.to_dict()
    return out


def load_spec(path, input_dim: int):
    return parse_spec(read_json(path), input_dim)


def parse_support(data: dict):
    """``(EvalSupport, tau or None)``."""

    def build(d):
        tau = to_fraction(d["tau"]) if d.get("tau") is not None else None
        return EvalSupport(d["points"], d.get("seed")), tau

    return _wrap(build, "support", data)


def load_support(path):
    return parse_support(read_json(path))


def parse_plan(data: dict) -> PatchPlan:
    def build(d):
        support = d["support"]
        if isinstance(support, list):
            support = {"points": support}
        sup, _ = parse_support(support)
        return PatchPlan(sup, d["epsilon"], d.get("plateau"))

    return _wrap(build, "plan", data)


def load_plan(path) -> PatchPlan:
    return parse_plan(read_json(path))


def full_space_for(net: Network) -> FullSpace:
    return FullSpace(net.input_dim)
