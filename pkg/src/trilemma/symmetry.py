"""Function-preserving reparameterizations of ReLU networks.

Two kinds of transform leave ``f`` unchanged while moving the hidden
representation: permuting the neurons of a hidden layer, and scaling one
neuron by ``alpha > 0`` (ReLU is positively homogeneous).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .network import Layer, Network, fmt, hidden_trace, is_generic, to_fraction
from .regions import Box

PROBE_ATTEMPTS = 1000
SCALES = (Fraction(1, 2), Fraction(2), Fraction(3, 2), Fraction(3), Fraction(2, 3))


@dataclass(frozen=True)
class Permutation:
    """New neuron ``i`` of hidden layer ``layer`` is old neuron ``pi[i]``."""

    layer: int
    pi: tuple

    def __post_init__(self):
        pi = tuple(int(v) for v in self.pi)
        if sorted(pi) != list(range(len(pi))):
            raise ValueError(f"{pi} is not a permutation")
        object.__setattr__(self, "pi", pi)

    @property
    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.pi))

    def to_dict(self):
        return {"kind": "perm", "layer": self.layer, "pi": list(self.pi)}


@dataclass(frozen=True)
class Scaling:
    layer: int
    neuron: int
    alpha: Fraction

    def __post_init__(self):
        alpha = to_fraction(self.alpha)
        if alpha <= 0:
            raise ValueError("scaling factor must be positive")
        object.__setattr__(self, "alpha", alpha)

    @property
    def is_identity(self) -> bool:
        return self.alpha == 1

    def to_dict(self):
        return {"kind": "scale", "layer": self.layer, "neuron": self.neuron, "alpha": fmt(self.alpha)}


SymmetryTransform = Union[Permutation, Scaling]


def transform_from_dict(data: dict) -> SymmetryTransform:
    kind = data.get("kind")
    if kind == "perm":
        return Permutation(int(data["layer"]), data["pi"])
    if kind == "scale":
        return Scaling(int(data["layer"]), int(data["neuron"]), data["alpha"])
    raise ValueError(f"unknown transform kind {kind!r}")


def apply_transform(net: Network, t: SymmetryTransform) -> Network:
    n_hidden_layers = len(net.hidden_layers)
    if not 0 <= t.layer < n_hidden_layers:
        raise IndexError(f"layer {t.layer} is not a hidden layer (network has {n_hidden_layers})")
    layer, nxt = net.layers[t.layer], net.layers[t.layer + 1]
    if isinstance(t, Permutation):
        if len(t.pi) != layer.out_dim:
            raise ValueError(f"permutation of length {len(t.pi)} for a layer of width {layer.out_dim}")
        W = [layer.weights[p] for p in t.pi]
        b = [layer.bias[p] for p in t.pi]
        W_next = [[row[p] for p in t.pi] for row in nxt.weights]
    elif isinstance(t, Scaling):
        if not 0 <= t.neuron < layer.out_dim:
            raise IndexError(f"neuron {t.neuron} out of range for width {layer.out_dim}")
        W = [
            [w * t.alpha for w in row] if i == t.neuron else list(row)
            for i, row in enumerate(layer.weights)
        ]
        b = [v * t.alpha if i == t.neuron else v for i, v in enumerate(layer.bias)]
        W_next = [
            [w / t.alpha if j == t.neuron else w for j, w in enumerate(row)] for row in nxt.weights
        ]
    else:
        raise TypeError(f"not a symmetry transform: {t!r}")
    layers = list(net.layers)
    layers[t.layer] = Layer(W, b)
    layers[t.layer + 1] = Layer(W_next, nxt.bias)
    return Network(net.input_dim, tuple(layers))


def apply_all(net: Network, transforms) -> Network:
    for t in transforms:
        net = apply_transform(net, t)
    return net


def random_symmetric_partner(net: Network, seed: int):
    """Behaviorally identical network with a different hidden representation.

    Picks a hidden layer of width >= 2, applies a permutation that moves
    neuron 0, then scales every neuron of that layer by one common
    ``alpha != 1``. The uniform scale keeps the lexicographic order of the
    layer's rows, and makes the layer's trace differ wherever the layer is
    not entirely inactive.
    """
    eligible = [l for l, w in enumerate(net.hidden_widths) if w >= 2]
    if not eligible:
        raise ValueError("no hidden layer of width >= 2")
    rng = random.Random(seed)
    layer = rng.choice(eligible)
    width = net.hidden_widths[layer]
    while True:
        pi = list(range(width))
        rng.shuffle(pi)
        if pi[0] != 0:
            break
    alpha = rng.choice(SCALES)
    transforms = [Permutation(layer, pi)] + [Scaling(layer, i, alpha) for i in range(width)]
    partner = apply_all(net, transforms)
    box = _probe_box(net.input_dim)
    for _ in range(PROBE_ATTEMPTS):
        (x,) = generic_probes([net], box, 1, rng.randrange(2**32))
        if representation_distance(net, partner, x) > 0:
            return partner, transforms
    raise ValueError("hidden layer is silent at every probe; traces never differ")


def _probe_box(n):
    return Box([-4] * n, [4] * n)


def representation_distance(net1: Network, net2: Network, x) -> Fraction:
    """Summed L1 distance between the two hidden traces at ``x``."""
    if net1.input_dim != net2.input_dim or net1.hidden_widths != net2.hidden_widths:
        raise ValueError("networks have different architectures")
    t1, t2 = hidden_trace(net1, x), hidden_trace(net2, x)
    return sum((abs(a - b) for h1, h2 in zip(t1, t2) for a, b in zip(h1, h2)), Fraction(0))


def group_order_lower_bound(hidden_widths) -> int:
    """Order of the permutation subgroup, ``prod(d!)``."""
    out = 1
    for d in hidden_widths:
        if d < 1:
            raise ValueError("widths must be positive")
        out *= math.factorial(d)
    return out


def _row_tuple(layer: Layer, i: int) -> tuple:
    return tuple(layer.weights[i]) + (layer.bias[i],)


def synthetic_alignment_objective(net: Network) -> int:
    """1 iff neuron 0 of every hidden layer has the lexicographically greatest row.

    Deliberately depends on how neurons are labelled, so it is not invariant
    under permutations even though ``f`` is.
    """
    if not net.hidden_layers:
        raise ValueError("network has no hidden layer")
    for layer in net.hidden_layers:
        head = _row_tuple(layer, 0)
        if any(_row_tuple(layer, i) > head for i in range(1, layer.out_dim)):
            return 0
    return 1


def has_distinct_rows(net: Network) -> bool:
    return all(
        len({_row_tuple(l, i) for i in range(l.out_dim)}) == l.out_dim for l in net.hidden_layers
    )


def canonicalize(net: Network):
    """Sort every hidden layer by descending row so the objective above is 1."""
    transforms = []
    for l in range(len(net.hidden_layers)):
        layer = net.layers[l]
        order = sorted(range(layer.out_dim), key=lambda i: _row_tuple(layer, i), reverse=True)
        t = Permutation(l, order)
        if not t.is_identity:
            net = apply_transform(net, t)
            transforms.append(t)
    return net, transforms


def generic_probes(nets, box, count: int, seed: int, denom: int = 10**6, max_tries: int = 10**5):
    """Random rational points of ``box`` where no net has a zero pre-activation."""
    rng = random.Random(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        x = tuple(
            l + (u - l) * Fraction(rng.randint(1, denom - 1), denom)
            for l, u in zip(box.lower, box.upper)
        )
        if all(is_generic(n, x) for n in nets):
            out.append(x)
    if len(out) < count:
        raise ValueError("could not find generic probes; some neuron is identically zero")
    return out
