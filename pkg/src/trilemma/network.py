"""Exact feedforward ReLU networks over rationals.

Every hidden layer applies ReLU, the output layer is affine. All arithmetic
is done with :class:`fractions.Fraction`, so forward passes never round.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple  # tuple[Fraction, ...]
Matrix = tuple  # tuple[tuple[Fraction, ...], ...]


def to_fraction(value) -> Fraction:
    """Convert ints, "p/q" strings, decimal strings or floats exactly.

    Floats go through their shortest decimal repr, so ``0.1`` becomes 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to a rational")


def vec(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def fmt(q: Fraction) -> str:
    """Serialize a rational as "p/q" (or "p" when integral)."""
    q = to_fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def matvec(W: Matrix, x: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, x) for row in W)


class DimensionError(ValueError):
    """Raised when a vector or layer does not have the expected size."""


@dataclass(frozen=True)
class Layer:
    weights: Matrix
    bias: Vector

    def __post_init__(self):
        W = tuple(vec(row) for row in self.weights)
        b = vec(self.bias)
        if len(W) != len(b):
            raise DimensionError(f"layer has {len(W)} weight rows but {len(b)} biases")
        if W and len({len(row) for row in W}) != 1:
            raise DimensionError("ragged weight matrix")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return len(self.bias)

    @property
    def in_dim(self) -> int:
        return len(self.weights[0]) if self.weights else 0


@dataclass(frozen=True)
class Network:
    """A ReLU network: ``layers[:-1]`` are hidden, ``layers[-1]`` is the output."""

    input_dim: int
    layers: tuple

    def __post_init__(self):
        if self.input_dim < 1:
            raise DimensionError("input_dim must be positive")
        layers = tuple(l if isinstance(l, Layer) else Layer(*l) for l in self.layers)
        if not layers:
            raise DimensionError("a network needs at least one layer")
        prev = self.input_dim
        for i, layer in enumerate(layers):
            if layer.out_dim == 0:
                raise DimensionError(f"layer {i} has no neurons")
            if layer.in_dim != prev:
                raise DimensionError(
                    f"layer {i} expects {layer.in_dim} inputs, previous layer gives {prev}"
                )
            prev = layer.out_dim
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_lists(cls, input_dim: int, layers) -> Network:
        """Build from ``[(weights, bias), ...]`` with any rational-convertible entries."""
        return cls(input_dim, tuple(Layer(W, b) for W, b in layers))

    @property
    def hidden_layers(self) -> tuple:
        return self.layers[:-1]

    @property
    def output_layer(self) -> Layer:
        return self.layers[-1]

    @property
    def hidden_widths(self) -> list[int]:
        return [l.out_dim for l in self.hidden_layers]

    @property
    def n_hidden(self) -> int:
        return sum(self.hidden_widths)

    @property
    def output_dim(self) -> int:
        return self.output_layer.out_dim

    def neuron_index(self) -> list[tuple[int, int]]:
        """(layer, neuron) for every hidden neuron in layer-major order."""
        return [(l, i) for l, w in enumerate(self.hidden_widths) for i in range(w)]

    def size(self) -> int:
        """Number of scalar parameters."""
        return sum(l.out_dim * (l.in_dim + 1) for l in self.layers)

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "layers": [
                {
                    "weights": [[fmt(w) for w in row] for row in l.weights],
                    "bias": [fmt(b) for b in l.bias],
                }
                for l in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Network:
        try:
            layers = [(l["weights"], l["bias"]) for l in data["layers"]]
            return cls.from_lists(int(data["input_dim"]), layers)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed network description: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> Network:
        return cls.from_dict(json.loads(text, parse_float=Fraction))


def _check_input(net: Network, x) -> Vector:
    x = vec(x)
    if len(x) != net.input_dim:
        raise DimensionError(f"input has length {len(x)}, network expects {net.input_dim}")
    return x


def _relu(z: Vector) -> Vector:
    return tuple(v if v > 0 else Fraction(0) for v in z)


def _affine(layer: Layer, h: Vector) -> Vector:
    return tuple(dot(row, h) + b for row, b in zip(layer.weights, layer.bias))


def preactivations(net: Network, x) -> list[Vector]:
    """Pre-activation vector of every hidden layer at ``x``."""
    h = _check_input(net, x)
    out = []
    for layer in net.hidden_layers:
        z = _affine(layer, h)
        out.append(z)
        h = _relu(z)
    return out


def forward(net: Network, x) -> Vector:
    h = _check_input(net, x)
    for layer in net.hidden_layers:
        h = _relu(_affine(layer, h))
    return _affine(net.output_layer, h)


def hidden_trace(net: Network, x) -> tuple:
    """Post-ReLU activations of every hidden layer (the internal representation)."""
    return tuple(_relu(z) for z in preactivations(net, x))


def output_from_trace(net: Network, trace, x=None) -> Vector:
    """Apply the output layer to the last trace entry (or to ``x`` for affine nets)."""
    last = trace[-1] if trace else _check_input(net, x)
    return _affine(net.output_layer, last)


def activation_pattern(net: Network, x) -> tuple:
    """One bool per hidden neuron, layer-major; zero pre-activation counts as off."""
    return tuple(v > 0 for z in preactivations(net, x) for v in z)


def is_generic(net: Network, x) -> bool:
    """True when no hidden pre-activation is exactly zero at ``x``."""
    return all(v != 0 for z in preactivations(net, x) for v in z)


def pattern_affine_maps(net: Network, pattern):
    """Linearize the network under a fixed activation pattern.

    Returns ``(rows, (A, c))`` where ``rows[k] = (a, beta)`` is the affine
    pre-activation ``a.x + beta`` of hidden neuron ``k`` given the pattern of
    the earlier layers, and ``A x + c`` is the output map.
    """
    pattern = tuple(bool(p) for p in pattern)
    if len(pattern) != net.n_hidden:
        raise DimensionError(f"pattern has {len(pattern)} bits, network has {net.n_hidden} neurons")
    n = net.input_dim
    zero = Fraction(0)
    # current post-activation as affine map of x: H x + h0
    H = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    h0 = tuple(zero for _ in range(n))
    rows = []
    k = 0
    for layer in net.hidden_layers:
        newH, newh0 = [], []
        for w, b in zip(layer.weights, layer.bias):
            a = tuple(dot(w, [H[i][j] for i in range(len(H))]) for j in range(n))
            beta = dot(w, h0) + b
            rows.append((a, beta))
            if pattern[k]:
                newH.append(a)
                newh0.append(beta)
            else:
                newH.append(tuple(zero for _ in range(n)))
                newh0.append(zero)
            k += 1
        H, h0 = tuple(newH), tuple(newh0)
    out = net.output_layer
    A = tuple(
        tuple(dot(w, [H[i][j] for i in range(len(H))]) for j in range(n)) for w in out.weights
    )
    c = tuple(dot(w, h0) + b for w, b in zip(out.weights, out.bias))
    return rows, (A, c)


def affine_map_for_pattern(net: Network, pattern) -> tuple:
    """``(A, c)`` with ``f(x) = A x + c`` for every ``x`` whose pattern is ``pattern``."""
    return pattern_affine_maps(net, pattern)[1]
