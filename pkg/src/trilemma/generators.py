"""Standard and random network families used by tests and experiments."""

from __future__ import annotations

import random
from fractions import Fraction

from .network import Network


def identity_net(n: int = 1) -> Network:
    """Pure affine ``f(x) = x`` with no hidden layer."""
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    return Network.from_lists(n, [(eye, [0] * n)])


def relu_net(w=1, b=0) -> Network:
    """``f(x) = ReLU(w x + b)`` on a 1-D input."""
    return Network.from_lists(1, [([[w]], [b]), ([[1]], [0])])


def abs_net() -> Network:
    """``|x| = ReLU(x) + ReLU(-x)``."""
    return Network.from_lists(1, [([[1], [-1]], [0, 0]), ([[1, 1]], [0])])


def constant_net(value, width: int = 1) -> Network:
    """1-D network computing a constant through a dead hidden layer."""
    return Network.from_lists(1, [([[0]] * width, [0] * width), ([[0] * width], [value])])


def sawtooth(depth: int) -> Network:
    """``depth``-fold composition of the tent map on [0, 1].

    Each hidden layer holds ``ReLU(t)`` and ``ReLU(t - 1/2)``, and the tent
    map is ``2 ReLU(t) - 4 ReLU(t - 1/2)``. The composition has ``2^depth``
    linear pieces on [0, 1].
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    half = Fraction(1, 2)
    layers = [([[1], [1]], [0, -half])]
    for _ in range(depth - 1):
        layers.append(([[2, -4], [2, -4]], [0, -half]))
    layers.append(([[2, -4]], [0]))
    return Network.from_lists(1, layers)


def random_rational(rng: random.Random, span: int = 2, denom: int = 4) -> Fraction:
    return Fraction(rng.randint(-span * denom, span * denom), denom)


def random_network(
    rng: random.Random,
    input_dim: int,
    widths,
    output_dim: int = 1,
    span: int = 2,
    denom: int = 4,
) -> Network:
    """Weights and biases uniform on the grid ``{k/denom : |k/denom| <= span}``."""
    layers = []
    prev = input_dim
    for w in list(widths) + [output_dim]:
        W = [[random_rational(rng, span, denom) for _ in range(prev)] for _ in range(w)]
        b = [random_rational(rng, span, denom) for _ in range(w)]
        layers.append((W, b))
        prev = w
    return Network.from_lists(input_dim, layers)


def random_small_network(rng: random.Random, max_hidden: int = 10, max_inputs: int = 2) -> Network:
    """1-2 inputs, one or two hidden layers, at most ``max_hidden`` neurons."""
    n = rng.randint(1, max_inputs)
    total = rng.randint(1, max_hidden)
    if total >= 2 and rng.random() < 0.5:
        first = rng.randint(1, total - 1)
        widths = [first, total - first]
    else:
        widths = [total]
    return random_network(rng, n, widths)


def random_paired_network(rng: random.Random, input_dim: int, widths) -> Network:
    """Random network whose every hidden layer contains a sign-complementary pair.

    Neurons 0 and 1 of each layer have opposite pre-activations, so at any
    input where no pre-activation vanishes exactly one of them is active and
    no hidden layer is entirely silent. Rows within each layer are distinct.
    """
    while True:
        layers = []
        prev = input_dim
        for w in widths:
            if w < 2:
                raise ValueError("paired layers need width >= 2")
            while True:
                w0 = [random_rational(rng) for _ in range(prev)]
                if any(w0):
                    break
            b0 = random_rational(rng)
            W = [w0, [-v for v in w0]]
            b = [b0, -b0]
            for _ in range(w - 2):
                W.append([random_rational(rng) for _ in range(prev)])
                b.append(random_rational(rng))
            layers.append((W, b))
            prev = w
        layers.append(([[random_rational(rng) for _ in range(prev)]], [random_rational(rng)]))
        net = Network.from_lists(input_dim, layers)
        if all(
            len({tuple(r) + (bb,) for r, bb in zip(l.weights, l.bias)}) == l.out_dim
            for l in net.hidden_layers
        ):
            return net
