"""Sanity checks for the test oracles themselves."""

import random
from fractions import Fraction as F

import numpy as np

from oracles import forward_batch, grid, lattice_samples, output_within, point, spec_violations, vertex_max
from trilemma.generators import random_small_network
from trilemma.network import Network, forward
from trilemma.regions import Box


def test_batch_matches_forward():
    rng = random.Random(1)
    g = np.random.default_rng(0)
    for _ in range(30):
        net = random_small_network(rng)
        box = Box([-2] * net.input_dim, [3] * net.input_dim)
        X, den = lattice_samples(box, 100, g)
        Y = forward_batch(net, X, den)
        for i in range(0, 100, 9):
            assert (Y.fraction(i, 0),) == forward(net, point(X, den, i))


def test_object_fallback_on_huge_values():
    big = 10**12
    net = Network.from_lists(1, [([[big], [-big]], [F(1, 3), 0]), ([[big, F(1, 7)]], [5])])
    X, den = lattice_samples(Box([-1], [1]), 50, np.random.default_rng(1))
    Y = forward_batch(net, X, den)
    assert Y.X.dtype == object
    for i in range(50):
        assert (Y.fraction(i, 0),) == forward(net, point(X, den, i))
    mask = spec_violations(net, [1], 10**20, X, den)
    for i in range(50):
        assert bool(mask[i]) == (forward(net, point(X, den, i))[0] > 10**20)
    assert output_within(Y, [-(10**30)], [10**30])


def test_grid_shape():
    X, den = grid(Box([0], [1]), 10**5)
    assert X.shape == (10**5, 1) and point(X, den, 0) == (0,) and point(X, den, 10**5 - 1) == (1,)
    X, den = grid(Box([-1, 0], [1, F(1, 2)]), 10**5)
    assert X.shape[0] >= 10**5 and point(X, den, X.shape[0] - 1) == (1, F(1, 2))


def test_vertex_oracle():
    rows = [([1, 0], 1), ([0, 1], 1), ([-1, 0], 0), ([0, -1], 0), ([1, 1], F(3, 2))]
    assert vertex_max([1, 1], rows) == F(3, 2)
    assert vertex_max([1], [([1], 0), ([-1], -1)]) is None
