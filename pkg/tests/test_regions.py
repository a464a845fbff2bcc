import random
from fractions import Fraction as F

import pytest

from trilemma.generators import abs_net, identity_net, random_small_network, relu_net, sawtooth
from trilemma.network import Network, activation_pattern, forward
from trilemma.regions import (
    Box,
    EnumStats,
    FullSpace,
    RegionCapExceeded,
    count_regions,
    domain_from_dict,
    enumerate_regions,
    enumerate_regions_exhaustive,
    montufar_expression,
    region_is_feasible,
)


def patterns(it):
    return sorted(r.pattern for r in it)


def test_single_neuron_two_regions():
    assert count_regions(relu_net(), FullSpace(1)) == 2
    assert len(list(enumerate_regions_exhaustive(relu_net(), FullSpace(1)))) == 2


def test_abs_regions():
    net = abs_net()
    assert patterns(enumerate_regions(net, FullSpace(1))) == [(False, True), (True, False)]
    assert patterns(enumerate_regions_exhaustive(net, FullSpace(1))) == [(False, True), (True, False)]
    assert region_is_feasible(net, FullSpace(1), (False, False)) is None
    assert region_is_feasible(net, FullSpace(1), (True, True)) is None


def test_affine_net_one_region():
    assert count_regions(identity_net(2), FullSpace(2)) == 1


def test_one_layer_width_d():
    for d in range(1, 7):
        net = Network.from_lists(1, [([[1]] * d, [-k for k in range(d)]), ([[1] * d], [0])])
        assert count_regions(net, FullSpace(1)) == d + 1


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5, 6])
def test_sawtooth_counts(L):
    assert count_regions(sawtooth(L), Box([0], [1])) == 2**L


def test_sawtooth_lp_calls_frozen():
    stats = EnumStats()
    assert count_regions(sawtooth(4), Box([0], [1]), stats=stats) == 16
    assert stats.lp_calls == 64


def test_duplicate_and_constant_neurons():
    # two copies of x, one of 2x (same hyperplane), one constant neuron
    net = Network.from_lists(1, [([[1], [1], [2], [0]], [0, 0, 0, 1]), ([[1, 1, 1, 1]], [0])])
    expected = [(False, False, False, True), (True, True, True, True)]
    assert patterns(enumerate_regions(net, FullSpace(1))) == expected
    assert patterns(enumerate_regions_exhaustive(net, FullSpace(1))) == expected


FROZEN = [(2, 3, 6, 7), (1, 4, 4, 5), (2, 4, 6, 7), (1, 8, 5, 5), (2, 7, 4, 6), (1, 4, 4, 5), (2, 1, 2, 2), (1, 10, 8, 10)]


def test_frozen_random_counts():
    rng = random.Random(2024)
    for expected in FROZEN:
        net = random_small_network(rng)
        n = net.input_dim
        box, full = Box([-2] * n, [2] * n), FullSpace(n)
        got = (n, net.n_hidden, count_regions(net, box), count_regions(net, full))
        assert got == expected
        assert patterns(enumerate_regions(net, box)) == patterns(enumerate_regions_exhaustive(net, box))


def test_region_contents():
    rng = random.Random(9)
    for _ in range(20):
        net = random_small_network(rng, max_hidden=6)
        n = net.input_dim
        for region in enumerate_regions(net, Box([-3] * n, [3] * n)):
            x = region.interior_point()
            assert activation_pattern(net, x) == region.pattern
            assert region.evaluate(x) == forward(net, x)
            assert all(v > 0 for v in region.constraints.slacks(x))


def test_cap():
    with pytest.raises(RegionCapExceeded):
        count_regions(sawtooth(5), Box([0], [1]), cap=10)
    with pytest.raises(RegionCapExceeded):
        list(enumerate_regions_exhaustive(sawtooth(7), Box([0], [1])))


def test_domain_checks():
    with pytest.raises(ValueError):
        Box([1], [0])
    with pytest.raises(ValueError):
        count_regions(relu_net(), Box([0], [0]))
    with pytest.raises(ValueError):
        count_regions(relu_net(), FullSpace(2))
    assert domain_from_dict({"kind": "full"}, 2) == FullSpace(2)
    assert domain_from_dict({"kind": "box", "lower": ["0"], "upper": ["1/2"]}) == Box([0], [F(1, 2)])


def test_montufar():
    assert montufar_expression(3, 3, 5) == 1
    assert montufar_expression(7, 2, 1) == 1
    assert montufar_expression(4, 2, 3) == 16
    for L in range(1, 11):
        assert montufar_expression(2 * L, L, 2) == 2**L
    with pytest.raises(ValueError):
        montufar_expression(0, 1, 1)
