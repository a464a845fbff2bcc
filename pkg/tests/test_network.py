import random
from fractions import Fraction as F

import pytest

from trilemma.generators import abs_net, constant_net, identity_net, random_small_network, relu_net
from trilemma.network import (
    DimensionError,
    Layer,
    Network,
    activation_pattern,
    affine_map_for_pattern,
    fmt,
    forward,
    hidden_trace,
    is_generic,
    matvec,
    output_from_trace,
    to_fraction,
)


def test_identity_forward():
    net = Network.from_lists(1, [([[1]], [0])])
    assert forward(net, [F(7, 2)]) == (F(7, 2),)


def test_relu_clamps():
    assert forward(relu_net(), [-1]) == (0,)


@pytest.mark.parametrize("x", [3, -3])
def test_abs_forward(x):
    assert forward(abs_net(), [x]) == (3,)


def test_abs_traces_and_patterns():
    net = abs_net()
    assert hidden_trace(net, [3]) == ((3, 0),)
    assert hidden_trace(net, [-3]) == ((0, 3),)
    assert activation_pattern(net, [3]) == (True, False)
    assert activation_pattern(net, [-3]) == (False, True)
    assert activation_pattern(net, [0]) == (False, False)
    assert not is_generic(net, [0]) and is_generic(net, [F(1, 3)])


def test_all_negative_trace_is_zero():
    net = Network.from_lists(1, [([[1], [2]], [-10, -10]), ([[1, 1]], [0])])
    assert hidden_trace(net, [1]) == ((0, 0),)


def test_affine_map_for_pattern():
    net = abs_net()
    assert affine_map_for_pattern(net, (True, False)) == (((1,),), (0,))
    assert affine_map_for_pattern(net, (False, True)) == (((-1,),), (0,))
    A, c = affine_map_for_pattern(net, (False, False))
    assert A == ((0,),) and c == (0,)


def test_pattern_consistency_random():
    rng = random.Random(7)
    for _ in range(50):
        net = random_small_network(rng)
        for _ in range(10):
            x = [F(rng.randint(-40, 40), 7) for _ in range(net.input_dim)]
            A, c = affine_map_for_pattern(net, activation_pattern(net, x))
            assert tuple(a + b for a, b in zip(matvec(A, x), c)) == forward(net, x)
            assert output_from_trace(net, hidden_trace(net, x), x) == forward(net, x)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        forward(abs_net(), [1, 2])
    with pytest.raises(DimensionError):
        Network.from_lists(2, [([[1]], [0])])
    with pytest.raises(DimensionError):
        Layer([[1, 2], [3]], [0, 0])


def test_exact_conversions():
    assert to_fraction(0.1) == F(1, 10)
    assert to_fraction("3/4") == F(3, 4)
    assert to_fraction("-0.25") == F(-1, 4)
    with pytest.raises(TypeError):
        to_fraction(True)
    assert fmt(F(6, 3)) == "2" and fmt(F(-1, 3)) == "-1/3"


def test_json_round_trip():
    rng = random.Random(3)
    for _ in range(20):
        net = random_small_network(rng)
        assert Network.loads(net.dumps()) == net
    doc = '{"input_dim": 1, "layers": [{"weights": [[0.5]], "bias": ["1/3"]}]}'
    net = Network.loads(doc)
    assert forward(net, [2]) == (F(4, 3),)


def test_shapes():
    net = Network.from_lists(2, [([[1, 0], [0, 1], [1, 1]], [0, 0, 0]), ([[1, 1, 1]], [0])])
    assert net.hidden_widths == [3] and net.n_hidden == 3 and net.output_dim == 1
    assert identity_net(2).n_hidden == 0
    assert constant_net(5, width=2).hidden_widths == [2]
    assert forward(constant_net(5), [100]) == (5,)
