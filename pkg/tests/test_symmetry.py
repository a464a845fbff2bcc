import math
import random
from fractions import Fraction as F

import pytest

from trilemma.exact import equivalence_check
from trilemma.generators import abs_net, random_paired_network, relu_net
from trilemma.network import Network, forward, hidden_trace
from trilemma.regions import Box, FullSpace
from trilemma.symmetry import (
    Permutation,
    Scaling,
    apply_all,
    apply_transform,
    canonicalize,
    generic_probes,
    group_order_lower_bound,
    has_distinct_rows,
    random_symmetric_partner,
    representation_distance,
    synthetic_alignment_objective,
    transform_from_dict,
)

SWAP = Permutation(0, (1, 0))


def test_identity_permutation():
    net = abs_net()
    assert apply_transform(net, Permutation(0, (0, 1))) == net


def test_swap_abs():
    net, swapped = abs_net(), apply_transform(abs_net(), SWAP)
    for x in (-3, 0, 3):
        assert forward(swapped, [x]) == forward(net, [x])
    assert hidden_trace(swapped, [3]) == ((0, 3),)


def test_scaling():
    net = abs_net()
    scaled = apply_transform(net, Scaling(0, 0, 2))
    for x in (-3, 0, F(5, 2)):
        assert forward(scaled, [x]) == forward(net, [x])
    assert hidden_trace(scaled, [3]) == ((6, 0),)
    with pytest.raises(ValueError):
        Scaling(0, 0, 0)


def test_partner_of_abs():
    net = abs_net()
    for seed in range(5):
        partner, transforms = random_symmetric_partner(net, seed)
        assert isinstance(transforms[0], Permutation) and transforms[0].pi == (1, 0)
        assert equivalence_check(net, partner, FullSpace(1)) == (True, None)
        assert synthetic_alignment_objective(partner) == 0


def test_partner_needs_width_two():
    with pytest.raises(ValueError):
        random_symmetric_partner(relu_net(), 0)


def test_distance():
    net, swapped = abs_net(), apply_transform(abs_net(), SWAP)
    assert representation_distance(net, net, [3]) == 0
    assert representation_distance(net, swapped, [3]) == 6
    assert representation_distance(net, swapped, [0]) == 0


def test_group_order():
    assert group_order_lower_bound([3, 2]) == 12
    assert group_order_lower_bound([1]) == 1
    assert len(str(group_order_lower_bound([512]))) - 1 == 1166
    assert math.floor(math.log10(group_order_lower_bound([512]))) == 1166


def test_synthetic_objective():
    assert synthetic_alignment_objective(abs_net()) == 1
    assert synthetic_alignment_objective(apply_transform(abs_net(), SWAP)) == 0
    assert synthetic_alignment_objective(relu_net(-5, 3)) == 1


def test_canonicalize():
    rng = random.Random(1)
    for _ in range(20):
        net = random_paired_network(rng, 2, [3, 2])
        canon, transforms = canonicalize(net)
        assert synthetic_alignment_objective(canon) == 1
        assert apply_all(net, transforms) == canon
        assert has_distinct_rows(canon)


def test_partners_move_every_generic_probe():
    rng = random.Random(2)
    for _ in range(10):
        net, _ = canonicalize(random_paired_network(rng, rng.choice([1, 2]), [2, 3]))
        partner, _ = random_symmetric_partner(net, rng.randrange(1000))
        probes = generic_probes([net, partner], Box([-4] * net.input_dim, [4] * net.input_dim), 50, 0)
        assert all(representation_distance(net, partner, x) > 0 for x in probes)
        assert synthetic_alignment_objective(partner) == 0


def test_transform_serialization():
    for t in (SWAP, Scaling(1, 2, F(3, 2))):
        assert transform_from_dict(t.to_dict()) == t
    assert Scaling(0, 0, F(2, 3)).to_dict()["alpha"] == "2/3"
    with pytest.raises(ValueError):
        transform_from_dict({"kind": "flip"})
    with pytest.raises(ValueError):
        Permutation(0, (0, 0))


def test_out_of_range():
    with pytest.raises(IndexError):
        apply_transform(abs_net(), Permutation(1, (1, 0)))
    with pytest.raises(IndexError):
        apply_transform(abs_net(), Scaling(0, 5, 2))
