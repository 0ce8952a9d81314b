import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxstab.errors import ValidationError
from maxstab.norms import NormSpec


def test_lp_values():
    n2 = NormSpec.lp(2)
    assert n2.evaluate([3.0, 4.0]) == 5.0
    ninf = NormSpec.lp(math.inf)
    assert ninf.evaluate([0.5, 2.0, 1.0]) == 2.0
    n1 = NormSpec.lp(1)
    assert n1.evaluate(np.array([[1.0, 2.0], [0.0, 0.5]])).tolist() == [3.0, 0.5]


def test_weighted_values():
    w = NormSpec.weighted_lp(1, [2.0, 3.0])
    assert w.evaluate([1.0, 1.0]) == 5.0
    winf = NormSpec.weighted_lp(math.inf, [2.0, 0.5])
    assert winf.evaluate([1.0, 1.0]) == 2.0


def test_rejects_bad_specs():
    with pytest.raises(ValidationError):
        NormSpec.lp(0.0)
    with pytest.raises(ValidationError):
        NormSpec.lp(-1.0)
    with pytest.raises(ValidationError):
        NormSpec.weighted_lp(2, [1.0, -1.0])
    with pytest.raises(ValidationError):
        NormSpec(kind="lp", p=2.0, weights=(1.0,))
    with pytest.raises(ValidationError):
        NormSpec.lp(2).evaluate([-1.0, 1.0])


@given(
    p=st.sampled_from([0.5, 1.0, 2.0, 3.5, math.inf]),
    c=st.floats(min_value=1e-3, max_value=1e3),
    x=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=6),
)
def test_one_homogeneity(p, c, x):
    x = np.asarray(x)
    norm = NormSpec.lp(p)
    lhs = norm.evaluate(c * x)
    rhs = c * norm.evaluate(x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    if np.all(x == 0):
        assert norm.evaluate(x) == 0.0
    else:
        assert norm.evaluate(x) > 0.0


def test_scale_to_sphere():
    norm = NormSpec.lp(1)
    u = norm.scale_to_sphere(np.array([2.0, 2.0]))
    assert np.allclose(u, [0.5, 0.5])
    with pytest.raises(ValidationError):
        norm.scale_to_sphere(np.zeros(2))


def test_round_trip_dict():
    for spec in (NormSpec.lp(2), NormSpec.lp(math.inf),
                 NormSpec.weighted_lp(1.5, [1.0, 2.0])):
        assert NormSpec.from_dict(spec.to_dict()) == spec
