from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from islab.sequences import CoefficientSequence, estimate_decay, read_sequence, write_sequence


def test_mode_selection():
    assert CoefficientSequence.of([1, "1/2"]).exact
    assert not CoefficientSequence.of([1, 0.5]).exact
    with pytest.raises(ValueError):
        CoefficientSequence((0.5,), "exact_rational")


def test_decay_hint_geometric():
    c = CoefficientSequence.of([F(1, 3 ** n) for n in range(40)])
    assert c.decay_hint == pytest.approx(1 / 3, rel=1e-12)
    assert estimate_decay([1.0]) == 0.0


def test_is_zero_and_float_copy():
    assert CoefficientSequence.of([0, 0]).is_zero()
    c = CoefficientSequence.of([F(1, 2), F(1, 4)], infinite_tail=True)
    f = c.to_float()
    assert f.values == (0.5, 0.25) and f.infinite_tail


@given(st.lists(st.one_of(st.fractions(max_denominator=50),
                          st.floats(-1e6, 1e6, allow_nan=False)), min_size=1, max_size=20))
def test_text_roundtrip(tmp_path_factory, vals):
    p = tmp_path_factory.mktemp("seq") / "c.txt"
    c = CoefficientSequence.of(vals)
    write_sequence(c, p)
    back = read_sequence(p)
    assert back.arithmetic == c.arithmetic
    assert back.values == c.values
