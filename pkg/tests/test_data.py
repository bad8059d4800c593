import numpy as np
import pytest

from tailcens import ConfidenceInterval, TailData, ValidationError


def make_tail(**kw):
    base = dict(exceedances=np.array([3.0, 2.0, 1.0]), m=2, u=5.0, n=100, T=9.5)
    base.update(kw)
    return TailData(**base)


def test_tail_data_basic():
    td = make_tail()
    assert td.k == 3
    np.testing.assert_allclose(td.observed_values, [8.0, 7.0, 6.0])


def test_tail_data_validation():
    with pytest.raises(ValidationError):
        make_tail(exceedances=np.array([1.0, 2.0, 3.0]))  # ascending
    with pytest.raises(ValidationError):
        make_tail(exceedances=np.array([3.0, -1.0]))  # negative
    with pytest.raises(ValidationError):
        make_tail(m=-1)
    with pytest.raises(ValidationError):
        make_tail(n=4)  # n < m + k
    with pytest.raises(ValidationError):
        make_tail(T=7.5)  # largest exceedance 3.0 >= T - u = 2.5
    # T=None is allowed structurally (no censoring cross-check possible)
    td = make_tail(T=None)
    assert td.T is None


def test_confidence_interval():
    ci = ConfidenceInterval(1.0, 2.5, 0.95, "ml")
    assert ci.length == 1.5
    assert ci.contains(1.0) and ci.contains(2.5) and not ci.contains(2.6)
    with pytest.raises(ValidationError):
        ConfidenceInterval(2.0, 1.0, 0.95, "ml")
    with pytest.raises(ValidationError):
        ConfidenceInterval(1.0, 2.0, 0.95, "bogus")
