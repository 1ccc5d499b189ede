import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aadmm.metrics import CSV_FIELDS, TrialResult, mse, sml, sparsity_level, support_of


def test_mse_examples():
    x = np.arange(512.0)
    assert mse(x, x) == 0.0
    e = np.zeros(512)
    e[7] = 1.0
    assert mse(x + e, x) == pytest.approx(1 / 512, rel=1e-15)
    assert 1 / 512 == pytest.approx(1.9531e-3, abs=1e-7)


def test_mse_rejects_mismatch():
    with pytest.raises(ValueError):
        mse(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        mse(np.zeros(0), np.zeros(0))


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.integers(0, 2**32 - 1))
def test_mse_symmetric(vals, seed):
    a = np.array(vals)
    b = np.random.default_rng(seed).standard_normal(a.size)
    assert mse(a, b) == mse(b, a)
    assert mse(a, b) >= 0


def test_sml_examples():
    assert sml({1, 2, 3}, {1, 2, 3}, 10) == 100.0
    assert sml(set(), set(), 10) == 100.0
    assert sml({0, 5}, {0, 9, 5, 11}, 512) == pytest.approx(99.609, abs=5e-4)
    assert sml({0}, {1}, 2) == 0.0


def test_sml_errors():
    with pytest.raises(ValueError):
        sml({0}, {0}, 0)
    with pytest.raises(IndexError):
        sml({5}, {0}, 5)


@given(st.sets(st.integers(0, 49)), st.sets(st.integers(0, 49)), st.integers(0, 2**32 - 1))
def test_sml_permutation_invariant(a, b, seed):
    perm = np.random.default_rng(seed).permutation(50)
    pa = {int(perm[i]) for i in a}
    pb = {int(perm[i]) for i in b}
    assert sml(a, b, 50) == sml(pa, pb, 50)
    assert 0.0 <= sml(a, b, 50) <= 100.0


def test_sparsity_level():
    assert sparsity_level(np.zeros(9)) == 0
    assert sparsity_level([1e-12, 0.5], tol=1e-9) == 1
    assert sparsity_level([1e-12, 0.5]) == 2
    with pytest.raises(ValueError):
        sparsity_level([1.0], tol=-1)


def test_support_of_matches_sparsity(rng):
    x = np.where(rng.random(100) < 0.2, rng.standard_normal(100), 0.0)
    assert len(support_of(x)) == sparsity_level(x)
    assert all(x[i] != 0 for i in support_of(x))


def test_trial_result_csv_row():
    r = TrialResult(mse=1e-4, sml=99.5, ofv=0.1, sl=30, ct_seconds=0.01,
                    outer_iterations=31, seed=7)
    assert CSV_FIELDS == ("seed", "mse", "sml", "ofv", "sl", "ct_seconds", "outer_iterations")
    assert r.csv_row() == [7, 1e-4, 99.5, 0.1, 30, 0.01, 31]
    assert r.to_dict()["stop_reason"] == ""
