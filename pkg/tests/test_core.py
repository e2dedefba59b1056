import json
import math
import pickle

import numpy as np
import pytest

from pml_contraction import INFINITE, CredalSet, Distribution, PrivacyBudget, StochasticKernel, is_infinite
from pml_contraction.core import (
    credal_point,
    credal_slack,
    distribution_from_json,
    identity_kernel,
    in_credal_set,
    kernel_from_json,
    load_kernel,
    push_forward,
    validate_kernel,
)
from pml_contraction.errors import (
    DeadColumnError,
    DimensionMismatch,
    DomainError,
    NegativeEntryError,
    RowSumError,
    ValidationError,
)


def test_kernel_accepted_verbatim():
    raw = [[0.3, 0.7], [0.6, 0.4]]
    K = validate_kernel(raw)
    assert K.matrix.tolist() == raw
    assert (K.n_inputs, K.n_outputs) == (2, 2)


def test_kernel_is_read_only():
    K = StochasticKernel([[0.5, 0.5], [0.1, 0.9]])
    with pytest.raises(ValueError):
        K.matrix[0, 0] = 1.0


@pytest.mark.parametrize("raw, err", [
    ([[0.5, 0.6], [0.5, 0.5]], RowSumError),
    ([[1.2, -0.2], [0.5, 0.5]], NegativeEntryError),
    ([[1.0, 0.0], [1.0, 0.0]], DeadColumnError),
    ([[1.0]], DimensionMismatch),
    ([[np.nan, 1.0], [0.5, 0.5]], ValidationError),
])
def test_kernel_rejections(raw, err):
    with pytest.raises(err):
        validate_kernel(raw)


def test_rowsum_tolerance_is_not_renormalised():
    raw = [[0.5 + 5e-10, 0.5], [0.2, 0.8]]
    assert validate_kernel(raw).matrix[0, 0] == 0.5 + 5e-10
    with pytest.raises(RowSumError):
        validate_kernel([[0.5 + 5e-9, 0.5], [0.2, 0.8]])


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        Distribution([0.5, 0.6])


def test_infinite_singleton():
    assert is_infinite(INFINITE)
    assert INFINITE == math.inf and repr(INFINITE) == "INFINITE"
    assert pickle.loads(pickle.dumps(INFINITE)) is INFINITE
    assert not is_infinite(1e308)


def test_credal_set_membership():
    S = CredalSet(0.1, 4)
    assert S.slack == pytest.approx(0.6)
    assert S.contains([0.1, 0.1, 0.1, 0.7])
    assert not S.contains([0.05, 0.15, 0.1, 0.7])
    pts = S.sample(np.random.default_rng(1), size=500)
    assert np.all(pts.min(axis=1) >= 0.1 - 1e-12)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)


def test_credal_slack_snaps_at_uniform():
    assert credal_slack(1 / 3, 3) == 0.0
    np.testing.assert_allclose(credal_point([0.2, 0.3, 0.5], 1 / 3), [1 / 3] * 3)


@pytest.mark.parametrize("c, n", [(0.0, 3), (0.34, 3), (-0.1, 2), (0.1, 1)])
def test_bad_c(c, n):
    with pytest.raises(DomainError):
        CredalSet(c, n)


def test_budget_domain():
    with pytest.raises(DomainError):
        PrivacyBudget(-0.1, 0.1)
    with pytest.raises(DomainError):
        PrivacyBudget(1.0, 0.3).check(4)


def test_push_forward():
    K = [[0.9, 0.1], [0.2, 0.8]]
    np.testing.assert_allclose(push_forward(K, [0.5, 0.5]).probs, [0.55, 0.45])
    with pytest.raises(DimensionMismatch):
        push_forward(K, [0.2, 0.3, 0.5])
    np.testing.assert_array_equal(push_forward(identity_kernel(3), [0.2, 0.3, 0.5]).probs, [0.2, 0.3, 0.5])


def test_json_round_trip(tmp_path):
    K = StochasticKernel([[0.25, 0.75], [0.5, 0.5]])
    text = json.dumps(K.to_json())
    assert kernel_from_json(text).matrix.tolist() == K.matrix.tolist()
    path = tmp_path / "k.json"
    path.write_text(text)
    assert load_kernel(path).matrix.tolist() == K.matrix.tolist()
    assert distribution_from_json('{"probs": [0.5, 0.5]}').probs.tolist() == [0.5, 0.5]
    with pytest.raises(ValidationError):
        kernel_from_json('{"matrix": []}')


def test_in_credal_set_tolerance():
    assert in_credal_set([0.1 - 5e-13, 0.9 + 5e-13], 0.1)
