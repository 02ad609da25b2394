import numpy as np
import pytest

from ..linops.operator import (LinearMap, apply, apply_adjoint, distance_to_range, load_matrix, operator_norm,
                               parse_matrix, project_range, spectral_summary)
from ..utils.errors import ConfigError, DimensionMismatchError, ProblemShapeError


def test_apply_and_adjoint_satisfy_inner_product_identity(rng):
    """<Kx, y> = <x, K*y>"""
    K = LinearMap(rng.standard_normal((4, 6)))
    x, y = rng.standard_normal(6), rng.standard_normal(4)
    assert apply(K, x) @ y == pytest.approx(x @ apply_adjoint(K, y), rel=1e-12)


def test_apply_rejects_wrong_length():
    K = LinearMap.identity(3)
    with pytest.raises(DimensionMismatchError):
        apply(K, np.ones(2))
    with pytest.raises(DimensionMismatchError):
        apply_adjoint(K, np.ones(4))


def test_matrix_is_read_only():
    K = LinearMap.from_rows([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        K.matrix[0, 0] = 5.0


def test_empty_matrix_rejected():
    with pytest.raises(DimensionMismatchError):
        LinearMap(np.zeros((0, 3)))


def test_spectral_summary_of_identity():
    summary = spectral_summary(LinearMap.identity(3))
    assert summary.op_norm == pytest.approx(1.0, rel=1e-10)
    assert summary.lambda_min == pytest.approx(1.0, rel=1e-10)
    assert summary.lambda_min_pos == pytest.approx(1.0, rel=1e-10)


def test_spectral_summary_of_rank_deficient_rows():
    """K = [[1, 0], [0, 0]]: ||K|| = 1, lambda_min = 0, lambda_min_pos = 1"""
    summary = spectral_summary(LinearMap.from_rows([[1.0, 0.0], [0.0, 0.0]]))
    assert summary.op_norm == pytest.approx(1.0, rel=1e-10)
    assert summary.lambda_min == 0.0
    assert summary.lambda_min_pos == pytest.approx(1.0, rel=1e-10)


def test_spectral_summary_of_wide_matrix():
    """K = [[3, 4]]: KK* = 25"""
    summary = spectral_summary(LinearMap.from_rows([[3.0, 4.0]]))
    assert summary.op_norm == pytest.approx(5.0, rel=1e-10)
    assert summary.lambda_min == pytest.approx(25.0, rel=1e-10)


def test_spectral_summary_of_zero_matrix():
    summary = spectral_summary(LinearMap.zeros(2, 3))
    assert summary.op_norm == 0.0
    assert summary.lambda_min == 0.0
    assert summary.lambda_min_pos is None


@pytest.mark.parametrize("tol", [0.0, -1e-8, 1e-2])
def test_spectral_summary_rejects_bad_tolerance(tol):
    with pytest.raises(ProblemShapeError):
        spectral_summary(LinearMap.identity(2), tol=tol)


def test_operator_norm_is_seeded(rng):
    K = LinearMap(rng.standard_normal((7, 5)))
    assert operator_norm(K, seed=3) == operator_norm(K, seed=3)


def test_project_range_of_rank_one_operator():
    K = LinearMap.from_rows([[1.0], [1.0]])
    y = np.array([1.0, 0.0])
    np.testing.assert_allclose(project_range(K, y), [0.5, 0.5], atol=1e-14)
    assert distance_to_range(K, y) == pytest.approx(np.sqrt(0.5), rel=1e-12)


def test_distance_to_range_vanishes_inside_range(rng):
    K = LinearMap(rng.standard_normal((5, 3)))
    y = K.matrix @ rng.standard_normal(3)
    assert distance_to_range(K, y) <= 1e-12 * np.linalg.norm(y)


def test_parse_matrix_reads_header_and_rows():
    K = parse_matrix("2 3\n1 0 0\n0 2 0\n")
    assert (K.rows, K.cols) == (2, 3)
    assert K.matrix[1, 1] == 2.0


@pytest.mark.parametrize("text", ["", "2\n1 2", "2 2\n1 2\n3", "1 2\n1 x"])
def test_parse_matrix_rejects_malformed_text(text):
    with pytest.raises(ConfigError):
        parse_matrix(text)


def test_load_matrix_from_file(tmp_path):
    path = tmp_path / "K.txt"
    path.write_text("2 2\n2 0\n0 1\n")
    summary = spectral_summary(load_matrix(path))
    assert summary.op_norm == pytest.approx(2.0, rel=1e-10)
    assert summary.lambda_min == pytest.approx(1.0, rel=1e-10)


def test_operator_norm_bounds_every_image(rng):
    K = LinearMap(rng.standard_normal((5, 7)))
    norm = spectral_summary(K).op_norm
    for _ in range(100):
        x = rng.standard_normal(7)
        x /= np.linalg.norm(x)
        assert np.linalg.norm(apply(K, x)) <= norm * (1 + 1e-10)


def test_lambda_min_bounds_the_adjoint_for_full_row_rank(rng):
    K = LinearMap(rng.standard_normal((3, 6)))
    lam = spectral_summary(K).lambda_min
    assert lam > 0
    for _ in range(100):
        u = rng.standard_normal(3)
        assert np.sum(apply_adjoint(K, u) ** 2) >= lam * float(u @ u) * (1 - 1e-10)


def test_lambda_min_pos_bounds_the_adjoint_on_the_range(rng):
    K = LinearMap(rng.standard_normal((5, 2)) @ rng.standard_normal((2, 4)))
    summary = spectral_summary(K)
    assert summary.lambda_min == 0.0
    for _ in range(100):
        u = project_range(K, rng.standard_normal(5))
        assert np.sum(apply_adjoint(K, u) ** 2) >= summary.lambda_min_pos * float(u @ u) * (1 - 1e-10)
