"""Designs, covariance matrices, factorizations and the tridiagonal inverse."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from semicov.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NotPositiveDefiniteError,
)
from semicov.kernels import nugget_ou, ou, power_exp
from semicov.matalg import (
    MAX_POINTS,
    CovMatrix,
    Design,
    build,
    chol_lower,
    cov_to_csv,
    eig_extremes,
    ou_tridiag_inverse,
)


class TestDesign:
    def test_equispaced(self):
        d = Design.equispaced(4, 0.5, start=1.0)
        assert d.points == (1.0, 1.5, 2.0, 2.5)
        assert d.n == 4
        assert d.distances == (0.5, 0.5, 0.5)

    def test_from_distances(self):
        d = Design.from_distances([0.2, 0.3], start=0.1)
        assert_allclose(d.points, (0.1, 0.3, 0.6))

    def test_lag_matrix(self):
        d = Design((0.0, 1.0, 3.0))
        assert_allclose(d.lag_matrix(),
                        [[0, 1, 3], [1, 0, 2], [3, 2, 0]])

    def test_collapsed_design_is_representable(self):
        d = Design((0.0, 0.0, 1.0))
        assert d.distances == (0.0, 1.0)

    def test_decreasing_points_rejected(self):
        with pytest.raises(InvalidParameterError):
            Design((1.0, 0.5))

    def test_single_point_rejected(self):
        with pytest.raises(InvalidParameterError):
            Design((1.0,))

    def test_space_bounds_enforced(self):
        Design((0.0, 1.0), space=(0.0, 1.0))
        with pytest.raises(InvalidParameterError):
            Design((0.0, 1.5), space=(0.0, 1.0))
        with pytest.raises(InvalidParameterError):
            Design((0.0, 1.0), space=(1.0, 1.0))


class TestBuild:
    def test_values_and_certificate(self):
        cov = build(ou(1.0), Design.equispaced(2, math.log(2.0)))
        assert_allclose(cov.values, [[1.0, 0.5], [0.5, 1.0]], rtol=1e-15)
        assert cov.psd_ok
        assert_allclose(cov.min_eig, 0.5, rtol=1e-12)

    def test_certificate_flags_indefinite_kernel(self):
        """A Gaussian-shaped kernel on a long design loses definiteness."""
        cov = build(power_exp(p=10.0, r=0.5), Design.equispaced(100, 1.0))
        assert not cov.psd_ok
        assert cov.min_eig < -0.1

    def test_values_are_read_only(self):
        cov = build(ou(1.0), Design.equispaced(3, 1.0))
        with pytest.raises(ValueError):
            cov.values[0, 0] = 2.0

    def test_dense_ceiling(self):
        with pytest.raises(InvalidParameterError, match="ceiling"):
            build(ou(1.0), Design.equispaced(MAX_POINTS + 1, 1.0))


class TestCholesky:
    def test_two_by_two_factor(self):
        cov = build(ou(1.0), Design.equispaced(2, math.log(2.0)))
        factor = chol_lower(cov)
        assert_allclose(factor, [[1.0, 0.0], [0.5, math.sqrt(0.75)]],
                        rtol=1e-14)

    def test_accepts_plain_arrays(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        factor = chol_lower(a)
        assert_allclose(factor @ factor.T, a, rtol=1e-14)

    def test_failure_carries_pivot(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NotPositiveDefiniteError) as info:
            chol_lower(bad)
        assert info.value.pivot == 2

    def test_collapsed_design_fails_without_jitter(self):
        cov = build(ou(1.0), Design((0.0, 0.0, 1.0)))
        with pytest.raises(NotPositiveDefiniteError):
            chol_lower(cov)


class TestTridiagonalInverse:
    @pytest.mark.parametrize("n", [2, 5, 17])
    @pytest.mark.parametrize("c", [0.1, 0.5, 0.9])
    def test_matches_dense_inverse(self, n, c):
        dense = np.linalg.inv(c ** np.abs(np.subtract.outer(range(n), range(n))))
        assert_allclose(ou_tridiag_inverse(n, c), dense, atol=1e-10)

    def test_identity_limit(self):
        assert_allclose(ou_tridiag_inverse(4, 0.0), np.eye(4), atol=1e-15)

    def test_matches_kernel_matrix(self):
        r, d, n = 0.7, 1.3, 6
        cov = build(ou(r), Design.equispaced(n, d))
        inv = ou_tridiag_inverse(n, math.exp(-r * d))
        assert_allclose(inv @ cov.values, np.eye(n), atol=1e-12)

    def test_domain_checks(self):
        with pytest.raises(InvalidParameterError):
            ou_tridiag_inverse(1, 0.5)
        with pytest.raises(InvalidParameterError):
            ou_tridiag_inverse(4, 1.0)
        with pytest.raises(InvalidParameterError):
            ou_tridiag_inverse(4, -0.1)


class TestEigExtremes:
    def test_two_point_eigenvalues(self):
        """The 2 x 2 correlation matrix has eigenvalues 1 - c and 1 + c."""
        c = math.exp(-0.8)
        cov = build(ou(0.8), Design.equispaced(2, 1.0))
        lo, hi = eig_extremes(cov.values)
        assert_allclose(lo, 1.0 - c, rtol=1e-12)
        assert_allclose(hi, 1.0 + c, rtol=1e-12)

    def test_min_only_skips_max(self):
        lo, hi = eig_extremes(np.eye(3), need_max=False)
        assert lo == pytest.approx(1.0)
        assert math.isnan(hi)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatchError):
            eig_extremes(np.ones((2, 3)))


class TestCsvExport:
    def test_round_trip(self, tmp_path):
        cov = build(nugget_ou(0.8, 0.5), Design((0.0, 0.4, 1.1)))
        path = tmp_path / "cov.csv"
        cov_to_csv(cov, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "0.0,0.4,1.1"
        back = np.loadtxt(path, delimiter=",", skiprows=1)
        assert_allclose(back, cov.values, rtol=0, atol=0)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.floats(0.05, 0.95))
    def test_tridiagonal_inverse_property(self, n, c):
        cov = c ** np.abs(np.subtract.outer(range(n), range(n)))
        assert_allclose(ou_tridiag_inverse(n, c) @ cov, np.eye(n), atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 10), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
    def test_ou_matrices_are_certified(self, n, r, d):
        cov = build(ou(r), Design.equispaced(n, d))
        assert cov.psd_ok
        factor = chol_lower(cov)
        assert_allclose(factor @ factor.T, cov.values, atol=1e-12)
