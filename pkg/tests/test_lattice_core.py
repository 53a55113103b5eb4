import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from sympy import ZZ, Matrix
from sympy.matrices.normalforms import hermite_normal_form, invariant_factors

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from services.errors import (  # noqa: E402
    DegenerateLattice, NotASublattice, NotOrthogonal, UnsupportedDimension, UsageFailure,
)
from services.lattice_service import (  # noqa: E402
    Lattice, WrKind, apply_rotation, classify_wr, column_hnf, gauss_reduce_form,
    hermite_bound_holds, hermite_candidate_norms, lattice_points_in_ball, lll_reduce,
    scale_lattice, shortest_vectors, smith_decomposition, smith_quotient, sublattice_index, volume,
)

# Columns are basis vectors; these are the rows of each basis matrix.
LAMBDA_1 = [[16, 0, 0, 0], [0, 4, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]
LAMBDA_2 = [[4, 0, 0, 0], [0, 4, 0, 0], [0, 0, 4, 0], [0, 0, 0, 4]]
LAMBDA_3 = [[-2, -3, 4, -1], [0, -1, 0, 3], [0, -3, -2, -3], [-4, -1, 0, -1]]
LAMBDA_302 = [[1, 1, 3, -2], [-4, 1, 0, -4], [-1, -2, 3, 1], [2, -4, 2, -1]]
CROSS_B4 = [[-1, 1, 2, 2], [-1, 0, 2, -5], [1, -2, 5, -1], [-1, -5, 1, 2]]
PLANAR_216 = [[3, 15], [15, 3]]


def identity(n):
    return Lattice.from_rows([[int(i == j) for j in range(n)] for i in range(n)])


# --- helpers ---------------------------------------------------------------

def brute_force_minimum(rows):
    """(lambda1, kissing number) of an integer lattice by scanning a box of Z^n."""
    b = np.array(rows, dtype=float)
    n = len(rows)
    shortest_column = min(int(sum(v * v for v in col)) for col in zip(*rows))
    r = math.isqrt(shortest_column)
    axes = [np.arange(-r, r + 1)] * n
    points = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    coeffs = np.linalg.solve(b, points.T.astype(float))
    member = np.all(np.abs(coeffs - np.round(coeffs)) < 1e-6, axis=0)
    norms = np.sum(points ** 2, axis=1)
    norms = norms[member & (norms > 0)]
    lam = int(norms.min())
    return lam, int(np.count_nonzero(norms == lam))


def gram_schmidt(gram):
    n = len(gram)
    mu = [[Fraction(0)] * n for _ in range(n)]
    bstar = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = Fraction(gram[i][j])
            for k in range(j):
                s -= mu[j][k] * mu[i][k] * bstar[k]
            mu[i][j] = s / bstar[j]
        s = Fraction(gram[i][i])
        for k in range(i):
            s -= mu[i][k] ** 2 * bstar[k]
        bstar[i] = s
    return mu, bstar


# --- construction ------------------------------------------------------------

def test_singular_basis_is_rejected():
    with pytest.raises(DegenerateLattice):
        Lattice.from_rows([[1, 2], [2, 4]])


def test_non_square_basis_is_rejected():
    with pytest.raises(DegenerateLattice):
        Lattice.from_rows([[1, 0, 0], [0, 1, 0]])


def test_integer_rows_give_exact_lattice():
    lattice = Lattice.from_rows(LAMBDA_3)
    assert lattice.is_integral
    assert lattice.is_exact
    assert volume(lattice) == 256


@pytest.mark.parametrize("rows, expected", [
    (LAMBDA_1, 256), (LAMBDA_2, 256), (LAMBDA_3, 256), (LAMBDA_302, 302), (CROSS_B4, 302),
    (PLANAR_216, 216),
])
def test_volume_of_published_lattices(rows, expected):
    assert volume(Lattice.from_rows(rows)) == expected


# --- shortest vectors and WR classification ------------------------------------

@pytest.mark.parametrize("rows, lam, kind", [
    (LAMBDA_1, 4, WrKind.NOT_WR),
    (LAMBDA_2, 16, WrKind.STRONGLY_WR),
    (PLANAR_216, 234, WrKind.STRONGLY_WR),
])
def test_lambda1_and_wr_class(rows, lam, kind):
    lattice = Lattice.from_rows(rows)
    assert shortest_vectors(lattice).lambda1 == lam
    assert classify_wr(lattice).kind is kind


def test_lambda3_is_well_rounded_with_lambda1_20():
    lattice = Lattice.from_rows(LAMBDA_3)
    wr = classify_wr(lattice)
    assert shortest_vectors(lattice).lambda1 == 20
    assert wr.is_wr
    assert len(wr.witness) == 4


def test_index_302_lattice_is_well_rounded():
    wr = classify_wr(Lattice.from_rows(LAMBDA_302))
    assert wr.is_wr
    assert wr.lambda1 == 22


def test_identity_is_strongly_wr_with_kissing_number_2n():
    report = shortest_vectors(identity(4))
    assert report.lambda1 == 1
    assert report.count_with_signs == 8
    assert classify_wr(identity(4)).kind is WrKind.STRONGLY_WR


def test_minimal_vectors_have_lambda1_norm():
    lattice = Lattice.from_rows(LAMBDA_3)
    report = shortest_vectors(lattice)
    for v in report.minimal_vectors:
        assert sum(x * x for x in v) == report.lambda1


def test_shortest_vectors_match_brute_force():
    rng = np.random.default_rng(1234)
    checked = 0
    while checked < 200:
        n = int(rng.integers(1, 4))
        rows = rng.integers(-5, 6, size=(n, n)).tolist()
        if abs(round(np.linalg.det(np.array(rows, dtype=float)))) == 0:
            continue
        lam, kissing = brute_force_minimum(rows)
        report = shortest_vectors(Lattice.from_rows(rows))
        assert report.lambda1 == lam, rows
        assert report.count_with_signs == kissing, rows
        checked += 1


def test_lattice_points_in_ball_of_z2():
    coeffs, norms = lattice_points_in_ball(identity(2), 1)
    assert len(coeffs) == 5
    assert sorted(norms) == [0, 1, 1, 1, 1]


def test_gauss_reduce_form_detects_planar_wr():
    a, b, c = gauss_reduce_form(234, 90, 234)
    assert a == c == 234
    a, b, c = gauss_reduce_form(1, 0, 4)
    assert a != c


def test_gauss_reduce_form_reduces_skewed_basis():
    # columns (3, 15) and (18, 18) span the same lattice as (3, 15), (15, 3)
    a, b, c = gauss_reduce_form(234, 324, 648)
    assert (a, c) == (234, 234)
    assert abs(2 * b) <= a


# --- scaling and rotation --------------------------------------------------------

def test_integer_scaling_stays_exact():
    scaled = scale_lattice(Lattice.from_rows(PLANAR_216), 2)
    assert scaled.is_integral
    assert shortest_vectors(scaled).lambda1 == 936


def test_scale_factor_must_be_positive():
    with pytest.raises(UsageFailure):
        scale_lattice(identity(2), 0)


def test_rotation_preserves_lambda1_and_class():
    c = math.cos(math.pi / 4)
    rotated = apply_rotation(Lattice.from_rows(PLANAR_216), [[c, -c], [c, c]])
    assert shortest_vectors(rotated).lambda1 == 234
    assert classify_wr(rotated).is_wr
    assert float(volume(rotated)) == pytest.approx(216)


def test_non_orthogonal_rotation_is_rejected():
    with pytest.raises(NotOrthogonal):
        apply_rotation(identity(2), [[1, 1], [0, 1]])


# --- LLL --------------------------------------------------------------------------

def test_lll_keeps_the_lattice_and_reduces():
    lattice = Lattice.from_rows(CROSS_B4)
    reduced = lll_reduce(lattice)
    assert column_hnf(reduced.rows()) == column_hnf(CROSS_B4)

    mu, bstar = gram_schmidt(reduced.exact_gram)
    for i in range(4):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2)
    for k in range(1, 4):
        assert bstar[k] >= (Fraction(99, 100) - mu[k][k - 1] ** 2) * bstar[k - 1]


def test_lll_first_vector_within_approximation_factor():
    lattice = Lattice.from_rows(LAMBDA_3)
    reduced = lll_reduce(lattice)
    first = reduced.exact_gram[0][0]
    assert first <= 2 ** 3 * shortest_vectors(lattice).lambda1


def test_lll_rejects_bad_delta():
    with pytest.raises(UsageFailure):
        lll_reduce(identity(2), delta=0.2)


# --- normal forms and indices --------------------------------------------------------

def test_column_hnf_shape():
    h = column_hnf(LAMBDA_3)
    for i in range(4):
        assert h[i][i] > 0
        for j in range(i):
            assert h[i][j] == 0
        for j in range(i + 1, 4):
            assert 0 <= h[i][j] < h[i][i]
    assert math.prod(h[i][i] for i in range(4)) == 256


def test_column_hnf_ignores_unimodular_change():
    changed = [[3, 18], [15, 18]]
    assert column_hnf(changed) == column_hnf(PLANAR_216)


def test_smith_quotient_of_diagonal():
    assert smith_quotient(LAMBDA_1) == (2, 2, 4, 16)


def test_smith_decomposition_diagonalizes_random_matrices():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        n = int(rng.integers(1, 5))
        m = rng.integers(-6, 7, size=(n, n))
        det = round(np.linalg.det(m.astype(float)))
        if det == 0:
            continue
        u, divisors, v = smith_decomposition(m.tolist())
        product = np.array(u, dtype=object) @ m.astype(object) @ np.array(v, dtype=object)
        assert (product == np.diag(divisors).astype(object)).all()
        assert math.prod(divisors) == abs(det)
        for a, b in zip(divisors, divisors[1:]):
            assert b % a == 0
        checked += 1


def test_normal_forms_agree_with_sympy():
    for rows in (LAMBDA_1, LAMBDA_3, LAMBDA_302, CROSS_B4, PLANAR_216):
        m = Matrix(rows)
        h = hermite_normal_form(m)
        assert column_hnf(rows) == tuple(tuple(int(h[i, j]) for j in range(m.cols)) for i in range(m.rows))
        assert smith_quotient(rows) == tuple(abs(int(d)) for d in invariant_factors(m, domain=ZZ))
        assert math.prod(smith_quotient(rows)) == abs(int(m.det()))


def test_planar_hnf_has_expected_entries():
    assert column_hnf(PLANAR_216) == ((72, 15), (0, 3))


def test_normal_forms_reject_degenerate_input():
    with pytest.raises(DegenerateLattice):
        column_hnf([[1, 2], [2, 4]])
    with pytest.raises(DegenerateLattice):
        smith_decomposition([[1, 2], [2, 4]])
    with pytest.raises(DegenerateLattice):
        smith_quotient([[1, 2, 3], [4, 5, 6]])


def test_sublattice_index_and_rejection():
    assert sublattice_index(Lattice.from_rows(LAMBDA_3), identity(4)) == 256
    with pytest.raises(NotASublattice):
        sublattice_index(identity(4), Lattice.from_rows(LAMBDA_3))


# --- Hermite interval -----------------------------------------------------------------

def test_hermite_candidate_norms_for_index_256():
    assert hermite_candidate_norms(4, 256) == range(16, 23)


def test_hermite_candidate_norms_planar():
    assert hermite_candidate_norms(2, 216) == range(216, 250)
    assert hermite_candidate_norms(2, 1) == range(1, 2)


def test_hermite_table_stops_at_eight():
    with pytest.raises(UnsupportedDimension):
        hermite_candidate_norms(9, 10)


@pytest.mark.parametrize("rows", [LAMBDA_2, LAMBDA_3, LAMBDA_302, PLANAR_216])
def test_wr_lattices_satisfy_hermite_interval(rows):
    lower, lam, upper, ok = hermite_bound_holds(Lattice.from_rows(rows))
    assert ok
    assert lower <= lam <= upper
