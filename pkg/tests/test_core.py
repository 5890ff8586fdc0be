import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import def1_unfold, loop_conv1d
from tenkit import (
    cp_als,
    fold,
    frobenius,
    generalized_inner,
    hadamard,
    inner,
    khatri_rao,
    kronecker,
    mode_n_conv1d,
    mode_n_product,
    mode_n_vec_product,
    norm_l0,
    norm_lp,
    nuclear,
    outer,
    schatten,
    unfold,
    vectorize,
)

T232 = np.arange(12, dtype=float).reshape(2, 3, 2)


# ---------------------------------------------------------------------------
# unfold / fold / vectorize


def test_unfold_matrix_mode0_is_identity():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(unfold(m, 0), m)


def test_unfold_232_mode0():
    expected = np.array([[0, 1, 2, 3, 4, 5], [6, 7, 8, 9, 10, 11]], dtype=float)
    assert np.array_equal(unfold(T232, 0), expected)
    assert np.array_equal(unfold(T232, 0), def1_unfold(T232, 0))


def test_unfold_232_mode1_collects_fibers():
    got = unfold(T232, 1)
    assert got.shape == (3, 4)
    for r in range(3):
        assert np.array_equal(got[r].reshape(2, 2), T232[:, r, :])
    assert np.array_equal(got, def1_unfold(T232, 1))


def test_unfold_matches_enumeration_on_random(rng):
    for _ in range(20):
        order = rng.integers(1, 5)
        shape = tuple(rng.integers(1, 5, size=order))
        t = rng.standard_normal(shape)
        for mode in range(order):
            assert np.array_equal(unfold(t, mode), def1_unfold(t, mode))


def test_unfold_mode_out_of_range():
    with pytest.raises(ValueError):
        unfold(T232, 3)
    with pytest.raises(ValueError):
        unfold(T232, -1)


def test_fold_roundtrip_is_exact(rng):
    t = rng.standard_normal((3, 4, 2, 2))
    for mode in range(4):
        assert np.array_equal(fold(unfold(t, mode), mode, t.shape), t)


def test_fold_example_232():
    m = np.array([[0, 1, 2, 3, 4, 5], [6, 7, 8, 9, 10, 11]], dtype=float)
    assert np.array_equal(fold(m, 0, (2, 3, 2)), T232)


def test_fold_wrong_shape_errors():
    m = unfold(T232, 0)
    with pytest.raises(ValueError):
        fold(m, 0, (2, 3, 3))
    with pytest.raises(ValueError):
        fold(m, 1, (2, 3, 2))


def test_vectorize():
    v = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(vectorize(v), v)
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(vectorize(m), np.array([1.0, 2.0, 3.0, 4.0]))
    assert np.array_equal(vectorize(T232), T232.reshape(-1))


# ---------------------------------------------------------------------------
# products


def test_kronecker_identity_block_diagonal(rng):
    b = rng.standard_normal((2, 3))
    got = kronecker(np.eye(2), b)
    expected = np.block([[b, np.zeros((2, 3))], [np.zeros((2, 3)), b]])
    assert np.array_equal(got, expected)


def test_kronecker_hand_example():
    got = kronecker(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]]))
    assert np.array_equal(got, np.array([[3.0, 6.0], [4.0, 8.0]]))


def test_kronecker_mixed_product(rng):
    a, b, c, d = (rng.standard_normal((2, 2)) for _ in range(4))
    lhs = kronecker(a, b) @ kronecker(c, d)
    rhs = kronecker(a @ c, b @ d)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_khatri_rao_single_matrix(rng):
    a = rng.standard_normal((3, 2))
    assert np.array_equal(khatri_rao([a]), a)


def test_khatri_rao_columnwise_kronecker(rng):
    a, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    got = khatri_rao([a, b])
    assert got.shape == (4, 2)
    for r in range(2):
        assert np.array_equal(got[:, r], np.kron(a[:, r], b[:, r]))


def test_khatri_rao_three_matrices_associative(rng):
    mats = [rng.standard_normal((d, 3)) for d in (2, 3, 2)]
    direct = np.stack(
        [np.kron(np.kron(mats[0][:, r], mats[1][:, r]), mats[2][:, r]) for r in range(3)],
        axis=1,
    )
    assert np.allclose(khatri_rao(mats), direct, atol=1e-14)


def test_khatri_rao_column_mismatch():
    with pytest.raises(ValueError):
        khatri_rao([np.ones((2, 2)), np.ones((2, 3))])


def test_hadamard():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(hadamard(a, np.ones((2, 2))), a)
    assert np.array_equal(hadamard(a, np.zeros((2, 2))), np.zeros((2, 2)))
    b = np.array([[2.0, 0.0], [1.0, 1.0]])
    assert np.array_equal(hadamard(a, b), np.array([[2.0, 0.0], [3.0, 4.0]]))
    with pytest.raises(ValueError):
        hadamard(a, np.ones((2, 3)))


def test_outer_single_vector():
    v = np.array([1.0, 2.0])
    assert np.array_equal(outer([v]), v)


def test_outer_hand_example():
    got = outer([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
    assert np.array_equal(got, np.array([[3.0, 4.0], [6.0, 8.0]]))


def test_outer_element_formula(rng):
    vecs = [rng.standard_normal(d) for d in (2, 3, 2)]
    got = outer(vecs)
    for idx in np.ndindex(*got.shape):
        expected = vecs[0][idx[0]] * vecs[1][idx[1]] * vecs[2][idx[2]]
        assert got[idx] == pytest.approx(expected, abs=1e-14)


def test_outer_has_cp_rank_one(rng):
    vecs = [rng.standard_normal(d) + 2.0 for d in (3, 4, 2)]
    t = outer(vecs)
    k = cp_als(t, 1)
    assert np.linalg.norm(k.to_tensor() - t) < 1e-10 * np.linalg.norm(t)


def test_mode_n_product_identity(rng):
    t = rng.standard_normal((2, 3, 4))
    assert np.allclose(mode_n_product(t, np.eye(3), 1), t, atol=1e-15)


def test_mode_n_product_composition(rng):
    t = rng.standard_normal((2, 3, 4))
    a = rng.standard_normal((5, 3))
    b = rng.standard_normal((2, 5))
    lhs = mode_n_product(mode_n_product(t, a, 1), b, 1)
    rhs = mode_n_product(t, b @ a, 1)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_mode_n_product_unfold_identity(rng):
    t = rng.standard_normal((2, 3, 4))
    m = rng.standard_normal((5, 3))
    got = unfold(mode_n_product(t, m, 1), 1)
    assert np.allclose(got, m @ unfold(t, 1), atol=1e-12)


def test_mode_n_product_dim_mismatch(rng):
    t = rng.standard_normal((2, 3, 4))
    with pytest.raises(ValueError):
        mode_n_product(t, np.ones((2, 5)), 1)
    with pytest.raises(ValueError):
        mode_n_product(t, np.ones((2, 3)), 5)


def test_mode_n_vec_product_basis_selects_slice(rng):
    t = rng.standard_normal((2, 3, 4))
    e1 = np.array([0.0, 1.0, 0.0])
    assert np.allclose(mode_n_vec_product(t, e1, 1), t[:, 1, :], atol=1e-15)


def test_mode_n_vec_product_matrix_case(rng):
    m = rng.standard_normal((3, 4))
    v = rng.standard_normal(4)
    assert np.allclose(mode_n_vec_product(m, v, 1), m @ v, atol=1e-14)


def test_mode_n_vec_product_equals_row_matrix_then_squeeze(rng):
    t = rng.standard_normal((2, 3, 4))
    v = rng.standard_normal(3)
    via_matrix = np.squeeze(mode_n_product(t, v[None, :], 1), axis=1)
    assert np.array_equal(mode_n_vec_product(t, v, 1), via_matrix)


def test_mode_n_vec_product_chain_is_multilinear_form(rng):
    t = rng.standard_normal((2, 3, 2))
    vs = [rng.standard_normal(d) for d in (2, 3, 2)]
    out = t
    for v in vs:
        out = mode_n_vec_product(out, v, 0)
    brute = sum(
        t[i, j, k] * vs[0][i] * vs[1][j] * vs[2][k]
        for i in range(2)
        for j in range(3)
        for k in range(2)
    )
    assert float(out) == pytest.approx(brute, rel=1e-12)


def test_inner_is_squared_frobenius(rng):
    x = rng.standard_normal((3, 4, 2))
    assert inner(x, x) == pytest.approx(frobenius(x) ** 2, rel=1e-12)


def test_inner_shape_mismatch(rng):
    with pytest.raises(ValueError):
        inner(rng.standard_normal((2, 3)), rng.standard_normal((3, 2)))


def test_generalized_inner_full_overlap(rng):
    x = rng.standard_normal((2, 3, 4))
    y = rng.standard_normal((2, 3, 4))
    got = generalized_inner(x[None], y[..., None], 3)
    assert got.shape == (1, 1)
    assert got[0, 0] == pytest.approx(inner(x, y), rel=1e-12)


def test_generalized_inner_vs_unfold_oracle(rng):
    x = rng.standard_normal((2, 2, 3))
    y = rng.standard_normal((2, 3, 4))
    got = generalized_inner(x, y, 2)
    oracle = x.reshape(2, 6) @ y.reshape(6, 4)
    assert np.allclose(got, oracle, atol=1e-12)


def test_generalized_inner_shape_mismatch(rng):
    with pytest.raises(ValueError):
        generalized_inner(rng.standard_normal((2, 3)), rng.standard_normal((4, 2)), 1)


# ---------------------------------------------------------------------------
# mode-wise convolution


def test_conv1d_unit_kernel(rng):
    t = rng.standard_normal((2, 4))
    assert np.allclose(mode_n_conv1d(t, np.array([1.0]), 1), t, atol=1e-15)


def test_conv1d_shift_select():
    t = np.array([[1.0, 2.0, 3.0]])
    got = mode_n_conv1d(t, np.array([0.0, 1.0]), 1)
    assert np.array_equal(got, np.array([[2.0, 3.0]]))


def test_conv1d_matches_loop_oracle(rng):
    sig = rng.standard_normal(5)
    ker = rng.standard_normal(3)
    got = mode_n_conv1d(sig.reshape(1, 5), ker, 1)
    assert np.allclose(got[0], loop_conv1d(sig, ker), atol=1e-13)


def test_conv1d_kernel_too_long(rng):
    with pytest.raises(ValueError):
        mode_n_conv1d(rng.standard_normal((2, 3)), np.ones(4), 1)


# ---------------------------------------------------------------------------
# norms


def test_norms_of_zero():
    z = np.zeros((2, 3))
    assert norm_lp(z, 1) == 0.0
    assert frobenius(z) == 0.0
    assert norm_l0(z) == 0


def test_norm_345():
    assert norm_lp(np.array([3.0, 4.0]), 2) == pytest.approx(5.0, rel=1e-15)
    assert frobenius(np.array([3.0, 4.0])) == pytest.approx(5.0, rel=1e-15)


def test_norm_l0_counts():
    assert norm_l0(np.array([0.0, 1.0, 0.0, 2.0])) == 2


def test_norm_lp_rejects_small_p():
    with pytest.raises(ValueError):
        norm_lp(np.ones(3), 0.5)


def test_schatten_identity():
    assert nuclear(np.eye(4)) == pytest.approx(4.0, rel=1e-12)


def test_schatten_rank_one(rng):
    u, v = rng.standard_normal(4), rng.standard_normal(3)
    got = nuclear(np.outer(u, v))
    assert got == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v), rel=1e-12)


def test_schatten_diag():
    assert schatten(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0, rel=1e-12)
    with pytest.raises(ValueError):
        schatten(np.eye(2), 0.5)


# ---------------------------------------------------------------------------
# property-based invariants

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)
elements = st.floats(-10, 10, allow_nan=False, width=64)


def tensors(shape_strategy=shapes):
    return shape_strategy.flatmap(
        lambda s: hnp.arrays(np.float64, s, elements=elements)
    )


@settings(max_examples=60, deadline=None)
@given(tensors(), st.data())
def test_prop_fold_unfold_roundtrip(t, data):
    mode = data.draw(st.integers(0, t.ndim - 1))
    assert np.array_equal(fold(unfold(t, mode), mode, t.shape), t)


@settings(max_examples=40, deadline=None)
@given(tensors(), st.data())
def test_prop_unfold_linearity(x, data):
    y = data.draw(hnp.arrays(np.float64, x.shape, elements=elements))
    a = data.draw(st.floats(-5, 5, allow_nan=False, width=64))
    b = data.draw(st.floats(-5, 5, allow_nan=False, width=64))
    mode = data.draw(st.integers(0, x.ndim - 1))
    lhs = unfold(a * x + b * y, mode)
    rhs = a * unfold(x, mode) + b * unfold(y, mode)
    scale = max(np.abs(rhs).max(), 1.0)
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(tensors(), st.data())
def test_prop_mode_product_unfold_consistency(t, data):
    mode = data.draw(st.integers(0, t.ndim - 1))
    rows = data.draw(st.integers(1, 4))
    m = data.draw(
        hnp.arrays(np.float64, (rows, t.shape[mode]), elements=elements)
    )
    lhs = unfold(mode_n_product(t, m, mode), mode)
    rhs = m @ unfold(t, mode)
    bound = 1e-12 * max(np.linalg.norm(m) * np.linalg.norm(t), 1.0)
    assert np.abs(lhs - rhs).max() <= bound


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(1, 4), min_size=2, max_size=4).map(tuple).flatmap(
        lambda s: hnp.arrays(np.float64, s, elements=elements)
    ),
    st.data(),
)
def test_prop_mode_product_commutes_across_modes(t, data):
    m1 = data.draw(st.integers(0, t.ndim - 1))
    m2 = data.draw(st.integers(0, t.ndim - 1).filter(lambda k: k != m1))
    a = data.draw(hnp.arrays(np.float64, (2, t.shape[m1]), elements=elements))
    b = data.draw(hnp.arrays(np.float64, (3, t.shape[m2]), elements=elements))
    lhs = mode_n_product(mode_n_product(t, a, m1), b, m2)
    rhs = mode_n_product(mode_n_product(t, b, m2), a, m1)
    scale = max(np.abs(rhs).max(), 1.0)
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(tensors())
def test_prop_inner_is_squared_norm(x):
    assert inner(x, x) == pytest.approx(frobenius(x) ** 2, rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.data())
def test_prop_khatri_rao_columns(i, j, r, data):
    a = data.draw(hnp.arrays(np.float64, (i, r), elements=elements))
    b = data.draw(hnp.arrays(np.float64, (j, r), elements=elements))
    got = khatri_rao([a, b])
    for c in range(r):
        assert np.array_equal(got[:, c], np.kron(a[:, c], b[:, c]))
