import numpy as np
import pytest

from densecode import linalg
from densecode.linalg import (
    complete_to_unitary,
    gram,
    hermitian_eigensystem,
    hermitian_eigenvalues,
    kron,
    max_abs,
    rng_from,
    sqrt_psd_diagonal,
    unitarity_defect,
)

from conftest import EXAMPLE_M, I2, X


def test_kron_identity():
    assert max_abs(kron(I2, I2) - np.eye(4)) == 0.0


def test_kron_shift_on_first_factor():
    # In the row-major product labeling, the first factor is the slow index.
    out = kron(X, I2) @ np.eye(4)[:, 0]
    assert max_abs(out - np.eye(4)[:, 2]) == 0.0


def test_kron_elementwise_oracle():
    rng = rng_from(11)
    for _ in range(5):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        got = kron(a, b)
        expected = np.empty((9, 9), dtype=complex)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    for l in range(3):
                        expected[i * 3 + k, j * 3 + l] = a[i, j] * b[k, l]
        assert max_abs(got - expected) < 1e-14


def test_kron_associativity():
    rng = rng_from(12)
    for _ in range(5):
        mats = [rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)) for _ in range(3)]
        a, b, c = mats
        assert max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-12


def test_gram_orthonormal_pair():
    g = gram([np.array([1, 0, 0]), np.array([0, 1, 0])])
    assert max_abs(g - np.eye(2)) == 0.0


def test_gram_repeated_vector():
    u = np.array([1 + 2j, 3.0, -1j])
    g = gram([u, u])
    norm2 = float(np.vdot(u, u).real)
    assert max_abs(g - norm2 * np.ones((2, 2))) < 1e-12


def test_gram_of_example_columns_is_identity():
    g = gram([EXAMPLE_M[:, k] for k in range(4)])
    assert max_abs(g - np.eye(4)) < 1e-12


def test_gram_is_psd():
    rng = rng_from(13)
    for _ in range(10):
        vecs = [rng.standard_normal(5) + 1j * rng.standard_normal(5) for _ in range(4)]
        g = gram(vecs)
        assert max_abs(g - g.conj().T) < 1e-12
        assert hermitian_eigenvalues(g)[-1] > -1e-9


def test_gram_dimension_mismatch():
    with pytest.raises(ValueError):
        gram([np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0])])


def test_completion_of_standard_basis():
    cols = [np.eye(4)[:, k] for k in range(3)]
    m = complete_to_unitary(cols, seed=3)
    assert unitarity_defect(m) < 1e-10
    # Remaining direction is the fourth basis vector, up to a phase.
    assert abs(abs(m[3, 3]) - 1.0) < 1e-12


def test_completion_reproduces_inputs_bit_exactly():
    base = complete_to_unitary((), seed=77, dim=5)
    cols = [base[:, k] for k in range(3)]
    m = complete_to_unitary(cols, seed=4)
    for k, c in enumerate(cols):
        assert np.array_equal(m[:, k], c)
    assert unitarity_defect(m) < 1e-10


def test_completion_of_full_unitary_is_noop():
    u = linalg.random_unitary(4, seed=9)
    m = complete_to_unitary([u[:, k] for k in range(4)], seed=1)
    assert np.array_equal(m, u)


def test_completion_matches_example_complement():
    ours = complete_to_unitary([EXAMPLE_M[:, 0], EXAMPLE_M[:, 1]], seed=5)
    p_ours = ours[:, 2:] @ ours[:, 2:].conj().T
    p_example = EXAMPLE_M[:, 2:] @ EXAMPLE_M[:, 2:].conj().T
    assert max_abs(p_ours - p_example) < 1e-10


def test_completion_rejects_bad_input():
    with pytest.raises(ValueError):
        complete_to_unitary([np.array([1.0, 1.0])], seed=0)
    with pytest.raises(ValueError):
        complete_to_unitary([np.eye(2)[:, 0]] * 3, seed=0)


def test_completion_defect_over_many_seeds():
    for seed in range(30):
        m = linalg.random_unitary(6, seed=seed)
        assert unitarity_defect(m) < 1e-10


def test_eigenvalues_of_diagonal():
    w = hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0, 1.0], atol=1e-12)


def test_eigenvalues_of_projector():
    u = np.array([0.6, 0.8j, 0.0])
    w = hermitian_eigenvalues(np.outer(u, u.conj()))
    assert np.allclose(w, [1.0, 0.0, 0.0], atol=1e-12)


def test_eigenvalues_reject_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalues_reject_oversized_input():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.eye(17))


def test_left_right_gram_share_spectrum_4x4():
    rng = rng_from(31)
    y = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    w1 = hermitian_eigenvalues(y.conj().T @ y)
    w2 = hermitian_eigenvalues(y @ y.conj().T)
    assert max_abs(w1 - w2) < 1e-9


def test_left_right_gram_share_spectrum_random():
    rng = rng_from(32)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        w1 = hermitian_eigenvalues(y.conj().T @ y)
        w2 = hermitian_eigenvalues(y @ y.conj().T)
        assert max_abs(np.sort(w1) - np.sort(w2)) < 1e-8


def test_eigensystem_reconstructs():
    rng = rng_from(33)
    for n in (2, 5, 16):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = g + g.conj().T
        w, v = hermitian_eigensystem(h)
        assert max_abs(v @ np.diag(w) @ v.conj().T - h) < 1e-11
        assert unitarity_defect(v) < 1e-12


def test_eigensystem_degenerate_spectra():
    w, v = hermitian_eigensystem(np.eye(6))
    assert np.allclose(w, 1.0) and unitarity_defect(v) < 1e-12
    # Repeated eigenvalues from a rank-deficient Gram matrix.
    rng = rng_from(34)
    u = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    h = np.outer(u, u.conj()) + 2.0 * np.eye(5)
    w, v = hermitian_eigensystem(h)
    assert max_abs(v @ np.diag(w) @ v.conj().T - h) < 1e-12
    assert np.allclose(w[1:], 2.0, atol=1e-12)


def test_completion_deterministic_per_seed():
    a = complete_to_unitary([np.eye(4)[:, 0]], seed=123)
    b = complete_to_unitary([np.eye(4)[:, 0]], seed=123)
    assert np.array_equal(a, b)
    c = complete_to_unitary([np.eye(4)[:, 0]], seed=124)
    assert not np.array_equal(a, c)


def test_sqrt_psd_diagonal_basic():
    out = sqrt_psd_diagonal(np.diag([4.0, 0.0]))
    assert max_abs(out - np.diag([2.0, 0.0])) == 0.0


def test_sqrt_psd_diagonal_example_entry():
    out = sqrt_psd_diagonal(np.diag([320 / 6561, 0.0]))
    assert abs(out[0, 0] - np.sqrt(320 / 6561)) == 0.0
    squared = out @ out
    assert max_abs(squared - np.diag([320 / 6561, 0.0])) < 1e-15


def test_sqrt_psd_diagonal_clamps_tiny_negative():
    out = sqrt_psd_diagonal(np.diag([-5e-11, 1.0]))
    assert max_abs(out - np.diag([0.0, 1.0])) == 0.0


def test_sqrt_psd_diagonal_rejections():
    with pytest.raises(ValueError):
        sqrt_psd_diagonal(np.array([[1.0, 1e-5], [1e-5, 1.0]]))
    with pytest.raises(ValueError):
        sqrt_psd_diagonal(np.diag([-1e-3, 1.0]))
