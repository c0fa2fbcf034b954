"""Dense complex matrix kernel for small dimensions (intended for n <= 16).

Products, adjoints and Kronecker products defer to numpy on complex128
arrays (pairs of double-precision reals).  The pieces with bespoke numerics
live here: seeded unitary completion by modified Gram-Schmidt, a cyclic
Jacobi eigensolver for Hermitian matrices, and square roots of positive
diagonal matrices.  All functions are pure; randomized ones take explicit
seeds and are reproducible bit for bit.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from . import tolerances

_MASK64 = (1 << 64) - 1


def rng_from(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator (Philox) for ``seed``, on a derived substream.

    Extra integers select independent substreams (restart index, trial
    index, ...) so concurrent consumers never share state.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(ss))


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    x = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def max_abs(a) -> float:
    """Entrywise max-modulus norm."""
    a = np.asarray(a)
    return 0.0 if a.size == 0 else float(np.max(np.abs(a)))


def kron(a, b) -> np.ndarray:
    """Kronecker product; entry ((i*p+k), (j*q+l)) is a[i,j] * b[k,l]."""
    return np.kron(as_matrix(a), as_matrix(b))


def gram(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Gram matrix of a vector collection, conjugate-linear in the first slot."""
    vecs = [as_vector(v) for v in vectors]
    if not vecs:
        return np.zeros((0, 0), dtype=complex)
    dim = vecs[0].size
    if any(v.size != dim for v in vecs):
        raise ValueError("gram: vectors do not share one dimension")
    stacked = np.array(vecs)
    return stacked.conj() @ stacked.T


def unitarity_defect(m: np.ndarray) -> float:
    m = as_matrix(m)
    return max_abs(dagger(m) @ m - np.eye(m.shape[1]))


def complete_to_unitary(
    columns: Iterable[np.ndarray], seed: int, *, dim: int | None = None
) -> np.ndarray:
    """Extend orthonormal columns to a square unitary matrix.

    The supplied columns are reproduced bit-exactly as the leading columns.
    Missing columns are drawn as seeded complex-Gaussian vectors and
    orthogonalized by modified Gram-Schmidt against everything before them;
    a draw whose projected norm falls below the redraw threshold is
    discarded.  The global phase of added columns is whatever the draw
    produces; only phase-invariant quantities should be compared.

    Parameters
    ----------
    columns : orthonormal vectors of a common dimension (may be empty)
    seed : int, selects the deterministic completion
    dim : required when ``columns`` is empty, otherwise inferred

    Raises
    ------
    ValueError : columns not orthonormal within tolerance, or too many.
    """
    tol = tolerances.get()
    cols = [as_vector(c) for c in columns]
    if cols:
        n = cols[0].size if dim is None else int(dim)
    elif dim is None:
        raise ValueError("complete_to_unitary: dim required when no columns given")
    else:
        n = int(dim)
    if len(cols) > n:
        raise ValueError(f"complete_to_unitary: {len(cols)} columns exceed dimension {n}")
    if any(c.size != n for c in cols):
        raise ValueError("complete_to_unitary: column dimensions disagree")
    if cols and max_abs(gram(cols) - np.eye(len(cols))) > tol.unitarity:
        raise ValueError("complete_to_unitary: input columns are not orthonormal")

    basis = [c.copy() for c in cols]
    rng = rng_from(seed)
    while len(basis) < n:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for _ in range(2):  # second pass keeps orthogonality near machine level
            for u in basis:
                v = v - np.vdot(u, v) * u
        norm = float(np.linalg.norm(v))
        if norm < tol.completion_redraw:
            continue
        basis.append(v / norm)
    m = np.column_stack(basis)
    defect = unitarity_defect(m)
    if defect > tol.unitarity:
        raise RuntimeError(f"complete_to_unitary: completion defect {defect:g}")
    for k, c in enumerate(cols):
        m[:, k] = c  # bit-exact reproduction of the inputs
    return m


def hermitian_eigensystem(
    h: np.ndarray, *, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of a Hermitian matrix.

    Cyclic Jacobi rotations; a sweep visits every off-diagonal entry and
    the iteration stops once the off-diagonal Frobenius mass falls below
    the jacobi tolerance times the matrix scale.  Returns ``(w, v)`` with
    ``v`` unitary, columns ordered to match ``w``.
    """
    tol = tolerances.get()
    a = as_matrix(h).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("hermitian_eigensystem: matrix is not square")
    if max_abs(a - dagger(a)) > tol.unitarity:
        raise ValueError("hermitian_eigensystem: matrix is not Hermitian")
    a = (a + dagger(a)) / 2.0
    v = np.eye(n, dtype=complex)
    if n > 1:
        target = tol.jacobi * max(1.0, float(np.linalg.norm(a)))
        skip = target / (2.0 * n)
        off_mask = ~np.eye(n, dtype=bool)
        for _ in range(max_sweeps):
            off = float(np.sqrt(np.sum(np.abs(a[off_mask]) ** 2)))
            if off <= target:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    g = abs(a[p, q])
                    if g <= skip:
                        continue
                    f = a[p, q] / g  # unit phase of the pivot entry
                    tau = (a[q, q].real - a[p, p].real) / (2.0 * g)
                    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                    c = 1.0 / np.hypot(1.0, t)
                    s = t * c
                    fb = np.conj(f)
                    col_p, col_q = a[:, p].copy(), a[:, q].copy()
                    a[:, p] = c * col_p - fb * s * col_q
                    a[:, q] = s * col_p + fb * c * col_q
                    row_p, row_q = a[p, :].copy(), a[q, :].copy()
                    a[p, :] = c * row_p - f * s * row_q
                    a[q, :] = s * row_p + f * c * row_q
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    vp, vq = v[:, p].copy(), v[:, q].copy()
                    v[:, p] = c * vp - fb * s * vq
                    v[:, q] = s * vp + fb * c * vq
        else:
            raise RuntimeError("hermitian_eigensystem: Jacobi sweep limit reached")
    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(h: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending (dimension <= 16)."""
    h = as_matrix(h)
    if h.shape[0] > 16:
        raise ValueError("hermitian_eigenvalues: dimension exceeds 16")
    w, _ = hermitian_eigensystem(h)
    return w


def sqrt_psd_diagonal(h: np.ndarray) -> np.ndarray:
    """Elementwise square root of a positive diagonal matrix.

    Diagonal entries in [-unitarity, 0) are clamped to zero; anything more
    negative, any off-diagonal mass, or a non-real diagonal is an error.
    """
    tol = tolerances.get()
    h = as_matrix(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise ValueError("sqrt_psd_diagonal: matrix is not square")
    off = h - np.diag(np.diag(h))
    if max_abs(off) > tol.unitarity:
        raise ValueError("sqrt_psd_diagonal: off-diagonal entry exceeds tolerance")
    diag = np.diag(h)
    if max_abs(diag.imag) > tol.unitarity:
        raise ValueError("sqrt_psd_diagonal: diagonal is not real")
    values = diag.real.copy()
    if np.any(values < -tol.unitarity):
        raise ValueError("sqrt_psd_diagonal: negative diagonal entry")
    values[values < 0.0] = 0.0
    return np.diag(np.sqrt(values)).astype(complex)


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Seeded pseudo-random unitary (a completion of the empty column set)."""
    return complete_to_unitary((), seed, dim=n)
