"""Unitary message sets and perfect-distinguishability certification.

A message set is distinguishable on a shared state when the lifted states
(one per encoding unitary) are orthonormal; the certificate records the
worst Gram defect.  The shift/clock family supplies the standard full-size
set for maximally entangled states, and a seeded numerical search looks for
sets at other spectra by minimizing the off-diagonal Gram mass over
matrix-exponential parametrized unitaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import tolerances
from .linalg import as_matrix, dagger, hermitian_eigensystem, max_abs, rng_from, unitarity_defect
from .serialize import SCHEMA, matrix_from_json, matrix_to_json
from .states import BipartiteState, SchmidtSpectrum, apply_local, make_schmidt_state


@dataclass(frozen=True, eq=False)
class UnitaryMessageSet:
    d: int
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        tol = tolerances.get()
        ops = tuple(as_matrix(u) for u in self.unitaries)
        for u in ops:
            if u.shape != (self.d, self.d):
                raise ValueError("UnitaryMessageSet: operator shape does not match d")
            defect = unitarity_defect(u)
            if defect >= tol.unitarity:
                raise ValueError(f"UnitaryMessageSet: unitarity defect {defect:g}")
            u.setflags(write=False)
        object.__setattr__(self, "unitaries", ops)

    def __len__(self) -> int:
        return len(self.unitaries)


@dataclass(frozen=True)
class DistinguishabilityCertificate:
    """Worst deviation of the lifted-state Gram matrix from the identity."""

    gram_defect: float
    passed: bool


def certify_distinguishable(
    messages: UnitaryMessageSet, psi: BipartiteState
) -> DistinguishabilityCertificate:
    """Gram-test the lifted message states for orthonormality."""
    if messages.d != psi.d:
        raise ValueError("certify_distinguishable: dimension mismatch")
    lifted = [apply_local(u, psi).coords for u in messages.unitaries]
    g = np.array(lifted).conj() @ np.array(lifted).T
    defect = max_abs(g - np.eye(len(lifted)))
    return DistinguishabilityCertificate(
        gram_defect=float(defect), passed=bool(defect < tolerances.get().certificate)
    )


def capacity_bound_check(spectrum: SchmidtSpectrum, count: int) -> bool:
    """Whether the largest coefficient admits ``count`` distinguishable messages."""
    if count < 1:
        raise ValueError("capacity_bound_check: count must be positive")
    return spectrum.lambdas[0] <= spectrum.d / count + tolerances.get().equality


def weyl_set(d: int) -> UnitaryMessageSet:
    """The d^2 shift/clock unitaries X^a Z^b, ordered I, X, ..., Z, XZ, ...

    X cycles the basis (X|j> = |j+1 mod d>), Z multiplies |j> by the j-th
    power of the primitive d-th root of unity; element n is X^(n mod d)
    Z^(n div d).  Elements are pairwise trace-orthogonal.
    """
    if d < 2:
        raise ValueError("weyl_set: dimension must be >= 2")
    shift = np.zeros((d, d), dtype=complex)
    for j in range(d):
        shift[(j + 1) % d, j] = 1.0
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    ops = []
    for n in range(d * d):
        a, b = n % d, n // d
        ops.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return UnitaryMessageSet(d=d, unitaries=tuple(ops))


# ---------------------------------------------------------------------------
# Numerical search for message sets
# ---------------------------------------------------------------------------

def hermitian_from_params(theta: np.ndarray, d: int) -> np.ndarray:
    """Hermitian matrix from d^2 real parameters (diagonal, then re/im pairs)."""
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = theta[:d]
    idx = d
    for a in range(d):
        for b in range(a + 1, d):
            h[a, b] = theta[idx] + 1j * theta[idx + 1]
            h[b, a] = theta[idx] - 1j * theta[idx + 1]
            idx += 2
    return h


def unitary_from_generator(h: np.ndarray) -> np.ndarray:
    """exp(i h) for Hermitian h, by scaled-and-squared Taylor summation."""
    h = as_matrix(h)
    n = h.shape[0]
    a = 1j * h
    scale = float(np.linalg.norm(a, np.inf))
    squarings = max(0, int(np.ceil(np.log2(scale))) + 1) if scale > 0.5 else 0
    a = a / (2.0 ** squarings)
    term = np.eye(n, dtype=complex)
    total = np.eye(n, dtype=complex)
    for k in range(1, 60):
        term = term @ a / k
        total = total + term
        if max_abs(term) < 1e-18:
            break
    for _ in range(squarings):
        total = total @ total
    return total


def _phi_matrix(eigs: np.ndarray) -> np.ndarray:
    """Divided differences of exp(i .) on an eigenvalue grid (derivative kernel)."""
    delta = eigs[:, None] - eigs[None, :]
    mid = np.exp(0.5j * (eigs[:, None] + eigs[None, :]))
    return 1j * mid * np.sinc(delta / (2.0 * np.pi))


def _unitaries_from_theta(theta: np.ndarray, d: int, count: int) -> list[np.ndarray]:
    us = [np.eye(d, dtype=complex)]
    block = d * d
    for k in range(count - 1):
        h = hermitian_from_params(theta[k * block : (k + 1) * block], d)
        us.append(unitary_from_generator(h))
    return us


def _decompose_generators(theta: np.ndarray, d: int, count: int):
    """Eigendata, derivative kernels and unitaries for every free generator."""
    block = d * d
    qs: list[np.ndarray | None] = [None]
    phis: list[np.ndarray | None] = [None]
    us = [np.eye(d, dtype=complex)]
    for k in range(count - 1):
        h = hermitian_from_params(theta[k * block : (k + 1) * block], d)
        w, q = hermitian_eigensystem(h)
        qs.append(q)
        phis.append(_phi_matrix(w))
        us.append(q @ np.diag(np.exp(1j * w)) @ dagger(q))
    return qs, phis, us


def gram_mass_objective(spectrum: SchmidtSpectrum, theta: np.ndarray, count: int) -> float:
    """Sum of squared off-diagonal lifted-state overlaps; zero at perfect distinguishability."""
    d = spectrum.d
    us = _unitaries_from_theta(np.asarray(theta, dtype=float), d, count)
    lam = np.asarray(spectrum.lambdas)
    value = 0.0
    for i in range(count):
        for j in range(i + 1, count):
            g = np.sum(lam * np.diag(dagger(us[i]) @ us[j]))
            value += abs(g) ** 2
    return float(value)


def gram_mass_gradient(spectrum: SchmidtSpectrum, theta: np.ndarray, count: int) -> np.ndarray:
    """Analytic gradient of the objective with respect to the generator parameters.

    Uses the spectral form of the matrix-exponential derivative: in the
    eigenbasis of a generator, a perturbation is damped entrywise by the
    divided-difference kernel of exp(i .).
    """
    theta = np.asarray(theta, dtype=float)
    d = spectrum.d
    lam = np.asarray(spectrum.lambdas)
    dmat = np.diag(lam.astype(complex))
    block = d * d
    qs, phis, us = _decompose_generators(theta, d, count)

    grads = np.zeros_like(theta)
    for k in range(1, count):
        q, phi = qs[k], phis[k]
        ctot = np.zeros((d, d), dtype=complex)
        for i in range(count):
            if i == k:
                continue
            lo, hi = min(i, k), max(i, k)
            g = complex(np.sum(lam * np.diag(dagger(us[lo]) @ us[hi])))
            if k == hi:  # k enters on the right of the pair
                a = dagger(q) @ (dmat @ dagger(us[lo])) @ q
                ctot += np.conj(g) * (a.T * phi)
            else:  # k enters daggered on the left
                b = dagger(q) @ (us[hi] @ dmat) @ q
                ctot += np.conj(g) * (b.T * np.conj(phi).T)
        kmat = np.conj(q) @ ctot @ q.T
        gk = np.empty(block)
        gk[:d] = 2.0 * np.real(np.diag(kmat))
        idx = d
        for a_ in range(d):
            for b_ in range(a_ + 1, d):
                gk[idx] = 2.0 * np.real(kmat[a_, b_] + kmat[b_, a_])
                gk[idx + 1] = -2.0 * np.imag(kmat[a_, b_] - kmat[b_, a_])
                idx += 2
        grads[(k - 1) * block : k * block] = gk
    return grads


def _gram_and_jacobian(
    spectrum: SchmidtSpectrum, theta: np.ndarray, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal lifted overlaps and their Jacobian in the generator parameters."""
    theta = np.asarray(theta, dtype=float)
    d = spectrum.d
    lam = np.asarray(spectrum.lambdas)
    dmat = np.diag(lam.astype(complex))
    block = d * d
    qs, phis, us = _decompose_generators(theta, d, count)

    pairs = [(i, j) for i in range(count) for j in range(i + 1, count)]
    overlaps = np.empty(len(pairs), dtype=complex)
    jac = np.zeros((len(pairs), (count - 1) * block), dtype=complex)

    def extract(kmat: np.ndarray) -> np.ndarray:
        col = np.empty(block, dtype=complex)
        col[:d] = np.diag(kmat)
        idx = d
        for a_ in range(d):
            for b_ in range(a_ + 1, d):
                col[idx] = kmat[a_, b_] + kmat[b_, a_]
                col[idx + 1] = 1j * (kmat[a_, b_] - kmat[b_, a_])
                idx += 2
        return col

    for p, (i, j) in enumerate(pairs):
        overlaps[p] = np.sum(lam * np.diag(dagger(us[i]) @ us[j]))
        q, phi = qs[j], phis[j]
        a = dagger(q) @ (dmat @ dagger(us[i])) @ q
        kmat = np.conj(q) @ (a.T * phi) @ q.T
        jac[p, (j - 1) * block : j * block] = extract(kmat)
        if i >= 1:
            q, phi = qs[i], phis[i]
            b = dagger(q) @ (us[j] @ dmat) @ q
            kmat = np.conj(q) @ (b.T * np.conj(phi).T) @ q.T
            jac[p, (i - 1) * block : i * block] += extract(kmat)
    return overlaps, jac


def _polish(
    spectrum: SchmidtSpectrum,
    theta: np.ndarray,
    count: int,
    max_rounds: int = 25,
    target: float = 1e-26,
) -> tuple[np.ndarray, float]:
    """Damped Gauss-Newton refinement of a near-solution to certificate accuracy.

    The objective is a zero-residual least-squares problem at a solution, so
    Gauss-Newton converges quadratically where plain descent only crawls.
    """
    f = gram_mass_objective(spectrum, theta, count)
    best_theta, best_f = theta, f
    for _ in range(max_rounds):
        if f <= target:
            break
        overlaps, jac = _gram_and_jacobian(spectrum, theta, count)
        system = np.vstack([jac.real, jac.imag])
        residual = np.concatenate([overlaps.real, overlaps.imag])
        step, *_ = np.linalg.lstsq(system, residual, rcond=None)
        scale = 1.0
        improved = False
        for _ in range(12):
            cand = theta - scale * step
            f_cand = gram_mass_objective(spectrum, cand, count)
            if f_cand < f:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        theta, f = cand, f_cand
        if f < best_f:
            best_theta, best_f = theta, f
    return best_theta, best_f


def _descend(
    spectrum: SchmidtSpectrum,
    theta: np.ndarray,
    count: int,
    max_steps: int = 800,
    target: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Gradient descent with Barzilai-Borwein step sizes and a backtracking guard."""
    f = gram_mass_objective(spectrum, theta, count)
    g = gram_mass_gradient(spectrum, theta, count)
    step = 0.1
    prev_theta: np.ndarray | None = None
    prev_g: np.ndarray | None = None
    for _ in range(max_steps):
        gnorm2 = float(g @ g)
        if f <= target or gnorm2 <= 1e-28:
            break
        if prev_theta is not None:
            dt = theta - prev_theta
            dg = g - prev_g
            denom = float(dt @ dg)
            step = float(dt @ dt) / denom if denom > 1e-30 else 1.0
            step = min(max(step, 1e-8), 1e4)
        accepted = False
        for _ in range(50):
            cand = theta - step * g
            f_cand = gram_mass_objective(spectrum, cand, count)
            if f_cand <= f - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        prev_theta, prev_g = theta, g
        theta, f = cand, f_cand
        g = gram_mass_gradient(spectrum, theta, count)
    return theta, f


def search_message_set(
    spectrum: SchmidtSpectrum, count: int, seed: int, max_iters: int = 20
) -> UnitaryMessageSet | None:
    """Search for ``count`` unitaries whose lifted states are orthonormal.

    The first unitary is pinned to the identity (a free gauge); the rest are
    parametrized as exponentials of Hermitian generators, descended from
    seeded random starts, and polished by damped Gauss-Newton once descent
    reaches the attraction basin.  Returns a certified set, or None once the
    restart budget is exhausted -- existence is not guaranteed away from the
    maximally entangled point.
    """
    d = spectrum.d
    if count < 1 or count > d * d:
        raise ValueError("search_message_set: count must be between 1 and d^2")
    if not capacity_bound_check(spectrum, count):
        raise ValueError("search_message_set: spectrum violates the capacity bound for count")
    eye = np.eye(d, dtype=complex)
    if count == 1:
        return UnitaryMessageSet(d=d, unitaries=(eye,))
    psi = make_schmidt_state(spectrum)
    n_params = (count - 1) * d * d
    for restart in range(max_iters):
        rng = rng_from(seed, restart)
        theta0 = rng.standard_normal(n_params)
        theta, _ = _descend(spectrum, theta0, count)
        theta, _ = _polish(spectrum, theta, count)
        candidate = UnitaryMessageSet(
            d=d, unitaries=tuple(_unitaries_from_theta(theta, d, count))
        )
        if certify_distinguishable(candidate, psi).passed:
            return candidate
    return None


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def message_set_to_json(
    messages: UnitaryMessageSet,
    psi: BipartiteState,
    seed: int | None = None,
) -> dict:
    cert = certify_distinguishable(messages, psi)
    return {
        "schema": SCHEMA,
        "kind": "message-set",
        "d": messages.d,
        "count": len(messages),
        "unitaries": [matrix_to_json(u) for u in messages.unitaries],
        "certificate_defect": cert.gram_defect,
        "pass": cert.passed,
        "seed": seed,
    }


def message_set_from_json(doc: dict | str) -> UnitaryMessageSet:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("kind") != "message-set":
        raise ValueError("message_set_from_json: not a message-set document")
    d = int(doc["d"])
    ops = tuple(matrix_from_json(rows) for rows in doc["unitaries"])
    return UnitaryMessageSet(d=d, unitaries=ops)
