"""Schmidt spectra, the shared two-qudit state, and local-operator action.

Basis convention for the joint space: the product basis |ij> (i on Alice's
side, j on Bob's) is listed in d groups of d elements, Bob's index selecting
the group, so coordinate (i, j) lives at flat index j*d + i.  With this
ordering the coordinate vector of a lifted operator (A on Alice, identity on
Bob) is obtained by a plain row-wise matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import tolerances
from .linalg import as_matrix, as_vector


def basis_index(i: int, j: int, d: int) -> int:
    """Flat coordinate index of |ij> in the d-groups-of-d ordering."""
    return j * d + i


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Ordered squared Schmidt coefficients of the shared state.

    ``lambdas`` sum to one, are strictly positive and descending.  ``exact``
    optionally carries the rational values a spectrum was parsed from (same
    order), used to echo exact inputs back in reports.
    """

    d: int
    lambdas: tuple[float, ...]
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        tol = tolerances.get()
        if self.d < 2:
            raise ValueError("SchmidtSpectrum: qudit dimension must be >= 2")
        if len(self.lambdas) != self.d:
            raise ValueError("SchmidtSpectrum: need exactly d coefficients")
        lam = np.asarray(self.lambdas, dtype=float)
        if not np.all(np.isfinite(lam)):
            raise ValueError("SchmidtSpectrum: non-finite coefficient")
        if abs(float(lam.sum()) - 1.0) > tol.equality:
            raise ValueError(f"SchmidtSpectrum: coefficients sum to {lam.sum()!r}, not 1")
        if np.any(lam <= 0.0):
            raise ValueError("SchmidtSpectrum: all coefficients must be positive")
        if np.any(np.diff(lam) > 0.0):
            raise ValueError("SchmidtSpectrum: coefficients must be descending")
        if self.exact is not None and len(self.exact) != self.d:
            raise ValueError("SchmidtSpectrum: exact values do not match d")

    @classmethod
    def from_values(cls, values, exact=None) -> "SchmidtSpectrum":
        """Build a spectrum from coefficients in any order (stable descending sort)."""
        vals = [float(v) for v in values]
        order = sorted(range(len(vals)), key=lambda k: -vals[k])
        lambdas = tuple(vals[k] for k in order)
        ex = tuple(exact[k] for k in order) if exact is not None else None
        return cls(d=len(vals), lambdas=lambdas, exact=ex)


def uniform_spectrum(d: int) -> SchmidtSpectrum:
    """The maximally entangled spectrum (every coefficient 1/d)."""
    return SchmidtSpectrum(d=d, lambdas=(1.0 / d,) * d, exact=(Fraction(1, d),) * d)


def parse_spectrum(text: str) -> SchmidtSpectrum:
    """Parse a comma-separated spectrum literal, e.g. ``81/160,79/160``.

    Each entry may be a rational ``p/q`` or a decimal; both are parsed
    exactly and converted once to double precision.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty spectrum literal")
    try:
        exact = tuple(Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError) as err:
        raise ValueError(f"bad spectrum literal {text!r}: {err}") from None
    return SchmidtSpectrum.from_values([float(f) for f in exact], exact=exact)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Coordinate vector of a two-qudit state in the d-groups-of-d ordering.

    ``normalized`` is set from the actual norm; branch states produced by
    non-unitary operators carry ``normalized=False``.
    """

    d: int
    coords: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        coords = as_vector(self.coords)
        if coords.size != self.d * self.d:
            raise ValueError("BipartiteState: coordinate count must be d*d")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        unit = abs(float(np.linalg.norm(coords)) - 1.0) <= tolerances.get().equality
        object.__setattr__(self, "normalized", unit)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def density(self) -> np.ndarray:
        return np.outer(self.coords, self.coords.conj())


def make_schmidt_state(spectrum: SchmidtSpectrum) -> BipartiteState:
    """The shared state: coordinate sqrt(lambda_j) at (j, j), zero elsewhere."""
    d = spectrum.d
    coords = np.zeros(d * d, dtype=complex)
    for j, lam in enumerate(spectrum.lambdas):
        coords[basis_index(j, j, d)] = np.sqrt(lam)
    return BipartiteState(d=d, coords=coords)


def spectrum_of(state: BipartiteState) -> SchmidtSpectrum:
    """Read a spectrum back off a Schmidt-diagonal state (squared amplitudes at (j, j))."""
    d = state.d
    lam = [abs(state.coords[basis_index(j, j, d)]) ** 2 for j in range(d)]
    return SchmidtSpectrum.from_values(lam)


def apply_local(a: np.ndarray, psi: BipartiteState) -> BipartiteState:
    """Act with ``a`` on Alice's side (identity on Bob's); no renormalization."""
    a = as_matrix(a)
    d = psi.d
    if a.shape != (d, d):
        raise ValueError(f"apply_local: operator shape {a.shape} does not match d={d}")
    out = (psi.coords.reshape(d, d) @ a.T).reshape(-1)
    return BipartiteState(d=d, coords=out)


def lift(a: np.ndarray, d: int) -> np.ndarray:
    """Matrix of (a on Alice, identity on Bob) in the flat-index ordering."""
    a = as_matrix(a)
    if a.shape != (d, d):
        raise ValueError("lift: operator shape does not match d")
    return np.kron(np.eye(d), a)


def partial_trace_ancilla(rho: np.ndarray, ancilla_dim: int) -> np.ndarray:
    """Trace out a trailing ancilla factor (joint index = system*N + ancilla)."""
    tol = tolerances.get()
    rho = as_matrix(rho)
    m = rho.shape[0]
    if rho.shape[1] != m:
        raise ValueError("partial_trace_ancilla: matrix is not square")
    n = int(ancilla_dim)
    if n < 1 or m % n != 0:
        raise ValueError(f"partial_trace_ancilla: dimension {m} not divisible by {n}")
    if np.max(np.abs(rho - rho.conj().T)) > tol.unitarity:
        raise ValueError("partial_trace_ancilla: matrix is not Hermitian")
    sys_dim = m // n
    return np.einsum("arbr->ab", rho.reshape(sys_dim, n, sys_dim, n))
