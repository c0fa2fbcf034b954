"""Central tolerance registry.

Every numerical gate in the package reads its threshold from the active
``Tolerances`` instance so that calibration has a single knob.  The defaults
are: 1e-10 for orthonormality/unitarity defects, 1e-12 for equality
assertions, and the per-check values listed below.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-10          # orthonormality / unitarity defects
    equality: float = 1e-12           # exact-value comparisons
    certificate: float = 1e-9         # message distinguishability gate
    rank: float = 1e-9                # relative Gram-eigenvalue cutoff
    support: float = 1e-10            # support eigenvalue cutoff (times trace)
    containment: float = 1e-9         # post-measurement support residual
    bundle: float = 1e-10             # protocol invariant defects
    identity: float = 1e-9            # impossibility-identity defects
    quadratic: float = 1e-12          # orthogonalization root residual
    case_split: float = 1e-10         # |x - 1/2| case boundary
    completion_redraw: float = 1e-8   # minimum norm before redrawing a column
    jacobi: float = 1e-14             # off-diagonal mass target (times scale)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


NAMES = tuple(f.name for f in fields(Tolerances))

_active = Tolerances()


def get() -> Tolerances:
    """Return the active tolerance set."""
    return _active


def set_active(tol: Tolerances) -> None:
    """Install ``tol`` as the active tolerance set (used by the CLI)."""
    global _active
    _active = tol


def override(**kwargs: float) -> Tolerances:
    """Replace named tolerances on the active set and install the result."""
    tol = replace(_active, **kwargs)
    set_active(tol)
    return tol
