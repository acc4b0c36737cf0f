"""Three-qubit bound-entangled state family and the pseudo-state embedding.

The family is diagonal except for a single GHZ coherence between |000> and
|111>.  All members are PPT across every bipartite cut yet entangled
whenever the product of the three parameters differs from one.  Room
temperature NMR only reaches a highly mixed neighbourhood of the identity,
hence the pseudo-state form (1-p)/d * Id + p * rho with tiny p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DensityOperator, check_operator

PRODUCT_ONE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StateParams:
    """Positive parameter triple (a1, a2, a3) of the state family."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        if min(self.a1, self.a2, self.a3) <= 0:
            raise ValueError(f"parameters must be positive, got {self.as_tuple()}")

    @classmethod
    def symmetric(cls, a: float) -> "StateParams":
        return cls(a, a, a)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    @property
    def entangled_regime(self) -> bool:
        """True unless a1*a2*a3 = 1, the separable boundary of the family."""
        return abs(self.a1 * self.a2 * self.a3 - 1.0) > PRODUCT_ONE_TOLERANCE

    @property
    def normalization(self) -> float:
        return 2.0 + sum(a + 1.0 / a for a in self.as_tuple())

    @property
    def is_symmetric(self) -> bool:
        return abs(self.a1 - self.a2) < 1e-12 and abs(self.a2 - self.a3) < 1e-12


def ghz(sign: int = +1) -> np.ndarray:
    """(|000> + sign |111>)/sqrt(2) as an 8-vector."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    v = np.zeros(8, dtype=complex)
    v[0] = 1.0
    v[7] = float(sign)
    return v / np.sqrt(2.0)


def bound_entangled_state(params: StateParams) -> DensityOperator:
    """The PPT-entangled family member for the given parameter triple.

    Populations are (1, a1, a2, 1/a3, a3, 1/a2, 1/a1, 1)/N with
    N = 2 + sum(a_i + 1/a_i); the only coherence is the GHZ corner 1/N at
    (|000>, |111>).
    """
    a1, a2, a3 = params.as_tuple()
    n = params.normalization
    diag = np.array([1.0, a1, a2, 1.0 / a3, a3, 1.0 / a2, 1.0 / a1, 1.0]) / n
    m = np.diag(diag.astype(complex))
    m[0, 7] = 1.0 / n
    m[7, 0] = 1.0 / n
    return DensityOperator(m)


@dataclass(frozen=True)
class PseudoState:
    """Mixture (1-p)/dim * Id + p * rho_deviation, the NMR-accessible form."""

    rho: DensityOperator
    p: float
    dim: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"mixing fraction p={self.p} outside [0, 1]")
        if self.dim != self.rho.dim:
            raise ValueError(f"dim {self.dim} does not match state dim {self.rho.dim}")


def pseudo_state(rho_be: DensityOperator, p: float, dim: int | None = None) -> PseudoState:
    """Embed a state into the maximally mixed background with weight p."""
    d = rho_be.dim if dim is None else int(dim)
    if d != rho_be.dim:
        raise ValueError(f"dim {d} does not match state dim {rho_be.dim}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing fraction p={p} outside [0, 1]")
    m = (1.0 - p) / d * np.eye(d, dtype=complex) + p * rho_be.matrix
    return PseudoState(DensityOperator(m, tolerance=rho_be.tolerance), p, d)


def peel_identity(ps: PseudoState, tolerance: float = 1e-6) -> DensityOperator:
    """Invert the pseudo-state embedding: (rho - (1-p)/d * Id) / p.

    Exact inputs round-trip to machine precision.  Reconstructed inputs may
    come out slightly non-positive; that is reported as a warning (and the
    wrapper tolerance widened), not an error.
    """
    if ps.p <= 0.0:
        raise ValueError("peeling is undefined at p = 0 (no deviation to rescale)")
    d = ps.dim
    m = (ps.rho.matrix - (1.0 - ps.p) / d * np.eye(d)) / ps.p
    return DensityOperator.loose(m, tolerance=tolerance, warn=True,
                                 context="peeled state")


def peel_matrix(matrix, p: float, dim: int | None = None,
                tolerance: float = 1e-6) -> DensityOperator:
    """Peel a raw matrix (e.g. a tomographic estimate) with known p."""
    m = check_operator(matrix)
    d = m.shape[0] if dim is None else int(dim)
    rho = DensityOperator.loose(m, tolerance=tolerance, warn=False)
    return peel_identity(PseudoState(rho, p, d), tolerance=tolerance)
