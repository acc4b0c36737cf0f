"""Dense linear algebra for small qubit registers.

Operators are plain complex ndarrays in big-endian qubit ordering: qubit 1
(the carbon spin in the three-spin register) is the most significant bit of
the basis index, so |b1 b2 b3> lives at index 4*b1 + 2*b2 + b3.  Density
operators get a thin validated wrapper so that every state constructed
anywhere in the package is certified Hermitian, unit-trace and positive
semidefinite (within tolerance) on creation.

Everything here is a pure function of its inputs; wrapped matrices are
frozen read-only, so values are safe to share between threads.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_DIM = 16

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def check_operator(matrix) -> np.ndarray:
    """Coerce to a complex square matrix and enforce the operator invariants.

    The dimension must be a power of two between 2 and 16 and all entries
    must be finite.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"operator must be square, got shape {m.shape}")
    dim = m.shape[0]
    if dim < 2 or dim > MAX_DIM or dim & (dim - 1):
        raise ValueError(f"dimension {dim} not a power of 2 in [2, {MAX_DIM}]")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("operator entries must be finite")
    return m


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, DensityOperator):
        return op.matrix
    return check_operator(op)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def dagger(matrix) -> np.ndarray:
    return np.asarray(matrix).conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product of operators, leftmost factor most significant."""
    if not ops:
        raise ValueError("tensor of nothing")
    mats = [_as_matrix(op) for op in ops]
    dim = int(np.prod([m.shape[0] for m in mats]))
    if dim > MAX_DIM:
        raise ValueError(f"tensor product dimension {dim} exceeds {MAX_DIM}")
    return reduce(np.kron, mats)


def eigvalsh(h, hermiticity_tolerance: float = 1e-9) -> np.ndarray:
    """Real eigenvalues of a Hermitian operator, ascending.

    Raises if the input deviates from Hermiticity by more than the given
    absolute tolerance.
    """
    m = _as_matrix(h)
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > hermiticity_tolerance:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh(m)


def matrix_sqrt_psd(h, tolerance: float = 1e-10) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-tolerance, 0) are clipped to zero; anything more
    negative is an error.
    """
    m = _as_matrix(h)
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    if vals[0] < -tolerance:
        raise ValueError(f"matrix not PSD: eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass(frozen=True)
class DensityOperator:
    """Validated density matrix.

    ``tolerance`` bounds the admissible Hermiticity defect, trace defect
    and most negative eigenvalue.  Exact synthetic states keep the tight
    default; noisy reconstructed states should go through
    :meth:`DensityOperator.loose`, which widens the tolerance to whatever
    the matrix actually violates.
    """

    matrix: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self):
        m = check_operator(self.matrix)
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > self.tolerance:
            raise ValueError(f"not Hermitian: defect {defect:.3e} > tol {self.tolerance:.1e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > max(self.tolerance, 1e-12):
            raise ValueError(f"trace {tr:.8g} != 1 beyond tol {self.tolerance:.1e}")
        lowest = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if lowest < -self.tolerance:
            raise ValueError(f"negative eigenvalue {lowest:.3e} beyond tol {self.tolerance:.1e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def loose(cls, matrix, tolerance: float = 1e-6, warn: bool = False,
              context: str = "") -> "DensityOperator":
        """Wrap a matrix that may violate positivity, widening the tolerance.

        With ``warn=True`` a warning is emitted when the violation exceeds
        the requested tolerance (the state is still returned).
        """
        m = check_operator(matrix)
        defect = float(np.max(np.abs(m - m.conj().T)))
        tr_defect = abs(complex(np.trace(m)) - 1.0)
        lowest = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        needed = max(defect, tr_defect, -lowest, 0.0) * (1 + 1e-9) + 1e-15
        if needed > tolerance and warn:
            warnings.warn(
                f"{context or 'state'} violates positivity/trace by {needed:.3e} "
                f"(beyond tolerance {tolerance:.1e}); widening tolerance",
                stacklevel=2,
            )
        return cls(m, tolerance=max(tolerance, needed))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return num_qubits(self.dim)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def maximally_mixed(dim: int = 8) -> DensityOperator:
    return DensityOperator(np.eye(dim, dtype=complex) / dim)


def partial_transpose(rho, transposed, n_qubits: int | None = None) -> np.ndarray:
    """Transpose the given qubit subsystems (1-based indices) of an operator.

    ``transposed`` may be an iterable of qubit indices or a Bipartition.
    """
    m = _as_matrix(rho)
    n = n_qubits if n_qubits is not None else num_qubits(m.shape[0])
    if isinstance(transposed, Bipartition):
        transposed = transposed.transposed
    subsystems = tuple(sorted(set(int(q) for q in transposed)))
    if not subsystems:
        raise ValueError("no subsystem to transpose")
    if any(q < 1 or q > n for q in subsystems):
        raise ValueError(f"subsystem indices {subsystems} out of range 1..{n}")
    arr = m.reshape((2,) * (2 * n))
    for q in subsystems:
        arr = np.swapaxes(arr, q - 1, n + q - 1)
    return arr.reshape(m.shape)


def partial_trace(rho, keep, n_qubits: int | None = None) -> np.ndarray:
    """Reduced operator on the kept qubits (1-based indices, order preserved)."""
    m = _as_matrix(rho)
    n = n_qubits if n_qubits is not None else num_qubits(m.shape[0])
    keep = tuple(int(q) for q in keep)
    if any(q < 1 or q > n for q in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"bad keep list {keep}")
    arr = m.reshape((2,) * (2 * n))
    drop = [q for q in range(1, n + 1) if q not in keep]
    for q in sorted(drop, reverse=True):
        arr = np.trace(arr, axis1=q - 1, axis2=arr.ndim // 2 + q - 1)
        # removing one row+col axis: remaining axes renumber consistently
    d = 2 ** len(keep)
    out = arr.reshape(d, d)
    if keep != tuple(sorted(keep)):
        order = np.argsort(np.argsort(keep))
        k = len(keep)
        out = out.reshape((2,) * (2 * k))
        out = np.transpose(out, list(order) + [k + o for o in order])
        out = out.reshape(d, d)
    return out


@dataclass(frozen=True)
class Bipartition:
    """A bipartite cut of the register, named by the transposed side."""

    transposed: tuple[int, ...]
    n_qubits: int = 3

    def __post_init__(self):
        subs = tuple(sorted(set(int(q) for q in self.transposed)))
        if not subs or len(subs) >= self.n_qubits:
            raise ValueError("transposed side must be a non-empty proper subset")
        if any(q < 1 or q > self.n_qubits for q in subs):
            raise ValueError(f"qubit indices {subs} out of range")
        object.__setattr__(self, "transposed", subs)

    @property
    def label(self) -> str:
        rest = [q for q in range(1, self.n_qubits + 1) if q not in self.transposed]
        return "".join(map(str, self.transposed)) + "|" + "".join(map(str, rest))


THREE_QUBIT_CUTS = (Bipartition((1,)), Bipartition((2,)), Bipartition((3,)))


@dataclass(frozen=True)
class CutResult:
    cut: Bipartition
    min_eigenvalue: float
    ppt: bool


@dataclass(frozen=True)
class PPTReport:
    cuts: tuple[CutResult, ...]
    tolerance: float

    @property
    def all_ppt(self) -> bool:
        return all(c.ppt for c in self.cuts)

    def as_dict(self) -> dict:
        return {
            c.cut.label: {"min_eigenvalue": c.min_eigenvalue, "ppt": c.ppt}
            for c in self.cuts
        }


def is_ppt(rho: DensityOperator, tolerance: float | None = None) -> PPTReport:
    """PPT verdict for every bipartite cut of a three-qubit state."""
    if rho.dim != 8:
        raise ValueError("PPT report is defined for the 8-dimensional register")
    tol = rho.tolerance if tolerance is None else tolerance
    results = []
    for cut in THREE_QUBIT_CUTS:
        pt = partial_transpose(rho.matrix, cut.transposed)
        lo = float(np.linalg.eigvalsh(pt)[0])
        results.append(CutResult(cut, lo, lo >= -tol))
    return PPTReport(tuple(results), tol)


def numeric_rank(h, rank_tolerance: float | None = None) -> int:
    """Count of eigenvalues above the cutoff (default 1e-7 x largest)."""
    vals = eigvalsh(h)
    top = float(vals[-1])
    tol = rank_tolerance if rank_tolerance is not None else 1e-7 * max(top, 0.0)
    return int(np.sum(vals > tol))


def uhlmann_fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Square-root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1].

    The clip level for small negative eigenvalues follows the declared
    tolerances of the arguments, so loosely wrapped reconstructed states
    compare cleanly against exact ones.
    """
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    slack = max(1e-8, rho.tolerance, sigma.tolerance)
    root = matrix_sqrt_psd(rho.matrix, tolerance=slack)
    inner = root @ sigma.matrix @ root
    inner = (inner + inner.conj().T) / 2
    f = float(np.real(np.trace(matrix_sqrt_psd(inner, tolerance=slack))))
    # clipping the negative part of a loosely-validated input can push the
    # trace slightly past 1; the admissible overshoot scales with the slack
    if f > 1 + max(1e-7, 2.0 * np.sqrt(slack)):
        raise ValueError(f"fidelity {f} exceeds 1 beyond numerical slack")
    return min(max(f, 0.0), 1.0)


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Half the trace norm of rho - sigma."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    vals = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(np.sum(np.abs(vals)) / 2)


def pauli_labels(n: int = 3, include_identity: bool = False) -> list[str]:
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
    if not include_identity:
        labels.remove("I" * n)
    return labels


def pauli_product(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis named by a string like 'XIZ'."""
    return tensor(*(PAULIS[c] for c in label))


# ---------------------------------------------------------------------------
# random objects for sampling-based checks


def random_state_vector(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_operator(rng: np.random.Generator, dim: int = 8,
                            rank: int | None = None) -> DensityOperator:
    """Haar-ish random density matrix from a complex Gaussian factor."""
    r = rank if rank is not None else dim
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_unitary(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    """Haar random unitary via QR with phase fixing."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


# ---------------------------------------------------------------------------
# JSON wire format for matrices: {"dim": n, "re": [[...]], "im": [[...]]}


def matrix_to_json(matrix) -> dict:
    m = check_operator(matrix)
    return {
        "dim": int(m.shape[0]),
        "re": np.real(m).tolist(),
        "im": np.imag(m).tolist(),
    }


def matrix_from_json(blob: dict) -> np.ndarray:
    dim = int(blob["dim"])
    re = np.asarray(blob["re"], dtype=float)
    im = np.asarray(blob["im"], dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError("matrix JSON shape does not match declared dim")
    return check_operator(re + 1j * im)
