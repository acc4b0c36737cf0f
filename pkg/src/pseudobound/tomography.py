"""Seven-setting NMR readout simulation and least-squares state reconstruction.

Only the carbon spin is detected.  Each experiment applies one of seven
spin-selective pi/2 rotation patterns, optionally swaps hydrogen or
fluorine onto carbon, and records the x and y quadratures of the four
J-resolved carbon lines, i.e. the observables sigma_{x,y} on qubit 1
tensored with a basis projector on qubits 2 and 3.  Running all seven
settings with all three detected spins gives 168 linear equations for the
63 real parameters of the traceless deviation, an overdetermined system
solved by (weighted) least squares with the parameter covariance
propagated to derived quantities such as witness expectations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import (
    DensityOperator,
    PAULIS,
    check_operator,
    pauli_labels,
    pauli_product,
    tensor,
)

SETTINGS = ("Y1E2E3", "E1E2Y3", "E1E2X3", "Y1Y2E3", "E1X2X3", "Y1Y2Y3", "X1X2X3")
DETECT_SPINS = ("C", "H", "F")
LINE_LABELS = ("00", "01", "10", "11")
QUADRATURES = ("x", "y")

_DETECT_QUBIT = {"C": 1, "H": 2, "F": 3}


def parse_setting(setting: str) -> tuple[str, str, str]:
    """Split a setting id like 'Y1E2E3' into per-spin operations."""
    if len(setting) != 6:
        raise ValueError(f"bad setting id {setting!r}")
    ops = []
    for i in range(3):
        op, idx = setting[2 * i], setting[2 * i + 1]
        if op not in "EXY" or idx != str(i + 1):
            raise ValueError(f"bad setting id {setting!r}")
        ops.append(op)
    return tuple(ops)


@lru_cache(maxsize=None)
def _single_rotation(op: str) -> np.ndarray:
    # active convention exp(-i * (pi/2) * I_axis); E is the identity
    if op == "E":
        return np.eye(2, dtype=complex)
    sigma = PAULIS["X"] if op == "X" else PAULIS["Y"]
    return (np.eye(2) - 1j * sigma) / np.sqrt(2.0)


def swap_unitary(q1: int, q2: int) -> np.ndarray:
    """Permutation matrix exchanging two qubits of the register."""
    if q1 == q2 or not {q1, q2} <= {1, 2, 3}:
        raise ValueError(f"bad swap pair ({q1}, {q2})")
    u = np.zeros((8, 8), dtype=complex)
    for k in range(8):
        bits = [(k >> 2) & 1, (k >> 1) & 1, k & 1]
        bits[q1 - 1], bits[q2 - 1] = bits[q2 - 1], bits[q1 - 1]
        j = 4 * bits[0] + 2 * bits[1] + bits[2]
        u[j, k] = 1.0
    return u


def readout_unitary(setting: str, detect: str = "C") -> np.ndarray:
    """Total readout transformation for one experiment.

    The per-spin rotations act on the prepared state first; detecting H or
    F then swaps that spin onto carbon just before acquisition.
    """
    ops = parse_setting(setting)
    rot = tensor(*(_single_rotation(op) for op in ops))
    if detect not in _DETECT_QUBIT:
        raise ValueError(f"bad detected spin {detect!r}")
    q = _DETECT_QUBIT[detect]
    if q == 1:
        return rot
    return swap_unitary(1, q) @ rot


@lru_cache(maxsize=None)
def _observables() -> tuple[tuple[str, str, np.ndarray], ...]:
    out = []
    for j, line in enumerate(LINE_LABELS):
        proj = np.zeros((4, 4), dtype=complex)
        proj[j, j] = 1.0
        for quad in QUADRATURES:
            sigma = PAULIS["X"] if quad == "x" else PAULIS["Y"]
            out.append((line, quad, np.kron(sigma, proj)))
    return tuple(out)


def measure(rho: DensityOperator, setting: str, detect: str = "C") -> np.ndarray:
    """Quadrature amplitudes of the four carbon lines for one experiment.

    Returns 8 reals ordered (line 00 x, line 00 y, line 01 x, ...).
    """
    r = readout_unitary(setting, detect)
    rotated = r @ rho.matrix @ r.conj().T
    return np.array([
        float(np.real(np.einsum("ij,ji->", obs, rotated)))
        for _line, _quad, obs in _observables()
    ])


def default_experiments() -> list[tuple[str, str]]:
    """All 21 (setting, detected spin) combinations."""
    return [(s, d) for s in SETTINGS for d in DETECT_SPINS]


# ---------------------------------------------------------------------------
# linear model: 63 traceless-Hermitian parameters


@lru_cache(maxsize=None)
def parameter_basis() -> tuple[tuple[str, ...], np.ndarray]:
    """Labels and stacked matrices of the 63 non-identity Pauli products.

    A state is Id/8 + sum_k theta_k * P_k with theta_k = tr(rho P_k)/8.
    """
    labels = tuple(pauli_labels(3))
    stack = np.stack([pauli_product(lbl) for lbl in labels])
    stack.setflags(write=False)
    return labels, stack


def state_parameters(rho: DensityOperator) -> np.ndarray:
    _, stack = parameter_basis()
    return np.real(np.einsum("kij,ji->k", stack, rho.matrix)) / 8.0


def parameters_to_matrix(theta: np.ndarray) -> np.ndarray:
    _, stack = parameter_basis()
    return np.eye(8, dtype=complex) / 8.0 + np.einsum("k,kij->ij", theta, stack)


@lru_cache(maxsize=None)
def _design_row(setting: str, detect: str, line: str, quad: str) -> np.ndarray:
    r = readout_unitary(setting, detect)
    for lbl, q, obs in _observables():
        if (lbl, q) == (line, quad):
            back = r.conj().T @ obs @ r
            _, stack = parameter_basis()
            row = np.real(np.einsum("ij,kji->k", back, stack))
            row.setflags(write=False)
            return row
    raise ValueError(f"unknown line/quadrature ({line!r}, {quad!r})")


@dataclass(frozen=True)
class DesignMatrix:
    """Linear map from the 63 deviation parameters to predicted amplitudes."""

    matrix: np.ndarray
    rows: tuple[tuple[str, str, str, str], ...]   # (setting, detect, line, quad)
    rank: int

    @property
    def deficiency(self) -> int:
        return 63 - self.rank


def design_matrix(experiments: list[tuple[str, str]] | None = None) -> DesignMatrix:
    exps = default_experiments() if experiments is None else list(experiments)
    if not exps:
        raise ValueError("no experiments")
    rows = []
    blocks = []
    for setting, detect in exps:
        for line, quad, _obs in _observables():
            rows.append((setting, detect, line, quad))
            blocks.append(_design_row(setting, detect, line, quad))
    a = np.vstack(blocks)
    return DesignMatrix(matrix=a, rows=tuple(rows), rank=int(np.linalg.matrix_rank(a)))


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class TomographyRecord:
    setting: str
    detect: str
    line: str
    quad: str
    value: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


@dataclass(frozen=True)
class TomographyDataset:
    records: tuple[TomographyRecord, ...]

    def __post_init__(self):
        if len(self.records) > 168:
            raise ValueError("more records than the full experiment set provides")

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def sigmas(self) -> np.ndarray:
        return np.array([r.sigma for r in self.records])

    def to_json(self) -> list[dict]:
        return [
            {"setting": r.setting, "detect": r.detect, "line": r.line,
             "quad": r.quad, "value": r.value, "sigma": r.sigma}
            for r in self.records
        ]

    @classmethod
    def from_json(cls, blobs: list[dict]) -> "TomographyDataset":
        return cls(tuple(
            TomographyRecord(b["setting"], b["detect"], b["line"], b["quad"],
                             float(b["value"]), float(b["sigma"]))
            for b in blobs
        ))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "TomographyDataset":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def generate_dataset(rho: DensityOperator,
                     experiments: list[tuple[str, str]] | None = None,
                     sigma: float = 0.0, seed: int = 0) -> TomographyDataset:
    """Simulated dataset: exact amplitudes plus iid Gaussian noise."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    exps = default_experiments() if experiments is None else list(experiments)
    rng = np.random.default_rng(seed)
    records = []
    for setting, detect in exps:
        vals = measure(rho, setting, detect)
        if sigma > 0:
            vals = vals + rng.normal(0.0, sigma, size=vals.shape)
        for (line, quad, _obs), v in zip(_observables(), vals):
            records.append(TomographyRecord(setting, detect, line, quad,
                                            float(v), float(sigma)))
    return TomographyDataset(tuple(records))


# ---------------------------------------------------------------------------
# reconstruction


@dataclass(frozen=True)
class ReconstructionResult:
    """Least-squares estimate with parameter covariance and fit residual."""

    rho_hat: DensityOperator
    theta: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    basis_labels: tuple[str, ...] = field(repr=False, default=())


def reconstruct(dataset: TomographyDataset,
                tolerance: float = 1e-6) -> ReconstructionResult:
    """Solve the overdetermined linear system for the deviation parameters.

    Heterogeneous record sigmas give a weighted fit with covariance
    (A^T W A)^-1; a common sigma reduces to sigma^2 (A^T A)^-1; all-zero
    sigmas mean exact data and a zero covariance.  No positivity projection
    is applied; the estimate is Hermitian and unit-trace by construction.
    """
    labels, _ = parameter_basis()
    rows = np.vstack([
        _design_row(r.setting, r.detect, r.line, r.quad) for r in dataset.records
    ])
    rank = int(np.linalg.matrix_rank(rows))
    if rank < 63:
        raise ValueError(f"design matrix rank {rank} < 63 "
                         f"(deficient subspace dimension {63 - rank})")
    values = dataset.values()
    sigmas = dataset.sigmas()

    if np.all(sigmas == 0):
        theta, *_ = np.linalg.lstsq(rows, values, rcond=None)
        cov = np.zeros((63, 63))
    elif np.any(sigmas <= 0):
        raise ValueError("datasets mixing exact and noisy records are not supported")
    else:
        aw = rows / sigmas[:, None]
        bw = values / sigmas
        theta, *_ = np.linalg.lstsq(aw, bw, rcond=None)
        cov = np.linalg.inv(aw.T @ aw)
        cov = (cov + cov.T) / 2.0

    rho_hat = DensityOperator.loose(parameters_to_matrix(theta),
                                    tolerance=tolerance, warn=False)
    residual = float(np.linalg.norm(rows @ theta - values))
    return ReconstructionResult(rho_hat=rho_hat, theta=theta, covariance=cov,
                                residual_norm=residual, basis_labels=labels)


def project_to_physical(rho_hat) -> DensityOperator:
    """Frobenius-nearest unit-trace PSD matrix, by spectrum clipping.

    The eigenvalues are clipped against the shifted level that restores
    unit trace (the simplex projection of the spectrum); eigenvectors are
    kept.  PSD unit-trace input passes through unchanged.  Optional
    post-processing only; reconstruction never applies it implicitly.
    """
    m = check_operator(rho_hat if not isinstance(rho_hat, DensityOperator)
                       else rho_hat.matrix)
    m = (m + m.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(m)
    desc = vals[::-1]
    cumulative = np.cumsum(desc)
    levels = (cumulative - 1.0) / np.arange(1, len(desc) + 1)
    keep = int(np.nonzero(desc - levels > 0)[0][-1])
    clipped = np.clip(vals - levels[keep], 0.0, None)
    out = (vecs * clipped) @ vecs.conj().T
    return DensityOperator(out, tolerance=1e-9)


def propagate_witness_error(result: ReconstructionResult, w) -> float:
    """Standard deviation of tr(W rho_hat) from the parameter covariance.

    The identity component of W drops out (it is orthogonal to the
    traceless parameter space), so the error is invariant under shifts
    W -> W + c*Id and scales linearly with W.
    """
    m = check_operator(w)
    if m.shape[0] != 8:
        raise ValueError("witness dimension mismatch")
    _, stack = parameter_basis()
    grad = np.real(np.einsum("ij,kji->k", m, stack))
    var = float(grad @ result.covariance @ grad)
    return float(np.sqrt(max(var, 0.0)))
