"""Eigenvalues, the spectral sector test, and the modal transformation.

The sector criterion demands |arg(lambda)| > alpha*pi/2 for every eigenvalue
of the linear part. Certification then rewrites the system in modal
coordinates y = (TP)^-1 x, where T block-diagonalizes A and the diagonal
scaling P shrinks any nilpotent off-diagonal to a chosen delta; the linear
part becomes diag(lambda_i I) and everything else moves into the remainder
h(y) = delta-nilpotent * y + (TP)^-1 f(TP y) with h(0) = 0.

Numerical Jordan structure of a defective matrix is ill-posed and is never
computed here; callers must pass exact block data (``JordanHint``) for
defective inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DefectiveMatrixError, EigenvalueConvergenceError

__all__ = [
    "SpectralReport",
    "JordanHint",
    "ModalSystem",
    "eigenvalues",
    "sector_check",
    "modal_transform",
    "SECTOR_BOUNDARY_TOL",
]

# Strict inclusion is required; anything this close to the boundary is
# reported as inconclusive instead of guessed.
SECTOR_BOUNDARY_TOL = 1e-9

_EIGVEC_COND_CAP = 1e8


def _as_square_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _principal_args(eigs: np.ndarray) -> np.ndarray:
    args = np.angle(eigs)
    args[args <= -math.pi] = math.pi  # fix the -pi representative of the cut
    return args


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues of a (with multiplicity), sorted by descending real part.

    Backed by LAPACK's Hessenberg-reduction + shifted-QR driver. On the rare
    QR convergence failure the Hessenberg form is attached to the raised
    error as partial progress.
    """
    a = _as_square_matrix(a)
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        from scipy.linalg import hessenberg

        raise EigenvalueConvergenceError(
            f"QR iteration failed: {exc}", partial=hessenberg(a)
        ) from exc
    order = np.lexsort((-eigs.imag, -eigs.real))
    return eigs[order]


@dataclass(frozen=True)
class SpectralReport:
    """Outcome of the sector stability test for one matrix and order."""

    eigenvalues: tuple
    args: tuple
    threshold: float
    margin: float
    stable: bool
    verdict: str  # "stable" | "unstable" | "inconclusive"

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [{"re": ev.real, "im": ev.imag} for ev in self.eigenvalues],
            "args": list(self.args),
            "threshold": self.threshold,
            "margin": self.margin,
            "stable": self.stable,
            "verdict": self.verdict,
        }


def sector_check(a, alpha: float, tol_boundary: float = SECTOR_BOUNDARY_TOL) -> SpectralReport:
    """Test sigma(A) subset {lambda: |arg lambda| > alpha*pi/2}.

    ``stable`` is margin > 0; the verdict turns "inconclusive" when the
    margin is within ``tol_boundary`` of zero, since the criterion requires
    strict inclusion.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    eigs = eigenvalues(a)
    args = _principal_args(eigs)
    threshold = 0.5 * alpha * math.pi
    margin = float(np.min(np.abs(args)) - threshold)
    stable = margin > 0.0
    if abs(margin) <= tol_boundary:
        verdict = "inconclusive"
    else:
        verdict = "stable" if stable else "unstable"
    return SpectralReport(
        eigenvalues=tuple(complex(ev) for ev in eigs),
        args=tuple(float(x) for x in args),
        threshold=threshold,
        margin=margin,
        stable=stable,
        verdict=verdict,
    )


@dataclass(frozen=True)
class JordanHint:
    """Exact Jordan data supplied by the caller for defective matrices.

    ``transform`` is the similarity T with T^-1 A T = diag(J_1, ..., J_n),
    ``blocks`` lists (eigenvalue, size, nilpotent flag) per block.
    """

    transform: np.ndarray
    blocks: tuple

    def __post_init__(self):
        t = _as_square_matrix(np.asarray(self.transform, dtype=complex))
        blocks = tuple((complex(lam), int(d), int(eta)) for lam, d, eta in self.blocks)
        if sum(d for _, d, _ in blocks) != t.shape[0]:
            raise ValueError("block sizes must sum to the matrix dimension")
        for _, d, eta in blocks:
            if d < 1 or eta not in (0, 1):
                raise ValueError("invalid block data")
            if d > 1 and eta != 1:
                raise ValueError("blocks of size > 1 must be nilpotent-flagged")
        object.__setattr__(self, "transform", t)
        object.__setattr__(self, "blocks", blocks)


@dataclass(frozen=True)
class ModalSystem:
    """The transformed system: diagonal linear part plus remainder h.

    ``blocks`` holds (lambda_i, d_i, eta_i); P is diag(1, delta, ...,
    delta^(d_i-1)) per block, and h(y) = delta-nilpotent part * y
    + (TP)^-1 f(TP y).
    """

    blocks: tuple
    T: np.ndarray
    P: np.ndarray
    delta: float
    h: Callable[[np.ndarray], np.ndarray]
    cond_TP: float
    dim: int
    tp: np.ndarray = field(repr=False)
    tp_inv: np.ndarray = field(repr=False)
    nil_matrix: np.ndarray = field(repr=False)

    @property
    def block_eigenvalues(self) -> np.ndarray:
        """Eigenvalue per coordinate (block eigenvalue repeated d_i times)."""
        return np.concatenate(
            [np.full(d, lam, dtype=complex) for lam, d, _ in self.blocks]
        )

    def block_matrix(self) -> np.ndarray:
        """The full transformed matrix diag(lambda_i I + delta_i N)."""
        return np.diag(self.block_eigenvalues) + self.nil_matrix

    def to_physical(self, y: np.ndarray) -> np.ndarray:
        return y @ self.tp.T if y.ndim == 2 else self.tp @ y

    def from_physical(self, x: np.ndarray) -> np.ndarray:
        return x @ self.tp_inv.T if x.ndim == 2 else self.tp_inv @ x


def _normalized_eigvectors(a: np.ndarray):
    eigs, vecs = np.linalg.eig(a)
    order = np.lexsort((-eigs.imag, -eigs.real))
    eigs, vecs = eigs[order], vecs[:, order]
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        col = col / np.linalg.norm(col)
        nz = np.nonzero(np.abs(col) > 1e-12)[0][0]
        phase = col[nz] / abs(col[nz])
        vecs[:, j] = col / phase
    return eigs, vecs


def modal_transform(
    a,
    f: Callable[[np.ndarray], np.ndarray] | None,
    delta: float,
    jordan_hint: JordanHint | None = None,
) -> ModalSystem:
    """Build the modal system for A and nonlinearity f with scaling delta.

    Without a hint, A must be numerically diagonalizable (eigenvector
    condition below 1e8); then all blocks have size one and h has no
    nilpotent part. With a hint the supplied exact structure is used and
    verified against A.
    """
    a = _as_square_matrix(a)
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValueError(f"delta must be positive, got {delta}")
    d = a.shape[0]

    if jordan_hint is None:
        eigs, t = _normalized_eigvectors(a)
        cond_t = np.linalg.cond(t)
        if not np.isfinite(cond_t) or cond_t > _EIGVEC_COND_CAP:
            raise DefectiveMatrixError(
                f"eigenvector condition {cond_t:.3g} exceeds {_EIGVEC_COND_CAP:.0e}; "
                "matrix is numerically defective - supply a JordanHint"
            )
        blocks = tuple((complex(lam), 1, 0) for lam in eigs)
    else:
        t = jordan_hint.transform
        if t.shape[0] != d:
            raise ValueError("hint transform dimension does not match the matrix")
        blocks = jordan_hint.blocks

    p_diag = np.concatenate([delta ** np.arange(bd, dtype=float) for _, bd, _ in blocks])
    p = np.diag(p_diag)
    tp = t @ p
    tp_inv = np.linalg.inv(tp)

    nil = np.zeros((d, d), dtype=complex)
    offset = 0
    lam_per_coord = []
    for lam, bd, eta in blocks:
        lam_per_coord.extend([lam] * bd)
        if eta and bd > 1:
            idx = np.arange(offset, offset + bd - 1)
            nil[idx, idx + 1] = delta
        offset += bd
    block_form = np.diag(np.asarray(lam_per_coord, dtype=complex)) + nil

    residual = np.linalg.norm(tp_inv @ a @ tp - block_form)
    scale = max(np.linalg.norm(np.asarray(a, dtype=complex)), 1e-30)
    if residual > 1e-8 * scale:
        raise DefectiveMatrixError(
            f"modal residual {residual:.3g} exceeds 1e-8*|A|; "
            "block data does not reproduce the matrix"
        )

    if f is not None:
        fzero = np.asarray(f(np.zeros(d)))
        if fzero.shape != (d,) or np.any(fzero != 0):
            raise ValueError("nonlinearity must satisfy f(0) = 0 exactly")

    def h(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        out = nil @ y
        if f is not None:
            out = out + tp_inv @ np.asarray(f(tp @ y))
        return out

    for arr in (t, p, tp, tp_inv, nil):
        arr.setflags(write=False)

    return ModalSystem(
        blocks=blocks,
        T=t,
        P=p,
        delta=float(delta),
        h=h,
        cond_TP=float(np.linalg.cond(tp)),
        dim=d,
        tp=tp,
        tp_inv=tp_inv,
        nil_matrix=nil,
    )
