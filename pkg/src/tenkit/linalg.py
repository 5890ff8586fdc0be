"""Matrix kernels used by the decompositions.

Thin, deterministic wrappers over LAPACK via ``numpy.linalg``, plus the
proximal operators (soft thresholding, singular value thresholding) and
a minimum-norm least-squares solve.

Determinism: ``svd`` post-processes the LAPACK output with a fixed sign
convention (in each column of U the largest-magnitude entry is made
non-negative, first such entry on ties, V adjusted to match), so
repeated calls on identical input are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SVDResult",
    "svd",
    "truncated_svd",
    "soft_threshold",
    "svt",
    "lstsq",
]

# relative cutoff for treating singular values as zero in pseudo-inverses
PINV_CUTOFF = 1e-12


@dataclass(frozen=True)
class SVDResult:
    """Thin SVD ``A = U @ diag(S) @ V.T``.

    ``U`` and ``V`` have orthonormal columns and ``S`` is non-negative,
    sorted descending.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.S.shape[0]


def _fix_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # np.argmax picks the first maximal entry, which breaks ties by
    # lowest row index.
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs, v * signs


def svd(a) -> SVDResult:
    """Deterministic thin SVD of a real matrix.

    Raises ``ValueError`` on non-finite input; LAPACK convergence
    failures propagate as ``numpy.linalg.LinAlgError``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("svd expects a matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd requires finite entries")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    u, v = _fix_signs(u, vh.T)
    return SVDResult(U=u, S=s, V=v)


def truncated_svd(a, rank: int) -> SVDResult:
    """Leading-``rank`` part of the SVD (the best rank-``rank``
    approximation, by Eckart-Young)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    k = min(a.shape)
    if not 1 <= rank <= k:
        raise ValueError(f"rank must be in [1, {k}], got {rank}")
    full = svd(a)
    return SVDResult(
        U=full.U[:, :rank], S=full.S[:rank], V=full.V[:, :rank]
    )


def left_singular_basis(a, rank: int) -> np.ndarray:
    """First ``rank`` left singular vectors, padded with an orthonormal
    completion when ``rank`` exceeds ``min(a.shape)``.

    The completion comes from the full LAPACK U and is sign-fixed, so
    the result is deterministic. Requires ``rank <= a.shape[0]``.
    """
    a = np.asarray(a, dtype=np.float64)
    if not 1 <= rank <= a.shape[0]:
        raise ValueError(
            f"rank must be in [1, {a.shape[0]}], got {rank}"
        )
    if rank <= min(a.shape):
        return svd(a).U[:, :rank]
    u, _, _ = np.linalg.svd(a, full_matrices=True)
    u, _ = _fix_signs(u, u)
    return u[:, :rank]


def soft_threshold(x, tau: float) -> np.ndarray:
    """Element-wise shrinkage ``sign(x) * max(|x| - tau, 0)``."""
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(a, tau: float) -> np.ndarray:
    """Singular value thresholding: soft-threshold the spectrum.

    This is the proximal operator of ``tau * ||.||_*``, i.e. the unique
    minimizer of ``0.5 * ||X - A||_F^2 + tau * ||X||_*``.
    """
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    r = svd(a)
    s = np.maximum(r.S - tau, 0.0)
    return (r.U * s) @ r.V.T


def lstsq(a, b) -> np.ndarray:
    """Minimum-norm least-squares solution of ``A @ X = B``.

    Computed via the SVD pseudo-inverse with singular values below
    ``1e-12 * sigma_max`` treated as zero, so rank-deficient and even
    all-zero ``A`` are handled (returning the minimum-norm solution).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("lstsq expects matrices")
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"row mismatch: A has {a.shape[0]} rows, B has {b.shape[0]}"
        )
    r = svd(a)
    cutoff = PINV_CUTOFF * (r.S[0] if r.S.size else 0.0)
    inv = np.where(r.S > cutoff, 1.0 / np.where(r.S > 0, r.S, 1.0), 0.0)
    return (r.V * inv) @ (r.U.T @ b)
