"""Tensor decompositions: CP (ALS), Tucker (HOSVD / HOOI), Tensor-Train
(TT-SVD), multilinear PCA, and multifactor (label x pixel) analysis.

All solvers are deterministic given their options (fixed seed, fixed
iteration policy); random initialization flows from an explicit
``numpy.random.Generator`` seeded from ``DecompOptions.seed``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .core import (
    fold,
    frobenius,
    khatri_rao,
    mode_n_product,
    multi_mode_product,
    unfold,
)

__all__ = [
    "KruskalTensor",
    "TuckerTensor",
    "TTTensor",
    "DecompOptions",
    "MpcaResult",
    "kruskal_to_tensor",
    "tucker_to_tensor",
    "tt_to_tensor",
    "cp_als",
    "tucker_hosvd",
    "tucker_hooi",
    "tt_svd",
    "tt_max_ranks",
    "mpca",
    "multifactor_analysis",
]


@dataclass
class KruskalTensor:
    """CP/Kruskal format: ``sum_r weights[r] * outer(factors[:, r])``.

    ``factors[n]`` has shape ``(I_n, R)``; all factors share the column
    count ``R``. After normalization every factor column has unit l2
    norm and the magnitudes live in ``weights``.
    """

    weights: np.ndarray
    factors: list

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.factors = [np.asarray(f, dtype=np.float64) for f in self.factors]
        if self.weights.ndim != 1:
            raise ValueError("weights must be a vector")
        r = self.weights.shape[0]
        for n, f in enumerate(self.factors):
            if f.ndim != 2 or f.shape[1] != r:
                raise ValueError(
                    f"factor {n} must have {r} columns, got shape {f.shape}"
                )

    @property
    def rank(self) -> int:
        return self.weights.shape[0]

    @property
    def shape(self) -> tuple:
        return tuple(f.shape[0] for f in self.factors)

    def to_tensor(self) -> np.ndarray:
        return kruskal_to_tensor(self)


@dataclass
class TuckerTensor:
    """Tucker format: core multiplied by one factor matrix per mode.

    ``core`` has shape ``(R_0, ..., R_{N-1})`` and ``factors[n]`` has
    shape ``(I_n, R_n)``.
    """

    core: np.ndarray
    factors: list

    def __post_init__(self):
        self.core = np.asarray(self.core, dtype=np.float64)
        self.factors = [np.asarray(f, dtype=np.float64) for f in self.factors]
        if len(self.factors) != self.core.ndim:
            raise ValueError(
                f"need one factor per core mode: core order "
                f"{self.core.ndim}, {len(self.factors)} factors"
            )
        for n, f in enumerate(self.factors):
            if f.ndim != 2 or f.shape[1] != self.core.shape[n]:
                raise ValueError(
                    f"factor {n} must have {self.core.shape[n]} columns, "
                    f"got shape {f.shape}"
                )

    @property
    def ranks(self) -> tuple:
        return self.core.shape

    @property
    def shape(self) -> tuple:
        return tuple(f.shape[0] for f in self.factors)

    def to_tensor(self) -> np.ndarray:
        return tucker_to_tensor(self)


@dataclass
class TTTensor:
    """Tensor-Train format: a chain of third-order cores.

    ``cores[k]`` has shape ``(R_k, I_k, R_{k+1})`` with the boundary
    ranks ``R_0 = R_N = 1``.
    """

    cores: list

    def __post_init__(self):
        self.cores = [np.asarray(c, dtype=np.float64) for c in self.cores]
        if not self.cores:
            raise ValueError("TTTensor needs at least one core")
        for k, c in enumerate(self.cores):
            if c.ndim != 3:
                raise ValueError(f"core {k} must be third-order")
            if k + 1 < len(self.cores) and c.shape[2] != self.cores[k + 1].shape[0]:
                raise ValueError(
                    f"rank chain broken between cores {k} and {k + 1}: "
                    f"{c.shape[2]} vs {self.cores[k + 1].shape[0]}"
                )
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("boundary TT-ranks must be 1")

    @property
    def ranks(self) -> tuple:
        return tuple(c.shape[0] for c in self.cores) + (1,)

    @property
    def shape(self) -> tuple:
        return tuple(c.shape[1] for c in self.cores)

    def to_tensor(self) -> np.ndarray:
        return tt_to_tensor(self)


@dataclass
class DecompOptions:
    """Iteration policy shared by the alternating solvers.

    ``init`` and ``seed`` only affect :func:`cp_als`; the Tucker, TT and
    MPCA solvers are deterministic SVD-based procedures.
    """

    max_iters: int = 500
    tol: float = 1e-8
    seed: int = 0
    init: str = "hosvd"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.init not in ("hosvd", "random"):
            raise ValueError(f"unknown init {self.init!r}")


def kruskal_to_tensor(k: KruskalTensor) -> np.ndarray:
    """Dense tensor from a Kruskal representation."""
    if len(k.factors) == 1:
        return k.factors[0] @ k.weights
    lead = k.factors[0] * k.weights
    rest = khatri_rao(k.factors[1:])
    return fold(lead @ rest.T, 0, k.shape)


def tucker_to_tensor(t: TuckerTensor) -> np.ndarray:
    """Dense tensor from a Tucker representation."""
    return multi_mode_product(t.core, t.factors)


def tt_to_tensor(t: TTTensor) -> np.ndarray:
    """Dense tensor from a TT representation."""
    out = t.cores[0]
    for core in t.cores[1:]:
        out = np.tensordot(out, core, axes=([-1], [0]))
    return out.reshape(t.shape)


def _cp_init(x, rank, opts, rng):
    factors = []
    for n in range(x.ndim):
        if opts.init == "random":
            factors.append(rng.standard_normal((x.shape[n], rank)))
            continue
        mat = unfold(x, n)
        k = min(rank, x.shape[n])
        u = linalg.left_singular_basis(mat, k)
        if rank > k:
            u = np.hstack([u, rng.standard_normal((x.shape[n], rank - k))])
        factors.append(u)
    return factors


def _fix_kruskal_signs(weights, factors):
    # flip each column of every factor but the last so its
    # largest-magnitude entry is positive; compensate in the last factor
    if len(factors) < 2:
        return
    total = np.ones(weights.shape[0])
    for f in factors[:-1]:
        idx = np.argmax(np.abs(f), axis=0)
        signs = np.where(f[idx, np.arange(f.shape[1])] < 0, -1.0, 1.0)
        f *= signs
        total *= signs
    factors[-1] *= total


def cp_als(x, rank: int, opts: DecompOptions | None = None, return_info: bool = False):
    """CP decomposition by alternating least squares.

    Each sweep solves, for every mode in turn, the linear least-squares
    problem for that factor with all others fixed (via the Khatri-Rao
    normal equations and a pseudo-inverse), then renormalizes the factor
    columns into ``weights``. The fit ``1 - ||X - Xhat|| / ||X||`` is
    non-decreasing across sweeps; iteration stops when its change drops
    below ``opts.tol`` or after ``opts.max_iters`` sweeps.

    With ``return_info=True`` also returns a dict with the fit trace,
    iteration count, convergence flag, and an over-parametrization flag
    (set, with a warning, when ``rank`` exceeds what any unfolding's
    column space can support).
    """
    x = np.asarray(x, dtype=np.float64)
    if rank < 1:
        raise ValueError(f"rank must be positive, got {rank}")
    opts = opts or DecompOptions()
    rng = np.random.default_rng(opts.seed)

    size = x.size
    over = any(rank > min(s, size // s) for s in x.shape)
    if over:
        warnings.warn(
            f"rank {rank} exceeds the column space of some unfolding of "
            f"shape {x.shape}; the model is over-parametrized",
            RuntimeWarning,
            stacklevel=2,
        )

    factors = _cp_init(x, rank, opts, rng)
    weights = np.ones(rank)
    norm_x = frobenius(x)
    fits = []
    converged = False

    for sweep in range(opts.max_iters):
        for n in range(x.ndim):
            others = [f for k, f in enumerate(factors) if k != n]
            if not others:  # order-1: any split of x across components
                factors[n] = np.tile(x[:, None], (1, rank)) / rank
            else:
                gram = np.ones((rank, rank))
                for f in others:
                    gram *= f.T @ f
                mttkrp = unfold(x, n) @ khatri_rao(others)
                factors[n] = linalg.lstsq(gram, mttkrp.T).T
            norms = np.linalg.norm(factors[n], axis=0)
            safe = np.where(norms > 0, norms, 1.0)
            factors[n] = factors[n] / safe
            weights = norms
        if norm_x == 0:
            fit = 1.0
        else:
            resid = frobenius(x - kruskal_to_tensor(KruskalTensor(weights, factors)))
            fit = 1.0 - resid / norm_x
        fits.append(fit)
        if sweep > 0 and abs(fits[-1] - fits[-2]) < opts.tol:
            converged = True
            break

    _fix_kruskal_signs(weights, factors)
    result = KruskalTensor(weights, factors)
    if not return_info:
        return result
    info = {
        "fits": fits,
        "iterations": len(fits),
        "converged": converged,
        "over_parametrized": over,
    }
    return result, info


def _check_tucker_ranks(shape, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(
            f"need one rank per mode: shape {shape}, ranks {ranks}"
        )
    for n, (r, s) in enumerate(zip(ranks, shape)):
        if not 1 <= r <= s:
            raise ValueError(
                f"rank {r} out of range [1, {s}] for mode {n}"
            )
    return ranks


def tucker_hosvd(x, ranks) -> TuckerTensor:
    """Truncated higher-order SVD.

    Factor ``n`` holds the top ``ranks[n]`` left singular vectors of the
    mode-``n`` unfolding; the core is the projection of ``x`` onto those
    bases. Factors are column-orthonormal.
    """
    x = np.asarray(x, dtype=np.float64)
    ranks = _check_tucker_ranks(x.shape, ranks)
    factors = [
        linalg.left_singular_basis(unfold(x, n), r)
        for n, r in enumerate(ranks)
    ]
    core = multi_mode_product(x, factors, transpose=True)
    return TuckerTensor(core, factors)


def tucker_hooi(
    x, ranks, opts: DecompOptions | None = None, return_info: bool = False
):
    """Tucker decomposition by higher-order orthogonal iteration.

    Starts from the HOSVD and alternately re-optimizes each factor as
    the dominant subspace of the partially projected tensor, so the fit
    never drops below the HOSVD fit. Stops when the fit change falls
    below ``opts.tol`` or after ``opts.max_iters`` sweeps.
    """
    x = np.asarray(x, dtype=np.float64)
    ranks = _check_tucker_ranks(x.shape, ranks)
    opts = opts or DecompOptions()
    factors = tucker_hosvd(x, ranks).factors
    norm_x = frobenius(x)
    fits = []
    converged = False

    for sweep in range(opts.max_iters):
        for n in range(x.ndim):
            partial = x
            for k in range(x.ndim):
                if k != n:
                    partial = mode_n_product(partial, factors[k].T, k)
            factors[n] = linalg.left_singular_basis(unfold(partial, n), ranks[n])
        core = multi_mode_product(x, factors, transpose=True)
        # orthonormal factors: ||X - Xhat||^2 = ||X||^2 - ||core||^2
        resid_sq = max(norm_x**2 - frobenius(core) ** 2, 0.0)
        fit = 1.0 - np.sqrt(resid_sq) / norm_x if norm_x else 1.0
        fits.append(fit)
        if sweep > 0 and abs(fits[-1] - fits[-2]) < opts.tol:
            converged = True
            break

    result = TuckerTensor(multi_mode_product(x, factors, transpose=True), factors)
    if not return_info:
        return result
    return result, {
        "fits": fits,
        "iterations": len(fits),
        "converged": converged,
    }


def tt_max_ranks(shape) -> tuple:
    """Maximal feasible TT-rank chain (including the boundary 1s)."""
    n = len(shape)
    left = [1]
    for s in shape:
        left.append(left[-1] * s)
    right = [1]
    for s in reversed(shape):
        right.append(right[-1] * s)
    right.reverse()
    return tuple(min(left[k], right[k]) for k in range(n + 1))


def tt_svd(x, ranks=None, tol: float | None = None) -> TTTensor:
    """Tensor-Train decomposition by sequential truncated SVDs.

    Exactly one truncation policy applies:

    * ``ranks``: a full chain ``(R_0, ..., R_N)`` with ``R_0 = R_N = 1``
      (or a single int capping every internal rank). Requested ranks
      beyond what the chain can carry raise ``ValueError``.
    * ``tol``: relative error budget ``eps``; each of the ``N - 1``
      truncation steps keeps enough singular values that the final
      error satisfies ``||X - Xhat|| <= eps * ||X||`` (per-step budget
      ``eps * ||X|| / sqrt(N - 1)``).
    * neither: maximal ranks, i.e. an exact representation.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.ndim
    if ranks is not None and tol is not None:
        raise ValueError("pass either ranks or tol, not both")
    if tol is not None and tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    feasible = tt_max_ranks(x.shape)
    if ranks is not None:
        if np.isscalar(ranks):
            if int(ranks) < 1:
                raise ValueError(f"rank cap must be positive, got {ranks}")
            chain = tuple(min(int(ranks), f) for f in feasible)
        else:
            chain = tuple(int(r) for r in ranks)
            if len(chain) != n + 1:
                raise ValueError(
                    f"rank chain must have length {n + 1}, got {len(chain)}"
                )
            if chain[0] != 1 or chain[-1] != 1:
                raise ValueError("boundary TT-ranks must be 1")
            # each split can carry at most min(R_k * I_k, prod of the
            # remaining mode sizes) singular values
            tail = 1
            caps = [1] * (n + 1)
            for k in range(n - 1, -1, -1):
                tail *= x.shape[k]
                caps[k] = tail
            for k in range(1, n + 1):
                cap = min(chain[k - 1] * x.shape[k - 1], caps[k])
                if not 1 <= chain[k] <= cap:
                    raise ValueError(
                        f"infeasible rank chain: R_{k} = {chain[k]} exceeds "
                        f"the maximum {cap} for shape {x.shape} given the "
                        f"preceding ranks"
                    )
    else:
        chain = feasible

    budget_sq = None
    if tol is not None:
        budget_sq = (tol * frobenius(x)) ** 2 / max(n - 1, 1)

    cores = []
    current = x
    r_prev = 1
    for k in range(n - 1):
        mat = current.reshape(r_prev * x.shape[k], -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        u, v = linalg._fix_signs(u, vh.T)
        if tol is not None:
            tail = np.cumsum(s[::-1] ** 2)[::-1]
            keep = int(np.sum(tail > budget_sq))
            r = max(keep, 1)
        else:
            r = chain[k + 1]
        cores.append(u[:, :r].reshape(r_prev, x.shape[k], r))
        current = (s[:r, None] * v[:, :r].T)
        r_prev = r
    cores.append(current.reshape(r_prev, x.shape[-1], 1))
    return TTTensor(cores)


@dataclass
class MpcaResult:
    """Projections and projected cores from multilinear PCA.

    ``projections[n]`` is the ``I_n x R_n`` column-orthonormal basis for
    feature mode ``n``; ``cores`` stacks the projected samples along the
    last mode (shape ``R_0 x ... x R_{N-2} x M``). ``scatters`` traces
    the captured scatter per sweep.
    """

    projections: list
    cores: np.ndarray
    scatters: list = field(default_factory=list)
    total_scatter: float = 0.0

    def reconstruct(self) -> np.ndarray:
        out = self.cores
        for n, u in enumerate(self.projections):
            out = mode_n_product(out, u, n)
        return out


def mpca(x, ranks, opts: DecompOptions | None = None) -> MpcaResult:
    """Multilinear PCA of a sample set stacked along the last mode.

    Alternately maximizes the captured scatter
    ``sum_m ||X_m x_0 U0.T ... x_{N-2} U_{N-2}.T||^2`` over
    column-orthonormal projections, one per feature mode (the sample
    mode is never projected). Each update takes the dominant left
    singular subspace of the partially projected unfolding, so the
    captured scatter is non-decreasing per sweep.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise ValueError("mpca needs at least one feature mode plus samples")
    n_feat = x.ndim - 1
    ranks = _check_tucker_ranks(x.shape[:n_feat], ranks)
    opts = opts or DecompOptions()

    projections = [
        linalg.left_singular_basis(unfold(x, n), r)
        for n, r in enumerate(ranks)
    ]
    total = frobenius(x) ** 2
    scatters = []
    for sweep in range(opts.max_iters):
        for n in range(n_feat):
            partial = x
            for k in range(n_feat):
                if k != n:
                    partial = mode_n_product(partial, projections[k].T, k)
            projections[n] = linalg.left_singular_basis(
                unfold(partial, n), ranks[n]
            )
        cores = multi_mode_product(
            x, projections, modes=range(n_feat), transpose=True
        )
        scatters.append(frobenius(cores) ** 2)
        if sweep > 0 and abs(scatters[-1] - scatters[-2]) <= opts.tol * max(
            total, 1.0
        ):
            break
    cores = multi_mode_product(
        x, projections, modes=range(n_feat), transpose=True
    )
    return MpcaResult(
        projections=projections,
        cores=cores,
        scatters=scatters,
        total_scatter=total,
    )


def multifactor_analysis(x, pixel_mode: int, ranks=None) -> TuckerTensor:
    """Orthonormal multifactor model of a label-arranged data tensor.

    The input is arranged with one mode per known source of variation
    plus one mode (``pixel_mode``) holding the vectorized measurements.
    Returns the HOSVD: a mixing core plus one orthonormal factor matrix
    per mode, truncated to ``ranks`` when given (default: full).
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= pixel_mode < x.ndim:
        raise ValueError(
            f"pixel_mode {pixel_mode} out of range for order-{x.ndim} tensor"
        )
    if ranks is None:
        ranks = x.shape
    return tucker_hosvd(x, ranks)
