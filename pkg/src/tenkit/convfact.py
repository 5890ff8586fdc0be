"""Multichannel convolution and its factorized pipelines.

The reference operation is valid-extent, stride-1 cross-correlation of
a ``C x D_1 x ... x D_N`` input with a ``T x C x K_1 x ... x K_N``
kernel. Factorizing the kernel turns the convolution into a pipeline of
1x1 (channel) contractions and cheap depthwise / small convolutions:

* Kruskal form: 1x1 conv down to the rank, one depthwise 1-D conv per
  spatial mode, 1x1 conv up to the output channels.
* Tucker form: 1x1 conv down, one regular (small) convolution with the
  spatial factors absorbed into the core, 1x1 conv up.
* Separable form: the Kruskal pipeline for any number of spatial
  dimensions, with an explicit component-weight vector; adding one more
  1-D factor transduces it to an extra dimension.

Every pipeline is numerically equivalent to the direct convolution with
the kernel reconstructed from its factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import mode_n_product
from .decomp import DecompOptions, TuckerTensor, cp_als, tucker_hooi

__all__ = [
    "KruskalConvKernel",
    "TuckerConvKernel",
    "SeparableConvKernel",
    "conv_nd_direct",
    "conv2d_direct",
    "conv1x1",
    "kruskal_conv2d",
    "tucker_conv2d",
    "separable_convnd",
    "transduce",
    "decompose_kernel",
    "direct_multiply_count",
    "kruskal_multiply_count",
]

# einsum subscript pool; 't', 'c', 'r' are reserved for channels/rank
_LETTERS = "abdefghijklmnopq"


@dataclass
class KruskalConvKernel:
    """Rank-R Kruskal form of a 4th-order conv kernel.

    Factor columns are indexed by the CP rank: ``u_out`` is ``T x R``,
    ``u_in`` is ``C x R``, ``u_h`` is ``H x R`` and ``u_w`` is ``W x R``.
    Component weights are absorbed into ``u_out``.
    """

    u_out: np.ndarray
    u_in: np.ndarray
    u_h: np.ndarray
    u_w: np.ndarray

    def __post_init__(self):
        self.u_out = np.asarray(self.u_out, dtype=np.float64)
        self.u_in = np.asarray(self.u_in, dtype=np.float64)
        self.u_h = np.asarray(self.u_h, dtype=np.float64)
        self.u_w = np.asarray(self.u_w, dtype=np.float64)
        mats = [self.u_out, self.u_in, self.u_h, self.u_w]
        r = mats[0].shape[1] if mats[0].ndim == 2 else -1
        if any(m.ndim != 2 or m.shape[1] != r for m in mats):
            raise ValueError("all Kruskal factors must share the rank")

    @property
    def rank(self) -> int:
        return self.u_out.shape[1]

    def reconstruct(self) -> np.ndarray:
        return np.einsum(
            "tr,cr,hr,wr->tchw", self.u_out, self.u_in, self.u_h, self.u_w
        )

    def param_count(self) -> int:
        return int(
            sum(m.size for m in (self.u_out, self.u_in, self.u_h, self.u_w))
        )


@dataclass
class TuckerConvKernel:
    """Tucker form of a 4th-order conv kernel: core plus 4 factors."""

    tucker: TuckerTensor

    def __post_init__(self):
        if self.tucker.core.ndim != 4:
            raise ValueError("Tucker conv kernel needs a 4th-order core")

    @property
    def ranks(self) -> tuple:
        return self.tucker.ranks

    def reconstruct(self) -> np.ndarray:
        return self.tucker.to_tensor()

    def param_count(self) -> int:
        return int(
            self.tucker.core.size + sum(f.size for f in self.tucker.factors)
        )


@dataclass
class SeparableConvKernel:
    """Fully separable form of an N-D conv kernel.

    ``weights`` holds the per-component scales, ``u_out``/``u_in`` the
    channel factors, and ``spatial[i]`` the ``K_i x R`` bank of 1-D
    kernels for spatial mode ``i``.
    """

    weights: np.ndarray
    u_out: np.ndarray
    u_in: np.ndarray
    spatial: list

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.u_out = np.asarray(self.u_out, dtype=np.float64)
        self.u_in = np.asarray(self.u_in, dtype=np.float64)
        self.spatial = [np.asarray(m, dtype=np.float64) for m in self.spatial]
        r = self.weights.shape[0]
        mats = [self.u_out, self.u_in, *self.spatial]
        if any(m.ndim != 2 or m.shape[1] != r for m in mats):
            raise ValueError("all separable factors must share the rank")

    @property
    def rank(self) -> int:
        return self.weights.shape[0]

    def reconstruct(self) -> np.ndarray:
        n = len(self.spatial)
        subs = [f"{_LETTERS[i]}r" for i in range(n)]
        spec = "r,tr,cr," + ",".join(subs) + "->tc" + _LETTERS[:n]
        return np.einsum(
            spec, self.weights, self.u_out, self.u_in, *self.spatial
        )

    def param_count(self) -> int:
        return int(
            self.weights.size
            + self.u_out.size
            + self.u_in.size
            + sum(m.size for m in self.spatial)
        )


def conv_nd_direct(x, kernel) -> np.ndarray:
    """Direct N-D multichannel cross-correlation (valid extent).

    ``x`` is ``C x D_1 x ... x D_N``, ``kernel`` is
    ``T x C x K_1 x ... x K_N``; the output is ``T`` by
    ``D_i - K_i + 1`` along each spatial mode.
    """
    x = np.asarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != x.ndim + 1:
        raise ValueError(
            f"kernel of order {kernel.ndim} does not match input of order "
            f"{x.ndim}"
        )
    if kernel.shape[1] != x.shape[0]:
        raise ValueError(
            f"kernel expects {kernel.shape[1]} input channels, got "
            f"{x.shape[0]}"
        )
    n = x.ndim - 1
    for i in range(n):
        if kernel.shape[2 + i] > x.shape[1 + i]:
            raise ValueError(
                f"kernel size {kernel.shape[2 + i]} exceeds input extent "
                f"{x.shape[1 + i]} on spatial mode {i}"
            )
    windows = sliding_window_view(
        x, kernel.shape[2:], axis=tuple(range(1, n + 1))
    )
    out_subs = _LETTERS[:n]
    k_subs = _LETTERS[n : 2 * n]
    spec = f"tc{k_subs},c{out_subs}{k_subs}->t{out_subs}"
    return np.einsum(spec, kernel, windows)


def conv2d_direct(x, kernel) -> np.ndarray:
    """Direct 2-D multichannel cross-correlation (valid extent)."""
    x = np.asarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if x.ndim != 3 or kernel.ndim != 4:
        raise ValueError("conv2d_direct expects C x H x W input and "
                         "T x C x H x W kernel")
    return conv_nd_direct(x, kernel)


def conv1x1(x, weight) -> np.ndarray:
    """Pointwise (1x1) convolution: a contraction of the channel mode."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.ndim != 2 or weight.shape[1] != x.shape[0]:
        raise ValueError(
            f"weight of shape {weight.shape} does not match "
            f"{x.shape[0]} channels"
        )
    return mode_n_product(x, weight, 0)


def _depthwise_conv1d(x, bank, axis: int) -> np.ndarray:
    # per-channel valid cross-correlation along one spatial axis;
    # channel r of x uses column r of the K x R kernel bank
    k = bank.shape[0]
    if k > x.shape[axis]:
        raise ValueError(
            f"depthwise kernel of length {k} exceeds extent "
            f"{x.shape[axis]} on axis {axis}"
        )
    windows = sliding_window_view(x, k, axis=axis)
    return np.einsum("r...k,kr->r...", windows, bank)


def kruskal_conv2d(x, kernel: KruskalConvKernel) -> np.ndarray:
    """2-D convolution through the Kruskal pipeline.

    1x1 conv down to the rank, depthwise convs over height then width,
    1x1 conv up to the output channels. Matches
    ``conv2d_direct(x, kernel.reconstruct())``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("kruskal_conv2d expects a C x H x W input")
    z = conv1x1(x, kernel.u_in.T)
    z = _depthwise_conv1d(z, kernel.u_h, axis=1)
    z = _depthwise_conv1d(z, kernel.u_w, axis=2)
    return conv1x1(z, kernel.u_out)


def tucker_conv2d(x, kernel: TuckerConvKernel) -> np.ndarray:
    """2-D convolution through the Tucker pipeline.

    1x1 conv down to rank R2, a regular R2 -> R1 convolution with the
    spatial factors absorbed into the core, then a 1x1 conv up to the
    output channels. Matches ``conv2d_direct`` on the reconstruction.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("tucker_conv2d expects a C x H x W input")
    core, (u_out, u_in, u_h, u_w) = kernel.tucker.core, kernel.tucker.factors
    z = conv1x1(x, u_in.T)
    absorbed = mode_n_product(mode_n_product(core, u_h, 2), u_w, 3)
    z = conv_nd_direct(z, absorbed)
    return conv1x1(z, u_out)


def separable_convnd(x, kernel: SeparableConvKernel) -> np.ndarray:
    """Fully separable N-D convolution.

    Contract the input channels down to the rank, run one depthwise 1-D
    convolution per spatial mode, and expand to the output channels with
    the component weights applied. Matches ``conv_nd_direct`` on the
    reconstructed kernel.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != len(kernel.spatial) + 1:
        raise ValueError(
            f"input of order {x.ndim} needs {x.ndim - 1} spatial factors, "
            f"got {len(kernel.spatial)}"
        )
    z = conv1x1(x, kernel.u_in.T)
    for i, bank in enumerate(kernel.spatial):
        z = _depthwise_conv1d(z, bank, axis=i + 1)
    return conv1x1(z, kernel.u_out * kernel.weights)


def transduce(kernel: SeparableConvKernel, extra_factor) -> SeparableConvKernel:
    """Extend a separable kernel to one more spatial dimension by
    appending a single 1-D factor bank."""
    extra = np.asarray(extra_factor, dtype=np.float64)
    if extra.ndim != 2 or extra.shape[1] != kernel.rank:
        raise ValueError(
            f"extra factor must have {kernel.rank} columns, got shape "
            f"{extra.shape}"
        )
    return SeparableConvKernel(
        weights=kernel.weights.copy(),
        u_out=kernel.u_out.copy(),
        u_in=kernel.u_in.copy(),
        spatial=[m.copy() for m in kernel.spatial] + [extra],
    )


def decompose_kernel(kernel, form: str, ranks, opts: DecompOptions | None = None):
    """Factorize a 4th-order conv kernel into the requested form.

    ``form`` is ``"cp"`` (rank int -> Kruskal form) or ``"tucker"``
    (4 ranks -> Tucker form). Returns ``(factorized, info)`` where
    ``info`` reports the relative reconstruction error and parameter
    counts before/after.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 4:
        raise ValueError("decompose_kernel expects a T x C x H x W kernel")
    opts = opts or DecompOptions()
    if form == "cp":
        rank = int(ranks) if np.isscalar(ranks) else int(ranks[0])
        k = cp_als(kernel, rank, opts)
        fact = KruskalConvKernel(
            u_out=k.factors[0] * k.weights,
            u_in=k.factors[1],
            u_h=k.factors[2],
            u_w=k.factors[3],
        )
    elif form == "tucker":
        t = tucker_hooi(kernel, ranks, opts)
        fact = TuckerConvKernel(t)
    else:
        raise ValueError(f"unknown form {form!r}")
    recon = fact.reconstruct()
    denom = np.linalg.norm(kernel)
    err = float(np.linalg.norm(kernel - recon) / denom) if denom else 0.0
    info = {
        "relative_error": err,
        "params_before": int(kernel.size),
        "params_after": fact.param_count(),
    }
    return fact, info


def direct_multiply_count(kernel_shape, in_shape) -> int:
    """Fused multiply-adds of the direct 2-D convolution."""
    t, c, h, w = kernel_shape
    _, hi, wi = in_shape
    ho, wo = hi - h + 1, wi - w + 1
    return int(t * c * h * w * ho * wo)


def kruskal_multiply_count(kernel_shape, rank, in_shape) -> dict:
    """Per-stage fused multiply-adds of the Kruskal pipeline."""
    t, c, h, w = kernel_shape
    _, hi, wi = in_shape
    ho, wo = hi - h + 1, wi - w + 1
    stages = {
        "conv1x1_in": rank * c * hi * wi,
        "depthwise_h": rank * h * ho * wi,
        "depthwise_w": rank * w * ho * wo,
        "conv1x1_out": t * rank * ho * wo,
    }
    stages["total"] = sum(stages.values())
    return stages
