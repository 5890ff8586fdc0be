"""Typed save/load of factorized models on top of the manifest format.

Decomposition results, factorized convolution kernels (with a ``form``
tag), and network layers (with a ``layer_type`` tag) all round-trip
through :func:`save_model` / :func:`load_model`.
"""

from __future__ import annotations

import numpy as np

from .convfact import KruskalConvKernel, SeparableConvKernel, TuckerConvKernel
from .decomp import KruskalTensor, MpcaResult, TTTensor, TuckerTensor
from .io import FormatError, load_manifest, save_manifest
from .nn import PolyNet, TclLayer, TrlLayer, TTLinearLayer

__all__ = ["save_model", "load_model"]


def save_model(directory, model) -> None:
    """Write any supported factorized model into a manifest directory."""
    if isinstance(model, KruskalTensor):
        save_manifest(
            directory,
            "kruskal",
            {"factors": model.factors},
            {
                "mode_sizes": list(model.shape),
                "rank": model.rank,
                "weights": [float(w) for w in model.weights],
            },
        )
    elif isinstance(model, TuckerTensor):
        save_manifest(
            directory,
            "tucker",
            {"core": model.core, "factors": model.factors},
            {"mode_sizes": list(model.shape), "ranks": list(model.ranks)},
        )
    elif isinstance(model, TTTensor):
        save_manifest(
            directory,
            "tt",
            {"cores": model.cores},
            {"mode_sizes": list(model.shape), "ranks": list(model.ranks)},
        )
    elif isinstance(model, MpcaResult):
        save_manifest(
            directory,
            "mpca",
            {"projections": model.projections, "cores": model.cores},
            {
                "mode_sizes": [int(p.shape[0]) for p in model.projections],
                "ranks": [int(p.shape[1]) for p in model.projections],
            },
        )
    elif isinstance(model, KruskalConvKernel):
        save_manifest(
            directory,
            "conv_kernel",
            {
                "factors": [model.u_out, model.u_in, model.u_h, model.u_w],
            },
            {
                "form": "kruskal",
                "mode_sizes": [int(m.shape[0]) for m in
                               (model.u_out, model.u_in, model.u_h, model.u_w)],
                "rank": model.rank,
            },
        )
    elif isinstance(model, TuckerConvKernel):
        save_manifest(
            directory,
            "conv_kernel",
            {"core": model.tucker.core, "factors": model.tucker.factors},
            {
                "form": "tucker",
                "mode_sizes": list(model.tucker.shape),
                "ranks": list(model.tucker.ranks),
            },
        )
    elif isinstance(model, SeparableConvKernel):
        save_manifest(
            directory,
            "conv_kernel",
            {
                "channel_factors": [model.u_out, model.u_in],
                "spatial_factors": model.spatial,
            },
            {
                "form": "separable",
                "rank": model.rank,
                "weights": [float(w) for w in model.weights],
            },
        )
    elif isinstance(model, TclLayer):
        save_manifest(
            directory,
            "layer",
            {"factors": model.factors},
            {"layer_type": "tcl"},
        )
    elif isinstance(model, TrlLayer):
        save_manifest(
            directory,
            "layer",
            {
                "core": model.weight.core,
                "factors": model.weight.factors,
                "bias": model.bias,
            },
            {"layer_type": "trl", "ranks": list(model.weight.ranks)},
        )
    elif isinstance(model, TTLinearLayer):
        save_manifest(
            directory,
            "layer",
            {"cores": model.cores.cores},
            {
                "layer_type": "tt_linear",
                "in_shape": list(model.in_shape),
                "out_shape": list(model.out_shape),
                "ranks": list(model.cores.ranks),
            },
        )
    elif isinstance(model, PolyNet):
        save_manifest(
            directory,
            "layer",
            {"factors": model.factors, "mix": model.mix, "bias": model.bias},
            {"layer_type": "polynet", "order": model.order},
        )
    else:
        raise TypeError(f"cannot serialize a {type(model).__name__}")


def load_model(directory):
    """Inverse of :func:`save_model`."""
    fmt, arrays, meta = load_manifest(directory)
    if fmt == "kruskal":
        return KruskalTensor(np.asarray(meta["weights"]), arrays["factors"])
    if fmt == "tucker":
        return TuckerTensor(arrays["core"], arrays["factors"])
    if fmt == "tt":
        return TTTensor(arrays["cores"])
    if fmt == "mpca":
        return MpcaResult(
            projections=arrays["projections"], cores=arrays["cores"]
        )
    if fmt == "conv_kernel":
        form = meta.get("form")
        if form == "kruskal":
            u_out, u_in, u_h, u_w = arrays["factors"]
            return KruskalConvKernel(u_out, u_in, u_h, u_w)
        if form == "tucker":
            return TuckerConvKernel(
                TuckerTensor(arrays["core"], arrays["factors"])
            )
        if form == "separable":
            u_out, u_in = arrays["channel_factors"]
            return SeparableConvKernel(
                np.asarray(meta["weights"]), u_out, u_in,
                arrays["spatial_factors"],
            )
        raise FormatError(f"{directory}: unknown conv kernel form {form!r}")
    if fmt == "layer":
        layer_type = meta.get("layer_type")
        if layer_type == "tcl":
            return TclLayer(arrays["factors"])
        if layer_type == "trl":
            return TrlLayer(
                TuckerTensor(arrays["core"], arrays["factors"]),
                arrays["bias"],
            )
        if layer_type == "tt_linear":
            return TTLinearLayer(
                tuple(meta["in_shape"]),
                tuple(meta["out_shape"]),
                TTTensor(arrays["cores"]),
            )
        if layer_type == "polynet":
            return PolyNet(arrays["factors"], arrays["mix"], arrays["bias"])
        raise FormatError(f"{directory}: unknown layer type {layer_type!r}")
    raise FormatError(f"{directory}: unknown manifest format {fmt!r}")
