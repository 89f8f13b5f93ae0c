"""Texture baking toolkit.

Mesh decimation, UV-atlas generation, software rasterization, and gradient-based
texture optimization with dual-resolution self-supervision, exposed over numpy
arrays. Images and textures are float64 arrays of shape (H, W, 3) in [0, 1];
masks are (H, W) bool.
"""

from ._texbake import (
    Camera,
    GBuffer,
    Mesh,
    bake_with_oracle,
    classify_keep_update,
    decimate,
    downsample_box,
    fallback_atlas,
    load_obj,
    load_png,
    make_mesh,
    mse,
    normalize_depth,
    normalize_unit,
    psnr,
    rasterize,
    render_view,
    sample_bilinear,
    save_obj,
    save_png,
    uv_coverage,
    view_plan,
)

__all__ = [
    "Camera",
    "GBuffer",
    "Mesh",
    "bake_with_oracle",
    "classify_keep_update",
    "decimate",
    "downsample_box",
    "fallback_atlas",
    "load_obj",
    "load_png",
    "make_mesh",
    "mse",
    "normalize_depth",
    "normalize_unit",
    "psnr",
    "rasterize",
    "render_view",
    "sample_bilinear",
    "save_obj",
    "save_png",
    "uv_coverage",
    "view_plan",
]
