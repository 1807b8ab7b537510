"""Frame triage, SfM pose handling and panorama tour generation."""

from ._core import (  # noqa: F401
    FilterVerdict,
    KeyframePolicy,
    Reconstruction,
    Shot,
    SparsePoint,
    TriageError,
    axis_angle_to_matrix,
    bearing,
    build_tour,
    classify,
    compute_thresholds,
    convolve3x3,
    export_ply,
    load_grayscale,
    parse_reconstruction,
    select_keyframes,
    serialize_reconstruction,
    style,
    to_grayscale,
    variance,
    variance_of_laplacian,
)

__all__ = [name for name in dir() if not name.startswith("_")]
