"""Reconstruction on the unit ball from Radon projections via orthogonal polynomial expansions."""

__version__ = "0.1.0"

from .errors import NumericsError, ValidationError
from .kernels import active_backend, available_backends, thread_count
from .phantom import (
    EllipsoidComponent,
    ImageGrid,
    Phantom,
    PolynomialPhantom,
    eval_phantom,
    get_preset,
    load_phantom,
    preset_names,
    radon_phantom,
    save_phantom,
)
from .radon import (
    Sinogram,
    radon_numeric,
    read_sinogram,
    sample_sinogram,
    sinogram_geometry,
    write_sinogram,
)
from .reconstruct import (
    ReconstructionConfig,
    lebesgue_function,
    oped2d,
    oped3d,
    phi_kernel,
    reconstruct_points,
    semi_discrete_partial_sum,
    smoothed_reconstruct,
    smoothing_weight,
)
from .svd import (
    BasisIndex,
    SingularTriple,
    ball_basis,
    basis_indices,
    certified_truncation,
    cylinder_basis,
    cylinder_coefficients,
    harmonic_dim,
    radon_expansion_term,
    radon_of_orthogonal_polynomial,
    singular_triple,
    singular_value,
    solid_harmonic,
    spherical_harmonic,
    svd_forward,
    truncated_svd_points,
    truncated_svd_reconstruct,
    verification_report,
)

__all__ = [
    "BasisIndex",
    "EllipsoidComponent",
    "ImageGrid",
    "NumericsError",
    "Phantom",
    "PolynomialPhantom",
    "ReconstructionConfig",
    "SingularTriple",
    "Sinogram",
    "ValidationError",
    "__version__",
    "active_backend",
    "available_backends",
    "ball_basis",
    "basis_indices",
    "certified_truncation",
    "cylinder_basis",
    "cylinder_coefficients",
    "eval_phantom",
    "get_preset",
    "harmonic_dim",
    "lebesgue_function",
    "load_phantom",
    "oped2d",
    "oped3d",
    "phi_kernel",
    "preset_names",
    "radon_expansion_term",
    "radon_numeric",
    "radon_of_orthogonal_polynomial",
    "radon_phantom",
    "read_sinogram",
    "reconstruct_points",
    "sample_sinogram",
    "save_phantom",
    "semi_discrete_partial_sum",
    "singular_triple",
    "singular_value",
    "sinogram_geometry",
    "smoothed_reconstruct",
    "smoothing_weight",
    "solid_harmonic",
    "spherical_harmonic",
    "svd_forward",
    "thread_count",
    "truncated_svd_points",
    "truncated_svd_reconstruct",
    "verification_report",
    "write_sinogram",
]
