"""Endoscopic view-point relocalization: descriptors, localization and evaluation."""

from ._endoreloc import (
    ColorSpace,
    DescriptorConfig,
    DescriptorFamily,
    Error,
    Modality,
    PcaModel,
    SvmModel,
    chi_squared,
    compute_stats,
    default_settings,
    describe,
    fit_pca,
    generate_pair,
    register_landmarks,
    render,
    retrieval_rate,
    rotate_image,
    sweep_combos,
    sweep_radius,
    train_svm,
    vector_length,
)

__all__ = [
    "ColorSpace",
    "DescriptorConfig",
    "DescriptorFamily",
    "Error",
    "Modality",
    "PcaModel",
    "SvmModel",
    "chi_squared",
    "compute_stats",
    "default_settings",
    "describe",
    "fit_pca",
    "generate_pair",
    "register_landmarks",
    "render",
    "retrieval_rate",
    "rotate_image",
    "sweep_combos",
    "sweep_radius",
    "train_svm",
    "vector_length",
]
