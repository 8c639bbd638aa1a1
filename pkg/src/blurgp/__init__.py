"""Sparse Gaussian processes on blurred basis points, trained by EP.

A small set of basis points, each carrying a local covariance matrix,
stands in for the full training set: the kernel is analytically
integrated against each basis blur, and expectation propagation fits one
scalar message per data point on top of that compressed representation.
Supports regression with Gaussian noise and binary classification with
a label-noise step likelihood.
"""

from .basis import Clustering, CovMode, kmeans, local_covariances
from .data import (
    Dataset,
    load_csv,
    split,
    standardize,
    synth_circle,
    synth_gaussian_classes,
    write_csv,
)
from .ep import (
    EpConfig,
    SiteParams,
    compute_projection,
    delete_site,
    ep_fit,
    include_site,
    predictive_class_probability,
    project_site,
)
from .estimators import BlurredGpClassifier, BlurredGpRegressor
from .exceptions import (
    BlurGpError,
    CavityCollapseError,
    DataFormatError,
    IllConditionedBasisError,
    InvalidConfigError,
    NumericalDomainError,
)
from .kernels import (
    BasisSet,
    BlurredBasis,
    RbfKernel,
    blurred_cross,
    blurred_vector,
    doubly_blurred,
    gram_khat,
    rbf_eval,
)
from .likelihoods import (
    CavityMarginal,
    GaussianNoise,
    LabelNoise,
    site_derivatives_classification,
    site_derivatives_regression,
)
from .posterior import (
    BasisMoments,
    PosteriorState,
    basis_moments,
    natural_from_virtual,
    predict_cov,
    predict_mean,
    prior_state,
)
from .serialize import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "BasisMoments",
    "BasisSet",
    "BlurGpError",
    "BlurredBasis",
    "BlurredGpClassifier",
    "BlurredGpRegressor",
    "CavityCollapseError",
    "CavityMarginal",
    "Clustering",
    "CovMode",
    "DataFormatError",
    "Dataset",
    "EpConfig",
    "GaussianNoise",
    "IllConditionedBasisError",
    "InvalidConfigError",
    "LabelNoise",
    "NumericalDomainError",
    "PosteriorState",
    "RbfKernel",
    "SiteParams",
    "basis_moments",
    "blurred_cross",
    "blurred_vector",
    "compute_projection",
    "delete_site",
    "doubly_blurred",
    "ep_fit",
    "gram_khat",
    "include_site",
    "kmeans",
    "load_csv",
    "load_model",
    "local_covariances",
    "natural_from_virtual",
    "predict_cov",
    "predict_mean",
    "predictive_class_probability",
    "prior_state",
    "project_site",
    "rbf_eval",
    "save_model",
    "site_derivatives_classification",
    "site_derivatives_regression",
    "split",
    "standardize",
    "synth_circle",
    "synth_gaussian_classes",
    "write_csv",
]
