"""Super-radius based density estimation and classification."""
from .classifier import (
    ClassifierModel,
    Hyperparams,
    LikelihoodReport,
    PointDensityEstimator,
    class_density,
    likelihoods,
    predict,
    train,
)
from .core import (
    DensityEstimate,
    RadiusSample,
    SeriesCoefficients,
    Fz_at,
    density_at_origin,
    fit_function_series,
    fit_series,
    fz_at,
)
from .data_io import Dataset, SyntheticSpec, generate, load_csv, load_model, save_model
from .geometry import DimensionContext, gamma, sphere_volume, super_radius, theorem1_factor
from .neighbors import KNNIndex, LocalFrame, build_frame, knn

__version__ = "0.1.0"
