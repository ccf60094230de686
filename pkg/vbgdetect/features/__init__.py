"""Feature extractors: six-band co-occurrence tensor and CRSPAM1372."""

from vbgdetect.features.comat import (
    CoMatPlane,
    CoMatTensor,
    build_tensor,
    crossband_comat,
    normalize_tensor,
    prepare_cnn_input,
    rebin_tensor,
    render_planes,
    spatial_comat,
)
from vbgdetect.features.crspam import (
    Direction,
    FeatureVector1372,
    ResidualMap,
    cross_cooc,
    crspam1372,
    residual,
    spam686,
    spam_markov,
)

__all__ = [
    "CoMatPlane",
    "CoMatTensor",
    "Direction",
    "FeatureVector1372",
    "ResidualMap",
    "build_tensor",
    "cross_cooc",
    "crossband_comat",
    "crspam1372",
    "normalize_tensor",
    "prepare_cnn_input",
    "rebin_tensor",
    "render_planes",
    "residual",
    "spam686",
    "spam_markov",
    "spatial_comat",
]
