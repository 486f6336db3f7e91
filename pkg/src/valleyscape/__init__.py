"""Valley detection on continuous fitness landscapes."""

from valleyscape.errors import (
    AmbiguousValleyError,
    ConfigError,
    DimensionError,
    IndeterminateError,
    InputError,
    InvalidHomeomorphismError,
    ValleyscapeError,
)
from valleyscape.landscape import (
    Domain,
    EllipticParams,
    Homeomorphism,
    Landscape,
    TransformedLandscape,
    check_order_preservation,
    degenerate_valley,
    elliptic_valley,
    evaluate,
    gradient,
    grid_evaluate,
    identity_map,
    linear_map,
    make_elliptic,
    make_transformed,
    negate,
    rosenbrock,
    rosenbrock_map,
    sphere,
    valley_axis,
)
from valleyscape.neighborhood import (
    estimate_area_ratio,
    gradient_alignment,
    grid_area_ratio,
    narrowness_beta,
    valley_point_test,
    width_alpha,
)
from valleyscape.pca import (
    eigen_ratio_diagnostic,
    eigendecompose_symmetric,
    mean_and_covariance,
    pca_projection,
    project_reconstruct,
    select_best,
)
from valleyscape.sampling import RngStream, RunConfig, substream, uniform_in_box

__version__ = "0.1.0"
