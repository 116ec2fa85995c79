"""Relativistic stereometric localization in 1+1, 2+1 and 3+1 dimensions."""
from .constellation import (
    Affine,
    AnchoringWorldline,
    Circular,
    Constellation,
    Emitter,
    Inertial,
    Piecewise,
    ProperTime,
    SineWobble,
    Transformed,
)
from .errors import NumericalError, StereolocError, ValidationError
from .geometry import intersect_cones, intersect_past_cones, minkowski, solve_null_future, solve_null_past
from .localization import localize_2d, localize_3d_intrinsic, localize_3d_planes, localize_4d
from .positioning import (
    assemble_data_point_3d,
    assemble_echo_2d,
    assemble_echo_3d,
    assemble_station_records_4d,
    emission_coordinates,
)

__version__ = "0.1.0"
