"""Heat kernels, orbital counting and Selberg transforms on real hyperbolic space."""

from .hyperbolic import (
    Isometry,
    Point,
    ball_volume,
    hyperbolic_distance,
    origin,
    sample_ball,
    sample_sphere,
    spectral_param,
    theta,
)
from .orbits import (
    GroupPresentation,
    bundled_group,
    bundled_group_names,
    enumerate_orbit,
    load_group,
    orbital_count,
)

__version__ = "0.1.0"

__all__ = [
    "Isometry",
    "Point",
    "ball_volume",
    "hyperbolic_distance",
    "origin",
    "sample_ball",
    "sample_sphere",
    "spectral_param",
    "theta",
    "GroupPresentation",
    "bundled_group",
    "bundled_group_names",
    "enumerate_orbit",
    "load_group",
    "orbital_count",
]
