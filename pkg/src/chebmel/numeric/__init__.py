"""Numerical building blocks: jets, determinants, quadrature."""
from .interval import Domain, Interval, as_pieces, hull, interval
from .jet import Jet, compose_taylor, derivative, jet_lift
from .linalg import det, null_vector
from .quadrature import (DEFAULT_TOL, QuadratureResult, integrate, integrate_param,
                         integrate_product, integrate_weighted)

__all__ = [
    "Domain", "Interval", "as_pieces", "hull", "interval",
    "Jet", "compose_taylor", "derivative", "jet_lift",
    "det", "null_vector",
    "DEFAULT_TOL", "QuadratureResult", "integrate", "integrate_param", "integrate_product",
    "integrate_weighted",
]
