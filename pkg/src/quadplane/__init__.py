"""Wind-tunnel derived performance models and tools for a hybrid eVTOL
QuadPlane: propulsion thrust maps, per-mode aerodynamic coefficient fits,
tunnel-log data reduction, coefficient interpolation meshes, and steady-state
trim / transition solvers, exposed as a library, an HTTP service and a CLI.
"""

from .core import (Atmosphere, FlightCondition, FlightMode, ForcesMoments,
                   PropModule, VehicleGeometry, body_to_wind, prop_alpha,
                   quadplane_v1_geometry, reynolds, wind_to_body, wing_alpha)
from .db import CoefficientDatabase

__version__ = "0.1.0"

__all__ = [
    "Atmosphere", "CoefficientDatabase", "FlightCondition", "FlightMode",
    "ForcesMoments", "PropModule", "VehicleGeometry", "body_to_wind",
    "prop_alpha", "quadplane_v1_geometry", "reynolds", "wind_to_body",
    "wing_alpha", "__version__",
]
