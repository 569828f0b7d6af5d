"""mirrorforge: free-form mirror design for prescribed panoramic projections.

Pipeline: build the normal field of a prescribed camera-to-scene map, test
its integrability, fit a mirror height by slope matching (polynomial least
squares or a grid Poisson solve), then validate the fitted shape with a
deterministic ray tracer.
"""

from .errors import (
    DegenerateGeometryError,
    DomainError,
    FormatError,
    MirrorForgeError,
    SolverError,
)
from .field import (
    NormalField,
    PlanarComponents,
    build_field,
    gradient_test_field,
    integrability_report,
    integrability_residual,
    scaled_components,
)
from .fit import (
    FitResult,
    PoissonResult,
    PolyBasis,
    Quadrature,
    fit_poisson,
    fit_polynomial,
    objective_eval,
    read_coefficients,
    write_coefficients,
)
from .geom import Ray, central_diff, intersect_cylinder, normalize, reflect, vec3
from .mirror import (
    CompositeSurface,
    GridSurface,
    Mesh,
    PolySurface,
    export_obj,
    make_conquistador,
    read_obj,
    surface_from_coefficients,
    surface_from_fit,
    surface_from_grid,
    surface_normal,
    tessellate,
)
from .projection import (
    CameraModel,
    DomainRect,
    ProjectionSpec,
    domain_for_vfov,
    panoramic_domain,
    prescribed_map,
    target_direction,
)
from .sim import (
    RenderResult,
    Scene,
    TraceReport,
    TraceSample,
    induced_map,
    pixel_gain_ratio,
    render_panorama,
    score_projection,
    write_ppm,
)

__version__ = "0.1.0"
