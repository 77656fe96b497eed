"""Local routing on constrained visibility graphs and constrained triangulations."""
from .bounds import (
    LowerBoundParams,
    RatioReport,
    gen_lower_bound,
    lower_bound_closed_form,
    measure_routing_ratio,
    shortest_path,
    verify_augmented_bound,
    verify_detour_bound,
    verify_lower_bound,
)
from .cones import build_constrained_half_theta6, build_constrained_theta, cone_of
from .geom import DegeneracyError, Point, Segment, orient, validate_general_position
from .instance import (
    GeomGraph,
    Instance,
    InstanceError,
    InstanceParseError,
    Path,
    load_instance,
    make_instance,
    random_instance,
    save_instance,
)
from .router import (
    RouteTrace,
    Router,
    local_half_theta6_edges,
    route_on_H,
    run_router,
    step_face_routing,
    step_theta_routing,
)
from .triangulation import Triangulation, build_cdt, build_H_prime, extract_H, validate_triangulation
from .visibility import build_visibility_graph, neighborhood, visible
