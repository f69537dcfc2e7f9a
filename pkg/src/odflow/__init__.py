"""odflow: geographic origin-destination flow visualisation engine."""

__version__ = "0.1.0"

from .geo import (
    GeoPoint,
    Graticule,
    ProjectedPoint,
    Rotation3,
    centering_rotation,
    graticule,
    great_circle_distance,
    hammer_forward,
    hammer_inverse,
    rotate,
)
from .oddata import (
    Flow,
    FlowDataset,
    Region,
    RegionGroup,
    aggregate_regions,
    filter_by_magnitude,
    load_dataset,
    totals,
)
from .leaderlayout import (
    FreeRect,
    Leader,
    LeaderPlan,
    MatrixEdge,
    compute_ordering,
    grow_free_rect,
    route_leaders,
)
from .qprefine import QpParams, QpProblem, QpSolution, build_qp, separation, solve_qp
from .layouts import (
    ColourScale,
    LayoutParams,
    highlight,
    layout_flowmap,
    layout_maptrix,
    layout_odmaps,
    relayout,
)
from .flow3d import (
    FlowCurve3D,
    MorphFrame,
    Point3,
    bezier_flow_on_map,
    curved_map_surface,
    curves_to_json,
    curves_to_obj,
    globe_tube,
    height_for_encoding,
    maps_link_tube,
    morph,
)
from .rendersvg import render_flowmap, render_layout, render_maptrix, render_odmaps

__all__ = [name for name in dir() if not name.startswith("_")]
