"""Parameter graphs and constructive connectivity paths."""

from .common import ConeSpec, DifferentComponentError, ParamPath, ParamVertex, ratio_bound
from .sl3 import (
    adjacent_flip_sl3,
    adjacent_g_sl3,
    adjacent_sl3,
    bridge_vertex_sl3,
    path_sl3,
    validate_path_sl3,
)
from .sp4 import (
    adjacent_g_sp4,
    adjacent_sp4,
    bridge_vertex_sp4,
    flip_conditions_sp4,
    path_sp4,
    validate_path_sp4,
    zigzag_points,
)
from .audit import AuditReport, cone_path_certificate, find_path, graph_audit, validate_path
