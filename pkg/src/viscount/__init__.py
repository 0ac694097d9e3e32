"""Visibility counting among disjoint segments in a bounding box.

Exact per-query answers come from a rotational sweep; a graph identity
ties the count to visible endpoints and occlusion components; sampled
visibility triangles give tunable approximate answers.
"""

from .geom_core import Point, Segment, orient
from .scene import Scene, generate, load, save, admissible
from .exact_engine import (sweep, budgeted_sweep, oracle_m_p, oracle_ve_p,
                           InadmissibleQuery, VisibilityProfile)
from .gp_graph import build as build_gp, m_p_via_identity, face_count
from .evg import build_evg, Evg
from .covers import build_vt_s, SceneCover, Triangle, TriangleSet
from .estimators import (Params, QueryResult, preprocess, estimate_ve,
                         estimate_C, query, delta_star, DeltaTooLarge)

__version__ = "0.1.0"
