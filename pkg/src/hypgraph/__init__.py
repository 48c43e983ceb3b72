"""Sampling, construction and structural analysis of subcritical random hyperbolic graphs."""
from .analysis import (ExperimentRecord, ScalingFit, deep_degree_regression, deep_vertex_report,
                       run_scaling_experiment)
from .components import Components, bfs_components, connected_components
from .covering import CoverBuilder, CoverReport, build_C_v, build_cover, check_concentration, check_containment, theta_neighborhood
from .errors import ContractError, DomainError, HypGraphError, ParameterError, ResourceError
from .geometry import (ModelParams, PolarPoint, ball_measure, connection_angle_approx, connection_angle_exact,
                       hyperbolic_distance, within_radius)
from .graph import GeometricGraph, build_edges_bucketed, build_edges_naive, build_graph
from .render import render_svg
from .sampler import VertexSample, sample_vertices
from .zones import (LayerDecomposition, SeparationZone, ZoneCatalog, build_zone_catalog, decompose_layers,
                    find_zone_right_of, zone_is_empty)

__version__ = "0.1.0"
