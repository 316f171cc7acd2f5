"""Group multiplication tables, dense small configurations and certified structure search."""

from .certificates import ApGridCert, CosetGridCert, PipelineCert, SubspaceCert, certificate_from_json, validate
from .constructions import (
    bes_elementary,
    bes_interval,
    block_construction,
    bound_F,
    bound_f,
    bound_g,
    interval_construction,
    interval_face_count,
)
from .finders import find_ap_grid, find_combinatorial_subspace, find_coset_grid
from .grids import Configuration, GridIsomorphism, TripleSystem, from_group, interval_grid, is_isomorphic, subgrid
from .groups import GroupTable, Subgroup, build_group, find_abelian_subgroup, parse_group_spec, primary_decomposition
from .oracle import SearchBudget, f_prime_exact, g_prime_exact, max_faces, min_span
from .pipeline import PipelineParams, structure_pipeline

__version__ = "0.1.0"
