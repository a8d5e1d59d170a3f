"""Graded-mesh L1/FEM solver for time-fractional Kirchhoff diffusion-wave problems."""

from .caputo_l1 import (
    KernelTriangle,
    L1Row,
    complementary_kernels,
    discrete_caputo,
    exact_caputo_power,
    kernel_triangle,
    l1_row,
    mittag_leffler,
    truncation_study,
)
from .fem_space import (
    FeFunction,
    SpatialMesh,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    build_mesh_1d,
    build_mesh_2d_unit_square,
    build_spatial_mesh,
    grad_norm_sq,
    h1_seminorm_error,
    l2_error,
    l2_norm,
    l2_projection,
    ritz_projection,
    spd_solve,
)
from .graded_time import (
    TimeMesh,
    build_graded_mesh,
    extrapolation_weights,
    gronwall_step_condition,
    recommended_grading,
)
from .kirchhoff_solver import (
    ProblemSpec,
    SolverState,
    apriori_bound_report,
    initialize,
    solve_all,
    step,
)
from .mms_harness import (
    ConvergenceReport,
    ManufacturedCase,
    ReportRow,
    coupled_ms,
    coupled_n,
    example1_case,
    example2_case,
    get_case,
    observed_order,
    round_even,
    run_single_case,
    spatial_study,
    temporal_study,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport",
    "FeFunction",
    "KernelTriangle",
    "L1Row",
    "ManufacturedCase",
    "ProblemSpec",
    "ReportRow",
    "SolverState",
    "SpatialMesh",
    "TimeMesh",
    "apriori_bound_report",
    "assemble_load",
    "assemble_mass",
    "assemble_stiffness",
    "build_graded_mesh",
    "build_mesh_1d",
    "build_mesh_2d_unit_square",
    "build_spatial_mesh",
    "complementary_kernels",
    "coupled_ms",
    "coupled_n",
    "discrete_caputo",
    "exact_caputo_power",
    "example1_case",
    "example2_case",
    "extrapolation_weights",
    "get_case",
    "grad_norm_sq",
    "gronwall_step_condition",
    "h1_seminorm_error",
    "initialize",
    "kernel_triangle",
    "l1_row",
    "l2_error",
    "l2_norm",
    "l2_projection",
    "mittag_leffler",
    "observed_order",
    "recommended_grading",
    "ritz_projection",
    "round_even",
    "run_single_case",
    "solve_all",
    "spatial_study",
    "spd_solve",
    "step",
    "temporal_study",
    "truncation_study",
]
