"""Quaternionic div-curl, Vekua and static Maxwell solvers on voxel grids."""

import warnings

# numba probes TBB first and warns when the installed version is too old;
# it then falls back to another threading layer, so the warning is noise
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from .errors import (  # noqa: E402
    ConfigurationError,
    DivCurlError,
    FormatError,
    OutOfDomainError,
    PreconditionError,
    SingularPointError,
    SolverError,
    StencilError,
)
from .quaternion import Quaternion  # noqa: E402
from .grid import (  # noqa: E402
    BoundaryField,
    BoundarySet,
    Domain,
    Field,
    Grid,
    build_ball_domain,
    build_box_domain,
    custom_domain,
    extract_boundary,
)
from .integral import QuadratureConfig, newton_potential, single_layer, teodorescu  # noqa: E402
from .solvers import (  # noqa: E402
    Conductivity,
    SolveReport,
    curl_inverse,
    double_curl_inverse,
    grigorev_solution,
    hilbert_transform,
    solve_conductivity,
    solve_divcurl,
    solve_divcurl_boundary,
    solve_maxwell,
    vekua_antiderivative,
    vekua_complete,
)
from .verify import ResidualSuite, convergence_order  # noqa: E402

__version__ = "0.1.0"


def set_threads(count: int | None) -> int:
    """Size the numba worker pool; results do not depend on the count."""
    import numba

    if count is None:
        return numba.get_num_threads()
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count


__all__ = [
    "BoundaryField",
    "BoundarySet",
    "Conductivity",
    "ConfigurationError",
    "DivCurlError",
    "Domain",
    "Field",
    "FormatError",
    "Grid",
    "OutOfDomainError",
    "PreconditionError",
    "QuadratureConfig",
    "Quaternion",
    "ResidualSuite",
    "SingularPointError",
    "SolveReport",
    "SolverError",
    "StencilError",
    "build_ball_domain",
    "build_box_domain",
    "convergence_order",
    "curl_inverse",
    "custom_domain",
    "double_curl_inverse",
    "extract_boundary",
    "grigorev_solution",
    "hilbert_transform",
    "newton_potential",
    "set_threads",
    "single_layer",
    "solve_conductivity",
    "solve_divcurl",
    "solve_divcurl_boundary",
    "solve_maxwell",
    "teodorescu",
    "vekua_antiderivative",
    "vekua_complete",
]
