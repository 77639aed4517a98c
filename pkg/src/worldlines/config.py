"""Central numeric configuration.

Every truncation threshold and tolerance used in the production code paths
lives here, so nothing is hidden inside individual algorithms.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericConfig:
    # special-function kernel
    series_rel: float = 1e-16      # theta series truncation, relative to running sum
    agm_rel: float = 1e-15         # AGM fixed-point stop
    carlson_rel: float = 1e-16     # Carlson duplication stop
    max_iter: int = 200

    # geometry / frames
    frame_tol: float = 1e-9        # default residual tolerance for group membership
    orientation_tol: float = 1e-9  # determinant magnitude below which sign is undecided
    ode_tol: float = 1e-10         # default global metric-defect budget
    ode_tol_min: float = 1e-13
    ode_tol_max: float = 1e-6

    # spectral classification
    disc_rel: float = 1e-9         # relative discriminant threshold for double roots
    fredholm_tol: float = 1e-7     # generalized-eigenvector solvability residual

    # singular sets
    sing_radius_factor: float = 1e-4   # exclusion radius = factor * period
    extrapolation_points: int = 6      # flanking nodes for even-order extrapolation

    # strain analysis
    vertex_rel: float = 1e-7       # |Q| below this times max|Q| flags a vertex
    timelike_tol: float = 1e-12

    # reconstruction
    condition_bound: float = 1e12
    imag_leak_tol: float = 1e-6    # largest imaginary part tolerated in a real ray


DEFAULTS = NumericConfig()
