"""Grid-based approximate definability: sampled grids, definable approximants and loss checks."""

from .errors import (ConfigError, DegenerateGridError, GeometryError, GridApproxError, MeasureError,
                     SizeGuardError)
from .measures import DiscreteAtoms, Mixture, UniformInterval, interval_mass, sample
from .sets import (ConvexPolygon, Disk, HalfPlaneIntersection, OracleSet, PointCloud, RectUnion,
                   alternations_on_line, contains, exact_alternations, hausdorff, point_set_distance)
from .hypotheses import (EMPTY, AuxiliaryUnion, ConvexHull, Grid, Labeling, auxiliary_sequence,
                         auxiliary_union, convex_hull_hypothesis, label_grid, realizability_check)
from .losses import empirical_loss, representative, total_loss_exact, total_loss_mc
from .vcdim import (FiniteFamily, UCBoundParams, entropy_constant, m_uc, sauer_bound_check, shatters,
                    svc_lower_bound, symdiff_family, vc_dimension)

__version__ = "0.1.0"
