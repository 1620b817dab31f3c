"""Group-equivariant non-expansive operators on pixel grids.

Persistent homology of grid functions, the pseudo-metric lattice on
functions/groups/operators, the parametric IENEO family, and the operator
selection/sampling pipeline for metric learning and kernel export.
"""

__version__ = "0.1.0"

from .core import (
    Dendrogram,
    DiagramPoint,
    DistanceMatrix,
    GridFunction,
    GridIsometry,
    IeneoParams,
    Kernel,
    LabeledDataset,
    OperatorSet,
    PersistenceDiagram,
    apply_isometry,
    validate,
)
from .diagram_metric import bottleneck, bottleneck_oracle, d_star
from .operators import apply, compose, convex_combine, make_kernel, sample_params
from .persistence import (
    build_filtration,
    persistence_degree0,
    persistence_degree1,
    persistence_diagram,
)

__all__ = [
    "Dendrogram",
    "DiagramPoint",
    "DistanceMatrix",
    "GridFunction",
    "GridIsometry",
    "IeneoParams",
    "Kernel",
    "LabeledDataset",
    "OperatorSet",
    "PersistenceDiagram",
    "apply",
    "apply_isometry",
    "bottleneck",
    "bottleneck_oracle",
    "build_filtration",
    "compose",
    "convex_combine",
    "d_star",
    "make_kernel",
    "persistence_degree0",
    "persistence_degree1",
    "persistence_diagram",
    "sample_params",
    "validate",
]
