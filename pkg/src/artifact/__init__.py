"""Normal moving frames and curvature invariants of curves in the Lagrange Grassmannian."""

from .diagram import ReducedDiagram, Superbox, YoungDiagram, reduce_diagram
from .errors import AnalyzabilityError, ArtifactError, InputError, JetOrderError, RankError
from .flag import CurveJet, FlagReport, young_diagram
from .jets import Jet, MatrixJet

__version__ = "0.1.0"

__all__ = [
    "AnalyzabilityError",
    "ArtifactError",
    "CurveJet",
    "FlagReport",
    "InputError",
    "Jet",
    "JetOrderError",
    "MatrixJet",
    "RankError",
    "ReducedDiagram",
    "Superbox",
    "YoungDiagram",
    "reduce_diagram",
    "young_diagram",
]
