"""Geometry and linearised dynamics of relativistic extended objects with edges."""
from .deformation import (DeformationField, deformation_connection, deformation_response, deform_edge_metric,
                          deform_k_AB, deform_k_trace, deform_K_AB, deform_K_trace, edge_context)
from .edge import CoordinateEdge, CurveEdge, edge_jet_at
from .eom import (background_residuals, boundary_linear_apply, bulk_jacobi_apply, endpoint_system,
                  pure_mode_obstruction)
from .estimators import BulkSpectrumEstimator, EndpointModeAnalyzer
from .errors import (ConsistencyError, ConvergenceError, DegeneracyError, DomainError, FrameError,
                     GeometryError, InputError, MetricError, OrientationError, PhysicsError, SignatureError)
from .families import FAMILIES, build
from .fdcheck import VerificationCase, measure_response, perturb_embedding, run_suite
from .helicoid import (background_solve, bulk_spectrum, closed_form_curvatures, endpoint_modes,
                       straight_string_modes)
from .spacetime import from_expressions, minkowski, minkowski_cylindrical
from .worldsheet import NumericEmbedding, jet_at

__version__ = "0.1.0"
