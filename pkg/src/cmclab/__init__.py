"""cmclab: constant mean curvature surfaces, their minimal cousins in S^3 and
conjugate variation fields, on exact model surfaces."""

from .errors import (CMCLabError, IntegrabilityError, IntegrationFailure, InvalidCurve, InvalidInput,
                     InvalidPath, SingularImmersion, UmbilicObstruction)
from .quatgeo import I, J, K, ONE, Quaternion, as_unit, conjugate_by, quat_mul, rotation_angle, rotation_of
from .patch import (GridSpec, Patch, PathOnPatch, build_patch, gauss_formula_residual, hopf_cr_residual,
                    hopf_function, jacobi_residual, make_path, mean_curvature_residual, read_patch,
                    to_curvature_coords, write_patch)
from .delaunay import (DelaunayProfile, UnduloidConfig, boundary_curvature_check, symmetry_curves,
                       unduloid_profile)
from .cousin import CousinPatch, cousin_identities, integrate_cousin, integrate_cousin_inverse
from .transport import (Holonomy, PoleSet, TransportResult, classify, crosscheck_cousin_transport, holonomy,
                        pole_solutions, rotation_map_harmonicity, transport)
from .conjvar import (Heights, VariationField, conjugate_field, conjugate_variation,
                      conjugate_variation_minimal, heights, pole_relation_residual,
                      symmetry_evolution_residual, t_map)

__version__ = "0.1.0"

__all__ = [
    "CMCLabError",
    "IntegrabilityError",
    "IntegrationFailure",
    "InvalidCurve",
    "InvalidInput",
    "InvalidPath",
    "SingularImmersion",
    "UmbilicObstruction",
    "I",
    "J",
    "K",
    "ONE",
    "Quaternion",
    "as_unit",
    "conjugate_by",
    "quat_mul",
    "rotation_angle",
    "rotation_of",
    "GridSpec",
    "Patch",
    "PathOnPatch",
    "build_patch",
    "gauss_formula_residual",
    "hopf_cr_residual",
    "hopf_function",
    "jacobi_residual",
    "make_path",
    "mean_curvature_residual",
    "read_patch",
    "to_curvature_coords",
    "write_patch",
    "DelaunayProfile",
    "UnduloidConfig",
    "boundary_curvature_check",
    "symmetry_curves",
    "unduloid_profile",
    "CousinPatch",
    "cousin_identities",
    "integrate_cousin",
    "integrate_cousin_inverse",
    "Holonomy",
    "PoleSet",
    "TransportResult",
    "classify",
    "crosscheck_cousin_transport",
    "holonomy",
    "pole_solutions",
    "rotation_map_harmonicity",
    "transport",
    "Heights",
    "VariationField",
    "conjugate_field",
    "conjugate_variation",
    "conjugate_variation_minimal",
    "heights",
    "pole_relation_residual",
    "symmetry_evolution_residual",
    "t_map",
]
