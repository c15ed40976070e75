"""Light sheets, lightlike focal sets, caustics and Maxwell sets of world sheets in Minkowski space-time."""

from .errors import (CausticError, DomainError, ExpressionError, FrameError, NotImmersed, NotSpacelike,
                     NotTimelike, NumericalFailure, ValidationError)
from .minkowski import (CausalCharacter, causal_character, conj, is_future_directed, mink_norm, mink_vector,
                        on_lightcone, pseudo_dot, wedge)
from .expression import eval_jet, parse_expression
from .scene import Scene, builtin_scene, load_scene, scene_from_dict
from .worldsheet import WorldSheet, validate_worldsheet
from .lightcone import evolute_points, lightcone_gauss, principal_curvatures, second_fundamental
from .lightsheets import br_caustic, light_sheet_point, lightlike_focal_points, maxwell_set, unfolded_focal
from .distance import (G_eval, criticality_check, focal_mu_roots, legendrian_lift, tangent_lightcone_contact,
                       verify_morse_family)
from .curves import (Singularity, classify_lightsheet_point, classify_slice, detect_conical_momentary_curve,
                     frenet_frame, lightcone_curvatures, sigma_invariant)
from .normal_forms import (family_caustic, family_critical_set, family_front, generating_family, germ_type,
                           normal_form_surface)

__version__ = "0.1.0"
