"""
Services package for the synthesis workflow.

This package contains the modules that implement the numerical core: model
discretization, the learner SDP, the global verifier, the synthesis loop and
closed-loop simulation. File handling lives in storage, command wiring in handlers.
"""

# Import key functions for easier access
from .dynamics_service import (
    linearize,
    step,
    estimate_lipschitz,
    resolve_lipschitz
)

from .learner_service import (
    add_sample,
    assemble_learner_sdp,
    learn,
    extract_controller,
    prune_interior_samples,
    roa_for_fixed_gain
)

from .verifier_service import (
    objective,
    global_minimize,
    lipschitz_minimize,
    build_verifier_problem,
    verifier_service
)

from .cegis_service import cegis_service, default_initial_sample, check_separation

from .simulation_service import simulate, metrics

from .setup_service import ProblemSetup, build_setup, build_scenario
