"""isotune: scale-free online learning with executable regret certificates."""
from .iso_core import (
    BoundCertificate,
    IsotuningState,
    MonotoneFn,
    hindsight_bound,
    iso_point,
    iso_solve,
    isotune_step,
    null_trigger,
    run_isotuning,
    seqopt_rate,
    sqrt_bound,
)
from .geometry import Domain, Regularizer
from .learners import (
    ALGOS,
    CERTIFIED,
    LearnerConfig,
    StepOutcome,
    bound_value,
    certificate,
    comparator_terms,
    generic_bound,
    make_learner,
)
from .backend import BACKEND, run
from .harness import (
    ExperimentRecord,
    LossStream,
    best_fixed,
    best_fixed_scalar,
    best_fixed_softbayes,
    evaluate_run,
    generate,
    losses_to_prices,
    run_plateau,
    sample_comparators,
    verify_bounds,
    verify_invariance,
    verify_lemmas,
    verify_oracles,
)

__version__ = "0.1.0"
