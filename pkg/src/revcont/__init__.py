"""Optimal selling mechanisms on finite supports, Wasserstein distances, and
numerical checks of revenue continuity under small changes of the buyer's
valuation distribution."""

from .mechanism import (
    DirectMechanismTable,
    Menu,
    MenuEntry,
    best_response,
    bundle_menu,
    check_ic_ir,
    discount,
    is_deterministic,
    menu_size,
    posted_price,
    rescale,
    revenue,
    separate_menu,
    verify_lemma1,
)
from .optimal_revenue import (
    OptimalMechanismResult,
    brev,
    class_rev_check,
    drev_bruteforce,
    myerson_one_good,
    optimal_rev_lp,
    srev,
)
from .transport import TransportPlan, assignment_oracle, wasserstein, wasserstein_gamma
from .valuation import (
    AllocationSpace,
    DiscreteValuation,
    expected_l1,
    gamma_seminorm,
    l1_norm,
    perturb,
    point_mass,
    sample,
    scale,
    uniform,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationSpace",
    "assignment_oracle",
    "best_response",
    "brev",
    "bundle_menu",
    "check_ic_ir",
    "class_rev_check",
    "DirectMechanismTable",
    "discount",
    "DiscreteValuation",
    "drev_bruteforce",
    "expected_l1",
    "gamma_seminorm",
    "is_deterministic",
    "l1_norm",
    "Menu",
    "menu_size",
    "MenuEntry",
    "myerson_one_good",
    "optimal_rev_lp",
    "OptimalMechanismResult",
    "perturb",
    "point_mass",
    "posted_price",
    "rescale",
    "revenue",
    "sample",
    "scale",
    "separate_menu",
    "srev",
    "TransportPlan",
    "uniform",
    "validate",
    "verify_lemma1",
    "wasserstein",
    "wasserstein_gamma",
]
