from tfmlab.checkers.manipulation import (
    Manipulation,
    ManipulationKind,
    Property,
    Verdict,
    ViolationWitness,
    replay_witness,
    witness_replays,
)
from tfmlab.checkers.properties import (
    check_anonymity,
    check_ctpa,
    check_dsic,
    check_general_oca_form,
    check_low_value_feasibility,
    check_mmic,
    check_oca,
    check_oca_joint_form,
    check_payment_burn_bound,
    check_scale_invariance,
    check_scp,
    check_single_bidder_form,
    check_two_bidders_condition,
)

__all__ = [
    "Manipulation",
    "ManipulationKind",
    "Property",
    "Verdict",
    "ViolationWitness",
    "check_anonymity",
    "check_ctpa",
    "check_dsic",
    "check_general_oca_form",
    "check_low_value_feasibility",
    "check_mmic",
    "check_oca",
    "check_oca_joint_form",
    "check_payment_burn_bound",
    "check_scale_invariance",
    "check_scp",
    "check_single_bidder_form",
    "check_two_bidders_condition",
    "replay_witness",
    "witness_replays",
]
