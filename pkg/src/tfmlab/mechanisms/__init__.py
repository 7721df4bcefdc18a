from tfmlab.mechanisms.base import Mechanism, RuleMechanism
from tfmlab.mechanisms.catalog import (
    CatalogMechanism,
    Family,
    MechanismSpec,
    catalog,
    enumerate_family,
    make_mechanism,
)
from tfmlab.mechanisms.curves import CURVE_MENU, CurveKind, PaymentCurve
from tfmlab.mechanisms.tabulated import TabulatedMechanism

__all__ = [
    "CURVE_MENU",
    "CatalogMechanism",
    "CurveKind",
    "Family",
    "Mechanism",
    "MechanismSpec",
    "PaymentCurve",
    "RuleMechanism",
    "TabulatedMechanism",
    "catalog",
    "enumerate_family",
    "make_mechanism",
]
