"""Random-unitary channel decompositions, correctability checks and recovery."""

from .channels import KrausSet, apply, channels_equal, completeness_defect, unitary_relate
from .correctability import check_correctability, convert
from .recovery import bitflip_code, build_recovery, recover_end_to_end
from .ru import hs_basis, hs_expand, maximal_mixing, ru_kraus_set, transformation_T
from .state_ru import decompose

__all__ = [
    "KrausSet",
    "apply",
    "bitflip_code",
    "build_recovery",
    "channels_equal",
    "check_correctability",
    "completeness_defect",
    "convert",
    "decompose",
    "hs_basis",
    "hs_expand",
    "maximal_mixing",
    "recover_end_to_end",
    "ru_kraus_set",
    "transformation_T",
    "unitary_relate",
]

__version__ = "0.1.0"
