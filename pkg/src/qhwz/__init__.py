"""Numerical quasi-Hamiltonian geometry for SU(n) and the chiral WZNW phase space."""
from .catalog import commutator_preimage, conjugacy_class, double, fused_double, invert
from .fusion import FusionRecipe, fuse, fuse_many, gauge_degeneracy_check, sample_constraint
from .lie import SU2, SU3, GroupSpec, group_from_name
from .loops import ChiralWZNW, LoopGrid, LoopPoint
from .qham import InfeasibleConstraint, QHamSpace, check_axioms

__all__ = [
    "ChiralWZNW", "FusionRecipe", "GroupSpec", "InfeasibleConstraint", "LoopGrid", "LoopPoint",
    "QHamSpace", "SU2", "SU3", "check_axioms", "commutator_preimage", "conjugacy_class", "double",
    "fuse", "fuse_many", "fused_double", "gauge_degeneracy_check", "group_from_name", "invert",
    "sample_constraint",
]
__version__ = "0.1.0"
