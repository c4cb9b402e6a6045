"""Local structure of filtered finite permutation groups.

A profinite group is modelled by a finite permutation group with a descending
chain of normal subgroups.  The package computes the lattice of locally
normal classes, the centraliser and decomposition lattices, their Stone
spaces, branch certificates for tree truncations, and the quasi-hypercentre
and abelian regular radical, checking every identity it relies on.
"""

from .errors import (HypothesisRejected, InputError, InternalInconsistency, LatticeToolError,
                     PreconditionError, PropertyViolation, ResourceError, TruncationArtefact)
from .permgroup import GroupHandle, Perm
from .filtration import FilteredGroup, LocalClass, canonical_class, ln_lattice
from .lattice import BooleanAlg, FiniteLattice, boolflip_construct, modularity_check
from .centlat import lc_algebra, perp
from .decomp import krs_decompose, ld_lattice
from .stone import stone_space
from .branch import TreeSpec, tree_group
from .radicals import qz_hypercentre, regular_radical

__version__ = "0.1.0"

__all__ = [
    "HypothesisRejected", "InputError", "InternalInconsistency", "LatticeToolError",
    "PreconditionError", "PropertyViolation", "ResourceError", "TruncationArtefact",
    "GroupHandle", "Perm", "FilteredGroup", "LocalClass", "canonical_class", "ln_lattice",
    "BooleanAlg", "FiniteLattice", "boolflip_construct", "modularity_check", "lc_algebra",
    "perp", "krs_decompose", "ld_lattice", "stone_space", "TreeSpec", "tree_group",
    "qz_hypercentre", "regular_radical",
]
