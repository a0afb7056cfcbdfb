"""Generalized Reedy categories, crossed groups and Eilenberg-Zilber categories on finite data.

Categories are finite and fully tabulated (``FinCategory``); presheaves are
``SetDiagram`` objects on the opposite category.  The main entry points are
re-exported here; the submodules hold the rest.
"""
from .crossed import CrossedGroup, check_compatibility, total_category, validate_crossed
from .diagram import DiagramMap, PreconditionError, SetDiagram, colimit, lan, limit, ran, representable
from .ez import EZStructure, boundary, ez_structure, is_normal_mono, standard_decomposition, validate_ez
from .fincat import FinCategory, FunctorData, StructureError, validate_category
from .groups import FiniteGroup
from .monoidal import CartesianProduct, ProductOracle, pushout_product, quasi_monoidal_check
from .reedy import (GeneralizedReedyStructure, coskeleton, factorize, latching, matching, skeleton,
                    validate_reedy)

__all__ = [
    "CrossedGroup", "check_compatibility", "total_category", "validate_crossed",
    "DiagramMap", "PreconditionError", "SetDiagram", "colimit", "lan", "limit", "ran", "representable",
    "EZStructure", "boundary", "ez_structure", "is_normal_mono", "standard_decomposition", "validate_ez",
    "FinCategory", "FunctorData", "StructureError", "validate_category",
    "FiniteGroup",
    "CartesianProduct", "ProductOracle", "pushout_product", "quasi_monoidal_check",
    "GeneralizedReedyStructure", "coskeleton", "factorize", "latching", "matching", "skeleton",
    "validate_reedy",
]

__version__ = "0.1.0"
