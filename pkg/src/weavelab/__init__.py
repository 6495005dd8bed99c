"""Finite lattices, woven subsets, submodular tie-breaking, separation systems
and a high-girth lattice construction, with computational certificates."""
from importlib.resources import files

from ._kernels import BACKEND, set_threads
from .order import (
    CycleError,
    EmptyPosetError,
    InvariantViolation,
    Lattice,
    LatticeWitness,
    Poset,
    SizeLimitError,
    dedekind_macneille,
    dual,
    is_distributive,
    is_lattice,
    poset_from_relations,
    subset_lattice,
)
from .weave import (
    NotWovenError,
    SetFamily,
    UnravelTrace,
    is_woven_family,
    is_woven_in,
    is_woven_poset,
    ravel_step,
    removable_elements,
    unravel_poset,
    unravel_search,
)

__version__ = "0.1.0"


def robertson_path():
    """Path of the bundled Robertson graph (19 vertices, 4-regular, girth 5)."""
    return files(__name__) / "data" / "robertson.edges"


__all__ = [
    "BACKEND",
    "CycleError",
    "EmptyPosetError",
    "InvariantViolation",
    "Lattice",
    "LatticeWitness",
    "NotWovenError",
    "Poset",
    "SetFamily",
    "SizeLimitError",
    "UnravelTrace",
    "dedekind_macneille",
    "dual",
    "is_distributive",
    "is_lattice",
    "is_woven_family",
    "is_woven_in",
    "is_woven_poset",
    "poset_from_relations",
    "ravel_step",
    "removable_elements",
    "robertson_path",
    "set_threads",
    "subset_lattice",
    "unravel_poset",
    "unravel_search",
]
