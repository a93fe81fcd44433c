"""Three-electron double-dot hybrid qubit: Hubbard model, Schrieffer-Wolff
exchange couplings, three-spin eigensystem and logical-qubit dynamics."""

__version__ = "0.1.0"

from .dynamics import HBAR, evolve_closed_form, evolve_numeric, switching_time
from .fock import FockBasis, FockState, HermitianOperator, assemble_operator, build_basis
from .hubbard import SILICON_PARAMETERS, DotParameters, build_hubbard, exact_spectrum, silicon_parameters
from .spins import (QubitState, analytic_eigensystem, bloch_coordinates, heisenberg_hamiltonian,
                    logical_basis, project_to_logical)
from .sweff import EffectiveCouplings, effective_couplings, extract_couplings_from_sw, numerical_sw

__all__ = [
    "HBAR", "DotParameters", "EffectiveCouplings", "FockBasis", "FockState", "HermitianOperator",
    "QubitState", "SILICON_PARAMETERS", "analytic_eigensystem", "assemble_operator", "bloch_coordinates",
    "build_basis", "build_hubbard", "effective_couplings", "evolve_closed_form", "evolve_numeric",
    "exact_spectrum", "extract_couplings_from_sw", "heisenberg_hamiltonian", "logical_basis",
    "numerical_sw", "project_to_logical", "silicon_parameters", "switching_time",
]
