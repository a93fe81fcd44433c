"""Schrieffer-Wolff reduction of the Hubbard model to an exchange model.

The low-energy block P is the one-electron-per-orbital configuration (1,1,1).
Virtual double occupancies are grouped by orbital occupancy (i, j, k); each
class Q_c enters the second-order effective Hamiltonian as

    H_eff = PHP - sum_c PHQ_c HP / (E_c - E_(111)),

with E_c the bare configuration energies.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import spins
from .errors import NotHeisenbergError, PerturbativeValidityWarning, SingularConfigurationError
from .fock import FockState, HermitianOperator, build_basis
from .hubbard import DotParameters, build_hubbard

REFERENCE = (1, 1, 1)
RIGHT_DOUBLE = ((0, 1, 2), (1, 0, 2))  # J1, J2 channels
LEFT_DOUBLE = ((2, 0, 1), (0, 2, 1))  # J' channel
HIGH_ENERGY = ((2, 1, 0), (1, 2, 0))  # ~U1 above the reference, always dropped
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ConfigurationOccupancy:
    i: int
    j: int
    k: int

    def __post_init__(self):
        occ = (self.i, self.j, self.k)
        if any(not isinstance(n, (int, np.integer)) or not 0 <= n <= 2 for n in occ) or sum(occ) != 3:
            raise ValueError(f"invalid occupancy {occ}: need 0 <= n <= 2 per orbital and 3 electrons")

    @classmethod
    def all(cls) -> list["ConfigurationOccupancy"]:
        return [cls(*o) for o in itertools.product(range(3), repeat=3) if sum(o) == 3]

    def astuple(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)


def _occ(occ) -> tuple[int, int, int]:
    if isinstance(occ, ConfigurationOccupancy):
        return occ.astuple()
    return ConfigurationOccupancy(*occ).astuple()


def config_energy(occ, p: DotParameters) -> float:
    """Bare energy of a configuration with (i, j, k) electrons in levels 1, 2, 3."""
    i, j, k = _occ(occ)
    return (i * p.eps1 + j * p.eps2 + k * p.eps3
            + i * j * p.U12 + i * k * p.U13 + k * j * p.U23
            + (i == 2) * p.U1 + (j == 2) * p.U2 + (k == 2) * p.U3)


def excitation_energy(occ, p: DotParameters) -> float:
    return config_energy(occ, p) - config_energy(REFERENCE, p)


@dataclass(frozen=True)
class EffectiveCouplings:
    """Exchange constants (meV): J1 for spins 1-3, J2 for 2-3, Jprime for 1-2."""

    J1: float
    J2: float
    Jprime: float
    denominators: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("J1", "J2", "Jprime"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)
        for occ, d in self.denominators.items():
            if d == 0:
                raise SingularConfigurationError(occ)

    def as_dict(self) -> dict:
        return {"J1": self.J1, "J2": self.J2, "Jprime": self.Jprime,
                "denominators": {"".join(map(str, k)): v for k, v in self.denominators.items()}}

    def scaled(self, s: float) -> "EffectiveCouplings":
        return EffectiveCouplings(s * self.J1, s * self.J2, s * self.Jprime)


def denominators(p: DotParameters, classes=RIGHT_DOUBLE + LEFT_DOUBLE) -> dict:
    return {c: excitation_energy(c, p) for c in classes}


def _check_denominators(den: dict, warn: bool) -> None:
    for occ, d in den.items():
        if abs(d) < SINGULAR_TOL:
            raise SingularConfigurationError(occ, f"E{occ} - E(1,1,1) vanishes")
    if warn:
        neg = {o: d for o, d in den.items() if d < 0}
        if neg:
            warnings.warn("negative Schrieffer-Wolff denominator(s) "
                          + ", ".join(f"E{o}-E(111)={d:.4g} meV" for o, d in neg.items())
                          + "; perturbative validity is doubtful", PerturbativeValidityWarning, stacklevel=3)


def effective_couplings(p: DotParameters, superexchange_prefactor: float = 4.0,
                        warn: bool = True) -> EffectiveCouplings:
    """Closed-form exchange couplings.

    J1 = f (t13 - Jt13)^2 / dE(012) - 2 Je13
    J2 = f (t23 - Jt23)^2 / dE(102) - 2 Je23
    J' = f Jt12^2 (1/dE(201) + 1/dE(021)) - 2 Je12

    with dE(c) = E_c - E_(111). The default f = 4 is the customary closed form;
    the second-order projector reduction (``numerical_sw``) corresponds to
    f = 2, since each virtual configuration is reached by a single hop.
    """
    den = denominators(p)
    _check_denominators(den, warn)
    f = superexchange_prefactor
    j1 = f * (p.t13 - p.Jt13) ** 2 / den[(0, 1, 2)] - 2 * p.Je13
    j2 = f * (p.t23 - p.Jt23) ** 2 / den[(1, 0, 2)] - 2 * p.Je23
    jp = f * p.Jt12 ** 2 * (1 / den[(2, 0, 1)] + 1 / den[(0, 2, 1)]) - 2 * p.Je12
    return EffectiveCouplings(j1, j2, jp, den)


def scale_hopping(p: DotParameters, s: float) -> DotParameters:
    """Multiply every P-Q coupling (t13, t23 and all Jt) by ``s``."""
    return p.replace(t13=s * p.t13, t23=s * p.t23,
                     Jt12=s * p.Jt12, Jt13=s * p.Jt13, Jt23=s * p.Jt23)


def _spin_index(bits: int) -> int:
    st = FockState(bits)
    # spin of the single electron in each orbital: 0 up, 1 down
    s = [0 if st.occupation(2 * k) else 1 for k in range(3)]
    return 4 * s[0] + 2 * s[1] + s[2]


def numerical_sw(p: DotParameters, include_left: bool = True, classes=None,
                 warn: bool = True) -> HermitianOperator:
    """Second-order effective Hamiltonian on the eight (1,1,1) states.

    Built from the exact three-electron Hubbard matrix. Retained classes are
    (0,1,2) and (1,0,2), plus (2,0,1) and (0,2,1) when ``include_left``.
    ``classes`` overrides the retained set (e.g. to add the high-energy
    (2,1,0)/(1,2,0) classes when comparing against exact diagonalization).

    The result is indexed like the spin product basis (see ``spins``); for
    (1,1,1) states the Fock and spin orderings carry no relative signs.
    """
    if classes is None:
        classes = RIGHT_DOUBLE + (LEFT_DOUBLE if include_left else ())
    classes = tuple(_occ(c) for c in classes)
    if REFERENCE in classes:
        raise ValueError("the reference configuration cannot be a virtual class")
    basis = build_basis(3)
    h = build_hubbard(p, basis).matrix
    occ = [FockState(s).orbital_occupancy() for s in basis.states]
    p_idx = [n for n, o in enumerate(occ) if o == REFERENCE]
    if not p_idx:
        raise SingularConfigurationError(REFERENCE, "empty low-energy block")
    p_idx.sort(key=lambda n: _spin_index(basis.states[n]))
    den = denominators(p, classes)
    _check_denominators(den, warn)
    heff = h[np.ix_(p_idx, p_idx)].copy()
    for c in classes:
        q_idx = [n for n, o in enumerate(occ) if o == c]
        v = h[np.ix_(p_idx, q_idx)]
        heff -= v @ v.conj().T / den[c]
    labels = tuple(str(FockState(basis.states[n])) for n in p_idx)
    return HermitianOperator(heff, labels=labels)


def traceless(m: np.ndarray) -> np.ndarray:
    return m - np.trace(m) / m.shape[0] * np.eye(m.shape[0])


def sw_spectral_deviation(p: DotParameters, superexchange_prefactor: float = 4.0,
                          include_left: bool = True) -> float:
    """max |eig(numerical_sw) - eig(exchange model)| after removing both traces."""
    num = numerical_sw(p, include_left=include_left, warn=False).matrix
    c = effective_couplings(p, superexchange_prefactor, warn=False)
    if not include_left:
        c = EffectiveCouplings(c.J1, c.J2, -2 * p.Je12)
    ana = spins.heisenberg_hamiltonian(c).matrix
    return float(np.abs(np.linalg.eigvalsh(traceless(num)) - np.linalg.eigvalsh(traceless(ana))).max())


@dataclass
class CouplingFit:
    couplings: EffectiveCouplings
    offset: float
    residual: float
    is_heisenberg: bool


def extract_couplings_from_sw(h8, tol: float = 1e-9, strict: bool = False) -> CouplingFit:
    """Least-squares fit of an 8x8 matrix onto {S1.S3, S2.S3, S1.S2, 1}.

    ``residual`` is the Frobenius norm of the misfit. Matrices that are not of
    exchange form (residual above ``tol * max(1, |H|)``) are flagged, or raise
    NotHeisenbergError when ``strict``.
    """
    m = np.asarray(getattr(h8, "matrix", h8), dtype=complex)
    if m.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got {m.shape}")
    cols = [spins.pair_exchange(1, 3), spins.pair_exchange(2, 3), spins.pair_exchange(1, 2), np.eye(8)]
    a = np.array([x.ravel() for x in cols]).T
    a_ri = np.vstack([a.real, a.imag])
    b_ri = np.concatenate([m.ravel().real, m.ravel().imag])
    x, *_ = np.linalg.lstsq(a_ri, b_ri, rcond=None)
    residual = float(np.linalg.norm(a_ri @ x - b_ri))
    ok = residual <= tol * max(1.0, float(np.linalg.norm(m)))
    if strict and not ok:
        raise NotHeisenbergError(f"matrix is not of exchange form (residual {residual:.3e})")
    return CouplingFit(EffectiveCouplings(x[0], x[1], x[2]), float(x[3]), residual, ok)
