"""Hubbard-like Hamiltonian of the double dot and its exact spectrum.

Energies are in meV throughout. Orbitals 1 and 2 are the two lowest levels of
the left dot, orbital 3 the lowest level of the right dot; there is no direct
1-2 tunneling.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _linalg
from .errors import ConfigError, SectorError
from .fock import (DOWN, UP, FockBasis, HermitianOperator, adjoint, build_basis, c, cdag,
                   mode_index, number, operator_matrix)

PAIRS = ((1, 3), (2, 3), (1, 2))


@dataclass(frozen=True)
class DotParameters:
    eps1: float = 0.0
    eps2: float = 0.0
    eps3: float = 0.0
    t13: float = 0.0
    t23: float = 0.0
    U1: float = 0.0
    U2: float = 0.0
    U3: float = 0.0
    U12: float = 0.0
    U13: float = 0.0
    U23: float = 0.0
    Je12: float = 0.0
    Je13: float = 0.0
    Je23: float = 0.0
    Jp12: float = 0.0
    Jp13: float = 0.0
    Jp23: float = 0.0
    Jt12: float = 0.0
    Jt13: float = 0.0
    Jt23: float = 0.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ConfigError(f"{f.name} must be a real number, got {v!r}")
            if not np.isfinite(v):
                raise ConfigError(f"{f.name} must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        negative = [n for n in ("U1", "U2", "U3", "U12", "U13", "U23") if getattr(self, n) < 0]
        if negative:
            raise ConfigError(f"Coulomb energies must be non-negative: {', '.join(negative)}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, data: dict) -> "DotParameters":
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        return cls(**data)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "DotParameters":
        unknown = sorted(set(changes) - set(self.field_names()))
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        return dataclasses.replace(self, **changes)

    def swap_left_levels(self) -> "DotParameters":
        """Relabel orbitals 1 <-> 2."""
        d = self.as_dict()
        for a, b in (("eps1", "eps2"), ("t13", "t23"), ("U1", "U2"), ("U13", "U23"),
                     ("Je13", "Je23"), ("Jp13", "Jp23"), ("Jt13", "Jt23")):
            d[a], d[b] = d[b], d[a]
        return DotParameters(**d)


# Silicon double-dot parameter set used for the stationary sweeps; tunnelings
# are the sweep axes and pair-hopping is not specified, hence zero.
SILICON_PARAMETERS = DotParameters(
    eps1=0.0, eps2=0.3, eps3=0.35,
    U1=9.8, U2=9.8, U3=11.0, U12=9.8, U13=1.8, U23=1.8,
    Jt12=0.3, Jt13=0.3, Jt23=0.3,
    Je12=0.5, Je13=0.7, Je23=0.7,
)


def silicon_parameters(t13: float = 1.0, t23: float = 1.0) -> DotParameters:
    return SILICON_PARAMETERS.replace(t13=t13, t23=t23)


@dataclass
class HierarchyReport:
    ratios: dict[str, float]
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def check_hierarchy(p: DotParameters, much_less: float = 0.25,
                    similar: tuple[float, float] = (0.5, 2.0)) -> HierarchyReport:
    """Check |eps1 - eps2| << U13 ~ U23 << U1, U2, U3, U12.

    "<<" means ratio <= ``much_less``; "~" means ratio inside ``similar``.
    Violations are reported as warnings, never raised.
    """

    def ratio(a, b):
        return a / b if b > 0 else float("inf") if a > 0 else 0.0

    inter = max(p.U13, p.U23)
    intra = min(p.U1, p.U2, p.U3, p.U12)
    r = {
        "deps12/U_inter": ratio(abs(p.eps1 - p.eps2), min(p.U13, p.U23)),
        "U13/U23": ratio(p.U13, p.U23),
        "U_inter/U_intra": ratio(inter, intra),
    }
    rep = HierarchyReport(r)
    if r["deps12/U_inter"] > much_less:
        rep.warnings.append(f"|eps1-eps2|/min(U13,U23) = {r['deps12/U_inter']:.3g} exceeds {much_less}")
    if not similar[0] <= r["U13/U23"] <= similar[1]:
        rep.warnings.append(f"U13/U23 = {r['U13/U23']:.3g} outside {list(similar)}")
    if r["U_inter/U_intra"] > much_less:
        rep.warnings.append(f"max(U13,U23)/min(U1,U2,U3,U12) = {r['U_inter/U_intra']:.3g} exceeds {much_less}")
    return rep


def _m(k, s):
    return mode_index(k, s)


def _field_terms(jt_orbitals: str) -> dict[str, list]:
    """Operator strings multiplying each DotParameters field."""
    if jt_orbitals not in ("bond", "all"):
        raise ValueError("jt_orbitals must be 'bond' or 'all'")
    spins = (UP, DOWN)
    flip = {UP: DOWN, DOWN: UP}
    terms: dict[str, list] = {}
    for k in (1, 2, 3):
        terms[f"eps{k}"] = [(1.0, number(_m(k, s))) for s in spins]
        terms[f"U{k}"] = [(1.0, number(_m(k, UP)) + number(_m(k, DOWN)))]
    for i, j in ((1, 3), (2, 3)):
        hops = []
        for s in spins:
            hop = cdag(_m(i, s)) + c(_m(j, s))
            hops += [(1.0, hop), (1.0, adjoint(hop))]
        terms[f"t{i}{j}"] = hops
    for i, j in PAIRS:
        terms[f"U{i}{j}"] = [(1.0, number(_m(i, s)) + number(_m(j, s2))) for s in spins for s2 in spins]
        flipflop = cdag(_m(i, DOWN)) + cdag(_m(j, UP)) + c(_m(j, DOWN)) + c(_m(i, UP))
        terms[f"Je{i}{j}"] = [(-1.0, number(_m(i, s)) + number(_m(j, s))) for s in spins] + [
            (-1.0, flipflop), (-1.0, adjoint(flipflop))]
        pair = cdag(_m(j, UP)) + cdag(_m(j, DOWN)) + c(_m(i, UP)) + c(_m(i, DOWN))
        terms[f"Jp{i}{j}"] = [(-1.0, pair), (-1.0, adjoint(pair))]
        # density on spin s modulates hopping of the opposite spin; "bond"
        # restricts the density to the two orbitals of the bond
        orbitals = (i, j) if jt_orbitals == "bond" else (1, 2, 3)
        jt = []
        for k in orbitals:
            for s in spins:
                x = number(_m(k, s)) + cdag(_m(i, flip[s])) + c(_m(j, flip[s]))
                jt += [(-1.0, x), (-1.0, adjoint(x))]
        terms[f"Jt{i}{j}"] = jt
    return terms


@lru_cache(maxsize=32)
def _templates(basis: FockBasis, jt_orbitals: str) -> dict[str, np.ndarray]:
    out = {}
    for name, terms in _field_terms(jt_orbitals).items():
        m = operator_matrix(terms, basis)
        m.setflags(write=False)
        out[name] = m
    return out


def hubbard_templates(basis: FockBasis | None = None, jt_orbitals: str = "bond") -> dict[str, np.ndarray]:
    """Matrix multiplying each parameter: H = sum_f params.f * templates[f]."""
    basis = basis or build_basis(3)
    if not basis.number_conserving:
        raise SectorError("Hubbard Hamiltonian needs a fixed-particle-number basis")
    return _templates(basis, jt_orbitals)


def build_hubbard(params: DotParameters, basis: FockBasis | None = None,
                  jt_orbitals: str = "bond") -> HermitianOperator:
    """Full Hamiltonian: level energies, 1-3 and 2-3 tunneling, Coulomb terms and
    the exchange / pair-hopping / occupation-modulated hopping corrections.

    ``jt_orbitals="bond"`` takes the occupation-modulated hopping density from
    the two orbitals of the bond only. ``"all"`` sums the density over every
    orbital; it breaks spin-rotation symmetry and exists for comparison only.
    """
    basis = basis or build_basis(3)
    tpl = hubbard_templates(basis, jt_orbitals)
    h = np.zeros((len(basis), len(basis)), dtype=complex)
    for name, value in params.as_dict().items():
        if value:
            h += value * tpl[name]
    return HermitianOperator(h, basis)


@lru_cache(maxsize=16)
def _spin_matrices(particle_number: int) -> tuple[FockBasis, np.ndarray, np.ndarray, dict]:
    basis = build_basis(particle_number)
    sz = np.zeros((len(basis), len(basis)), dtype=complex)
    sp = np.zeros_like(sz)
    per_orbital = {}
    for k in (1, 2, 3):
        szk = 0.5 * (operator_matrix([(1.0, number(_m(k, UP)))], basis)
                     - operator_matrix([(1.0, number(_m(k, DOWN)))], basis))
        spk = operator_matrix([(1.0, cdag(_m(k, UP)) + c(_m(k, DOWN)))], basis)
        per_orbital[k] = (szk, spk)
        sz += szk
        sp += spk
    s2 = sp.conj().T @ sp + sz @ sz + sz
    return basis, s2, sz, per_orbital


def _restrict(full_basis: FockBasis, m: np.ndarray, basis: FockBasis) -> np.ndarray:
    idx = [full_basis.index_of(s) for s in basis.states]
    if len(idx) != len(full_basis):
        mask = np.ones(len(full_basis), bool)
        mask[idx] = False
        if np.abs(m[np.ix_(mask, idx)]).max(initial=0.0) > 1e-12:
            raise SectorError("operator does not map the basis into itself")
    return m[np.ix_(idx, idx)]


def _particle_number(basis: FockBasis) -> int:
    if not basis.number_conserving:
        raise SectorError("spin operators need a fixed-particle-number basis")
    return bin(basis.states[0]).count("1")


def spin_operators(basis: FockBasis) -> tuple[HermitianOperator, HermitianOperator]:
    """Total S^2 and Sz built from S_k = 1/2 sum c+_{k s} sigma_{s s'} c_{k s'}."""
    full, s2, sz, _ = _spin_matrices(_particle_number(basis))
    return (HermitianOperator(_restrict(full, s2, basis), basis),
            HermitianOperator(_restrict(full, sz, basis), basis))


def orbital_spin_dot(i: int, j: int, basis: FockBasis) -> HermitianOperator:
    """S_i . S_j between the spins of orbitals i and j."""
    full, _, _, per = _spin_matrices(_particle_number(basis))
    (zi, pi), (zj, pj) = per[i], per[j]
    m = zi @ zj + 0.5 * (pi @ pj.conj().T + pi.conj().T @ pj)
    return HermitianOperator(_restrict(full, m, basis), basis)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    spins: np.ndarray
    sz: np.ndarray
    basis: FockBasis | None = None
    particle_number: int | None = None

    def select(self, spin: float | None = None, sz: float | None = None) -> np.ndarray:
        """Indices of eigenpairs with the given total spin and/or Sz."""
        mask = np.ones(len(self.eigenvalues), bool)
        if spin is not None:
            mask &= np.isclose(self.spins, spin)
        if sz is not None:
            mask &= np.isclose(self.sz, sz)
        return np.flatnonzero(mask)


def exact_spectrum(h: HermitianOperator, spin_ops: tuple | None = None) -> SpectrumResult:
    """Full eigendecomposition with (S, Sz) tags.

    Degenerate levels are resolved by diagonalizing S^2 and then Sz inside each
    block. ``spin_ops`` defaults to the Fock-space operators of ``h.basis``.
    """
    if spin_ops is None:
        if h.basis is None:
            raise ValueError("operator has no Fock basis; pass spin_ops=(S2, Sz)")
        spin_ops = spin_operators(h.basis)
    s2, sz = (np.asarray(getattr(o, "matrix", o)) for o in spin_ops)
    w, v, spins, szs = _linalg.tagged_eigh(h.matrix, s2, sz)
    n = _particle_number(h.basis) if h.basis is not None else None
    return SpectrumResult(w, v, spins, szs, h.basis, n)


def qubit_levels(params: DotParameters) -> np.ndarray:
    """Ascending exact energies of the S = 1/2, Sz = -1/2 levels of the three-electron sector."""
    basis = build_basis(3, -0.5)
    res = exact_spectrum(build_hubbard(params, basis))
    return res.eigenvalues[res.select(spin=0.5)]


def exact_qubit_gap(params: DotParameters) -> float:
    lv = qubit_levels(params)
    return float(lv[1] - lv[0])
