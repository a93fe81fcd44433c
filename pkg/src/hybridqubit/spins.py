"""Three-spin exchange model, logical qubit basis and Bloch-sphere mapping.

Product states are ordered uuu, uud, udu, udd, duu, dud, ddu, ddd (spin 1 is
the most significant), i.e. index = 4*s1 + 2*s2 + s3 with 0 = up, 1 = down.
Spins 1 and 2 sit in the left dot, spin 3 in the right dot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from . import _linalg
from .errors import NormalizationError, NumericalError
from .fock import HermitianOperator

if TYPE_CHECKING:
    from .sweff import EffectiveCouplings

SPIN_LABELS = ("uuu", "uud", "udu", "udd", "duu", "dud", "ddu", "ddd")
NORM_TOL = 1e-12
RESIDUAL_TOL = 1e-10

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2


def product_state(label: str) -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    v[SPIN_LABELS.index(label)] = 1.0
    return v


def site_operator(k: int, s: np.ndarray) -> np.ndarray:
    ops = [np.eye(2, dtype=complex)] * 3
    ops[k - 1] = s
    return np.kron(np.kron(ops[0], ops[1]), ops[2])


@lru_cache(maxsize=None)
def _pair(i: int, j: int) -> np.ndarray:
    m = sum(site_operator(i, s) @ site_operator(j, s) for s in (_SX, _SY, _SZ))
    m.setflags(write=False)
    return m


def pair_exchange(i: int, j: int) -> np.ndarray:
    """Matrix of S_i . S_j on the product basis."""
    return _pair(*sorted((i, j)))


@lru_cache(maxsize=None)
def _total():
    s = [sum(site_operator(k, op) for k in (1, 2, 3)) for op in (_SX, _SY, _SZ)]
    s2 = s[0] @ s[0] + s[1] @ s[1] + s[2] @ s[2]
    for m in (s2, s[2]):
        m.setflags(write=False)
    return s2, s[2]


def total_spin_operators() -> tuple[np.ndarray, np.ndarray]:
    return _total()


def heisenberg_hamiltonian(c: "EffectiveCouplings") -> HermitianOperator:
    """J1 S1.S3 + J2 S2.S3 + J' S1.S2."""
    m = c.J1 * pair_exchange(1, 3) + c.J2 * pair_exchange(2, 3) + c.Jprime * pair_exchange(1, 2)
    return HermitianOperator(m, labels=SPIN_LABELS)


def logical_basis() -> tuple[np.ndarray, np.ndarray]:
    """|0> = |S>_12 |d>_3 and |1> = sqrt(1/3)|T0>_12 |d>_3 - sqrt(2/3)|T->_12 |u>_3."""
    e = product_state
    singlet_d = (e("udd") - e("dud")) / math.sqrt(2)
    t0_d = (e("udd") + e("dud")) / math.sqrt(2)
    tm_u = e("ddu")
    return singlet_d, math.sqrt(1 / 3) * t0_d - math.sqrt(2 / 3) * tm_u


@dataclass(frozen=True, eq=False)
class LogicalHamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"logical Hamiltonian must be 2x2, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-12 * max(1.0, np.abs(m).max()):
            raise NumericalError("logical Hamiltonian is not Hermitian")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def h00(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def h11(self) -> float:
        return float(self.matrix[1, 1].real)

    @property
    def h01(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def detuning(self) -> float:
        return self.h00 - self.h11

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return _linalg.eigh(self.matrix)


def logical_matrix(J1: float, J2: float, Jprime: float) -> np.ndarray:
    off = -math.sqrt(3) / 4 * (J1 - J2)
    return np.array([[-0.75 * Jprime, off],
                     [off, 0.25 * Jprime - 0.5 * (J1 + J2)]], dtype=complex)


def project_to_logical(c: "EffectiveCouplings") -> LogicalHamiltonian:
    """2x2 Hamiltonian on {|0>, |1>}, cross-checked against sandwiching the 8x8 model."""
    closed = logical_matrix(c.J1, c.J2, c.Jprime)
    basis = np.column_stack(logical_basis())
    direct = basis.conj().T @ heisenberg_hamiltonian(c).matrix @ basis
    scale = max(1.0, abs(c.J1), abs(c.J2), abs(c.Jprime))
    if np.abs(closed - direct).max() > 1e-12 * scale:
        raise NumericalError("closed-form logical matrix disagrees with direct projection")
    return LogicalHamiltonian(closed)


QUADRUPLET_LABELS = ("Q+3/2", "Q+1/2", "Q-1/2", "Q-3/2")
DOUBLET_LABELS = ("D+1/2", "D-1/2", "D'+1/2", "D'-1/2")


@dataclass
class AnalyticEigensystem:
    """Eigenpairs of the three-spin model.

    ``D`` labels the high-energy doublet and ``D'`` the low-energy one.
    ``provenance`` records, per doublet vector, whether the closed-form
    amplitudes passed the eigen-residual check ("closed-form") or a numerical
    eigenvector was substituted ("numerical").
    """

    quadruplet_energy: float
    doublet_high: float
    doublet_low: float
    omega: float
    vectors: dict[str, np.ndarray]
    provenance: dict[str, str] = field(default_factory=dict)
    degenerate: bool = False

    def energy(self, label: str) -> float:
        if label.startswith("Q"):
            return self.quadruplet_energy
        return self.doublet_low if label.startswith("D'") else self.doublet_high

    def pairs(self):
        for label, v in self.vectors.items():
            yield label, self.energy(label), v


def omega(c: "EffectiveCouplings") -> float:
    J1, J2, Jp = c.J1, c.J2, c.Jprime
    # J'^2 + J2^2 + J1^2 - J'J2 - J1J2 - J'J1 as a sum of squares, exactly 0 when all equal
    return math.sqrt(((Jp - J2) ** 2 + (J2 - J1) ** 2 + (J1 - Jp) ** 2) / 2)


def doublet_energies(c: "EffectiveCouplings") -> tuple[float, float]:
    """(high, low) doublet energies (-(J1+J2+J') +/- 2 Omega) / 4."""
    s, w = c.J1 + c.J2 + c.Jprime, omega(c)
    return (-s + 2 * w) / 4, (-s - 2 * w) / 4


def doublet_energies_literal(c: "EffectiveCouplings") -> tuple[float, float]:
    """Doublet energies in the alternative form -(J1+J2+J' -/+ Omega)/2.

    Kept for comparison only: these are not eigenvalues of the exchange model
    (e.g. 0 and -J2 instead of J2/4 and -3J2/4 when only J2 is nonzero).
    """
    s, w = c.J1 + c.J2 + c.Jprime, omega(c)
    return -(s - w) / 2, -(s + w) / 2


def _quadruplet() -> dict[str, np.ndarray]:
    e = product_state
    r3 = math.sqrt(3)
    return {
        "Q+3/2": e("uuu"),
        "Q+1/2": (e("uud") + e("udu") + e("duu")) / r3,
        "Q-1/2": (e("ddu") + e("dud") + e("udd")) / r3,
        "Q-3/2": e("ddd"),
    }


def _doublet_patterns(J1: float, J2: float, Jp: float, w: float) -> dict[str, np.ndarray]:
    e = product_state
    return {
        "D+1/2": (J2 - Jp - w) * e("uud") + (J1 - J2 + w) * e("udu") + (Jp - J1) * e("duu"),
        "D-1/2": (J2 - Jp + w) * e("udd") + (Jp - J1 - w) * e("dud") + (J1 - J2) * e("ddu"),
        "D'+1/2": (J2 - Jp + w) * e("uud") + (J1 - J2 - w) * e("udu") + (Jp - J1) * e("duu"),
        "D'-1/2": (J2 - J1 - w) * e("udd") + (Jp - J1 + w) * e("dud") + (J1 - J2) * e("ddu"),
    }


def _residual(h: np.ndarray, v: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(h @ v - energy * v))


def analytic_eigensystem(c: "EffectiveCouplings", degeneracy_tol: float = 1e-9) -> AnalyticEigensystem:
    h = heisenberg_hamiltonian(c).matrix
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    w = omega(c)
    high, low = doublet_energies(c)
    e_q = (c.J1 + c.J2 + c.Jprime) / 4
    vectors = dict(_quadruplet())
    provenance = {k: "closed-form" for k in vectors}
    degenerate = w <= degeneracy_tol * scale

    numeric = None
    patterns = {} if degenerate else _doublet_patterns(c.J1, c.J2, c.Jprime, w)
    for label in DOUBLET_LABELS:
        energy = low if label.startswith("D'") else high
        v = patterns.get(label)
        norm = np.linalg.norm(v) if v is not None else 0.0
        if norm > 1e-8 * scale:
            v = v / norm
            if _residual(h, v, energy) <= RESIDUAL_TOL * scale:
                vectors[label] = _linalg.fix_phase(v)
                provenance[label] = "closed-form"
                continue
        if numeric is None:
            s2, sz = total_spin_operators()
            numeric = _linalg.tagged_eigh(h, s2, sz)
        ev, vecs, spins, szs = numeric
        target_sz = 0.5 if label.endswith("+1/2") else -0.5
        cand = np.flatnonzero(np.isclose(spins, 0.5) & np.isclose(szs, target_sz))
        if degenerate:
            # any orthonormal pair spanning the doublet plane
            k = cand[0] if label.startswith("D'") else cand[1]
        else:
            k = cand[np.argmin(np.abs(ev[cand] - energy))]
        vectors[label] = _linalg.fix_phase(vecs[:, k])
        provenance[label] = "numerical"

    out = AnalyticEigensystem(e_q, high, low, w, vectors, provenance, bool(degenerate))
    for label, energy, v in out.pairs():
        if _residual(h, v, energy) > RESIDUAL_TOL * scale:
            raise NumericalError(f"eigenpair {label} fails the residual check")
    return out


class DotCase(enum.Enum):
    RIGHT = "right"  # J2 dominant: pair of spins 2, 3 in the right dot
    LEFT = "left"  # J' dominant: pair of spins 1, 2 in the left dot


def limiting_doublets(case: DotCase | str) -> dict[str, np.ndarray]:
    """Doublet states when one exchange coupling dominates.

    RIGHT returns D (triplet on spins 2, 3) and D' (singlet on 2, 3); LEFT
    returns the barred states with the pair on spins 1, 2.
    """
    case = DotCase(case)
    e = product_state
    r6, r2 = math.sqrt(6), math.sqrt(2)
    if case is DotCase.RIGHT:
        return {
            "D+1/2": (e("uud") + e("udu") - 2 * e("duu")) / r6,
            "D-1/2": (e("ddu") + e("dud") - 2 * e("udd")) / r6,
            "D'+1/2": (e("uud") - e("udu")) / r2,
            "D'-1/2": (e("ddu") - e("dud")) / r2,
        }
    return {
        "Dbar+1/2": (e("duu") + e("udu") - 2 * e("uud")) / r6,
        "Dbar-1/2": (e("udd") + e("dud") - 2 * e("ddu")) / r6,
        "Dbar'+1/2": (e("udu") - e("duu")) / r2,
        "Dbar'-1/2": (e("dud") - e("udd")) / r2,
    }


@dataclass(frozen=True)
class QubitState:
    """Amplitudes on the logical basis, |psi> = a|0> + b|1>."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        n = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(n - 1) > NORM_TOL:
            raise NormalizationError(f"|a|^2 + |b|^2 = {n!r}, expected 1")

    @classmethod
    def zero(cls) -> "QubitState":
        return cls(1, 0)

    @classmethod
    def one(cls) -> "QubitState":
        return cls(0, 1)

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "QubitState":
        v = np.asarray(v, dtype=complex).ravel()
        if v.shape != (2,):
            raise ValueError("qubit vector must have two amplitudes")
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(v[0], v[1])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b])

    def to_spins(self) -> np.ndarray:
        """Embedding a|0> + b|1> in the eight-dimensional spin space."""
        zero, one = logical_basis()
        return self.a * zero + self.b * one


def spins_to_logical(v: np.ndarray) -> np.ndarray:
    """Components <0|v>, <1|v> of a spin-space vector."""
    zero, one = logical_basis()
    return np.array([np.vdot(zero, v), np.vdot(one, v)])


def bloch_coordinates(q: QubitState | tuple | np.ndarray) -> tuple[float, float, float]:
    """|0> at the north pole: z = |a|^2 - |b|^2, x + iy = 2 a conj(b)."""
    if isinstance(q, QubitState):
        a, b = q.a, q.b
    else:
        a, b = (complex(x) for x in np.asarray(q, dtype=complex).ravel())
        n = abs(a) ** 2 + abs(b) ** 2
        if abs(n - 1) > NORM_TOL:
            raise NormalizationError(f"state norm^2 {n!r} != 1")
    r = 2 * a * b.conjugate()
    return float(r.real), float(r.imag), float(abs(a) ** 2 - abs(b) ** 2)


def eigenvector_bloch_points(c: "EffectiveCouplings") -> dict[str, tuple[float, float, float]]:
    """Bloch coordinates of the two Sz = -1/2 doublet eigenvectors."""
    es = analytic_eigensystem(c)
    out = {}
    for label in ("D-1/2", "D'-1/2"):
        amp = spins_to_logical(es.vectors[label])
        out[label] = bloch_coordinates(QubitState.from_vector(amp, normalize=True))
    return out
