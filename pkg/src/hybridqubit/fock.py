"""Fermionic Fock space of three spin-degenerate orbitals (six modes).

Modes are ordered (1up, 1dn, 2up, 2dn, 3up, 3dn); mode ``m`` of a state is
bit ``m`` of its integer pattern. A pattern stands for the ordered product
``c+_{m1} c+_{m2} ... |vac>`` with ``m1 < m2 < ...``, so acting with ``c+_m``
or ``c_m`` picks up ``(-1)**(number of occupied modes below m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import NonHermitianError, SectorError

N_ORBITALS = 3
N_MODES = 2 * N_ORBITALS
UP, DOWN = 0, 1

HERMITIAN_TOL = 1e-12


def mode_index(orbital: int, spin: int) -> int:
    """Mode of orbital ``orbital`` (1-based, as in the level labels) and spin UP/DOWN."""
    if orbital not in (1, 2, 3) or spin not in (UP, DOWN):
        raise ValueError(f"no mode for orbital={orbital}, spin={spin}")
    return 2 * (orbital - 1) + spin


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _check_mode(mode: int) -> None:
    if not 0 <= mode < N_MODES:
        raise ValueError(f"mode index {mode} out of range [0, {N_MODES})")


@dataclass(frozen=True, order=True)
class FockState:
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < 1 << N_MODES:
            raise ValueError(f"bit pattern {self.bits} outside the {N_MODES}-mode space")

    @classmethod
    def from_string(cls, occupations: str) -> "FockState":
        """Parse ``"110000"`` (mode 0 first) or ``"|110000>"``."""
        s = occupations.strip().strip("|>⟩")
        if len(s) != N_MODES or set(s) - {"0", "1"}:
            raise ValueError(f"expected {N_MODES} occupation digits, got {occupations!r}")
        return cls(sum(1 << m for m, ch in enumerate(s) if ch == "1"))

    def occupation(self, mode: int) -> int:
        return (self.bits >> mode) & 1

    @property
    def particle_number(self) -> int:
        return _popcount(self.bits)

    @property
    def sz(self) -> float:
        up = _popcount(self.bits & 0b010101)
        down = _popcount(self.bits & 0b101010)
        return 0.5 * (up - down)

    def orbital_occupancy(self) -> tuple[int, int, int]:
        """Electrons per orbital, e.g. (1, 1, 1) for one electron in each level."""
        return tuple(_popcount((self.bits >> (2 * k)) & 0b11) for k in range(N_ORBITALS))

    def __str__(self) -> str:
        return "|" + "".join(str(self.occupation(m)) for m in range(N_MODES)) + ">"


def _act(kind: str, mode: int, bits: int) -> tuple[int, int] | None:
    occupied = (bits >> mode) & 1
    if kind == "+":
        if occupied:
            return None
        new = bits | (1 << mode)
    elif kind == "-":
        if not occupied:
            return None
        new = bits & ~(1 << mode)
    else:
        raise ValueError(f"operator kind must be '+' or '-', got {kind!r}")
    sign = -1 if _popcount(bits & ((1 << mode) - 1)) & 1 else 1
    return sign, new


def apply_creation(mode: int, state: FockState) -> tuple[int, FockState] | None:
    _check_mode(mode)
    r = _act("+", mode, state.bits)
    return None if r is None else (r[0], FockState(r[1]))


def apply_annihilation(mode: int, state: FockState) -> tuple[int, FockState] | None:
    _check_mode(mode)
    r = _act("-", mode, state.bits)
    return None if r is None else (r[0], FockState(r[1]))


# Operator strings are sequences of (kind, mode) written left to right as in
# the operator product; the rightmost factor acts first.
OpString = Sequence[tuple[str, int]]


def cdag(mode: int) -> list[tuple[str, int]]:
    return [("+", mode)]


def c(mode: int) -> list[tuple[str, int]]:
    return [("-", mode)]


def number(mode: int) -> list[tuple[str, int]]:
    return [("+", mode), ("-", mode)]


def adjoint(ops: OpString) -> list[tuple[str, int]]:
    flip = {"+": "-", "-": "+"}
    return [(flip[k], m) for k, m in reversed(ops)]


def apply_string(ops: OpString, bits: int) -> tuple[int, int] | None:
    """Apply an operator string to a bit pattern; ``None`` if it annihilates it."""
    sign = 1
    for kind, mode in reversed(ops):
        r = _act(kind, mode, bits)
        if r is None:
            return None
        sign *= r[0]
        bits = r[1]
    return sign, bits


@dataclass(frozen=True)
class FockBasis:
    """Ordered set of Fock states (ascending bit pattern) with optional sector tags."""

    states: tuple[int, ...]
    particle_number: int | None = None
    sz: float | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if list(self.states) != sorted(set(self.states)):
            raise ValueError("basis states must be unique and sorted by bit pattern")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[FockState]:
        return (FockState(s) for s in self.states)

    def __contains__(self, state) -> bool:
        bits = state.bits if isinstance(state, FockState) else state
        return bits in self._index

    def state_at(self, i: int) -> FockState:
        return FockState(self.states[i])

    def index_of(self, state: FockState | int) -> int:
        bits = state.bits if isinstance(state, FockState) else state
        try:
            return self._index[bits]
        except KeyError:
            raise KeyError(f"{FockState(bits)} is not in this basis") from None

    @property
    def number_conserving(self) -> bool:
        return len({_popcount(s) for s in self.states}) <= 1

    def subset(self, predicate) -> "FockBasis":
        """Sub-basis of the states satisfying ``predicate(FockState)``."""
        kept = tuple(s for s in self.states if predicate(FockState(s)))
        if not kept:
            raise SectorError("predicate selects no states")
        sz = {FockState(s).sz for s in kept}
        return FockBasis(kept, self.particle_number, sz.pop() if len(sz) == 1 else None)


def build_basis(particle_number: int | None = None, sz: float | None = None) -> FockBasis:
    if particle_number is not None and not 0 <= particle_number <= N_MODES:
        raise SectorError(f"particle number must be in [0, {N_MODES}], got {particle_number}")
    if sz is not None:
        two_sz = 2 * sz
        if abs(two_sz - round(two_sz)) > 1e-12:
            raise SectorError(f"Sz must be a half-integer, got {sz}")
        if particle_number is not None and (round(two_sz) - particle_number) % 2:
            raise SectorError(f"Sz={sz} is inconsistent with N={particle_number} (parity)")
    states = []
    for bits in range(1 << N_MODES):
        st = FockState(bits)
        if particle_number is not None and st.particle_number != particle_number:
            continue
        if sz is not None and abs(st.sz - sz) > 1e-12:
            continue
        states.append(bits)
    if not states:
        raise SectorError(f"empty sector N={particle_number}, Sz={sz}")
    return FockBasis(tuple(states), particle_number, sz)


@dataclass
class AssemblyDiagnostics:
    """Contributions that left the basis during assembly (sector leakage)."""

    dropped: int = 0
    dropped_by_term: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense complex matrix over an explicit basis.

    ``basis`` is a FockBasis for second-quantized operators; spin-space and
    logical operators carry ``labels`` instead.
    """

    matrix: np.ndarray
    basis: FockBasis | None = None
    labels: tuple | None = None
    hermitian: bool = True
    diagnostics: AssemblyDiagnostics | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if self.basis is not None and len(self.basis) != m.shape[0]:
            raise ValueError(f"matrix dimension {m.shape[0]} != basis size {len(self.basis)}")
        if self.labels is not None and len(self.labels) != m.shape[0]:
            raise ValueError("labels do not match matrix dimension")
        if self.hermitian and hermiticity_error(m) > HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
            raise NonHermitianError(f"matrix deviates from its adjoint by {hermiticity_error(m):.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix, self.basis, self.labels,
                                 self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "HermitianOperator":
        return HermitianOperator(scalar * self.matrix, self.basis, self.labels,
                                 self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max()) if m.size else 0.0


def operator_matrix(terms: Iterable[tuple[complex, OpString]], basis: FockBasis,
                    diagnostics: AssemblyDiagnostics | None = None) -> np.ndarray:
    """Dense matrix of a sum of operator strings restricted to ``basis``."""
    rows, cols, vals = [], [], []
    for t, (coef, ops) in enumerate(terms):
        for mode in (m for _, m in ops):
            _check_mode(mode)
        if coef == 0:
            continue
        for j, bits in enumerate(basis.states):
            r = apply_string(ops, bits)
            if r is None:
                continue
            sign, out = r
            i = basis._index.get(out)
            if i is None:
                if diagnostics is not None:
                    diagnostics.dropped += 1
                    diagnostics.dropped_by_term[t] = diagnostics.dropped_by_term.get(t, 0) + 1
                continue
            rows.append(i)
            cols.append(j)
            vals.append(coef * sign)
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    if vals:
        np.add.at(m, (np.array(rows), np.array(cols)), np.array(vals, dtype=complex))
    return m


def assemble_operator(terms: Iterable[tuple[complex, OpString]], basis: FockBasis,
                      hermitian: bool | None = None) -> HermitianOperator:
    """Assemble ``sum_k coef_k * ops_k`` on ``basis``.

    With ``hermitian=True`` the result must be Hermitian or NonHermitianError
    is raised; ``None`` sets the flag from the assembled matrix.
    """
    diag = AssemblyDiagnostics()
    m = operator_matrix(list(terms), basis, diag)
    err = hermiticity_error(m)
    is_herm = err <= HERMITIAN_TOL * max(1.0, np.linalg.norm(m))
    if hermitian and not is_herm:
        raise NonHermitianError(f"assembled operator is not Hermitian (deviation {err:.3e})")
    return HermitianOperator(m, basis, hermitian=bool(is_herm if hermitian is None else hermitian),
                             diagnostics=diag)
