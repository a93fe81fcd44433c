"""Time evolution of the logical qubit.

Energies in meV, times in ps. The closed form follows the two-amplitude
solution a(t) = c1 e^{l1 t} + c2 e^{l2 t}, l_{1,2} = i(alpha -/+ beta), with
the coefficients bound to the logical matrix as A = -H00/hbar,
B = -H11/hbar (diagonal) and C = -H01/hbar (off-diagonal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _linalg
from .errors import NormalizationError
from .spins import LogicalHamiltonian, QubitState, project_to_logical
from .sweff import EffectiveCouplings

HBAR = 0.6582119569  # meV ps


def _logical(h) -> LogicalHamiltonian:
    if isinstance(h, LogicalHamiltonian):
        return h
    if isinstance(h, EffectiveCouplings):
        return project_to_logical(h)
    return LogicalHamiltonian(np.asarray(getattr(h, "matrix", h)))


@dataclass(frozen=True)
class DynamicsCoefficients:
    A: float
    B: float
    C: complex
    alpha: float
    beta: float
    lambda1: complex
    lambda2: complex

    @classmethod
    def from_hamiltonian(cls, h, hbar: float = HBAR) -> "DynamicsCoefficients":
        lh = _logical(h)
        a, b, cc = -lh.h00 / hbar, -lh.h11 / hbar, -lh.h01 / hbar
        alpha = (a + b) / 2
        beta = math.sqrt((a - b) ** 2 + 4 * abs(cc) ** 2) / 2
        return cls(a, b, cc, alpha, beta, 1j * (alpha - beta), 1j * (alpha + beta))

    @property
    def rabi_period(self) -> float:
        """Period of |b(t)|^2, pi / beta (infinite when beta = 0)."""
        return math.pi / self.beta if self.beta > 0 else math.inf


def _sin_over(beta: float, t):
    # sin(beta t) / beta, finite at beta = 0
    return t * np.sinc(beta * np.asarray(t) / np.pi)


def evolve_closed_form(h, psi0: QubitState, t: float, hbar: float = HBAR) -> QubitState:
    """Closed-form amplitudes at time ``t`` (ps) from ``psi0``.

    ``h`` may be EffectiveCouplings, a LogicalHamiltonian or a 2x2 matrix.
    For psi0 = |0> this reduces to
        a(t) = e^{i alpha t} [cos(beta t) + i (A - alpha) sin(beta t)/beta]
        b(t) = i e^{i alpha t} C sin(beta t)/beta.
    """
    if t < 0:
        raise ValueError("closed-form evolution needs t >= 0")
    k = DynamicsCoefficients.from_hamiltonian(h, hbar)
    a0, b0 = psi0.a, psi0.b
    phase = np.exp(1j * k.alpha * t)
    cos = math.cos(k.beta * t)
    sin = float(_sin_over(k.beta, t))
    half = k.A - k.alpha  # equals -(B - alpha)
    a = phase * (a0 * cos + 1j * (half * a0 + k.C * b0) * sin)
    b = phase * (b0 * cos + 1j * (np.conj(k.C) * a0 - half * b0) * sin)
    return QubitState(a, b)


def closed_form_from_zero(h, t, hbar: float = HBAR) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized a(t), b(t) for psi0 = |0> in the two-exponential form."""
    k = DynamicsCoefficients.from_hamiltonian(h, hbar)
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * k.alpha * t)
    if k.beta == 0:
        return phase, np.zeros_like(phase)
    a = phase / k.beta * (k.beta * np.cos(k.beta * t) + 1j * (k.A - k.alpha) * np.sin(k.beta * t))
    if k.C == 0:
        b = np.zeros_like(a)
    else:
        b = -1j * phase * ((k.A - k.alpha) ** 2 - k.beta ** 2) / (k.beta * k.C) * np.sin(k.beta * t)
    return a, b


def evolve_numeric(h, psi0, t: float, hbar: float = HBAR) -> np.ndarray:
    """psi(t) = V exp(-i diag(E) t / hbar) V^dagger psi0 for any Hermitian matrix."""
    if isinstance(h, EffectiveCouplings):
        h = project_to_logical(h)
    m = np.asarray(getattr(h, "matrix", h), dtype=complex)
    v0 = psi0.vector if isinstance(psi0, QubitState) else np.asarray(psi0, dtype=complex).ravel()
    if m.shape != (v0.size, v0.size):
        raise ValueError(f"state of dimension {v0.size} does not match operator of shape {m.shape}")
    if abs(np.vdot(v0, v0).real - 1) > 1e-12:
        raise NormalizationError("initial state is not normalized")
    w, v = _linalg.eigh(m)
    return v @ (np.exp(-1j * w * t / hbar) * (v.conj().T @ v0))


@dataclass
class SwitchingResult:
    """Maximal |0> -> |1> transfer under a constant logical Hamiltonian.

    ``t_star`` is None when no transfer is possible (H01 = 0).
    ``literal_condition`` is 3J' - sqrt(3)(J1 - J2), an often-quoted switching
    condition; ``detuning_condition`` is J' - (J1 + J2)/2, which vanishes
    exactly when full transfer is possible.
    """

    t_star: float | None
    max_transfer: float
    period: float
    detuning: float
    full_transfer: bool
    literal_condition: float | None = None
    detuning_condition: float | None = None


def max_transfer(h) -> float:
    lh = _logical(h)
    off = 4 * abs(lh.h01) ** 2
    return 0.0 if off == 0 else off / (lh.detuning ** 2 + off)


def switching_time(h, hbar: float = HBAR, tol: float = 1e-12) -> SwitchingResult:
    """First time of maximal |b(t)|^2 from psi0 = |0>: t* = pi hbar / (2 W),
    W = sqrt(((H00 - H11)/2)^2 + |H01|^2)."""
    lh = _logical(h)
    lit = det = None
    if isinstance(h, EffectiveCouplings):
        lit = 3 * h.Jprime - math.sqrt(3) * (h.J1 - h.J2)
        det = h.Jprime - (h.J1 + h.J2) / 2
    p = max_transfer(lh)
    w = math.hypot(lh.detuning / 2, abs(lh.h01))
    if abs(lh.h01) <= tol:
        return SwitchingResult(None, 0.0, math.inf, lh.detuning, False, lit, det)
    t_star = math.pi * hbar / (2 * w)
    full = abs(lh.detuning) <= tol * max(1.0, abs(lh.h00), abs(lh.h11))
    return SwitchingResult(t_star, p, 2 * t_star, lh.detuning, full, lit, det)
