from __future__ import annotations

import numpy as np

from .errors import NumericalError

DEGENERACY_TOL = 1e-9


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(m) if np.all(np.isfinite(m)) else float("nan")
        raise NumericalError(f"Hermitian eigensolver failed ({exc}); condition number {cond:.3e}, "
                             f"finite entries: {bool(np.all(np.isfinite(m)))}") from exc


def _groups(values: np.ndarray, tol: float) -> list[slice]:
    out, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[start] > tol:
            out.append(slice(start, i))
            start = i
    return out


def _refine(v: np.ndarray, op: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, list[slice]]:
    """Rotate the columns of ``v`` (an invariant subspace) to diagonalize ``op`` within it."""
    w, u = np.linalg.eigh(v.conj().T @ op @ v)
    return w, v @ u, _groups(w, tol)


def spin_from_s2(s2: float) -> float:
    """Total spin S from the eigenvalue S(S+1), rounded to a half-integer."""
    return round(2 * (-1 + np.sqrt(max(1 + 4 * s2, 0.0))) / 2) / 2


def tagged_eigh(h: np.ndarray, s2: np.ndarray, sz: np.ndarray, tol: float = DEGENERACY_TOL):
    """Eigendecomposition of ``h`` whose degenerate blocks are resolved by S^2, then Sz.

    Returns ascending eigenvalues, eigenvector columns and the (S, Sz) of each.
    Requires ``h`` to commute with both spin operators.
    """
    w, v = eigh(h)
    scale = max(1.0, float(np.abs(w).max()) if len(w) else 1.0)
    vecs = np.array(v, dtype=complex)
    spins = np.zeros(len(w))
    szs = np.zeros(len(w))
    for g in _groups(w, tol * scale):
        s2w, block, s2groups = _refine(vecs[:, g], s2, 1e-8)
        for sg in s2groups:
            szw, sub, _ = _refine(block[:, sg], sz, 1e-8)
            block[:, sg] = sub
            idx = np.arange(g.start, g.stop)[sg]
            szs[idx] = np.round(2 * szw) / 2
            spins[idx] = spin_from_s2(float(np.mean(s2w[sg])))
        vecs[:, g] = block
    return w, vecs, spins, szs


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real and positive (first one on ties)."""
    v = np.asarray(v, dtype=complex)
    mags = np.round(np.abs(v), 10)
    k = int(np.argmax(mags))
    if mags[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])
