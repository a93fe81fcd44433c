import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridqubit import spins
from hybridqubit.errors import NormalizationError, PerturbativeValidityWarning
from hybridqubit.spins import (DotCase, QubitState, analytic_eigensystem, bloch_coordinates, doublet_energies,
                               doublet_energies_literal, eigenvector_bloch_points, heisenberg_hamiltonian,
                               limiting_doublets, logical_basis, logical_matrix, omega, product_state,
                               project_to_logical, spins_to_logical)
from hybridqubit.sweff import EffectiveCouplings, effective_couplings

S2, SZ = spins.total_spin_operators()


def C(j1, j2, jp):
    return EffectiveCouplings(j1, j2, jp)


def expect(op, v):
    return np.vdot(v, op @ v).real


def test_heisenberg_examples():
    assert np.count_nonzero(heisenberg_hamiltonian(C(0, 0, 0)).matrix) == 0
    w = np.linalg.eigvalsh(heisenberg_hamiltonian(C(1.3, 1.3, 1.3)).matrix)
    assert np.allclose(w, [-0.75 * 1.3] * 4 + [0.75 * 1.3] * 4, atol=1e-14)
    h = heisenberg_hamiltonian(C(0.2, -0.5, 0.9)).matrix
    assert h[0, 0].real == pytest.approx((0.2 - 0.5 + 0.9) / 4, abs=1e-15)


def test_logical_basis():
    zero, one = logical_basis()
    assert abs(np.vdot(zero, one)) <= 1e-15
    for v in (zero, one):
        assert np.linalg.norm(v) == pytest.approx(1, abs=1e-15)
        assert expect(SZ, v) == pytest.approx(-0.5, abs=1e-15)
        assert expect(S2, v) == pytest.approx(0.75, abs=1e-14)
    amp = dict(zip(spins.SPIN_LABELS, one))
    assert amp["udd"] == pytest.approx(1 / math.sqrt(6))
    assert amp["dud"] == pytest.approx(1 / math.sqrt(6))
    assert amp["ddu"] == pytest.approx(-math.sqrt(2 / 3))
    assert np.count_nonzero(np.abs(one) > 1e-15) == 3


def test_logical_states_are_left_dot_doublets_up_to_phase():
    lim = limiting_doublets(DotCase.LEFT)
    zero, one = logical_basis()
    assert abs(np.vdot(lim["Dbar'-1/2"], zero)) == pytest.approx(1, abs=1e-15)
    assert abs(np.vdot(lim["Dbar-1/2"], one)) == pytest.approx(1, abs=1e-15)


def test_projection_examples():
    h = project_to_logical(C(0.4, 0.4, -0.3))
    assert h.h01 == 0
    j = 0.7
    hu = project_to_logical(C(j, j, j))
    assert hu.h00 == pytest.approx(-0.75 * j) and hu.h11 == pytest.approx(-0.75 * j)


def test_projection_silicon_point(silicon):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        c = effective_couplings(silicon)
    h = project_to_logical(c)
    assert np.allclose(h.matrix, [[0.75, 0.132], [0.132, -0.266]], atol=2e-3)
    w, v = h.eigh()
    assert abs(v[0, 0]) ** 2 == pytest.approx(0.017, abs=2e-3)


def test_projection_matches_direct_sandwich(rng):
    basis = np.column_stack(logical_basis())
    for _ in range(200):
        c = C(*rng.normal(size=3))
        direct = basis.conj().T @ heisenberg_hamiltonian(c).matrix @ basis
        assert np.abs(direct - logical_matrix(c.J1, c.J2, c.Jprime)).max() <= 1e-12


def test_logical_spectrum_contained_in_full(rng):
    for _ in range(50):
        c = C(*rng.normal(size=3))
        full = np.linalg.eigvalsh(heisenberg_hamiltonian(c).matrix)
        for e in np.linalg.eigvalsh(project_to_logical(c).matrix):
            assert np.abs(full - e).min() <= 1e-10


def test_quadruplet_energy_exact(rng):
    for _ in range(50):
        c = C(*rng.normal(size=3))
        es = analytic_eigensystem(c)
        h = heisenberg_hamiltonian(c).matrix
        for label in spins.QUADRUPLET_LABELS:
            v = es.vectors[label]
            assert expect(S2, v) == pytest.approx(3.75, abs=1e-14)
            assert np.linalg.norm(h @ v - es.quadruplet_energy * v) <= 1e-12
        assert es.quadruplet_energy == pytest.approx((c.J1 + c.J2 + c.Jprime) / 4, abs=1e-15)


def test_doublet_energies_match_numerics(rng):
    for _ in range(50):
        c = C(*rng.normal(size=3))
        h = heisenberg_hamiltonian(c).matrix
        w = np.linalg.eigvalsh(h)
        hi, lo = doublet_energies(c)
        for e in (hi, lo):
            assert np.abs(w - e).min() <= 1e-12


def test_eigensystem_right_dot_limit():
    c = C(0, 1, 0)
    es = analytic_eigensystem(c)
    assert es.quadruplet_energy == 0.25
    assert (es.doublet_high, es.doublet_low) == pytest.approx((0.25, -0.75), abs=1e-15)
    lim = limiting_doublets(DotCase.RIGHT)
    for label, ref in lim.items():
        assert abs(np.vdot(ref, es.vectors[label])) ** 2 == pytest.approx(1, abs=1e-12)


def test_eigensystem_uniform_couplings_degenerate():
    es = analytic_eigensystem(C(0.6, 0.6, 0.6))
    assert es.degenerate and es.omega == 0
    assert es.doublet_high == pytest.approx(-0.45) and es.doublet_low == pytest.approx(-0.45)
    v = np.column_stack(list(es.vectors.values()))
    assert np.abs(v.conj().T @ v - np.eye(8)).max() <= 1e-12


def test_eigensystem_orthonormal_and_provenance(rng):
    for _ in range(30):
        es = analytic_eigensystem(C(*rng.normal(size=3)))
        v = np.column_stack(list(es.vectors.values()))
        assert np.abs(v.conj().T @ v - np.eye(8)).max() <= 1e-10
        assert es.provenance["D+1/2"] == "closed-form"
        assert es.provenance["D-1/2"] == "closed-form"
        assert es.provenance["D'+1/2"] == "closed-form"
        # the closed-form low-doublet Sz=-1/2 pattern is not an eigenvector
        assert es.provenance["D'-1/2"] == "numerical"


def test_low_doublet_pattern_defect():
    c = C(0.3, -0.8, 0.5)
    w = omega(c)
    v = spins._doublet_patterns(c.J1, c.J2, c.Jprime, w)["D'-1/2"]
    v = v / np.linalg.norm(v)
    _, lo = doublet_energies(c)
    assert np.linalg.norm(heisenberg_hamiltonian(c).matrix @ v - lo * v) > 1e-2


def test_literal_doublet_energies_fail_right_dot_residual():
    c = C(0, 1, 0)
    hi, lo = doublet_energies_literal(c)
    assert (hi, lo) == (0.0, -1.0)
    w = np.linalg.eigvalsh(heisenberg_hamiltonian(c).matrix)
    assert np.abs(w - hi).min() > 0.1 and np.abs(w - lo).min() > 0.1


def test_limiting_doublets_properties():
    for case in DotCase:
        lim = limiting_doublets(case)
        v = np.column_stack(list(lim.values()))
        assert np.abs(v.conj().T @ v - np.eye(4)).max() <= 1e-15
    r = limiting_doublets("right")
    assert abs(np.vdot(r["D'-1/2"], r["D-1/2"])) == 0
    h = heisenberg_hamiltonian(C(0, 1, 0)).matrix
    for label, v in r.items():
        e = 0.25 if label.startswith("D+") or label.startswith("D-") else -0.75
        assert np.linalg.norm(h @ v - e * v) <= 1e-15
    h = heisenberg_hamiltonian(C(0, 0, 1)).matrix
    for label, v in limiting_doublets(DotCase.LEFT).items():
        e = -0.75 if "'" in label else 0.25
        assert np.linalg.norm(h @ v - e * v) <= 1e-15


def limit_defect(c, case):
    es = analytic_eigensystem(c)
    lim = limiting_doublets(case)
    bar = "bar" if case is DotCase.LEFT else ""
    worst = 0.0
    for label in spins.DOUBLET_LABELS:
        ref = lim[label.replace("D", "D" + bar, 1)]
        worst = max(worst, 1 - abs(np.vdot(ref, es.vectors[label])) ** 2)
    return worst


def test_limit_convergence_is_quadratic():
    ks = []
    for d in (1e-2, 1e-3):
        ks.append(limit_defect(C(0.0, 1.0, d), DotCase.RIGHT) / d ** 2)
    assert ks[0] > 0
    assert 0.25 <= ks[0] / ks[1] <= 4


def test_symmetric_perturbation_keeps_limit_states_exact():
    # J' = J1 = d adds d S1.(S2 + S3), which commutes with the right-dot doublets
    for d in (1e-2, 1e-3):
        assert limit_defect(C(d, 1.0, d), DotCase.RIGHT) <= 1e-12


def test_left_limit_states():
    assert limit_defect(C(0, 0, 1), DotCase.LEFT) <= 1e-12


def test_qubit_state_validation():
    with pytest.raises(NormalizationError):
        QubitState(1, 1)
    q = QubitState.from_vector([3, 4j], normalize=True)
    assert q.b == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        QubitState.from_vector([1, 0, 0])
    assert np.allclose(spins_to_logical(QubitState(0.6, 0.8).to_spins()), [0.6, 0.8])


def test_bloch_examples():
    assert bloch_coordinates(QubitState.zero()) == (0, 0, 1)
    assert bloch_coordinates(QubitState.one()) == (0, 0, -1)
    x, y, z = bloch_coordinates(QubitState(1 / math.sqrt(2), 1 / math.sqrt(2)))
    assert (x, y, z) == pytest.approx((1, 0, 0), abs=1e-15)
    with pytest.raises(NormalizationError):
        bloch_coordinates((1, 1))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_bloch_vector_unit_length(theta, phi):
    q = QubitState(math.cos(theta / 2), math.sin(theta / 2) * complex(math.cos(phi), math.sin(phi)))
    x, y, z = bloch_coordinates(q)
    assert x * x + y * y + z * z == pytest.approx(1, abs=1e-12)
    assert z == pytest.approx(math.cos(theta), abs=1e-12)


def test_eigenvector_bloch_points_antipodal(silicon):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        c = effective_couplings(silicon)
    pts = eigenvector_bloch_points(c)
    a, b = np.array(pts["D-1/2"]), np.array(pts["D'-1/2"])
    assert np.linalg.norm(a) == pytest.approx(1, abs=1e-12)
    assert np.allclose(a, -b, atol=1e-12)
    # low doublet sits near |1> for these couplings
    assert b[2] < -0.9


def test_product_state_labels():
    assert product_state("uuu")[0] == 1
    assert product_state("ddd")[7] == 1
