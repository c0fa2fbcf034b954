import json

import numpy as np
import pytest

from densecode.encoding import (
    UnitaryMessageSet,
    capacity_bound_check,
    certify_distinguishable,
    gram_mass_gradient,
    gram_mass_objective,
    hermitian_from_params,
    message_set_from_json,
    message_set_to_json,
    search_message_set,
    unitary_from_generator,
    weyl_set,
)
from densecode.linalg import hermitian_eigensystem, max_abs, rng_from, unitarity_defect
from densecode.states import SchmidtSpectrum, make_schmidt_state, uniform_spectrum
from densecode.suites import random_spectrum

from conftest import I2, X, Z


def test_message_set_rejects_non_unitary():
    with pytest.raises(ValueError):
        UnitaryMessageSet(d=2, unitaries=(np.array([[1, 0], [0, 0.5]], dtype=complex),))


def test_certify_identity_shift_pair(example_spectrum):
    psi = make_schmidt_state(example_spectrum)
    cert = certify_distinguishable(UnitaryMessageSet(d=2, unitaries=(I2, X)), psi)
    assert cert.passed
    assert cert.gram_defect < 1e-14


def test_certify_repeated_unitary_fails(example_spectrum):
    psi = make_schmidt_state(example_spectrum)
    cert = certify_distinguishable(UnitaryMessageSet(d=2, unitaries=(I2, I2)), psi)
    assert not cert.passed
    assert abs(cert.gram_defect - 1.0) < 1e-12


def test_certificate_phase_and_left_multiplication_invariance():
    rng = rng_from(71)
    s = random_spectrum(2, rng)
    psi = make_schmidt_state(s)
    base = UnitaryMessageSet(d=2, unitaries=(I2, X))
    cert0 = certify_distinguishable(base, psi)
    phased = UnitaryMessageSet(
        d=2, unitaries=(np.exp(0.7j) * I2, np.exp(-1.2j) * X)
    )
    assert abs(certify_distinguishable(phased, psi).gram_defect - cert0.gram_defect) < 1e-12
    from densecode.linalg import random_unitary

    g = random_unitary(2, seed=72)
    rotated = UnitaryMessageSet(d=2, unitaries=(g @ I2, g @ X))
    assert certify_distinguishable(rotated, psi).passed == cert0.passed


def test_capacity_bound_examples(example_spectrum):
    assert capacity_bound_check(example_spectrum, 3)
    assert not capacity_bound_check(SchmidtSpectrum.from_values([0.9, 0.1]), 3)
    for d in (2, 3):
        assert capacity_bound_check(uniform_spectrum(d), d * d)


def test_weyl_set_d2():
    ops = weyl_set(2).unitaries
    assert max_abs(ops[0] - I2) == 0.0
    assert max_abs(ops[1] - X) == 0.0
    assert max_abs(ops[2] - Z) < 1e-15
    assert max_abs(ops[3] - X @ Z) < 1e-15


def test_weyl_trace_orthogonality_d3():
    ops = weyl_set(3).unitaries
    for a in range(9):
        for b in range(9):
            val = np.trace(ops[a].conj().T @ ops[b])
            want = 3.0 if a == b else 0.0
            assert abs(val - want) < 1e-12


def test_weyl_commutation_witness():
    for d in (2, 3, 5):
        ops = weyl_set(d).unitaries
        x, z = ops[1], ops[d]
        omega = np.exp(2j * np.pi / d)
        assert max_abs(z @ x - omega * x @ z) < 1e-12


def test_weyl_set_certified_on_maximally_entangled():
    for d in (2, 3):
        psi = make_schmidt_state(uniform_spectrum(d))
        assert certify_distinguishable(weyl_set(d), psi).passed


def test_generator_exponential_is_unitary():
    rng = rng_from(73)
    for d in (2, 3, 4):
        h = hermitian_from_params(rng.standard_normal(d * d), d)
        u = unitary_from_generator(h)
        assert unitarity_defect(u) < 1e-13
        # Spectral route agrees with the series route.
        w, q = hermitian_eigensystem(h)
        u_spec = q @ np.diag(np.exp(1j * w)) @ q.conj().T
        assert max_abs(u - u_spec) < 1e-12
    assert max_abs(unitary_from_generator(np.zeros((3, 3))) - np.eye(3)) == 0.0


def test_objective_gradient_matches_finite_differences():
    rng = rng_from(74)
    for d, count in ((2, 2), (2, 4), (3, 3)):
        s = random_spectrum(d, rng)
        n = (count - 1) * d * d
        theta = rng.standard_normal(n)
        grad = gram_mass_gradient(s, theta, count)
        h = 1e-6
        fd = np.empty(n)
        for i in range(n):
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            fd[i] = (
                gram_mass_objective(s, up, count) - gram_mass_objective(s, down, count)
            ) / (2 * h)
        scale = max(np.max(np.abs(fd)), 1e-12)
        assert np.max(np.abs(grad - fd)) / scale < 1e-5


def test_pair_jacobian_matches_finite_differences():
    from densecode.encoding import _gram_and_jacobian

    rng = rng_from(76)
    s = SchmidtSpectrum.from_values([0.4, 0.35, 0.25])
    count = 4
    n = (count - 1) * 9
    theta = rng.standard_normal(n)
    _, jac = _gram_and_jacobian(s, theta, count)
    h = 1e-6
    for a in range(0, n, 5):
        up, down = theta.copy(), theta.copy()
        up[a] += h
        down[a] -= h
        fd = (_gram_and_jacobian(s, up, count)[0] - _gram_and_jacobian(s, down, count)[0]) / (
            2 * h
        )
        assert np.max(np.abs(fd - jac[:, a])) < 1e-7


def test_search_single_message():
    s = SchmidtSpectrum.from_values([0.6, 0.4])
    ms = search_message_set(s, 1, seed=1)
    assert len(ms) == 1
    assert max_abs(ms.unitaries[0] - I2) == 0.0


def test_search_two_messages_example(example_spectrum):
    ms = search_message_set(example_spectrum, 2, seed=7)
    assert ms is not None
    psi = make_schmidt_state(example_spectrum)
    assert certify_distinguishable(ms, psi).passed


def test_search_full_set_maximally_entangled():
    s = uniform_spectrum(2)
    ms = search_message_set(s, 4, seed=7)
    assert ms is not None
    assert certify_distinguishable(ms, make_schmidt_state(s)).passed


def test_search_rejects_capacity_violation():
    with pytest.raises(ValueError):
        search_message_set(SchmidtSpectrum.from_values([0.9, 0.1]), 3, seed=1)


def test_message_set_json_round_trip(example_spectrum):
    psi = make_schmidt_state(example_spectrum)
    ms = UnitaryMessageSet(d=2, unitaries=(I2, X))
    doc = message_set_to_json(ms, psi, seed=123)
    assert doc["schema"] == "densecode/1"
    back = message_set_from_json(json.loads(json.dumps(doc)))
    assert back.d == 2
    for a, b in zip(back.unitaries, ms.unitaries):
        assert max_abs(a - b) == 0.0
