import math

import numpy as np
import pytest

from conftest import chain_model
from utils.chain_functions import Christandl, Custom, KFamily, MlFamily
from utils.errors import UnsupportedError, ValidationError
from utils.packet_functions import WavePacket, localized_packet, preset_packet
from utils.transfer_functions import (
    certify_pst,
    characteristic_time,
    expected_global_phase,
    fidelity_at,
    fidelity_series,
    tau_scan,
)

ML_CASES = [(1, 1), (1, 2), (2, 1), (2, 3)]


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
def test_christandl_perfect_transfer(n):
    _, decomp, s = chain_model(n)
    assert abs(fidelity_at(decomp, localized_packet(n), s, math.pi / 2) - 1) <= 1e-9


def test_fidelity_closed_form(christandl4):
    _, decomp, s = christandl4
    times = np.linspace(0, 2 * math.pi, 1000)
    np.testing.assert_allclose(fidelity_series(decomp, localized_packet(4), s, times),
                               np.abs(np.sin(times)) ** 3, atol=1e-9)
    assert fidelity_at(decomp, localized_packet(4), s, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_fidelity_real_packet_at_tau(christandl4):
    _, decomp, s = christandl4
    assert fidelity_at(decomp, preset_packet("real_packet", 4), s, math.pi / 2) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_dimension_mismatch(christandl4):
    _, decomp, s = christandl4
    with pytest.raises(ValidationError):
        fidelity_at(decomp, localized_packet(5), s, 1.0)


def test_characteristic_times():
    assert characteristic_time(Christandl()) == pytest.approx(math.pi / 2)
    assert characteristic_time(KFamily(4)) == pytest.approx(math.pi / 2)
    assert characteristic_time(MlFamily(1, 2)) == pytest.approx(3 * math.pi / 2)
    assert characteristic_time(MlFamily(2, 1), j0=2.0) == pytest.approx(5 * math.pi / 4)
    with pytest.raises(UnsupportedError):
        characteristic_time(Custom((1.0, 1.0)))


def test_certify_christandl_phase(christandl4):
    _, decomp, s = christandl4
    certificate = certify_pst(decomp, s, math.pi / 2)
    assert certificate.certified
    assert certificate.global_phase == pytest.approx(1j, abs=1e-12)
    assert certificate.max_deviation <= 1e-12


def test_certify_ml12_phase(ml12_4):
    _, decomp, s = ml12_4
    certificate = certify_pst(decomp, s, 3 * math.pi / 2)
    assert certificate.certified
    assert certificate.global_phase == pytest.approx(-1j, abs=1e-12)
    assert certificate.as_dict()["global_phase"]["im"] == pytest.approx(-1.0)


@pytest.mark.parametrize("m,l", ML_CASES)
@pytest.mark.parametrize("n", [4, 8, 16, 64])
def test_certify_ml_family(m, l, n):
    _, decomp, s = chain_model(n, MlFamily(m, l))
    assert certify_pst(decomp, s, math.pi * (2 * m + 1) / 2).certified


@pytest.mark.parametrize("k", [0, 1, 4])
@pytest.mark.parametrize("n", [4, 8])
def test_certify_k_family(k, n):
    _, decomp, s = chain_model(n, KFamily(k))
    assert certify_pst(decomp, s, math.pi / 2).certified


@pytest.mark.parametrize("n", [4, 5, 6])
def test_uniform_chains_fail_certification(n):
    _, decomp, s = chain_model(n, Custom((1.0,) * (n - 1)))
    assert not certify_pst(decomp, s, math.pi / 2).certified


def test_uniform_three_site_transfer_found_by_scan():
    _, decomp, s = chain_model(3, Custom((1.0, 1.0)))
    scan = tau_scan(decomp, localized_packet(3), s, 3.0, 30001)
    assert scan.best_time == pytest.approx(math.pi / math.sqrt(2), abs=2e-4)
    assert scan.best_fidelity == pytest.approx(1.0, abs=1e-6)
    assert certify_pst(decomp, s, math.pi / math.sqrt(2)).certified


def test_tau_scan_arguments(christandl4):
    _, decomp, s = christandl4
    with pytest.raises(ValidationError):
        tau_scan(decomp, localized_packet(4), s, 0.0)


def test_expected_global_phase_is_recorded():
    assert expected_global_phase(MlFamily(1, 2)) == 1
    assert expected_global_phase(MlFamily(1, 1)) == -1
    assert expected_global_phase(Christandl()) == 1


@pytest.mark.parametrize("n, family", [
    (4, Christandl()),
    (8, Christandl()),
    (4, KFamily(4)),
    (8, KFamily(1)),
    (4, MlFamily(1, 2)),
    (8, MlFamily(2, 1)),
])
def test_fidelity_repeats_after_two_tau(n, family, rng):
    _, decomp, s = chain_model(n, family)
    tau = characteristic_time(family)
    values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi = WavePacket(values / np.linalg.norm(values))
    times = np.linspace(0, 2 * tau, 257)
    np.testing.assert_allclose(fidelity_series(decomp, psi, s, times + 2 * tau),
                               fidelity_series(decomp, psi, s, times), atol=1e-9)
