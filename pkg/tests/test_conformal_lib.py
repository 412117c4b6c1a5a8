import numpy as np
import pytest

from qcfactor.conformal_lib import (ConformalMap, annulus_map, annulus_to_disk,
                                    halfplane_disk_map, halfplane_punctured_map,
                                    halfplane_to_disk, halfplane_to_punctured_disk,
                                    identity_conformal, liouville_transplant)
from qcfactor.domains import DomainDescriptor
from qcfactor.exact_solutions import lb_annulus
from qcfactor.fields import Nonlinearity
from qcfactor.verifier import GridSpec, convergence_order, laplace_residual


def test_halfplane_to_disk_values():
    assert halfplane_to_disk(1.0) == 0
    assert halfplane_to_disk(3.0) == pytest.approx(0.5, abs=1e-16)
    for eps in (1e-2, 1e-4, 1e-6):
        assert 1 - abs(halfplane_to_disk(eps + 2.0j)) < 2 * eps
    with pytest.raises(ValueError):
        halfplane_to_disk(-1.0)


def test_halfplane_to_punctured_disk_values():
    assert halfplane_to_punctured_disk(1.0, 1.0) == pytest.approx(np.exp(-1), abs=1e-16)
    assert abs(halfplane_to_punctured_disk(1 + 0.5j * np.pi, 2.0) + np.exp(-2)) <= 1e-16
    assert abs(halfplane_to_punctured_disk(1e-9 + 0.3j, 1.0)) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        halfplane_to_punctured_disk(1.0, 0.0)


def test_annulus_to_disk_boundary_correspondence():
    r = 0.25
    theta = 0.4
    inner = abs(annulus_to_disk((r + 1e-7) * np.exp(1j * theta), r))
    outer = abs(annulus_to_disk((1 - 1e-7) * np.exp(1j * theta), r))
    mid = abs(annulus_to_disk(0.5 * np.exp(1j * theta), r))
    assert inner > 1 - 1e-5 and outer > 1 - 1e-5
    assert mid < 0.5
    with pytest.raises(ValueError):
        annulus_to_disk(0.1, r)
    with pytest.raises(ValueError):
        annulus_to_disk(0.5, 1.5)


@pytest.mark.parametrize("F, w", [
    (halfplane_disk_map(), np.array([0.5 + 0.2j, 2.0 - 1.0j])),
    (halfplane_punctured_map(1.5), np.array([0.5 + 0.2j, 2.0 - 1.0j])),
    (annulus_map(0.25), np.array([0.5 + 0.2j, -0.3 + 0.4j])),
])
def test_analytic_derivatives_match_difference_quotients(F, w):
    numeric = ConformalMap(F.func, F.domain)
    assert np.max(np.abs(F.prime(w) - numeric.prime(w))) <= 1e-8


def test_transplant_of_identity():
    u = liouville_transplant(identity_conformal())
    z = np.array([0.0, 0.3 + 0.4j, -0.6j])
    assert np.allclose(u(z), np.log(8 / (1 - np.abs(z) ** 2) ** 2), atol=1e-14)


def test_transplant_of_halfplane_map():
    u = liouville_transplant(halfplane_disk_map())
    z = np.array([0.3 + 0.1j, 1.0, 2.5 - 3j])
    assert np.allclose(u(z), -2 * np.log(z.real) + np.log(2), atol=1e-13)


def test_transplant_of_exponential_map():
    lam = 1.5
    u = liouville_transplant(halfplane_punctured_map(lam))
    z = np.array([0.3 + 0.1j, 1.0, 2.5 - 3j])
    x = z.real
    expected = np.log(8 * lam ** 2) - 2 * lam * x - 2 * np.log(1 - np.exp(-2 * lam * x))
    assert np.allclose(u(z), expected, atol=1e-13)


def test_transplant_of_annulus_map_matches_closed_form():
    r = 0.25
    u = liouville_transplant(annulus_map(r))
    z = np.array([0.5, 0.3 + 0.4j, 0.7j, -0.2 + 0.6j])
    assert np.allclose(u(z), lb_annulus(z, r), atol=1e-12)
    assert u(np.array(0.5)) == pytest.approx(3.7156, abs=1e-3)


def test_transplant_errors():
    with pytest.raises(ValueError):
        liouville_transplant(identity_conformal())(np.array([1.2 + 0j]))
    square = ConformalMap(lambda w: 0.5 * w * w, DomainDescriptor.unit_disk(), lambda w: w)
    with pytest.raises(ValueError):
        liouville_transplant(square)(np.array([0j]))


CASES = {
    "identity": (identity_conformal(), DomainDescriptor.disk(0.9), 0.1),
    "halfplane": (halfplane_disk_map(), DomainDescriptor.right_half_plane((0.2, 1.8, -0.8, 0.8)), 0.1),
    "exponential": (halfplane_punctured_map(1.0),
                    DomainDescriptor.right_half_plane((0.2, 1.8, -0.8, 0.8)), 0.1),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_transplant_residual_order_two(name):
    F, domain, margin = CASES[name]
    u = liouville_transplant(F)
    # u has a log singularity at x = 0; 1/32 is still pre-asymptotic 0.1 from it
    hs = (1 / 64, 1 / 128, 1 / 256)
    reps = [laplace_residual(u, 1.0, Nonlinearity.exp(), GridSpec(domain, h, margin)) for h in hs]
    assert 1.8 <= convergence_order(reps).order <= 2.2


def test_transplant_blows_up_towards_the_boundary():
    u = liouville_transplant(halfplane_disk_map())
    x = np.array([0.5, 0.1, 0.01, 1e-4])
    vals = u(x + 0.3j)
    assert np.all(np.diff(vals) > 0) and vals[-1] > 15
    v = liouville_transplant(identity_conformal())(np.array([0.5, 0.9, 0.99, 0.9999]) * 1j)
    assert np.all(np.diff(v) > 0) and v[-1] > 15
