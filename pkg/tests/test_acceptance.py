"""Acceptance criteria 1-10, one test each, with runtime budgets.

The terminal summary (see conftest.py) prints one PASS/FAIL line per
criterion.
"""

import time

import numpy as np
import pytest

from qcfactor import (ConductivityTensor, DomainDescriptor, GridSpec, Nonlinearity,
                      ScalarField, SolveOptions, catalog, convergence_order, factorize,
                      factorization_identity_check, halfplane_blowup, heat_residual,
                      horizontal_map, identity_map, keller_osserman_check, lb_annulus, lb_disk,
                      lb_punctured_disk, log_spiral_map, mu_from_tensor, numeric_jacobian,
                      radial_map, random_bumps, solve_dirichlet, spiral_tensor, stream_function,
                      strong_residual, tensor_from_mu, volume_preserving_coefficient)
from qcfactor.cli import TableProfile

ORDER_LO, ORDER_HI = 1.8, 2.2
HS = (1 / 64, 1 / 128, 1 / 256)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False

    def check(self):
        assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def _order(hs, errors):
    est = convergence_order(hs=hs, errors=errors)
    assert not est.warning, est.warning
    return est.order


@pytest.mark.criterion(1, "tensor <-> dilatation round trip")
def test_criterion_01_round_trip():
    with Budget(1.0) as b:
        rng = np.random.default_rng(2024)
        n = 10_000
        mu = 0.99 * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
        A = tensor_from_mu(mu)
        mu_back = mu_from_tensor(*A)
        err_mu = max(np.max(np.abs(mu_back.real - mu.real)), np.max(np.abs(mu_back.imag - mu.imag)))
        # tensor entries reach ~200 at |mu| = 0.99; compare relative to max(1, |a|)
        A_back = tensor_from_mu(mu_back)
        err_A = max(np.max(np.abs(x - y) / np.maximum(1.0, np.abs(x))) for x, y in zip(A, A_back))
        t = tensor_from_mu(0.5 + 0.5j)
        m = mu_from_tensor(1.0, -2.0, 5.0)
    assert err_mu <= 1e-12
    assert err_A <= 1e-12
    assert np.max(np.abs(np.array(t) - [1.0, -2.0, 5.0])) <= 1e-14
    assert abs(m - (0.5 + 0.5j)) <= 1e-14
    b.check()


def _nu_profiles(tmp_path):
    table = tmp_path / "nu.csv"
    table.write_text("t,nu\n0,0.1\n0.25,0.5\n0.5,0.2\n0.75,0.8\n1,0.4\n")
    return {
        "0.3": 0.3,
        "1/sqrt2": 1 / np.sqrt(2),
        "0.9 sin": lambda t: 0.9 * np.sin(np.pi * np.asarray(t)),
        "piecewise": lambda t: np.where(np.asarray(t) < 0.5, 0.3, 0.7),
        "table": TableProfile.load(str(table)),
    }


@pytest.mark.criterion(2, "volume-preserving radial maps")
def test_criterion_02_volume_preserving_radial(tmp_path):
    rng = np.random.default_rng(7)
    z = (0.05 + 0.9 * np.sqrt(rng.uniform(0, 1, 100))) * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    with Budget(5.0) as b:
        results = {}
        for name, nu in _nu_profiles(tmp_path).items():
            if callable(nu):
                k = lambda t, nu=nu: volume_preserving_coefficient(nu(t))  # noqa: E731
            else:
                k = volume_preserving_coefficient(nu)
            w = radial_map(k)
            mod = np.max(np.abs(np.abs(w(z)) - np.abs(z)))
            D = numeric_jacobian(w, z)
            J = D[..., 0, 0] * D[..., 1, 1] - D[..., 0, 1] * D[..., 1, 0]
            results[name] = (mod, np.max(np.abs(J - 1)))
    for name, (mod, jac) in results.items():
        assert mod <= 1e-9, name
        assert jac <= 1e-6, name
    b.check()


@pytest.mark.criterion(3, "log-spiral verification")
def test_criterion_03_log_spiral():
    u = catalog()["lb-disk"].field
    with Budget(30.0) as b:
        reps = [strong_residual(u, spiral_tensor(), Nonlinearity.exp(),
                                GridSpec(DomainDescriptor.unit_disk(), h, 0.1, (0j,)))
                for h in HS]
        order = _order(HS, [r.linf for r in reps])
    assert ORDER_LO <= order <= ORDER_HI
    assert reps[0].linf / reps[-1].linf >= 10
    b.check()


def _catalog_cases():
    cases = []
    entries = catalog()
    for pid in ("lb-disk", "lb-annulus", "lb-punctured-disk"):
        for label in ("identity", "spiral", "radial"):
            cases.append((pid, label, entries[pid]))
    for pid in ("halfplane-log", "halfplane-lambda"):
        for label in ("horizontal", "const(1,-2,5)"):
            cases.append((pid, label, entries[pid]))
    for q in (0.3, 0.5, 0.7):
        cases.append((f"dead-zone q={q}", "horizontal", catalog(q=q)["dead-zone"]))
    for label in ("identity", "spiral", "radial"):
        cases.append(("heat-kernel", label, entries["heat-kernel"]))
    return cases


def _tensor(entry, label):
    if label == "const(1,-2,5)":
        return ConductivityTensor.constant(1.0, -2.0, 5.0)
    return entry.tensors[label]()


@pytest.mark.criterion(4, "catalog x admissible tensor residual orders")
def test_criterion_04_catalog_orders():
    orders = {}
    with Budget(180.0) as b:
        for pid, label, entry in _catalog_cases():
            A = _tensor(entry, label)
            distance = entry.extra["phi"].distance if "phi" in entry.extra else None
            errors = []
            for h in HS:
                grid = GridSpec(entry.domain, h, entry.margin, entry.singular_points, distance)
                if entry.equation == "heat":
                    rep = heat_residual(entry.field, A, entry.extra["a"], entry.nonlinearity,
                                        grid, (0.5, 1.0, 2.0))
                else:
                    rep = strong_residual(entry.field, A, entry.nonlinearity, grid)
                errors.append(rep.linf)
            orders[(pid, label)] = _order(HS, errors)
    bad = {k: v for k, v in orders.items() if not ORDER_LO <= v <= ORDER_HI}
    assert not bad, bad
    assert len(orders) == 19
    b.check()


@pytest.mark.xfail(strict=True, reason=(
    "lb_annulus - lb_punctured_disk = -2 log(sin x / x), x = pi log|z| / log r; "
    "at |z| = 0.1, r = 1e-4 this is 0.210, so the 1e-2 bound needs r below about 1e-19"))
@pytest.mark.criterion(5, "annulus limit")
def test_criterion_05_annulus_limit():
    s = np.linspace(0.1, 0.9, 4001) * np.exp(0.7j)
    with Budget(1.0) as b:
        sups = [float(np.max(np.abs(lb_annulus(s, r) - lb_punctured_disk(s))))
                for r in (1e-2, 1e-3, 1e-4)]
    b.check()
    assert sups[0] > sups[1] > sups[2]
    assert sups[-1] <= 1e-2, f"sup difference at r = 1e-4 is {sups[-1]:.4f}"


def _triples():
    entries = catalog()
    lb = entries["lb-disk"].field
    hp = ScalarField(lambda w: halfplane_blowup(w, "log2-over-x2"),
                     lambda w: (-2.0 / np.real(w), np.zeros(np.shape(w))))
    disk = DomainDescriptor.unit_disk()
    window = DomainDescriptor.right_half_plane((0.2, 1.8, -0.8, 0.8))
    return [
        ("identity", lb, identity_map(disk), ConductivityTensor.identity(),
         random_bumps(disk, 10, seed=1, gap=0.05)),
        ("log-spiral", lb, log_spiral_map(), spiral_tensor(),
         random_bumps(disk, 10, seed=2, singular_points=(0j,), gap=0.05)),
        ("horizontal", hp, horizontal_map(0.5 + 0.5j), ConductivityTensor.constant(1, -2, 5),
         random_bumps(window, 10, seed=3, gap=0.05)),
    ]


@pytest.mark.criterion(6, "factorization identity")
def test_criterion_06_factorization_identity():
    hqs = (1 / 128, 1 / 256, 1 / 512)
    worst = {}
    with Budget(30.0) as b:
        for name, T, omega, A, bumps in _triples():
            worst[name] = [max(d.relative for d in
                               factorization_identity_check(T, omega, A, bumps, hq))
                           for hq in hqs]
    for name, seq in worst.items():
        assert seq[-1] <= 1e-4, (name, seq)
        assert seq[0] > seq[1] > seq[2], (name, seq)
    b.check()


def _lb_error(T):
    return float(np.max(np.abs(T.active_values - lb_disk(T.active_points))))


@pytest.mark.criterion(7, "Dirichlet solver on the disk")
def test_criterion_07_dirichlet_solver():
    hs = (1 / 32, 1 / 64, 1 / 128)
    with Budget(120.0) as b:
        fields = [solve_dirichlet(1.0, Nonlinearity.exp(), lb_disk, SolveOptions(h=h), rho=0.9)
                  for h in hs]
        errors = [_lb_error(T) for T in fields]
        order = _order(hs, errors)
        psi = lambda w: np.cos(3 * np.angle(w)) + 0.5 * np.real(w) ** 2  # noqa: E731
        H = solve_dirichlet(1.0, Nonlinearity.zero(), psi, SolveOptions(h=1 / 64), rho=0.9)
        ring = 0.9 * np.exp(2j * np.pi * np.arange(8192) / 8192)
        lo, hi = float(np.min(psi(ring))), float(np.max(psi(ring)))
    assert ORDER_LO <= order <= ORDER_HI, (errors, order)
    for T in fields:
        assert T.converged
        assert T.monotone is True
    assert lo - 1e-12 <= np.min(H.active_values) and np.max(H.active_values) <= hi + 1e-12
    b.check()


@pytest.mark.criterion(8, "end-to-end factorization with the spiral tensor")
def test_criterion_08_end_to_end():
    rng = np.random.default_rng(11)
    n = 4000
    z = 0.9 * (1 - 1e-9) * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    exact = lb_disk(z)
    G = DomainDescriptor.disk(0.9)
    ratios = []
    with Budget(120.0) as b:
        for h in (1 / 64, 1 / 128):
            opts = SolveOptions(h=h)
            res = factorize(spiral_tensor(), G, Nonlinearity.exp(), lb_disk, opts)
            direct = solve_dirichlet(1.0, Nonlinearity.exp(), lb_disk, opts, rho=0.9)
            err_u = float(np.max(np.abs(res.u(z) - exact)))
            err_T = float(np.max(np.abs(direct(z) - exact)))
            ratios.append(err_u / err_T)
            assert res.omega.family == "radial"
    for r in ratios:
        assert 0.5 <= r <= 2.0, ratios
    b.check()


@pytest.mark.criterion(9, "Keller-Osserman diagnostic")
def test_criterion_09_keller_osserman():
    with Budget(1.0) as b:
        v_exp = keller_osserman_check(Nonlinearity.exp()).verdict
        v_sq = keller_osserman_check(lambda t: np.asarray(t) ** 2).verdict
        v_lin = keller_osserman_check(lambda t: np.asarray(t)).verdict
    assert (v_exp, v_sq, v_lin) == ("satisfied", "satisfied", "violated")
    b.check()


@pytest.mark.criterion(10, "stream function")
def test_criterion_10_stream_function():
    omega = horizontal_map(0.5 + 0.5j)
    A = ConductivityTensor.constant(1.0, -2.0, 5.0)
    u = ScalarField(lambda z: np.real(omega(z)))
    # a non-affine A-harmonic function exercises the O(h^2) loop defects
    u2 = ScalarField(lambda z: np.real(np.exp(omega(z))))
    domain = DomainDescriptor.plane()
    loops = []
    with Budget(10.0) as b:
        sf = stream_function(u, A, GridSpec(domain, 1 / 256, 0.1))
        X, Y = np.meshgrid(sf.xs, sf.ys, indexing="ij")
        d = sf.values - (Y + 2 * X)
        defect = float(np.max(np.abs(d - d.mean())))
        for h in HS:
            loops.append(stream_function(u2, A, GridSpec(domain, h, 0.1)).max_loop_defect)
    assert defect <= 1e-6
    assert sf.max_loop_defect <= 1e-6 * sf.scale
    assert ORDER_LO <= _order(HS, loops) <= ORDER_HI, loops
    b.check()
