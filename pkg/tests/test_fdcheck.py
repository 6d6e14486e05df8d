import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dngedge import fdcheck, families
from dngedge.deformation import DeformationField
from dngedge.errors import InputError
from dngedge.fields import Constant
from dngedge.spacetime import minkowski
from dngedge.worldsheet import jet_at

M = minkowski()


def test_zero_eps_is_identity():
    b, e = families.build("catenoid")
    pb, pe = fdcheck.perturb_embedding(b, e, fdcheck.random_field(4), 0.0)
    assert pe is e
    for xi in b.domain.grid([4, 4]):
        for a, c in zip(pb.jet(xi), b.jet(xi)):
            assert np.array_equal(a, c)


def test_unit_psi_moves_endpoint_outward():
    b, e = families.build("helicoid", omega0=0.5, R=1.0)
    f = DeformationField(Constant(1.0), [Constant(0.0), Constant(0.0)])
    pb, _ = fdcheck.perturb_embedding(b, e, f, 1e-3)
    x = pb.position(np.array([0.0, 1.0]))
    assert abs(np.hypot(x[1], x[2]) - (1.0 + 1e-3)) < 1e-12


def test_rigid_translation_leaves_curvature():
    b, e = families.build("helicoid", omega0=0.6)
    f = DeformationField(Constant(0.0), [Constant(0.0), Constant(1.0)])  # second normal is z
    pb, _ = fdcheck.perturb_embedding(b, e, f, 0.05)
    for xi in b.domain.grid([4, 4], margin=0.1):
        assert np.max(np.abs(jet_at(pb, M, xi).K - jet_at(b, M, xi).K)) <= 1e-11


def test_eps_schedule_validated():
    with pytest.raises(InputError):
        fdcheck.VerificationCase("delh", "plane", eps=(1e-2, 5e-3))
    with pytest.raises(InputError):
        fdcheck.VerificationCase("delh", "plane", eps=(1e-2, 2e-2, 1e-3))


def test_richardson_exact_on_polynomial():
    eps = np.array([0.1, 0.05, 0.025])
    q = [3.0 + 2 * e ** 2 - 5 * e ** 4 for e in eps]
    assert abs(fdcheck.richardson(q, 2.0) - 3.0) < 1e-13
    assert abs(fdcheck.observed_order(q, 2.0, 1e-14) - 2.0) < 0.05


def test_delh_cosine_on_helicoid():
    case = fdcheck.VerificationCase("delh", "helicoid", {"omega0": 0.5},
                                    {"kind": "expression", "psi": "cos(t)", "phi": ["0", "0"]})
    r = fdcheck.measure_response(case)
    assert r.rel_error <= 1e-5 and r.passed


def test_dbkab_consistency_off_shell():
    case = fdcheck.VerificationCase("dbkab-consistency", "helicoid", {"omega0": 0.5, "alpha": 0.4},
                                    {"kind": "deterministic", "index": 0, "psi_only": True})
    r = fdcheck.measure_response(case)
    assert r.passed and r.rel_error <= 1e-4


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6))
def test_deltrk_random_fields(seed):
    case = fdcheck.VerificationCase("deltrk", "catenoid", field={"kind": "random", "seed": seed})
    r = fdcheck.measure_response(case)
    assert r.passed, r.to_json()
    assert r.order is None or 1.7 <= r.order <= 2.3


def test_plane_suite_exact():
    reports = fdcheck.run_suite(fdcheck.PLANE_SUITE)
    assert all(r.passed for r in reports)
    assert max(r.abs_error for r in reports) <= 1e-10


def test_single_case_replay_bitwise():
    case = fdcheck.suite_cases({"seed": 7})[40]
    first = fdcheck.measure_response(case).to_json()
    fdcheck._RAW_CACHE.clear()
    assert fdcheck.measure_response(case).to_json() == first


def test_parallel_equals_serial():
    cfg = dict(fdcheck.PLANE_SUITE, families=[["cylinder", {}]], deterministic=1, random=1)
    a = fdcheck.summarize(fdcheck.run_suite(cfg, jobs=1))
    b = fdcheck.summarize(fdcheck.run_suite(cfg, jobs=2))
    assert a["digest"] == b["digest"]


def test_cutoff_width_independence():
    b, e = families.build("catenoid")
    f = fdcheck.random_field(9)
    eps = fdcheck.DEFAULT_EPS
    outs = []
    for width in (0.1, 0.25):
        _, raw = fdcheck._raw(b, e, f, M, [0.3], eps, width=width)
        outs.append(fdcheck.richardson(raw.q["hat_L"], 2.0))
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-7


def test_unsupported_edge_rejected():
    b = families.Helicoid(Rdot=0.1)
    with pytest.raises(InputError):
        fdcheck.deformation_vector(b, b.edge(), fdcheck.random_field(0), M)


def test_report_json_roundtrip():
    r = fdcheck.measure_response(fdcheck.VerificationCase("goi", "cylinder"))
    d = json.loads(r.to_json())
    assert d["case"]["identity"] == "goi" and d["passed"] is True
