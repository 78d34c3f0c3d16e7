import json
import math

import numpy as np
import pytest

import prodgeom as pg


def test_hat_mab_suite_passes():
    reports = pg.verify_suite(pg.family_hatMab(), n_samples=8, seed=3)
    assert pg.all_pass(reports)
    names = [r.name for r in reports]
    assert "kappa_spread" in names


def test_frame_on_mab_matches_closed_form_b1():
    im = pg.family_Mab()
    s = np.array([0.4, 0.3, -0.2])
    f = pg.build_frame(im, s)
    assert abs(f.C) < 1e-8
    assert abs(f.b[0] - math.tan(0.4 / math.sqrt(2)) / math.sqrt(2)) < 1e-5


def test_report_json_is_deterministic():
    a = pg.reports_to_json(pg.verify_suite(pg.family_Mt(0.3), n_samples=4, seed=9))
    b = pg.reports_to_json(pg.verify_suite(pg.family_Mt(0.3), n_samples=4, seed=9))
    assert a == b
    assert json.loads(a)["schema"] == 1


def test_sinh_gordon_soliton_and_corruption():
    gs = pg.solve_sinh_gordon(48, "soliton")
    assert gs.residual < 1e-10
    u = np.linspace(0.0, 1.0, gs.nu)
    oracle = np.array([pg.soliton_profile(x) for x in u])
    assert np.max(np.abs(gs.h - oracle[:, None])) < 1e-4
    by_name = {r.name: r for r in pg.intrinsic_checks(gs, 10, 2)}
    assert by_name["sg_e_frame_system"].passed
    bad = gs.copy()
    bad.set_node(20, 20, gs.h[20, 20] + 0.01)
    by_name = {r.name: r for r in pg.intrinsic_checks(bad, 10, 2)}
    assert by_name["sg_e_frame_system"].max_residual > 1e-2


def test_parallel_formulas():
    assert pg.mean_curvature_r(pg.MINIMAL_DISTANCE, 1.0, 0.0, 0.5) == 0.0
    assert pg.parallel_ricci_minimal(0.2, -0.4, pg.MINIMAL_DISTANCE) == (1.0, 1.0)
    ar = pg.A_r(0.7, 0.3, 0.1, -0.2)
    assert np.allclose(ar, pg.A_r_jacobi(0.7, 0.3, 0.1, -0.2), atol=1e-12)


def test_contract_violation_raises():
    with pytest.raises(pg.ContractError):
        pg.mean_curvature_r(0.3, 0.1, 0.0, 0.1)
    with pytest.raises(pg.ContractError):
        pg.theorem46_check(pg.family_Mt(0.3), n_samples=4)
