from dataclasses import replace

import numpy as np

from gcplift import suite
from gcplift.config import load_config
from gcplift.lift import flat_spectrum


def test_compressed_spectrum_agrees_with_plain():
    cfg = replace(load_config(), K=1, M=2)
    inst, L = suite.instance_lift(cfg)
    lam, lead = suite._compressed_eigensystem(L, inst.module)
    assert np.abs(np.sort(lam) - flat_spectrum(1, 2, 2)).max() < 1e-8
    assert lead.shape == lam.shape


def test_trig_frame_spectrum_rows():
    cfg = replace(load_config(), kind="twisted-module", frame="trig", K=1, M=2)
    inst, L = suite.instance_lift(cfg)
    rows = suite.spectrum_rows(L, inst.module)
    total = sum(m for _, m in rows)
    # a line bundle contributes at most one vector per degree, mode and spinor
    assert 0 < total <= 3 * 25 * 2
    assert all(abs(deg) <= 1 for (deg, _, _), _ in rows)


def test_qhm_with_c_nonzero_skips_fourier_side_checks():
    cfg = load_config("configs/qhm_c1.ini")
    results = {r.name: r for r in suite.run_checks(cfg)}
    assert results["gcp_relations"].status == "SKIP"
    assert results["qhm_connexion_convergence"].status == "PASS"
    assert results["qhm_connexion_convergence"].residual >= 12
    assert results["qhm_frame"].status == "PASS"


def test_check_result_formatting():
    r = suite.below("x", 3e-15, 1e-9)
    assert r.status == "PASS" and r.as_dict()["residual"] == "0.000000e+00"
    assert suite.below("x", float("nan"), 1e-9).status == "FAIL"
    assert suite.above("x", 13.0, 12.0).as_dict()["criterion"] == "at_least"
    assert suite.skipped("x", "why").as_dict()["detail"] == {"reason": "why"}
