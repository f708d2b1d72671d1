from fractions import Fraction

import pytest

from gcplift.config import ConfigError, load_config, parse_ladder


def write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


def test_defaults():
    cfg = load_config()
    assert cfg.kind == "flat-torus" and cfg.ladder == ((3, 4), (4, 6), (5, 8))
    assert cfg.residual_tol == 1e-9 and cfg.stability_tol == 0.01


def test_full_file(tmp_path):
    cfg = load_config(write(tmp_path, """
[instance]
kind = qhm
[cutoffs]
ladder = 2x3, 3x5
[qhm]
c = 1
mu_num = 1
mu_den = 16
N = 32
[tolerances]
residual = 1e-8  ; comment
[heat]
times = 0.5, 2
"""))
    assert cfg.kind == "qhm" and cfg.qhm.c == 1 and cfg.qhm.mu == Fraction(1, 16) and cfg.qhm.N == 32
    assert cfg.ladder == ((2, 3), (3, 5)) and cfg.residual_tol == 1e-8
    assert cfg.heat_times == (0.5, 2.0)


def test_twisted_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "[instance]\nkind = twisted-module\n"))
    assert cfg.frame == "trig" and cfg.mu == Fraction(1, 8)


def test_overrides(tmp_path):
    cfg = load_config(None, {"seed": 7, "residual_tol": None, "ladder": ((1, 2), (2, 3))})
    assert cfg.seed == 7 and cfg.residual_tol == 1e-9 and cfg.ladder == ((1, 2), (2, 3))


@pytest.mark.parametrize("text", [
    "[instance]\nkind = sphere\n",
    "[instance]\nframe = spiral\n",
    "[instance]\nkind = qhm\nn = 3\n",
    "[cutoffs]\nladder = 3x4, 3x6\n",
    "[cutoffs]\nladder = 3x4, 4by6\n",
    "[cutoffs]\nK = -1\n",
    "[tolerances]\nresidual = 0\n",
    "[qhm]\nmu_num = 1\nmu_den = 3\n[instance]\nkind = qhm\n",
    "[qhm]\nN = 8\nmu_den = 8\n[instance]\nkind = qhm\n",
    "[qhm]\nmu_den = 0\n",
    "[twist]\nmu = one\n",
    "[sampling]\nsamples = 0\n",
    "[heat]\ntimes = 1, -1\n",
    "[sampling]\nseed = x\n",
    "not an ini file",
])
def test_rejections(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_parse_ladder():
    assert parse_ladder(" 1x2 ,2X4") == ((1, 2), (2, 4))
    for bad in ["", "1x2,1x3", "1x", "axb"]:
        with pytest.raises(ConfigError):
            parse_ladder(bad)
