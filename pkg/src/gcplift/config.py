"""Run configuration: an INI file with a handful of sections.

Example::

    [instance]
    kind = qhm            ; flat-torus | twisted-module | qhm
    n = 2                 ; torus dimension (flat-torus only)
    frame = unit          ; unit | trig

    [cutoffs]
    K = 3
    M = 4
    ladder = 3x4, 4x6, 5x8

    [twist]
    mu = 1/8
    nu = 0

    [qhm]
    c = 0
    mu_num = 1
    mu_den = 8
    nu_num = 0
    nu_den = 1
    N = 16
    K = 3

    [tolerances]
    residual = 1e-9
    stability = 0.01

    [sampling]
    seed = 0
    samples = 3

    [connexion]
    perturb = 0.0

    [heat]
    times = 0.01, 0.1, 1

    [output]
    dir = out
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

KINDS = ("flat-torus", "twisted-module", "qhm")
FRAMES = ("unit", "trig")

_DEFAULT_LADDERS = {
    "flat-torus": [(3, 4), (4, 6), (5, 8)],
    "twisted-module": [(1, 6), (2, 8), (3, 10)],
    "qhm": [(3, 4), (4, 6), (5, 8)],
}
_DEFAULT_CUTOFFS = {"flat-torus": (4, 4), "twisted-module": (1, 4), "qhm": (3, 4)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class QHMBlock:
    c: int = 0
    mu: Fraction = Fraction(1, 8)
    nu: Fraction = Fraction(0)
    N: int = 16
    K: int = 3


@dataclass(frozen=True)
class RunConfig:
    kind: str = "flat-torus"
    n: int = 2
    frame: str = "unit"
    K: int = 4
    M: int = 4
    ladder: tuple = ((3, 4), (4, 6), (5, 8))
    mu: Fraction = Fraction(0)
    nu: Fraction = Fraction(0)
    qhm: QHMBlock = field(default_factory=QHMBlock)
    residual_tol: float = 1e-9
    stability_tol: float = 0.01
    seed: int = 0
    samples: int = 3
    perturb: float = 0.0
    heat_times: tuple = (0.01, 0.1, 1.0)
    out_dir: str | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown instance kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.frame not in FRAMES:
            raise ConfigError(f"unknown frame {self.frame!r}")
        if self.n < 1:
            raise ConfigError("torus dimension must be positive")
        if self.kind != "flat-torus" and self.n != 2:
            raise ConfigError(f"{self.kind} lives over the 2-torus")
        if self.K < 0 or self.M < 0:
            raise ConfigError("cutoffs must be nonnegative")
        if self.residual_tol <= 0 or self.stability_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.samples < 1:
            raise ConfigError("at least one sample is required")
        if any(t <= 0 for t in self.heat_times):
            raise ConfigError("heat-trace times must be positive")
        check_ladder(self.ladder)
        if self.kind == "qhm":
            q = self.qhm
            for name, v in (("mu", q.mu), ("nu", q.nu)):
                if (v * q.N).denominator != 1:
                    raise ConfigError(f"qhm {name} = {v} is not a multiple of 1/N = 1/{q.N}")
            if q.N < 12:
                raise ConfigError("qhm grid size N must be at least 12")
        return self


def check_ladder(ladder):
    if not ladder:
        raise ConfigError("the truncation ladder is empty")
    for (k0, m0), (k1, m1) in zip(ladder, ladder[1:]):
        if not (k1 > k0 and m1 > m0):
            raise ConfigError("ladder must be strictly increasing in both K and M")
    if any(k < 0 or m < 0 for k, m in ladder):
        raise ConfigError("ladder entries must be nonnegative")


def parse_ladder(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("the truncation ladder is empty")
    out = []
    for item in text.split(","):
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", item)
        if not m:
            raise ConfigError(f"cannot parse ladder entry {item!r}; expected KxM")
        out.append((int(m.group(1)), int(m.group(2))))
    check_ladder(out)
    return tuple(out)


def _fraction(text, what):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {what} = {text!r}") from exc


def load_config(path=None, overrides=None) -> RunConfig:
    """Read a config file (or use defaults) and apply command-line overrides."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
    try:
        cfg = _from_parser(cp)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def _from_parser(cp) -> RunConfig:
    def get(section, key, fallback):
        return cp.get(section, key, fallback=fallback) if cp.has_section(section) else fallback

    kind = get("instance", "kind", "flat-torus").strip()
    if kind not in KINDS:
        raise ConfigError(f"unknown instance kind {kind!r}; expected one of {', '.join(KINDS)}")
    frame = get("instance", "frame", "trig" if kind == "twisted-module" else "unit").strip()
    n = int(get("instance", "n", "2"))
    K0, M0 = _DEFAULT_CUTOFFS[kind]
    K = int(get("cutoffs", "K", str(K0)))
    M = int(get("cutoffs", "M", str(M0)))
    lad = get("cutoffs", "ladder", None)
    ladder = parse_ladder(lad) if lad is not None else tuple(_DEFAULT_LADDERS[kind])
    mu = _fraction(get("twist", "mu", "1/8" if kind == "twisted-module" else "0"), "mu")
    nu = _fraction(get("twist", "nu", "0"), "nu")
    try:
        q = QHMBlock(
            c=int(get("qhm", "c", "0")),
            mu=Fraction(int(get("qhm", "mu_num", "1")), int(get("qhm", "mu_den", "8"))),
            nu=Fraction(int(get("qhm", "nu_num", "0")), int(get("qhm", "nu_den", "1"))),
            N=int(get("qhm", "N", "16")),
            K=int(get("qhm", "K", "3")),
        )
    except ZeroDivisionError as exc:
        raise ConfigError("qhm denominators must be nonzero") from exc
    times = tuple(float(t) for t in get("heat", "times", "0.01, 0.1, 1").split(",") if t.strip())
    return RunConfig(
        kind=kind, n=n, frame=frame, K=K, M=M, ladder=ladder, mu=mu, nu=nu, qhm=q,
        residual_tol=float(get("tolerances", "residual", "1e-9")),
        stability_tol=float(get("tolerances", "stability", "0.01")),
        seed=int(get("sampling", "seed", "0")),
        samples=int(get("sampling", "samples", "3")),
        perturb=float(get("connexion", "perturb", "0.0")),
        heat_times=times,
        out_dir=get("output", "dir", None),
    )
