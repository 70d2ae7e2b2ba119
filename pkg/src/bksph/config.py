"""Run configuration: a JSON document describing one reproducible run.

Every tolerance and quadrature setting used by a run lives here, with
explicit defaults that are written back into the diagnostics file.
"""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import BKError, ConfigInvalid
from .rootdata import RepData, RootDatum, validate

SCHEMA_VERSION = 1
SUBCOMMANDS = ("gamma", "tate-check", "descent-check", "transform", "verify-lfe", "lfactor")
GROUPS = ("GL1", "GL2", "SL2")

DEFAULT_TOLERANCES = {
    "tate": 1e-6,
    "gamma_reflection": 1e-10,
    "descent": 1e-4,
    "w_defect": 1e-3,
    "lfe": 1e-3,
    "gj": 1e-6,
    "gj_slow": 1e-2,
    "series": 1e-12,
    "fourier": None,  # None: 1e-12 on GL1, 1e-9 otherwise
    "separation": 1e-10,
    "tail": None,  # None: group default of the spectral grid
}

DEFAULT_QUADRATURE = {
    "cheb_nodes": 64,
    "bump_radius": 1.0,
    "bump_margin": 0.25,
    "spectral_dy": 0.1,
    "spectral_y_max": None,
    "spectral_zeta_max": 80.0,
    "spectral_tau_max": 60.0,
    "series_terms": 60,
}

DEFAULT_GRIDS = {
    # complex numbers are written as [re, im]
    "tate_re": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "tate_im": [-10.0, -5.0, 0.0, 5.0, 10.0],
    # None: filled in from the rank and s0 by RunConfig.expand_grids
    "nu": None,
    "s": None,
    "lambda": None,
    "points": [],
}


def _merge(defaults: dict, given: dict | None, where: str, errors: list) -> dict:
    out = dict(defaults)
    for k, v in (given or {}).items():
        if k not in defaults:
            errors.append(f"{where}.{k}: unknown key")
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    group: list
    rep: dict
    p: float = 1.0
    s0: float = 0.75
    grids: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)
    test_function: dict = field(default_factory=lambda: {"kind": "bump", "center": 0.0, "halfwidth": 0.6,
                                                         "r_radius": 1.2})
    tate_profiles: list = field(default_factory=lambda: [{"kind": "bump", "center": 1.0, "halfwidth": 0.5},
                                                         {"kind": "bump", "center": 0.0, "halfwidth": 1.5},
                                                         {"kind": "gaussian"},
                                                         {"kind": "odd_bump", "halfwidth": 1.0},
                                                         {"kind": "odd_gaussian"}])
    lfactor: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    out: str = "bksph-out"

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        errors: list[str] = []
        if not isinstance(data, dict):
            raise ConfigInvalid("top level must be an object")
        known = set(cls.__dataclass_fields__)
        for k in data:
            if k not in known:
                errors.append(f"{k}: unknown key")
        for k in ("group", "rep"):
            if k not in data:
                errors.append(f"{k}: required")
        if errors:
            raise ConfigInvalid(errors)
        kw = {k: copy.deepcopy(v) for k, v in data.items()}
        kw["grids"] = _merge(DEFAULT_GRIDS, kw.get("grids"), "grids", errors)
        kw["tolerances"] = _merge(DEFAULT_TOLERANCES, kw.get("tolerances"), "tolerances", errors)
        kw["quadrature"] = _merge(DEFAULT_QUADRATURE, kw.get("quadrature"), "quadrature", errors)
        if errors:
            raise ConfigInvalid(errors)
        cfg = cls(**kw)
        cfg.validate()
        cfg.expand_grids()
        return cfg

    def expand_grids(self) -> None:
        """Replace ``None`` grids by explicit defaults so reports show what was used."""
        rank = self.datum.rank
        g = self.grids
        if g["nu"] is None:
            g["nu"] = [[[0.0, 0.0]] * rank]
        if g["s"] is None:
            g["s"] = [[1.0 - float(self.s0), float(y)] for y in (-4.0, -2.0, 0.0, 2.0, 4.0)]
        if g["lambda"] is None:
            ys = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
            # seven points of i a*, off the walls for rank 2
            g["lambda"] = [[[0.0, y]] if rank == 1 else [[0.0, y], [0.0, -0.5 * y + 0.3]] for y in ys]

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigInvalid(f"config: no such file {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config: not valid JSON ({exc})") from None
        return cls.from_dict(data)

    # validation ------------------------------------------------------------
    def validate(self) -> None:
        errors = []
        if not isinstance(self.group, list) or not self.group:
            errors.append("group: must be a nonempty list of factors")
        elif any(g not in GROUPS for g in self.group):
            errors.append(f"group: factors must be among {GROUPS}")
        elif len(self.group) > 1:
            errors.append("group: only a single factor is supported")
        for k in ("weights", "omega", "N"):
            if k not in self.rep:
                errors.append(f"rep.{k}: required")
        if not isinstance(self.p, (int, float)) or not 0 < self.p <= 1:
            errors.append("p: must lie in (0, 1]")
        if not isinstance(self.s0, (int, float)):
            errors.append("s0: must be a number")
        for k, v in self.tolerances.items():
            if v is not None and (not isinstance(v, (int, float)) or v <= 0):
                errors.append(f"tolerances.{k}: must be a positive number or null")
        for c in self.checks:
            if c not in SUBCOMMANDS:
                errors.append(f"checks: unknown check {c!r}")
        if errors:
            raise ConfigInvalid(errors)
        try:
            validate(self.datum, self.rep_data)
        except BKError as exc:
            raise ConfigInvalid(f"rep: {type(exc).__name__}: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"rep: {exc}") from exc

    # derived objects -------------------------------------------------------
    @property
    def datum(self) -> RootDatum:
        g = self.group[0]
        return RootDatum.sl2() if g == "SL2" else RootDatum.gl(1 if g == "GL1" else 2)

    @property
    def rep_data(self) -> RepData:
        r = self.rep
        return RepData(tuple(tuple(int(x) for x in m) for m in r["weights"]),
                       tuple(Fraction(x) for x in r["omega"]), int(r["N"]), name=r.get("name", ""))

    def enabled(self, check: str) -> bool:
        """Assertions are enforced for every subcommand unless ``checks`` restricts them."""
        return not self.checks or check in self.checks


def as_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigInvalid(f"complex numbers are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def as_satake_coordinate(x):
    """Integers and ``"a/b"`` strings stay exact; floats and ``[re, im]`` become complex."""
    if isinstance(x, bool):
        raise ConfigInvalid("Satake coordinates cannot be booleans")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return as_complex(x)
