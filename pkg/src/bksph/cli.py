"""Command line entry point: ``bksph <subcommand> --config <path> [--out <dir>] [--slow]``.

Each subcommand writes ``<subcommand>.csv`` (tables) and ``<subcommand>.json``
(diagnostics: schema version, the fully expanded config, tolerances, summary
numbers and per-check status).  The exit status is 1 if any enabled check
fails, 2 for an invalid config, 0 otherwise.

CSV columns
-----------
gamma          s_re, s_im, nu (";"-joined re:im), gamma_re, gamma_im, reflection_err
tate-check     profile, eta, s_re, s_im, z_re, z_im, dual_re, dual_im, rel_err
descent-check  lam (";"-joined re:im), spherical_re, spherical_im, mellin_re, mellin_im, rel_err
transform      c, r, h, transform    (plus nu, H_re, H_im rows in transform_spectral.csv)
verify-lfe     nu, s_re, s_im, pole, lhs_re, lhs_im, rhs_re, rhs_im, rel_err
lfactor        v, q_v, value_re, value_im, series_err
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import archchar, satake
from .bktransform import PipelineConfig, bk_transform, gj_oracle, verify_lfe
from .config import SCHEMA_VERSION, SUBCOMMANDS, RunConfig, as_complex, as_satake_coordinate
from .errors import BKError, ConfigInvalid
from .spherical import (GroupModel, SmoothBiKFunction, SpectralGrid, constant_term, constant_term_support,
                        gl1_bump, gl2_bump, spherical_transform, torus_mellin)
from .torustf import BumpSpec, Profile, fourier_profile, tate_zeta

log = logging.getLogger("bksph")


def _fmt(x) -> str:
    # repr of a float round-trips exactly and is platform independent
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _cvec(v) -> str:
    return ";".join(f"{_fmt(complex(z).real)}:{_fmt(complex(z).imag)}" for z in np.atleast_1d(v))


def _jsonable(x):
    # wall-clock timings are dropped so repeated runs give identical files
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items() if k != "seconds"}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Fraction):
        return str(x)
    return x


class Run:
    """Collects rows and checks for one subcommand and writes the artifacts."""

    def __init__(self, name: str, cfg: RunConfig, out: Path):
        self.name, self.cfg, self.out = name, cfg, out
        self.checks: dict = {}
        self.summary: dict = {}

    def check(self, label: str, value: float, tol: float, enabled: bool = True):
        ok = bool(np.isfinite(value) and value <= tol)
        self.checks[label] = {"value": float(value), "tol": float(tol), "ok": ok, "enforced": enabled}
        log.info("%s %s: %.3e (tol %.1e)", "PASS" if ok else "FAIL", label, value, tol)

    @property
    def failed(self) -> bool:
        return any(c["enforced"] and not c["ok"] for c in self.checks.values())

    def write_csv(self, header, rows, suffix: str = ""):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / f"{self.name}{suffix}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])

    def write_json(self):
        self.out.mkdir(parents=True, exist_ok=True)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "subcommand": self.name,
            "config": self.cfg.to_dict(),
            "tolerances": self.cfg.tolerances,
            "quadrature": self.cfg.quadrature,
            "checks": self.checks,
            "summary": self.summary,
            "status": "fail" if self.failed else "ok",
        }
        (self.out / f"{self.name}.json").write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------
def _tate_profile(spec: dict) -> Profile:
    kind = spec.get("kind")
    if kind == "bump":
        return Profile.bump(float(spec["center"]), float(spec["halfwidth"]))
    if kind == "odd_bump":
        return Profile.odd_bump(float(spec["halfwidth"]))
    if kind == "gaussian":
        return Profile.gaussian()
    if kind == "odd_gaussian":
        return Profile.odd_gaussian()
    raise ConfigInvalid(f"tate_profiles: unknown kind {kind!r}")


def _group_model(cfg: RunConfig) -> GroupModel:
    g = cfg.group[0]
    if g == "SL2":
        raise ConfigInvalid("group: SL2 is supported for gamma and lfactor only")
    return GroupModel.gl1() if g == "GL1" else GroupModel.gl2()


def _test_function(cfg: RunConfig, gm: GroupModel) -> SmoothBiKFunction:
    tf = cfg.test_function
    if tf.get("kind", "bump") != "bump":
        raise ConfigInvalid("test_function.kind: only 'bump' is available")
    a = tf.get("sharpness")
    if gm == GroupModel.gl1():
        return SmoothBiKFunction.single(gl1_bump(float(tf.get("center", 0.0)), float(tf.get("halfwidth", 1.0)), a))
    return SmoothBiKFunction.single(gl2_bump(float(tf.get("center", 0.0)), float(tf.get("halfwidth", 0.6)),
                                             float(tf.get("r_radius", 1.2)), a))


def _pipeline(cfg: RunConfig) -> PipelineConfig:
    gm = _group_model(cfg)
    q, t = cfg.quadrature, cfg.tolerances
    base = SpectralGrid.default_for(gm)
    grid = SpectralGrid(dy=q["spectral_dy"], y_max=q["spectral_y_max"] or base.y_max,
                        zeta_max=q["spectral_zeta_max"], tau_max=q["spectral_tau_max"],
                        tail_tol=t["tail"] or base.tail_tol)
    bs = BumpSpec(radius=q["bump_radius"], cheb_nodes=int(q["cheb_nodes"]), margin=q["bump_margin"],
                  separation_tol=t["separation"])
    pc = PipelineConfig(gm, cfg.rep_data, p=float(cfg.p), s0=float(cfg.s0), grid=grid, bump_spec=bs,
                        fourier_tol=t["fourier"], w_tol=t["w_defect"])
    pc.check()
    return pc


def _nus(cfg: RunConfig, rank: int) -> np.ndarray:
    out = np.array([[as_complex(z) for z in nu] for nu in cfg.grids["nu"]], dtype=complex)
    if out.ndim != 2 or out.shape[1] != rank:
        raise ConfigInvalid(f"grids.nu: entries must have length {rank}")
    return out


def _ss(cfg: RunConfig) -> np.ndarray:
    return np.array([as_complex(s) for s in cfg.grids["s"]], dtype=complex)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------
def cmd_gamma(cfg: RunConfig, run: Run, slow: bool):
    rep = cfg.rep_data
    nus = _nus(cfg, rep.rank)
    rows, worst = [], 0.0
    for nu in nus:
        for s in _ss(cfg):
            g = complex(archchar.gamma_rep(rep, nu, s))
            # gamma(s) gamma(1-s) for the contragredient is 1 for trivial sign components
            refl = complex(archchar.gamma_rep(rep, -nu, 1 - s))
            err = abs(g * refl - 1.0)
            worst = max(worst, err)
            rows.append([_fmt(s.real), _fmt(s.imag), _cvec(nu), _fmt(g.real), _fmt(g.imag), _fmt(err)])
    run.write_csv(["s_re", "s_im", "nu", "gamma_re", "gamma_im", "reflection_err"], rows)
    run.check("gamma_reflection", worst, cfg.tolerances["gamma_reflection"], cfg.enabled("gamma"))


def cmd_tate(cfg: RunConfig, run: Run, slow: bool):
    re = np.asarray(cfg.grids["tate_re"], dtype=float)
    im = np.asarray(cfg.grids["tate_im"], dtype=float)
    S = (re[:, None] + 1j * im[None, :]).ravel()
    rows, worst = [], 0.0
    for spec in cfg.tate_profiles:
        prof = _tate_profile(spec)
        fh = fourier_profile(prof)
        for eta_name, eta in (("trivial", archchar.TRIVIAL), ("sgn", archchar.SGN)):
            if prof.parity != eta.at_minus_one():
                continue
            z = tate_zeta(prof, eta, S)
            dual = tate_zeta(fh, eta.inverse(), 1 - S)
            err = np.abs(dual - archchar.gamma_quasicharacter(eta, S) * z) / np.abs(z)
            worst = max(worst, float(err.max()))
            for s, a, b, e in zip(S, z, dual, err):
                rows.append([prof.name, eta_name, _fmt(s.real), _fmt(s.imag), _fmt(a.real), _fmt(a.imag),
                             _fmt(b.real), _fmt(b.imag), _fmt(e)])
    run.write_csv(["profile", "eta", "s_re", "s_im", "z_re", "z_im", "dual_re", "dual_im", "rel_err"], rows)
    run.summary["max_rel_err"] = worst
    run.check("tate_fe", worst, cfg.tolerances["tate"], cfg.enabled("tate-check"))


def cmd_descent(cfg: RunConfig, run: Run, slow: bool):
    gm = _group_model(cfg)
    f = _test_function(cfg, gm)
    lams = np.array([[as_complex(z) for z in lam] for lam in cfg.grids["lambda"]], dtype=complex)
    if lams.ndim != 2 or lams.shape[1] != gm.rank:
        raise ConfigInvalid(f"grids.lambda: entries must have length {gm.rank}")
    sph = np.atleast_1d(spherical_transform(f, -lams))
    mel = np.atleast_1d(torus_mellin(lambda H: constant_term(f, H), constant_term_support(f), lams))
    err = np.abs(sph - mel) / np.abs(sph)
    rows = [[_cvec(l), _fmt(a.real), _fmt(a.imag), _fmt(b.real), _fmt(b.imag), _fmt(e)]
            for l, a, b, e in zip(lams, sph, mel, err)]
    run.write_csv(["lam", "spherical_re", "spherical_im", "mellin_re", "mellin_im", "rel_err"], rows)
    run.check("descent", float(err.max()), cfg.tolerances["descent"], cfg.enabled("descent-check"))


def cmd_transform(cfg: RunConfig, run: Run, slow: bool):
    pc = _pipeline(cfg)
    f = _test_function(cfg, pc.gm)
    res = bk_transform(f, pc)
    run.summary["pipeline"] = res.diagnostics
    run.check("w_defect", res.diagnostics["w_defect"], cfg.tolerances["w_defect"], cfg.enabled("transform"))
    nus = _nus(cfg, pc.gm.rank)
    H = np.atleast_1d(res.H(nus))
    run.write_csv(["nu", "H_re", "H_im"], [[_cvec(n), _fmt(h.real), _fmt(h.imag)] for n, h in zip(nus, H)],
                  "_spectral")
    pts = [tuple(p) if isinstance(p, (list, tuple)) else (p, 0.0) for p in cfg.grids["points"]]
    rows = []
    for c, r in pts:
        h = float(np.atleast_1d(res.h(c, None if pc.gm == GroupModel.gl1() else r))[0])
        rows.append([_fmt(c), _fmt(r), _fmt(h), _fmt(h * float(res.omega(c)))])
    run.write_csv(["c", "r", "h", "transform"], rows)
    if pts:
        run.summary["inverse"] = res.diagnostics.get("inverse")
    if pc.rep.name in ("std1", "std2") and (pc.gm == GroupModel.gl1() or slow):
        gj = gj_oracle(f, pc, None if not pts or pc.gm == GroupModel.gl1() else np.array(pts), res, slow=slow)
        tol = cfg.tolerances["gj"] if pc.gm == GroupModel.gl1() else cfg.tolerances["gj_slow"]
        log.info("Godement-Jacquet oracle: %.1f s", gj.seconds)
        run.check("godement_jacquet", gj.max_rel, tol, cfg.enabled("transform"))


def cmd_verify_lfe(cfg: RunConfig, run: Run, slow: bool):
    pc = _pipeline(cfg)
    f = _test_function(cfg, pc.gm)
    res = bk_transform(f, pc)
    rep = verify_lfe(f, _nus(cfg, pc.gm.rank), _ss(cfg), pc, res)
    rows = []
    for r in rep.rows:
        lhs, rhs = complex(r["lhs"]), complex(r["rhs"])
        rows.append([_cvec(r["nu"]), _fmt(r["s"].real), _fmt(r["s"].imag), _fmt(r["pole"]), _fmt(lhs.real),
                     _fmt(lhs.imag), _fmt(rhs.real), _fmt(rhs.imag), _fmt(r["rel_err"])])
    run.write_csv(["nu", "s_re", "s_im", "pole", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_err"], rows)
    run.summary.update(pipeline=res.diagnostics, max_abs_err=rep.max_abs)
    run.check("w_defect", res.diagnostics["w_defect"], cfg.tolerances["w_defect"], cfg.enabled("verify-lfe"))
    run.check("lfe", rep.max_rel, cfg.tolerances["lfe"], cfg.enabled("verify-lfe"))


def cmd_lfactor(cfg: RunConfig, run: Run, slow: bool):
    rep = cfg.rep_data
    lf = cfg.lfactor
    s_raw = lf.get("s", 2)
    s = int(s_raw) if isinstance(s_raw, int) else as_complex(s_raw)
    if "places" in lf:
        params = [satake.SatakeParam(tuple(as_satake_coordinate(x) for x in p["t"]), int(p["q"]))
                  for p in lf["places"]]
    else:
        t = tuple(as_satake_coordinate(x) for x in lf.get("t", [1] * rep.rank))
        params = [satake.SatakeParam(t, int(p)) for p in satake.primes_up_to(int(lf.get("primes_up_to", 100)))]
    K = int(cfg.quadrature["series_terms"])
    rows, worst = [], 0.0
    for v, sp in enumerate(params):
        val = satake.local_L(rep, sp, s, cfg.datum)
        mu = satake.eigenvalues(rep, sp, cfg.datum)
        x = complex(sp.q) ** (-complex(s))
        err = float("nan")
        if max(abs(complex(m) * x) for m in mu) < 0.5:
            h = satake.complete_homogeneous([complex(m) for m in mu], K)
            series = sum(hk * x**k for k, hk in enumerate(h))
            err = abs(series - complex(val)) / abs(complex(val))
            worst = max(worst, err)
        vv = complex(val)
        rows.append([_fmt(v), _fmt(sp.q), _fmt(vv.real), _fmt(vv.imag), _fmt(err)])
    run.write_csv(["v", "q_v", "value_re", "value_im", "series_err"], rows)
    total = satake.partial_L(rep, params, s, cfg.datum)
    run.summary["partial_L"] = complex(total)
    if isinstance(total, Fraction):
        run.summary["partial_L_exact"] = str(total)
    qs = sorted(sp.q for sp in params)
    if qs and complex(s).real > 1 and qs == satake.primes_up_to(qs[-1]).tolist():
        run.summary["tempered_tail_bound"] = satake.euler_tail_bound(rep, qs[-1], s)
    run.check("series_vs_product", worst, cfg.tolerances["series"], cfg.enabled("lfactor"))


COMMANDS = {
    "gamma": cmd_gamma,
    "tate-check": cmd_tate,
    "descent-check": cmd_descent,
    "transform": cmd_transform,
    "verify-lfe": cmd_verify_lfe,
    "lfactor": cmd_lfactor,
}
assert tuple(COMMANDS) == SUBCOMMANDS


def run(subcommand: str, config_path, out=None, slow: bool = False) -> int:
    """Execute one subcommand; returns the exit status."""
    try:
        cfg = RunConfig.load(config_path)
    except ConfigInvalid as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    out_dir = Path(out or cfg.out)
    r = Run(subcommand, cfg, out_dir)
    t = time.time()
    try:
        COMMANDS[subcommand](cfg, r, slow)
    except ConfigInvalid as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except BKError as exc:
        r.checks["error"] = {"value": float("nan"), "tol": 0.0, "ok": False, "enforced": True,
                             "message": f"{type(exc).__name__}: {exc}"}
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
    r.write_json()
    log.info("%s finished in %.1f s", subcommand, time.time() - t)
    return 1 if r.failed else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="bksph", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--slow", action="store_true", help="enable slow oracles (GL_2 Godement-Jacquet)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return run(args.subcommand, args.config, args.out, args.slow)


if __name__ == "__main__":
    sys.exit(main())
