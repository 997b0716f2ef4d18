"""Command line front end: SNR sweeps, built-in validation, det(U).

Sweep configuration (JSON)::

    {
      "label": "U1",                      # optional, written to the series column
      "gamma_b_db": [0, 5, 10],           # strictly increasing
      "gamma_e_db": 10,
      "M": 3, "N_t": 1, "N_E": 1, "r_s": 1,
      "combiners": ["MRC", "SC", "EGC"],
      "tas_mode": "SIMO",                 # or TAS_NO_EVE_CSI, TAS_WITH_EVE_CSI
      "methods": ["asymptotic", "montecarlo"],
      "correlation": {"eta": [0.85, 0.9, -0.95], "lambda_e": 0,
                      "fully_correlated_main": false, "fully_correlated_eve": false},
      "lambda_e_grid": [0, 0.5],          # optional, overrides correlation.lambda_e
      "mc": {"trials": 1000000, "seed": 1, "workers": 1},
      "precision": {"abs_tol": 1e-12, "rel_tol": 1e-10, "max_terms": 10000, "quad_nodes": 200}
    }

A recipe file ``{"series": [config, ...]}`` runs several configurations
into one CSV.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from . import analytic, chanmodel, mcsim
from .chanmodel import CorrelationSpec, SystemConfig
from .combine import CombinerKind, TasMode
from .errors import ConfigError, DomainError, NonConvergence, SecrecyInfeasible
from .specfun import Precision

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NONCONVERGENCE = 0, 1, 2, 3

CSV_COLUMNS = ("gamma_b_db", "combiner", "tas_mode", "method", "sop", "ci_low", "ci_high",
               "regime_flag", "series", "lambda_e")
OUTSIDE_REGIME = "outside-asymptotic-regime"
INFEASIBLE = "secrecy-infeasible"
METHODS = ("exact", "asymptotic", "montecarlo")

_TOP_KEYS = {"label", "gamma_b_db", "gamma_e_db", "M", "N_t", "N_E", "r_s", "combiners",
             "tas_mode", "methods", "correlation", "lambda_e_grid", "mc", "precision"}
_CORR_KEYS = {"eta", "lambda_e", "fully_correlated_main", "fully_correlated_eve"}
_MC_KEYS = {"trials", "seed", "workers"}
_PREC_KEYS = {"abs_tol", "rel_tol", "max_terms", "quad_nodes"}


@dataclass(frozen=True)
class SweepSpec:
    gamma_b_grid: tuple
    gamma_e_db: float
    combiners: tuple
    tas_mode: TasMode
    methods: tuple
    correlation: CorrelationSpec
    M: int
    N_t: int
    N_E: int
    r_s: float
    mc: mcsim.McPlan = field(default_factory=mcsim.McPlan)
    precision: Precision = field(default_factory=Precision)
    lambda_e_grid: tuple | None = None
    label: str = ""

    def system(self, gamma_b_db: float) -> SystemConfig:
        return SystemConfig(M=self.M, N_t=self.N_t, N_E=self.N_E,
                            gamma_bar_b=db_to_linear(gamma_b_db),
                            gamma_bar_e=db_to_linear(self.gamma_e_db), r_s=self.r_s)


@dataclass(frozen=True)
class CurvePoint:
    gamma_b_db: float
    combiner: str
    tas_mode: str
    method: str
    sop: float
    ci_low: float | None = None
    ci_high: float | None = None
    regime_flag: str = ""
    series: str = ""
    lambda_e: float = 0.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


# ---------------------------------------------------------------------------
# config parsing

def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}" if path else msg)


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        _fail(path, f"unknown key(s) {extra}")


def _num(v, path, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        _fail(path, "must be finite")
    if integer:
        if int(v) != v:
            _fail(path, f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _num_list(v, path):
    if not isinstance(v, list):
        _fail(path, "expected a list")
    return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(v))


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} column {e.colno}: {e.msg}") from None


def _spec_from_obj(doc, path="") -> SweepSpec:
    p = (path + ".") if path else ""
    _check_keys(doc, _TOP_KEYS, path)
    for req in ("gamma_b_db", "gamma_e_db", "M"):
        if req not in doc:
            _fail(path, f"missing required key {req!r}")
    grid = _num_list(doc["gamma_b_db"], p + "gamma_b_db")
    if not grid:
        _fail(p + "gamma_b_db", "grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        _fail(p + "gamma_b_db", "grid must be strictly increasing")
    M = _num(doc["M"], p + "M", integer=True)
    N_t = _num(doc.get("N_t", 1), p + "N_t", integer=True)
    N_E = _num(doc.get("N_E", 1), p + "N_E", integer=True)
    for name, v in (("M", M), ("N_t", N_t), ("N_E", N_E)):
        if v < 1:
            _fail(p + name, "must be >= 1")
    r_s = _num(doc.get("r_s", 1.0), p + "r_s")
    if r_s < 0:
        _fail(p + "r_s", "must be >= 0")
    gamma_e_db = _num(doc["gamma_e_db"], p + "gamma_e_db")

    combiners = doc.get("combiners", ["MRC", "SC", "EGC"])
    if not isinstance(combiners, list) or not combiners:
        _fail(p + "combiners", "need at least one combiner")
    try:
        combiners = tuple(CombinerKind.parse(c) for c in combiners)
    except DomainError as e:
        _fail(p + "combiners", str(e))
    if len(set(combiners)) != len(combiners):
        _fail(p + "combiners", "duplicate entries")

    methods = doc.get("methods", ["asymptotic"])
    if not isinstance(methods, list) or not methods:
        _fail(p + "methods", "need at least one method")
    methods = tuple(str(m).lower() for m in methods)
    for m in methods:
        if m not in METHODS:
            _fail(p + "methods", f"unknown method {m!r}; choose from {list(METHODS)}")
    if len(set(methods)) != len(methods):
        _fail(p + "methods", "duplicate entries")

    try:
        mode = TasMode.parse(doc.get("tas_mode", "SIMO"))
    except DomainError as e:
        _fail(p + "tas_mode", str(e))
    if mode is TasMode.SIMO and N_t != 1:
        _fail(p + "tas_mode", "SIMO requires N_t = 1")

    corr = doc.get("correlation", {})
    _check_keys(corr, _CORR_KEYS, p + "correlation")
    eta = _num_list(corr.get("eta", [0.0] * M), p + "correlation.eta")
    if len(eta) != M:
        _fail(p + "correlation.eta", f"has {len(eta)} entries but M = {M}")
    lam = _num(corr.get("lambda_e", 0.0), p + "correlation.lambda_e")
    flags = {}
    for k in ("fully_correlated_main", "fully_correlated_eve"):
        v = corr.get(k, False)
        if not isinstance(v, bool):
            _fail(f"{p}correlation.{k}", "expected true/false")
        flags[k] = v
    try:
        cspec = CorrelationSpec(eta, lam, **flags)
    except DomainError as e:
        _fail(p + "correlation", str(e))

    lam_grid = None
    if "lambda_e_grid" in doc:
        lam_grid = _num_list(doc["lambda_e_grid"], p + "lambda_e_grid")
        if not lam_grid:
            _fail(p + "lambda_e_grid", "must be nonempty")
        if not flags["fully_correlated_eve"] and any(abs(v) >= 1 for v in lam_grid):
            _fail(p + "lambda_e_grid", "|lambda_e| must be < 1 unless fully_correlated_eve")

    mc = doc.get("mc", {})
    _check_keys(mc, _MC_KEYS, p + "mc")
    try:
        plan = mcsim.McPlan(
            trials=_num(mc.get("trials", 1_000_000), p + "mc.trials", integer=True),
            seed=_num(mc.get("seed", 0), p + "mc.seed", integer=True),
            workers=_num(mc.get("workers", 1), p + "mc.workers", integer=True),
        )
    except DomainError as e:
        _fail(p + "mc", str(e))

    pr = doc.get("precision", {})
    _check_keys(pr, _PREC_KEYS, p + "precision")
    try:
        prec = Precision(**{k: _num(v, f"{p}precision.{k}", integer=k in ("max_terms", "quad_nodes"))
                            for k, v in pr.items()})
    except DomainError as e:
        _fail(p + "precision", str(e))

    label = doc.get("label", "")
    if not isinstance(label, str):
        _fail(p + "label", "expected a string")

    spec = SweepSpec(gamma_b_grid=grid, gamma_e_db=gamma_e_db, combiners=combiners, tas_mode=mode,
                     methods=methods, correlation=cspec, M=M, N_t=N_t, N_E=N_E, r_s=r_s,
                     mc=plan, precision=prec, lambda_e_grid=lam_grid, label=label)
    _check_supported(spec, path)
    return spec


def _check_supported(spec: SweepSpec, path):
    c = spec.correlation
    both = c.fully_correlated_main and c.fully_correlated_eve
    if "exact" in spec.methods and not both:
        if spec.N_t != 1 or spec.N_E != 1:
            _fail(path, "exact method needs N_t = N_E = 1")
        if c.fully_correlated_main or c.fully_correlated_eve:
            _fail(path, "exact method needs |eta|, |lambda_e| < 1")
        for k in spec.combiners:
            if k is CombinerKind.EGC:
                _fail(path, "exact method is not available for EGC")
            if k is CombinerKind.MRC and len(set(abs(e) for e in c.eta)) != 1:
                _fail(path, "exact MRC needs equal |eta| on all branches")
    if "asymptotic" in spec.methods and not both:
        if (c.fully_correlated_main or c.fully_correlated_eve) and (
                spec.tas_mode is not TasMode.SIMO or spec.N_E != 1):
            _fail(path, "asymptotic forms with one fully-correlated link need SIMO and N_E = 1")
        if c.fully_correlated_main and c.fully_correlated_eve is False:
            lams = spec.lambda_e_grid or (c.lambda_e,)
            if any(v != 0 for v in lams):
                _fail(path, "fully-correlated main form needs lambda_e = 0")


def parse_config(text: str) -> SweepSpec:
    """Parse and validate a single sweep configuration."""
    return _spec_from_obj(_load_json(text))


def parse_recipe(text: str) -> list:
    """Parse a config or a ``{"series": [...]}`` recipe into a list of SweepSpec."""
    doc = _load_json(text)
    if isinstance(doc, dict) and "series" in doc:
        _check_keys(doc, {"series"}, "")
        if not isinstance(doc["series"], list) or not doc["series"]:
            _fail("series", "expected a nonempty list")
        return [_spec_from_obj(s, f"series[{i}]") for i, s in enumerate(doc["series"])]
    return [_spec_from_obj(doc)]


# ---------------------------------------------------------------------------
# sweep

def _asymptotic_point(spec: SweepSpec, cfg: SystemConfig, kind, lam, factors):
    c = spec.correlation
    if c.fully_correlated_main and c.fully_correlated_eve:
        return analytic.sop_tas_fully_correlated(kind, cfg).value
    if c.fully_correlated_main:
        return analytic.asymptotic_sop_simo_special(kind, cfg, None, "fully_corr_main").value
    if c.fully_correlated_eve:
        return analytic.asymptotic_sop_simo_special(kind, cfg, factors, "fully_corr_eve").value
    return analytic.asymptotic_sop(kind, spec.tas_mode, cfg, factors, lam, spec.precision).value


def _exact_point(spec: SweepSpec, cfg: SystemConfig, kind, cspec):
    c = cspec
    if c.fully_correlated_main and c.fully_correlated_eve:
        return analytic.sop_tas_fully_correlated(kind, cfg).value
    if kind is CombinerKind.MRC:
        return analytic.exact_sop_mrc_equicorrelated(cfg, abs(c.eta[0]), c.lambda_e, spec.precision).value
    return analytic.exact_sop_sc(cfg, c, spec.precision).value


def _series_points(spec: SweepSpec) -> list:
    rows = []
    lams = spec.lambda_e_grid if spec.lambda_e_grid is not None else (spec.correlation.lambda_e,)
    base = spec.correlation
    plain = not (base.fully_correlated_main or base.fully_correlated_eve)
    mode = spec.tas_mode.value
    for lam in lams:
        cspec = replace(base, lambda_e=lam)
        for gdb in spec.gamma_b_grid:
            cfg = spec.system(gdb)
            factors = None
            if plain:
                factors = chanmodel.build_factors(cspec, cfg)
            elif not base.fully_correlated_main:
                factors = chanmodel.build_factors(replace(cspec, lambda_e=0.0, fully_correlated_eve=False), cfg)
            mc = mcsim.estimate_all(cfg, cspec, spec.mc) if "montecarlo" in spec.methods else None
            for kind in spec.combiners:
                for method in spec.methods:
                    pt = dict(gamma_b_db=gdb, combiner=kind.value, tas_mode=mode, method=method,
                              series=spec.label, lambda_e=lam)
                    if method == "montecarlo":
                        est = mc[kind, spec.tas_mode]
                        rows.append(CurvePoint(sop=est.value, ci_low=est.ci95[0], ci_high=est.ci95[1], **pt))
                        continue
                    try:
                        if method == "exact":
                            val = _exact_point(spec, cfg, kind, cspec)
                            flag = ""
                        else:
                            val = _asymptotic_point(spec, cfg, kind, lam, factors)
                            flag = OUTSIDE_REGIME if val > 0.5 else ""
                    except SecrecyInfeasible:
                        val, flag = 1.0, INFEASIBLE
                    rows.append(CurvePoint(sop=val, regime_flag=flag, **pt))
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{v:.9g}"


def format_csv(points) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for pt in points:
        lines.append(",".join(_fmt(getattr(pt, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_sweep(specs, out_path: str | None = None) -> list:
    """Evaluate every series and write the CSV (atomically) if ``out_path`` is given."""
    if isinstance(specs, SweepSpec):
        specs = [specs]
    points = []
    for spec in specs:
        points.extend(_series_points(spec))
    if out_path is not None:
        write_atomic(out_path, format_csv(points))
    return points


def recipe_text(name: str) -> str:
    """Contents of a bundled recipe such as ``fig2``."""
    fname = name if name.endswith(".json") else name + ".json"
    return resources.files("corrsop").joinpath("recipes", fname).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# validation checks

U1_ETA = (0.85, 0.9, -0.95)
U3_ETA = (0.6, -0.7, 0.8)


def _rel(a, b):
    return abs(a - b) / abs(b)


def check_det_u1(opts):
    d = chanmodel.det_product(U1_ETA)
    return abs(d - 0.088) <= 1e-3, {"det": d}


def check_det_u3(opts):
    d = chanmodel.det_product(U3_ETA)
    return abs(d - 0.5054) <= 1e-3, {"det": d}


def check_det_identity(opts):
    rng = np.random.default_rng(opts.get("seed", 0))
    worst = 0.0
    for _ in range(100):
        eta = rng.uniform(-0.99, 0.99, size=int(rng.integers(1, 9)))
        worst = max(worst, _rel(chanmodel.det_product(eta), float(np.linalg.det(chanmodel.correlation_matrix(eta)))))
    return worst <= 1e-10, {"max_rel_err": worst}


def _simo(M, eta=None, lam=0.3, gb=1e4, ge=3.0):
    cfg = SystemConfig(M=M, gamma_bar_b=gb, gamma_bar_e=ge, r_s=1.0)
    eta = tuple(np.linspace(0.3, -0.6, M)) if eta is None else eta
    return cfg, chanmodel.build_factors(CorrelationSpec(eta, lam), cfg), lam


def check_ratio_sc_mrc(opts):
    worst = 0.0
    for M in range(1, 6):
        cfg, f, lam = _simo(M)
        r = (analytic.asymptotic_sop_simo("SC", cfg, f, lam).value
             / analytic.asymptotic_sop_simo("MRC", cfg, f, lam).value)
        worst = max(worst, _rel(r, math.factorial(M)))
    return worst <= 1e-9, {"max_rel_err": worst}


def check_ratio_egc_mrc(opts):
    worst = 0.0
    for M in range(1, 6):
        cfg, f, lam = _simo(M)
        r = (analytic.asymptotic_sop_simo("EGC", cfg, f, lam).value
             / analytic.asymptotic_sop_simo("MRC", cfg, f, lam).value)
        want = math.factorial(M) * (2 * M) ** M / math.factorial(2 * M)
        worst = max(worst, _rel(r, want))
    return worst <= 1e-9, {"max_rel_err": worst}


def check_ratio_tas_csi(opts):
    worst = 0.0
    for M in range(1, 4):
        for N_t in range(1, 4):
            cfg = SystemConfig(M=M, N_t=N_t, N_E=1, gamma_bar_b=1e4, gamma_bar_e=3.0, r_s=1.0)
            f = chanmodel.build_factors(CorrelationSpec(tuple(np.linspace(0.3, -0.6, M)), 0.3), cfg)
            a = analytic.asymptotic_sop_tas_no_csi("MRC", cfg, f, 0.3, dominant_only=True).value
            b = analytic.asymptotic_sop_tas_with_csi("MRC", cfg, f, 0.3, dominant_only=True).value
            want = math.factorial(M * N_t) / math.factorial(M) ** N_t
            worst = max(worst, _rel(a / b, want))
    return worst <= 1e-9, {"max_rel_err": worst}


def check_reductions(opts):
    worst = 0.0
    for M in (1, 2, 3):
        for kind in CombinerKind:
            cfg, f, _ = _simo(M, lam=0.0)
            g = analytic.asymptotic_sop_simo(kind, cfg, f, 0.0).value
            s = analytic.asymptotic_sop_simo_special(kind, cfg, f, "lambda_zero").value
            worst = max(worst, _rel(g, s))
            g = analytic.asymptotic_sop_simo(kind, cfg, f, 1.0).value
            s = analytic.asymptotic_sop_simo_special(kind, cfg, f, "fully_corr_eve").value
            worst = max(worst, _rel(g, s))
            cfg0, f0, _ = _simo(M, eta=(0.0,) * M, lam=0.0)
            g = analytic.asymptotic_sop_simo(kind, cfg0, f0, 0.0).value
            s = analytic.asymptotic_sop_simo_special(kind, cfg0, f0, "independent").value
            worst = max(worst, _rel(g, s))
            cfg, f, lam = _simo(M)
            g = analytic.asymptotic_sop_simo(kind, cfg, f, lam).value
            for fn in (analytic.asymptotic_sop_tas_no_csi, analytic.asymptotic_sop_tas_with_csi):
                worst = max(worst, _rel(fn(kind, cfg, f, lam).value, g))
    return worst <= 1e-12, {"max_rel_err": worst}


def check_diversity_slope(opts):
    worst = 0.0
    for M in (1, 2, 3):
        for N_t in (1, 2):
            eta = tuple(np.linspace(0.3, -0.6, M))
            for mode in TasMode:
                if mode is TasMode.SIMO and N_t != 1:
                    continue
                for kind in CombinerKind:
                    vals = []
                    for db in (35.0, 45.0):
                        cfg = SystemConfig(M=M, N_t=N_t, N_E=1, gamma_bar_b=db_to_linear(db),
                                           gamma_bar_e=db_to_linear(5.0), r_s=1.0)
                        f = chanmodel.build_factors(CorrelationSpec(eta, 0.3), cfg)
                        vals.append(analytic.asymptotic_sop(kind, mode, cfg, f, 0.3).value)
                    slope = math.log10(vals[1] / vals[0])  # per decade of gamma_b
                    worst = max(worst, _rel(-slope, M * N_t))
    return worst <= 0.05, {"max_rel_err": worst}


def check_lambda_monotone(opts):
    cfg = SystemConfig(M=3, gamma_bar_b=db_to_linear(20.0), gamma_bar_e=db_to_linear(3.0), r_s=1.0)
    ok = True
    for kind in CombinerKind:
        prev = math.inf
        for lam in (0.0, 0.3, 0.6, 0.9):
            f = chanmodel.build_factors(CorrelationSpec(U3_ETA, lam), cfg)
            v = analytic.asymptotic_sop_simo(kind, cfg, f, lam).value
            ok &= v <= prev
            prev = v
    return ok, {}


def check_mc_vs_exact(opts):
    trials = int(opts.get("trials", 200_000))
    cfg = SystemConfig(M=3, gamma_bar_b=10.0, gamma_bar_e=db_to_linear(5.0), r_s=1.0)
    spec = CorrelationSpec((0.5,) * 3, 0.5)
    mc = mcsim.estimate_all(cfg, spec, mcsim.McPlan(trials=trials, seed=int(opts.get("seed", 0))))
    detail = {}
    ok = True
    for kind, val in ((CombinerKind.MRC, analytic.exact_sop_mrc_equicorrelated(cfg, 0.5, 0.5).value),
                      (CombinerKind.SC, analytic.exact_sop_sc(cfg, spec).value)):
        est = mc[kind, TasMode.SIMO]
        lo, hi = mcsim.wilson_interval(est.meta["outages"], trials, 3.0)
        ok &= lo <= val <= hi
        detail[kind.value] = {"exact": val, "mc": est.value}
    return ok, detail


def check_fully_correlated(opts):
    trials = int(opts.get("trials", 200_000))
    cfg = SystemConfig(M=2, N_t=2, N_E=1, gamma_bar_b=10.0, gamma_bar_e=1.0, r_s=1.0)
    spec = CorrelationSpec((1.0, 1.0), 1.0, True, True)
    mc = mcsim.estimate_all(cfg, spec, mcsim.McPlan(trials=trials, seed=int(opts.get("seed", 0))))
    val = analytic.sop_tas_fully_correlated("MRC", cfg).value
    est = mc[CombinerKind.MRC, TasMode.TAS_NO_EVE_CSI]
    lo, hi = mcsim.wilson_interval(est.meta["outages"], trials, 3.0)
    return lo <= val <= hi, {"closed_form": val, "mc": est.value}


CHECKS = {
    "det_u1": "check_det_u1",
    "det_u3": "check_det_u3",
    "det_identity": "check_det_identity",
    "ratio_sc_mrc": "check_ratio_sc_mrc",
    "ratio_egc_mrc": "check_ratio_egc_mrc",
    "ratio_tas_csi": "check_ratio_tas_csi",
    "reductions": "check_reductions",
    "diversity_slope": "check_diversity_slope",
    "lambda_monotone": "check_lambda_monotone",
    "mc_vs_exact": "check_mc_vs_exact",
    "fully_correlated": "check_fully_correlated",
}
_VALIDATE_KEYS = {"checks", "trials", "seed"}


def validate(opts=None, out=None) -> bool:
    """Run the named checks, print one JSON line each, return overall pass."""
    opts = opts or {}
    out = out or sys.stdout
    names = opts.get("checks", list(CHECKS))
    mod = sys.modules[__name__]
    all_ok = True
    for name in names:
        fn = getattr(mod, CHECKS[name])
        try:
            ok, detail = fn(opts)
        except NonConvergence:
            raise
        except Exception as e:  # a crashing check is a failed check
            ok, detail = False, {"error": f"{type(e).__name__}: {e}"}
        ok = bool(ok)
        all_ok &= ok
        out.write(json.dumps({"check": name, "passed": ok, "detail": detail}, sort_keys=True) + "\n")
    return all_ok


def _parse_validate_config(text):
    doc = _load_json(text)
    _check_keys(doc, _VALIDATE_KEYS, "")
    if "checks" in doc:
        if not isinstance(doc["checks"], list) or not doc["checks"]:
            _fail("checks", "expected a nonempty list")
        for c in doc["checks"]:
            if c not in CHECKS:
                _fail("checks", f"unknown check {c!r}")
    for k in ("trials", "seed"):
        if k in doc:
            _num(doc[k], k, integer=True)
    return doc


# ---------------------------------------------------------------------------
# entry point

def _parse_floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers") from None


def _cmd_det(args, out):
    if (args.eta is None) == (args.matrix is None):
        raise ConfigError("det: give exactly one of --eta or --matrix")
    if args.eta is not None:
        eta = _parse_floats(args.eta, "--eta")
        if not eta:
            raise ConfigError("--eta: empty")
        if any(abs(e) >= 1 for e in eta):
            raise ConfigError("--eta: entries must satisfy |eta| < 1")
        U = chanmodel.correlation_matrix(eta)
        d = chanmodel.det_product(eta)
    else:
        rows = [_parse_floats(r, "--matrix") for r in args.matrix.split(";") if r.strip()]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ConfigError("--matrix: need a square matrix, rows separated by ';'")
        U = np.array(rows)
        if not np.allclose(U, U.T):
            raise ConfigError("--matrix: must be symmetric")
        d = None
    direct = float(np.linalg.det(U))
    with np.printoptions(precision=6, suppress=True):
        out.write("U =\n" + str(U) + "\n")
    if d is not None:
        out.write(f"det(U) = {d:.6g}  (product identity)\n")
    out.write(f"det(U) = {direct:.6g}  (direct)\n")
    return EXIT_OK


def _cmd_sweep(args, out):
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    specs = parse_recipe(text)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.trials is not None:
        over["trials"] = args.trials
    if args.workers is not None:
        over["workers"] = args.workers
    if over:
        try:
            specs = [replace(s, mc=replace(s.mc, **over)) for s in specs]
        except DomainError as e:
            raise ConfigError(str(e)) from None
    points = run_sweep(specs, args.out)
    out.write(f"wrote {len(points)} rows to {args.out}\n")
    return EXIT_OK


def _cmd_validate(args, out):
    opts = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                opts = _parse_validate_config(fh.read())
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
    return EXIT_OK if validate(opts, out) else EXIT_VALIDATION


def build_parser():
    ap = argparse.ArgumentParser(prog="corrsop", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    sw = sub.add_parser("sweep", help="evaluate a sweep configuration and write CSV")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--workers", type=int)
    va = sub.add_parser("validate", help="run the built-in consistency checks")
    va.add_argument("--config")
    de = sub.add_parser("det", help="print U and det(U)")
    de.add_argument("--eta", help="comma-separated eta values")
    de.add_argument("--matrix", help="matrix rows separated by ';', entries by ','")
    return ap


def _glue_values(argv):
    # allow "--eta -0.5,0.3": argparse would read the value as an option
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--eta", "--matrix"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "det":
            return _cmd_det(args, out)
        if args.cmd == "sweep":
            return _cmd_sweep(args, out)
        return _cmd_validate(args, out)
    except ConfigError as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    except NonConvergence as e:
        sys.stderr.write(f"non-convergence: {e}\n")
        return EXIT_NONCONVERGENCE
    except (DomainError, SecrecyInfeasible) as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
