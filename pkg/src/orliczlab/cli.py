"""Command-line front end and configuration files.

The config grammar is documented in ``docs/cli.md``. Each ``[experiment:NAME]``
section runs one certification and writes ``NAME.csv``; ``summary.txt``
collects the verdicts. The exit status is nonzero iff a report marked
unconditional fails.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import hashlib
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import certify as C
from . import family as fam_mod
from . import inequality as ineq
from . import measure as meas
from . import testfunctions as tf
from . import young
from .luxnorm import luxembourg_norm
from .semigroup import Propagator, ou_apply, worker_count

__all__ = ["ConfigError", "ExperimentSpec", "ExperimentConfig", "parse_config", "load_config", "emit_config",
           "run_config", "main"]


class ConfigError(ValueError):
    """Config problem with the section, key and (when known) line it refers to."""

    def __init__(self, msg, section=None, key=None, line=None):
        self.section, self.key, self.line = section, key, line
        where = ""
        if section is not None:
            where = f"[{section}]" + (f" {key}" if key else "")
        if line is not None:
            where = f"line {line}: " + where
        super().__init__(f"{where}: {msg}" if where else msg)


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------

_REQ = object()


def _floats(text):
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_TYPES = {"float": float, "int": int, "str": str, "floats": _floats, "bool": _bool}

EXPERIMENTS = {
    "gross_orlicz": {},
    "perturb_transport": {"inner": ("str", "lp:1.5")},
    "hyperbound": {"beta": ("float", 1.0), "beta_prime": ("float", 0.5), "c": ("float", 1.0),
                   "s": ("float", 1.0), "t": ("float", 1.0)},
    "d_epsilon": {"beta": ("float", 1.0), "beta_prime": ("float", 0.5), "eps": ("floats", (0.5, 1.0, 2.0))},
    "inhomog": {"beta": ("float", 0.5), "alpha_rate": ("float", 0.1), "p": ("float", 2.0),
                "s": ("float", 0.0), "t": ("float", 1.0)},
    "talagrand_tail": {"t": ("float", 0.5), "s_min": ("float", 2.0), "s_max": ("float", 1000.0),
                       "n_s": ("int", 200)},
    "non_continuity": {"t": ("float", 0.5), "a_grid": ("floats", (1.0, 2.0, 3.0, 4.0, 5.0, 6.0))},
    "fa_anchor": {"a_grid": ("floats", (1.0, 2.0, 3.0, 4.0))},
    "unconditional": {},
}

FAMILY_KEYS = {
    "lp": {"q0": ("float", 2.0), "rho": ("float", 2.0)},
    "standard": {"F": ("str", "log"), "phi0": ("str", "lp:2"), "lambda": ("str", "gross:2")},
}

RUN_KEYS = {"output": ("str", "reports"), "workers": ("int", 1)}
TIME_KEYS = {"start": ("float", 0.0), "stop": ("float", 1.0), "steps": ("int", 10)}
TOL_KEYS = {"mono": ("float", 1e-6), "ineq": ("float", 1e-8)}
TEST_KEYS = {"functions": ("str", "all")}
MEASURE_KEYS = {"spec": ("str", "gaussian")}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    kind: str
    params: tuple  # sorted (key, value) pairs

    def get(self, key):
        return dict(self.params)[key]


@dataclass
class ExperimentConfig:
    """Parsed configuration: shared blocks and the ordered experiments."""

    measure: str = "gaussian"
    family: dict = field(default_factory=lambda: {"kind": "lp", "q0": 2.0, "rho": 2.0})
    tests: str = "all"
    time: tuple = (0.0, 1.0, 10)
    tolerances: dict = field(default_factory=lambda: {"mono": 1e-6, "ineq": 1e-8})
    output: str = "reports"
    workers: int = 1
    experiments: list = field(default_factory=list)

    @property
    def t_grid(self) -> np.ndarray:
        a, b, n = self.time
        return np.linspace(a, b, n + 1)


def _line_of(text, section, key=None):
    sec = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            sec = m.group(1).strip()
            if key is None and sec == section:
                return i
            continue
        if sec == section and key is not None and re.match(rf"^{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _typed(text, section, key, kind, raw):
    try:
        return _TYPES[kind](raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"expected {kind}, got {raw!r} ({e})", section, key, _line_of(text, section, key)) from None


def _read_block(cp, text, section, schema, required=False):
    if not cp.has_section(section):
        if required:
            raise ConfigError("missing section", section)
        return {k: v[1] for k, v in schema.items()}
    out = {}
    for key in cp.options(section):
        if key not in schema:
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(schema))})", section, key,
                              _line_of(text, section, key))
    for key, (kind, default) in schema.items():
        if cp.has_option(section, key):
            out[key] = _typed(text, section, key, kind, cp.get(section, key))
        elif default is _REQ:
            raise ConfigError("missing required key", section, key, _line_of(text, section))
        else:
            out[key] = default
    return out


def _check_catalog(cfg: ExperimentConfig, text):
    try:
        meas.from_name(cfg.measure)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"unknown measure spec ({e})", "measure", "spec", _line_of(text, "measure", "spec")) from None
    f = cfg.family
    if f["kind"] == "standard":
        for key, parser in (("F", _parse_F), ("phi0", young.from_name), ("lambda", _check_lambda)):
            try:
                parser(f[key])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"bad catalog entry {f[key]!r} ({e})", "family", key,
                                  _line_of(text, "family", key)) from None
    try:
        _resolve_tests(cfg.tests)
    except KeyError as e:
        raise ConfigError(str(e), "tests", "functions", _line_of(text, "tests", "functions")) from None
    for e in cfg.experiments:
        if e.kind == "perturb_transport":
            try:
                young.from_name(e.get("inner"))
            except (KeyError, TypeError, ValueError) as err:
                sec = f"experiment:{e.name}"
                raise ConfigError(f"bad Young function ({err})", sec, "inner", _line_of(text, sec, "inner")) from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises :class:`ConfigError` with line/field diagnostics."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        line = getattr(e, "lineno", None)
        raise ConfigError(f"syntax error: {e.message if hasattr(e, 'message') else e}", line=line) from None
    known = {"run", "measure", "family", "tests", "time", "tolerances"}
    for sec in cp.sections():
        if sec not in known and not sec.startswith("experiment:"):
            raise ConfigError("unknown section", sec, line=_line_of(text, sec))
    run = _read_block(cp, text, "run", RUN_KEYS)
    measure = _read_block(cp, text, "measure", MEASURE_KEYS)
    if cp.has_section("family"):
        kind = cp.get("family", "kind", fallback="lp").strip()
        if kind not in FAMILY_KEYS:
            raise ConfigError(f"unknown family kind {kind!r} (allowed: lp, standard)", "family", "kind",
                              _line_of(text, "family", "kind"))
        schema = dict(FAMILY_KEYS[kind], kind=("str", kind))
        family = _read_block(cp, text, "family", schema)
    else:
        family = {"kind": "lp", "q0": 2.0, "rho": 2.0}
    tests = _read_block(cp, text, "tests", TEST_KEYS)
    tm = _read_block(cp, text, "time", TIME_KEYS)
    if not tm["stop"] > tm["start"] >= 0 or tm["steps"] < 1:
        raise ConfigError("need 0 <= start < stop and steps >= 1", "time", line=_line_of(text, "time"))
    tol = _read_block(cp, text, "tolerances", TOL_KEYS)
    exps = []
    for sec in cp.sections():
        if not sec.startswith("experiment:"):
            continue
        name = sec.split(":", 1)[1].strip()
        if not re.match(r"^[A-Za-z0-9_.-]+$", name):
            raise ConfigError("experiment name must match [A-Za-z0-9_.-]+", sec, line=_line_of(text, sec))
        kind = cp.get(sec, "kind", fallback=None)
        if kind is None:
            raise ConfigError("missing required key", sec, "kind", _line_of(text, sec))
        kind = kind.strip()
        if kind not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment kind {kind!r} (allowed: {', '.join(EXPERIMENTS)})", sec, "kind",
                              _line_of(text, sec, "kind"))
        params = _read_block(cp, text, sec, dict(EXPERIMENTS[kind], kind=("str", kind)))
        params.pop("kind")
        exps.append(ExperimentSpec(name, kind, tuple(sorted(params.items()))))
    cfg = ExperimentConfig(measure=measure["spec"].strip(), family=family, tests=tests["functions"].strip(),
                           time=(tm["start"], tm["stop"], tm["steps"]), tolerances=tol,
                           output=run["output"].strip(), workers=run["workers"], experiments=exps)
    _check_catalog(cfg, text)
    return cfg


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def _emit_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_emit_value(float(x)) for x in v)
    return str(v)


def emit_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; ``parse_config(emit_config(c)) == c``."""
    lines = ["[run]", f"output = {cfg.output}", f"workers = {cfg.workers}", "",
             "[measure]", f"spec = {cfg.measure}", "", "[family]", f"kind = {cfg.family['kind']}"]
    for k in FAMILY_KEYS[cfg.family["kind"]]:
        lines.append(f"{k} = {_emit_value(cfg.family[k])}")
    a, b, n = cfg.time
    lines += ["", "[tests]", f"functions = {cfg.tests}", "", "[time]", f"start = {_emit_value(float(a))}",
              f"stop = {_emit_value(float(b))}", f"steps = {n}", "", "[tolerances]"]
    lines += [f"{k} = {_emit_value(float(cfg.tolerances[k]))}" for k in TOL_KEYS]
    for e in cfg.experiments:
        lines += ["", f"[experiment:{e.name}]", f"kind = {e.kind}"]
        lines += [f"{k} = {_emit_value(v)}" for k, v in e.params]
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# catalog resolution
# ---------------------------------------------------------------------------


def _parse_F(text):
    name, _, arg = text.strip().partition(":")
    if name == "log":
        return fam_mod.log_F()
    if name == "beta_log":
        return fam_mod.beta_log_F(float(arg))
    raise KeyError(f"unknown F {text!r} (allowed: log, beta_log:B)")


def _check_lambda(text):
    name, _, arg = text.strip().partition(":")
    if name not in ("linear", "gross", "auto") or not arg:
        raise KeyError(f"unknown lambda {text!r} (allowed: linear:A, gross:RHO, auto:SAFETY)")
    if float(arg) <= 0:
        raise ValueError("lambda parameter must be positive")


def _resolve_tests(text):
    text = text.strip()
    if text == "all":
        return tf.bundled()
    if text == "nonneg":
        return tf.nonnegative()
    return [tf.by_name(n.strip()) for n in text.split(",") if n.strip()]


def _empirical_c(F, phi0, tests, pot):
    return max(ineq.eval_fsobolev(F, phi0, f, pot).meta["ratio"] for f in tests)


def build_cfg_family(fam: dict, pot=None, tests=None):
    """Family from a ``[family]`` block; returns ``(family, info)``."""
    if fam["kind"] == "lp":
        return fam_mod.gross_lp(rho=fam["rho"], q0=fam["q0"]), {}
    F = _parse_F(fam["F"])
    phi0 = young.from_name(fam["phi0"])
    name, _, arg = fam["lambda"].partition(":")
    info = {}
    if name == "linear":
        lam = fam_mod.linear_lambda(float(arg))
    elif name == "gross":
        lam = fam_mod.gross_lambda(float(arg))
    else:
        c_hat = _empirical_c(F, phi0, tests, pot)
        info = {"c_hat": c_hat, "safety": float(arg)}
        lam = fam_mod.linear_lambda(1.0 / (float(arg) * c_hat))
    return fam_mod.build_family(fam_mod.FamilySpec(F, phi0, lam)), info


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------


def _unconditional_report(tests, tol) -> C.CertificationReport:
    rep = C.CertificationReport("unconditional", ["inequality", "f", "case", "lhs", "rhs", "slack", "passed"],
                                manifest={"tol": tol})
    Us = [meas.polynomial_potential([0.0, 0.0, 1.0]), meas.gaussian(), meas.build_u_alpha(1.5),
          meas.polynomial_potential([0.0, 0.0, 0.5, 0.0, 0.25])]
    recs = []
    for U in Us:
        for f in tests:
            recs.append(("ubound", f.name, U.name, ineq.eval_ubound(f, U)))
    mu = ineq.gaussian_measure()
    for f in tests:
        recs.append(("rothaus", f.name, "classical", ineq.eval_rothaus(f, mu)))
        for i, r in enumerate(ineq.eval_bg(f, mu)):
            recs.append(("bg", f.name, f"side{i}", r))
    for a in (1.0, 2.0, 3.0, 4.0):
        recs.append(("fa", f"exp_a{a:g}", "U", ineq.eval_fa(a)))
    ok = True
    for kind, fname, case, r in recs:
        passed = r.slack >= -tol
        ok = ok and passed
        rep.add(inequality=kind, f=fname, case=case, lhs=r.lhs, rhs=r.rhs, slack=r.slack, passed=passed)
    rep.passed = bool(ok)
    return rep


def run_experiment(cfg: ExperimentConfig, e: ExperimentSpec, cache: dict) -> C.CertificationReport:
    p = dict(e.params)
    tests = _resolve_tests(cfg.tests)
    pot = meas.from_name(cfg.measure)
    k = e.kind
    if k in ("gross_orlicz", "perturb_transport"):
        if "family" not in cache:
            cache["family"] = build_cfg_family(cfg.family, pot, tests)
        family, info = cache["family"]
    if k == "gross_orlicz":
        hx = C.HyperExperiment(family, pot, tests, cfg.t_grid, mono_tol=cfg.tolerances["mono"],
                               workers=cfg.workers)
        rep = C.gross_orlicz_verify(hx)
        rep.manifest.update(info)
        if info:
            rep.notes.append(f"empirical c = {C.fmt(info['c_hat'])}, lambda' = 1/({C.fmt(info['safety'])} c)")
    elif k == "perturb_transport":
        if not isinstance(family, fam_mod.LpFamily):
            raise ConfigError("perturb_transport needs an lp family", f"experiment:{e.name}")
        rep = C.perturb_transport_check(family, young.from_name(p["inner"]), tests, cfg.t_grid[1:], pot,
                                        tol=cfg.tolerances["ineq"])
    elif k == "hyperbound":
        m, chk = C.hyperbound_factor(p["beta"], p["beta_prime"], p["c"], 0.0, p["s"], p["t"])
        rep = C.CertificationReport("hyperbound", ["beta", "beta_prime", "c", "s", "t", "m", "m_path", "rel_gap",
                                                   "slope_spread"], manifest=dict(p))
        rep.add(beta=p["beta"], beta_prime=p["beta_prime"], c=p["c"], s=p["s"], t=p["t"], m=m, **{
            kk: chk[kk] for kk in ("m_path", "rel_gap", "slope_spread")})
        rep.passed = bool(chk["rel_gap"] < 0.01)
    elif k == "d_epsilon":
        rep = C.CertificationReport("d_epsilon", ["beta", "beta_prime", "eps", "D", "min_slack"], manifest=dict(p))
        ok = True
        for eps in p["eps"]:
            D, sl = C.d_epsilon(p["beta"], p["beta_prime"], eps)
            ok = ok and sl >= -1e-12
            rep.add(beta=p["beta"], beta_prime=p["beta_prime"], eps=eps, D=D, min_slack=sl)
        rep.passed = bool(ok)
    elif k == "inhomog":
        ifam = meas.inhomog_example(beta=p["beta"], alpha_rate=p["alpha_rate"])
        consts = C.inhomog_constants(ifam, np.linspace(0.0, p["t"], 101))
        rep = C.inhomog_verify(ifam, p["p"], tests, p["s"], p["t"], consts=consts, workers=cfg.workers)
        if consts.b_analytic is not None:
            rep.manifest["b_gap"] = float(np.max(np.abs(consts.b - consts.b_analytic)))
    elif k == "talagrand_tail":
        pos = [f for f in tests if f.nonneg]
        rep = C.talagrand_tail(pos, t=p["t"], s_grid=np.geomspace(p["s_min"], p["s_max"], p["n_s"]))
    elif k == "non_continuity":
        rep = C.non_continuity_witness(p["a_grid"], t=p["t"])
    elif k == "fa_anchor":
        rep = C.fa_anchor(p["a_grid"])
    elif k == "unconditional":
        rep = _unconditional_report(tests, cfg.tolerances["ineq"])
    else:  # pragma: no cover - guarded by the parser
        raise ConfigError(f"unknown kind {k}")
    rep.name = e.name
    rep.manifest["experiment"] = e.kind
    rep.manifest["config_hash"] = config_hash(cfg)
    return rep


def run_config(cfg: ExperimentConfig, out_dir=None, stream=None) -> int:
    """Run every experiment, write ``NAME.csv`` and ``summary.txt``; return the exit status."""
    stream = stream or sys.stdout
    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    cache: dict = {}
    status = 0
    summary = [f"config {config_hash(cfg)}"]
    for e in cfg.experiments:
        rep = run_experiment(cfg, e, cache)
        (out / f"{e.name}.csv").write_text(rep.to_csv())
        tag = "unconditional" if rep.unconditional else "informational"
        text = rep.summary() + f"\n  scope: {tag}"
        summary.append(text)
        print(text, file=stream)
        if rep.unconditional and not rep.passed:
            status = 1
    summary.append(f"exit {status}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return status


# ---------------------------------------------------------------------------
# expressions for --f
# ---------------------------------------------------------------------------

_EXPR_NAMES = {n: getattr(np, n) for n in ("exp", "log", "sin", "cos", "tanh", "sinh", "cosh", "sqrt", "abs",
                                             "arctan", "log1p", "expm1")}
_EXPR_NAMES.update(pi=np.pi, e=np.e)


def parse_function(text: str):
    """Bundled test function name, or an expression in ``x`` built from numpy elementary functions."""
    text = text.strip()
    try:
        return tf.by_name(text)
    except KeyError:
        pass
    tree = ast.parse(text, mode="eval")
    allowed = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant, ast.operator,
               ast.unaryop)
    for node in ast.walk(tree):
        if not isinstance(node, allowed):
            raise ValueError(f"unsupported syntax in {text!r}")
        if isinstance(node, ast.Name) and node.id != "x" and node.id not in _EXPR_NAMES:
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Call) and not isinstance(node.func, ast.Name):
            raise ValueError(f"unsupported call in {text!r}")
    code = compile(tree, "<f>", "eval")

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, x=x)), dtype=float) * np.ones_like(x)

    return f


def _kv(text):
    out = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        if not _:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        out[k.strip()] = float(v)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_norm(a):
    pot = meas.from_name(a.measure)
    mu = ineq.gaussian_measure() if pot.kind == "gaussian" else pot
    r = luxembourg_norm(parse_function(a.f), young.from_name(a.phi), mu, tol=a.tol)
    print(C.fmt(r.lambda_star))
    return 0


def _family_from_flags(a, pot=None, tests=None):
    if a.F is None:
        return build_cfg_family({"kind": "lp", "q0": a.q0, "rho": a.rho})
    return build_cfg_family({"kind": "standard", "F": a.F, "phi0": a.phi0, "lambda": a.lam}, pot, tests)


def _cmd_family_build(a):
    if a.F is None:
        raise SystemExit("family-build needs --F")
    fam, _ = _family_from_flags(a)
    if a.validate:
        rep = fam_mod.validate_family(fam, np.linspace(0, 1, 5))
        print(f"iii={C.fmt(rep.iii_residual)} iv={C.fmt(rep.iv_violation)} convex={int(rep.convex)} "
              f"nice={int(rep.nice)} reconstruction={C.fmt(rep.reconstruction)}")
    if a.eval is not None:
        t, x = a.eval["t"], a.eval["x"]
        order = a.order if a.order in ("inv", "dot") else int(a.order)
        print(C.fmt(float(fam_mod.family_eval(fam, t, np.array([x]), order)[0])))
    return 0


def _cmd_evolve(a):
    pot = meas.from_name(a.measure)
    f = parse_function(a.f)
    if pot.kind == "gaussian" and not a.grid:
        xs = np.array(a.x) if a.x else np.linspace(-4, 4, 9)
        vals = ou_apply(f, a.t)(xs)
        for x, v in zip(xs, vals):
            print(f"{C.fmt(float(x))},{C.fmt(float(v))}")
        return 0
    g = Propagator("grid_cn", pot, n_cells=a.cells, n_steps=a.steps).apply(f, a.t)
    if a.output:
        Path(a.output).write_text(g.to_text())
    xs = np.array(a.x) if a.x else np.linspace(-4, 4, 9)
    for x, v in zip(xs, g(xs)):
        print(f"{C.fmt(float(x))},{C.fmt(float(v))}")
    return 0


def _cmd_verify(a):
    pot = meas.from_name(a.measure)
    tests = _resolve_tests(a.tests)
    fam, info = _family_from_flags(a, pot, tests)
    hx = C.HyperExperiment(fam, pot, tests, np.linspace(0, a.t_stop, a.steps + 1), mono_tol=a.mono_tol,
                           workers=worker_count())
    rep = C.gross_orlicz_verify(hx)
    rep.manifest.update(info)
    print(rep.summary())
    if a.output:
        Path(a.output).write_text(rep.to_csv())
    return 0 if rep.passed else 1


def _cmd_bound(a):
    m, chk = C.hyperbound_factor(a.beta, a.beta_prime, a.c, 0.0, a.s, a.t)
    print(C.fmt(m))
    print(f"path m={C.fmt(chk['m_path'])} rel_gap={C.fmt(chk['rel_gap'])} slope_spread={C.fmt(chk['slope_spread'])}")
    return 0


def _cmd_tail(a):
    tests = [parse_function(n) for n in a.f.split(";")] if a.f else tf.nonnegative()
    for i, f in enumerate(tests):
        if not hasattr(f, "name"):
            tests[i] = tf.TestFunction(f"f{i}", f, lambda x: 0 * x, True)
    rep = C.talagrand_tail(tests, t=a.t, s_grid=np.geomspace(a.s_min, a.s_max, a.n_s))
    sys.stdout.write(rep.to_csv())
    return 0 if rep.passed else 1


def _cmd_run(a):
    try:
        cfg = load_config(a.config)
    except (ConfigError, OSError) as e:
        print(f"error: {a.config}: {e}", file=sys.stderr)
        return 2
    if a.workers is not None:
        cfg.workers = a.workers
    elif os.environ.get("ORLICZLAB_WORKERS"):
        cfg.workers = worker_count()
    return run_config(cfg, a.out)


def _cmd_check_config(a):
    try:
        cfg = load_config(a.config)
    except (ConfigError, OSError) as e:
        print(f"error: {a.config}: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(emit_config(cfg))
    return 0


def _family_flags(p):
    p.add_argument("--F", default=None, help="log | beta_log:B (standard family); omit for the L_p family")
    p.add_argument("--phi0", default="lp:2")
    p.add_argument("--lambda", dest="lam", default="gross:2", help="linear:A | gross:RHO | auto:SAFETY")
    p.add_argument("--q0", type=float, default=2.0)
    p.add_argument("--rho", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orliczlab", description="Orlicz norms, families and semigroup certification.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("norm", help="Luxembourg norm of f")
    p.add_argument("--phi", required=True)
    p.add_argument("--measure", default="gaussian")
    p.add_argument("--f", required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("family-build", help="build a standard Orlicz family and evaluate it")
    _family_flags(p)
    p.add_argument("--eval", type=_kv, default=None, help="t=T,x=X")
    p.add_argument("--order", default="0", choices=["0", "1", "2", "inv", "dot"])
    p.add_argument("--validate", action="store_true")
    p.set_defaults(fn=_cmd_family_build)

    p = sub.add_parser("evolve", help="apply the semigroup P_t")
    p.add_argument("--measure", default="gaussian")
    p.add_argument("--f", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, action="append")
    p.add_argument("--grid", action="store_true", help="force the Crank-Nicolson grid solver")
    p.add_argument("--cells", type=int, default=4096)
    p.add_argument("--steps", type=int, default=1024)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("verify", help="monotonicity of t -> ||P_t f||_{Phi_t}")
    _family_flags(p)
    p.add_argument("--measure", default="gaussian")
    p.add_argument("--tests", default="all")
    p.add_argument("--t-stop", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--mono-tol", type=float, default=1e-6)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("bound", help="hyper-boundedness factor m")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--beta-prime", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("tail", help="tail products s (log s)^{3/2} gamma(P_t f >= s)")
    p.add_argument("--f", default=None, help="';'-separated functions (default: bundled non-negative set)")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--s-min", type=float, default=2.0)
    p.add_argument("--s-max", type=float, default=1000.0)
    p.add_argument("--n-s", type=int, default=200)
    p.set_defaults(fn=_cmd_tail)

    p = sub.add_parser("run", help="run every experiment of a config file")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("check-config", help="parse a config and print its canonical form")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_check_config)
    return ap


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (``gross_lp`` or ``ualpha_fbeta``)."""
    return Path(__file__).parent / "configs" / f"{name}.cfg"


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.fn(args))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
