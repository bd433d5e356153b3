"""Command-line front end.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines; flags
override the file, which overrides the defaults.  Records go to ``--output-path``
as CSV or JSON; a one-line summary goes to stdout.

Exit codes: 0 success, 1 a mathematical gate failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from . import __version__
from .characters import QuadraticCharacter, UnitTwist, symbol
from .ddseries import (
    LCache,
    WeightSpec,
    check_fe_nontrivial,
    check_fe_psi1,
    d_sum,
    residue_s1,
    z_direct,
    z_via_l,
)
from .experiments import (
    ExperimentRecord,
    d_bound_experiment,
    exponent_fit,
    majorant_compare,
    moment_scan,
    sieve_test,
)
from .gaussian import parse_gaussian
from .lfunctions import ALT_SPEC, DEFAULT_SPEC, l_critical, l_value, zeta_k2

OUTPUT_DIR_ENV = "GAUSSDDS_OUTPUT_DIR"

FE_GATE = 1e-5
RESIDUE_GATE = 0.02


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsers

def _complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _twist(text) -> UnitTwist:
    try:
        return UnitTwist.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _gauss(text):
    try:
        return parse_gaussian(str(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _floats(text) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _points(text) -> list[tuple[float, float]]:
    out = []
    for item in str(text).split(","):
        if not item.strip():
            continue
        try:
            x, y = item.split(":")
            out.append((float(x), float(y)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"points must look like x:y,x:y ({item!r})")
    return out


def _positive_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _int(text) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def _weight(text) -> WeightSpec:
    try:
        return WeightSpec(str(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


# ---------------------------------------------------------------------------
# options

@dataclass(frozen=True)
class Option:
    name: str
    type: Callable
    default: Any
    help: str
    choices: tuple | None = None


COMMON = (
    Option("threads", _positive_int, 1, "worker threads"),
    Option("seed", _int, 1, "random seed"),
    Option("truncation", _positive_int, 400, "truncation M (and N) for Z evaluations"),
    Option("precision_mode", str, "fast64", "floating-point path for critical L-values", ("fast64", "extended")),
    Option("output_path", str, "", "file for the records (empty: no file)"),
    Option("format", str, "csv", "record file format", ("csv", "json")),
    Option("scale", float, 1.0, "size multiplier for experiment grids"),
)

SUBCOMMANDS: dict[str, tuple[str, tuple[Option, ...]]] = {
    "symbol": ("quadratic residue symbol (a/n)", (
        Option("a", _gauss, None, "numerator a+bi"),
        Option("n", _gauss, None, "odd denominator a+bi"),
    )),
    "lvalue": ("L2(s, chi_d psi)", (
        Option("d", _gauss, "1", "primary d"),
        Option("psi", _twist, "1", "twist"),
        Option("s", _complex, "0.5", "point s"),
        Option("h_choice", str, "exp1", "test function H", ("exp1", "exp2")),
        Option("tol", float, 1e-11, "target absolute accuracy"),
    )),
    "zvalue": ("truncated Z(s, w; psi, psi')", (
        Option("s", _complex, "2", "first variable"),
        Option("w", _complex, "2", "second variable"),
        Option("psi", _twist, "1", "twist of n"),
        Option("psi2", _twist, "1", "twist of m"),
        Option("method", str, "direct", "summation order", ("direct", "via_l")),
    )),
    "dsum": ("smoothed sum D(t, u, P; W)", (
        Option("t", float, 0.0, "t"),
        Option("u", float, 8.0, "u"),
        Option("P", float, 64.0, "window size"),
        Option("weight", _weight, "bump_12", "weight", ("bump_12", "dyadic_member")),
        Option("psi", _twist, "1", "twist"),
        Option("psi2", _twist, "1", "second twist"),
    )),
    "fe-check": ("functional-equation residual of Z", (
        Option("s", _complex, "0.75", "first variable"),
        Option("w", _complex, "4", "second variable"),
        Option("psi", _twist, "i", "twist of n"),
        Option("psi2", _twist, "1", "twist of m"),
    )),
    "residue-check": ("residue of Z at s = 1 against pi zeta2(2w)/8", (
        Option("w", _complex, "3", "second variable"),
        Option("psi2", _twist, "1", "twist of m"),
    )),
    "moment-scan": ("first and second moments of L(1/2+it, chi_m)", (
        Option("Xmax", _positive_int, 16384, "largest norm"),
        Option("Xmin", _positive_int, 64, "first norm used in the fit"),
        Option("t", float, 0.0, "t"),
    )),
    "sieve-test": ("normalized large-sieve ratio", (
        Option("M", _positive_int, 1024, "norm bound for m"),
        Option("N", _positive_int, 1024, "norm bound for n"),
        Option("trials", _positive_int, 100, "random coefficient vectors"),
        Option("scheme", str, "rademacher", "coefficient distribution", ("rademacher", "phase")),
    )),
    "d-bound": ("|D| against U^eps min(P^1/2+(TP)^1/4, (TP)^1/4+(T/P)^1/4 U^1/2)", (
        Option("t_grid", _floats, "0,2,4", "values of t"),
        Option("u_grid", _floats, "8,16,32", "values of u"),
        Option("P_grid", _floats, "16,32,64,128,256,512,1024", "values of P"),
        Option("psi", _twist, "1", "twist"),
        Option("psi2", _twist, "1", "second twist"),
    )),
    "majorant": ("|D| relative to its bilinear majorant", (
        Option("t", float, 0.0, "t"),
        Option("u", float, 8.0, "u"),
        Option("P", float, 64.0, "window size"),
        Option("psi", _twist, "1", "twist"),
        Option("psi2", _twist, "1", "second twist"),
    )),
    "exponent-fit": ("least-squares slope in log-log coordinates", (
        Option("points", _points, "", "x:y pairs separated by commas"),
    )),
}

# fields that do not affect the records and stay out of the provenance echo
_NON_SEMANTIC = {"threads", "output_path", "format"}


@dataclass
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key)

    def echo(self) -> dict:
        out = {"subcommand": self.subcommand}
        for k, v in self.values.items():
            if k not in _NON_SEMANTIC:
                out[k] = _plain(v)
        return out


def _plain(v):
    if isinstance(v, UnitTwist):
        return v.label
    if isinstance(v, WeightSpec):
        return v.describe()
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, list):
        return [_plain(x) for x in v]
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, (int, float, str)) or v is None:
        return v
    return str(v)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaussdds", description="Quadratic double Dirichlet series over Q(i).")
    p.add_argument("--version", action="version", version=f"gaussdds {__version__}")
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name, (desc, opts) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=desc, description=desc)
        sp.add_argument("--config", default=None, help="key=value file")
        for o in opts + COMMON:
            flag = "--" + o.name.replace("_", "-")
            names = [flag] if flag == "--" + o.name else [flag, "--" + o.name]
            sp.add_argument(*names, dest=o.name, type=o.type, default=argparse.SUPPRESS,
                            choices=_choices(o), help=f"{o.help} (default {o.default!r})")
    return p


def _choices(o: Option):
    if o.choices is None or o.type is not str:
        return None
    return o.choices


def _options(sub: str) -> dict[str, Option]:
    return {o.name: o for o in SUBCOMMANDS[sub][1] + COMMON}


def _convert(o: Option, raw, origin: str):
    try:
        v = o.type(raw)
    except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
        raise UsageError(f"{origin}: bad value for {o.name!r}: {exc}")
    if o.choices and _plain(v) not in o.choices:
        raise UsageError(f"{origin}: {o.name!r} must be one of {', '.join(o.choices)}")
    return v


def read_config_text(text: str, sub: str, origin: str = "config") -> dict:
    opts = _options(sub)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{origin}:{lineno}: expected key=value, got {line!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in opts:
            raise UsageError(f"{origin}:{lineno}: unknown key {key!r}")
        out[key] = _convert(opts[key], val, f"{origin}:{lineno}")
    return out


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--flag -1-2i`` as ``--flag=-1-2i`` so literals with a sign are not read as options."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        nxt = argv[k + 1] if k + 1 < len(argv) else ""
        if tok.startswith("--") and "=" not in tok and nxt[:1] == "-" and nxt[1:2].isdigit():
            out.append(f"{tok}={nxt}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def parse(argv: list[str], config_text: str | None = None) -> RunConfig:
    """Merge defaults, config file and flags (in increasing priority)."""
    parser = build_parser()
    argv = _glue_negative_values(list(argv))
    if not argv:
        raise UsageError(parser.format_usage().strip())
    ns = vars(parser.parse_args(argv))
    sub = ns.pop("subcommand", None)
    if sub is None:
        raise UsageError(parser.format_usage().strip())
    cfg_path = ns.pop("config", None)
    opts = _options(sub)
    values = {}
    for name, o in opts.items():
        values[name] = None if o.default is None else _convert(o, o.default, "default")
    if cfg_path is not None and config_text is None:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                config_text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {cfg_path!r}: {exc.strerror}")
    if config_text is not None:
        values.update(read_config_text(config_text, sub, cfg_path or "config"))
    values.update(ns)
    missing = [k for k, o in opts.items() if o.default is None and values[k] is None]
    if missing:
        raise UsageError(f"{sub}: missing required value(s): {', '.join(missing)}")
    return RunConfig(sub, values)


# ---------------------------------------------------------------------------
# output

def _num(x: float) -> str:
    """Shortest round-trip representation, locale independent."""
    return repr(float(x))


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, list):
        return ";".join(_cell(x) for x in v)
    s = "" if v is None else str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def format_csv(records: list[ExperimentRecord], meta: dict) -> str:
    keys: list[str] = []
    for r in records:
        for k in r.params:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    buf.write(",".join(["experiment_id", *keys, "value_re", "value_im", "bound", "ratio", "notes"]) + "\n")
    for r in records:
        row = [r.experiment_id, *(_cell(r.params.get(k)) for k in keys),
               _num(r.value.real), _num(r.value.imag), _num(r.bound), _num(r.ratio), _cell(r.notes)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _json_float(x: float):
    return x if math.isfinite(x) else repr(x)


def format_json(records: list[ExperimentRecord], meta: dict) -> str:
    rows = [{
        "experiment_id": r.experiment_id,
        **{k: _plain(v) for k, v in r.params.items()},
        "value_re": _json_float(r.value.real),
        "value_im": _json_float(r.value.imag),
        "bound": _json_float(r.bound),
        "ratio": _json_float(r.ratio),
        "notes": r.notes,
    } for r in records]
    return json.dumps({"meta": meta, "records": rows}, indent=1, allow_nan=False) + "\n"


def _output_path(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def write_records(cfg: RunConfig, records: list[ExperimentRecord]) -> str | None:
    if not cfg.output_path:
        return None
    meta = {"tool": "gaussdds", "version": __version__, "config": cfg.echo()}
    text = format_csv(records, meta) if cfg.format == "csv" else format_json(records, meta)
    path = _output_path(cfg.output_path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (records, summary lines, gate passed)

def _run_symbol(cfg):
    if not cfg.n.is_odd():
        raise UsageError("symbol: n must be odd")
    v = symbol(cfg.a, cfg.n)
    return [ExperimentRecord("symbol", {"a": str(cfg.a), "n": str(cfg.n)}, v, 0.0)], [str(v)], True


def _run_lvalue(cfg):
    chi = QuadraticCharacter(cfg.d, cfg.psi)
    spec = DEFAULT_SPEC if cfg.h_choice == "exp1" else ALT_SPEC
    s = cfg.s
    if chi.is_principal:
        val, err, method = zeta_k2(s), 0.0, "zeta_k2"
    elif s.real == 0.5:
        lv = l_critical(chi, s.imag, spec, cfg.tol, cfg.precision_mode)
        val, err, method = lv.value, lv.abs_error_estimate, lv.method
    else:
        lv = l_value(chi, s, spec, cfg.tol)
        val, err, method = lv.value, lv.abs_error_estimate, lv.method
    rec = ExperimentRecord("lvalue", {"d": str(cfg.d), "psi": cfg.psi.label, "s": repr(s),
                                      "conductor_norm": chi.conductor_norm}, val, err, float("nan"),
                           f"method={method};bound=abs_error_estimate")
    return [rec], [f"{val.real!r} {val.imag!r}"], True


def _run_zvalue(cfg):
    M = cfg.truncation
    if cfg.method == "direct":
        z = z_direct(cfg.s, cfg.w, cfg.psi, cfg.psi2, M, M)
    else:
        z = z_via_l(cfg.s, cfg.w, cfg.psi, cfg.psi2, M, LCache(), cfg.threads)
    rec = ExperimentRecord("zvalue", {"s": repr(cfg.s), "w": repr(cfg.w), "psi": cfg.psi.label,
                                      "psi2": cfg.psi2.label, "M": M, "method": cfg.method},
                           z.value, z.tail_estimate, float("nan"), "bound=tail_estimate")
    return [rec], [f"{z.value.real!r} {z.value.imag!r} tail={z.tail_estimate!r}"], True


def _run_dsum(cfg):
    P = cfg.P * cfg.scale
    v = d_sum(cfg.t, cfg.u, P, cfg.weight, cfg.psi, cfg.psi2, LCache(), cfg.threads)
    rec = ExperimentRecord("dsum", {"t": cfg.t, "u": cfg.u, "P": P, "weight": cfg.weight.describe(),
                                    "psi": cfg.psi.label, "psi2": cfg.psi2.label}, v, 0.0)
    return [rec], [f"{v.real!r} {v.imag!r}"], True


def _run_fe(cfg):
    cache = LCache()
    if cfg.psi == UnitTwist.PSI_1:
        r = check_fe_psi1(cfg.s, cfg.w, cfg.psi2, cfg.truncation, cache, cfg.threads)
    else:
        r = check_fe_nontrivial(cfg.s, cfg.w, cfg.psi, cfg.psi2, cfg.truncation, cache, cfg.threads)
    ok = r["residual"] < FE_GATE
    rec = ExperimentRecord("fe_check", {"s": repr(cfg.s), "w": repr(cfg.w), "psi": cfg.psi.label,
                                        "psi2": cfg.psi2.label, "M": cfg.truncation},
                           r["residual"], FE_GATE, float("nan"),
                           f"lhs={r['lhs']!r};rhs={r['rhs']!r};tail={float(r['tail'])!r}")
    return [rec], [f"residual={r['residual']!r} gate={FE_GATE!r} {'PASS' if ok else 'FAIL'}"], ok


def _run_residue(cfg):
    r = residue_s1(cfg.w, cfg.psi2, cfg.truncation, cache=LCache(), threads=cfg.threads)
    ok = r["rel_error"] < RESIDUE_GATE
    rec = ExperimentRecord("residue_check", {"w": repr(cfg.w), "psi2": cfg.psi2.label, "M": cfg.truncation},
                           r["estimate"], r["target"], float("nan"), f"rel_error={r['rel_error']!r}")
    lines = [f"residue={r['estimate']!r} target={r['target']!r} rel_error={r['rel_error']!r} "
             f"{'PASS' if ok else 'FAIL'}"]
    return [rec], lines, ok


def _run_moments(cfg):
    Xmax = max(64, int(cfg.Xmax * cfg.scale))
    ms = moment_scan(Xmax, cfg.t, cfg.Xmin, cfg.threads)
    return ms.records, [f"slope={ms.slope!r} slope_log3={ms.slope_log3!r}"], True


def _run_sieve(cfg):
    M, N = max(1, int(cfg.M * cfg.scale)), max(1, int(cfg.N * cfg.scale))
    r = sieve_test(M, N, cfg.trials, cfg.seed, cfg.scheme)
    rec = ExperimentRecord("sieve_test", {"M": M, "N": N, "trials": cfg.trials, "seed": cfg.seed,
                                          "scheme": cfg.scheme}, r, 0.0, float("nan"), "value=max_ratio")
    return [rec], [f"max_ratio={r!r}"], True


def _run_dbound(cfg):
    P_grid = [p * cfg.scale for p in cfg.P_grid]
    res = d_bound_experiment(cfg.t_grid, cfg.u_grid, P_grid, ((cfg.psi, cfg.psi2),),
                             threads=cfg.threads)
    lines = [f"C_hat={res.C_hat!r} crossover_ratio_max={max(res.crossover_ratios, default=float('nan'))!r} "
             f"conj_error={res.conj_error!r} skipped={len(res.skipped)}"]
    return res.records, lines, True


def _run_majorant(cfg):
    rec = majorant_compare(cfg.t, cfg.u, cfg.P * cfg.scale, cfg.psi, cfg.psi2, threads=cfg.threads)
    return [rec], [f"ratio={rec.ratio!r} majorant={rec.bound!r}"], True


def _run_fit(cfg):
    try:
        slope, icpt = exponent_fit(cfg.points)
    except ValueError as exc:
        raise UsageError(f"exponent-fit: {exc}")
    rec = ExperimentRecord("exponent_fit", {"points": len(cfg.points)}, slope, 0.0, float("nan"),
                           f"intercept={icpt!r}")
    return [rec], [f"slope={slope!r} intercept={icpt!r}"], True


RUNNERS = {
    "symbol": _run_symbol,
    "lvalue": _run_lvalue,
    "zvalue": _run_zvalue,
    "dsum": _run_dsum,
    "fe-check": _run_fe,
    "residue-check": _run_residue,
    "moment-scan": _run_moments,
    "sieve-test": _run_sieve,
    "d-bound": _run_dbound,
    "majorant": _run_majorant,
    "exponent-fit": _run_fit,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    start = time.perf_counter()
    try:
        records, lines, ok = RUNNERS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(str(exc), file=err)
        return 2
    except ValueError as exc:
        print(f"{cfg.subcommand}: {exc}", file=err)
        return 2
    path = write_records(cfg, records)
    for line in lines:
        print(line, file=out)
    elapsed = time.perf_counter() - start
    print(f"wall_time={elapsed:.3f}s" + (f" output={path}" if path else ""), file=err)
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
