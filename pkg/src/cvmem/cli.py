"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 usage or parameter error,
3 validation failure (oracle deviation above tolerance).
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import fock_oracle as fo
from . import wigner as wg
from .errors import DomainError, NumericalError, ParameterError
from .gaussian_core import GaussianState, Convention, record_channel_report

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2, 3

RECORD_COLUMNS = ["kappa", "c", "g", "a", "b", "T", "V_Nx", "V_Np", "noise_excess_free"]
PHOTON_COLUMNS = ["kappa", "a", "B", "eta", "S", "log10S", "F", "N"]
ORACLE_TOL = 1e-3


class UsageError(Exception):
    pass


# --- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter plus the fixed ones."""

    param: str
    values: tuple
    fixed: dict = field(default_factory=dict)
    out: str = None
    fmt: str = "csv"

    def __post_init__(self):
        if len(self.values) == 0:
            raise ParameterError(f"sweep over {self.param} has no values")
        if self.fmt not in ("csv", "json"):
            raise ParameterError(f"unknown output format {self.fmt!r}")

    @staticmethod
    def parse_values(tokens):
        """``lin a b n``, ``log a b n`` or an explicit list of numbers."""
        if tokens and tokens[0] in ("lin", "log"):
            if len(tokens) != 4:
                raise ParameterError(f"{tokens[0]} sweep needs START STOP NUM")
            lo, hi, n = float(tokens[1]), float(tokens[2]), int(tokens[3])
            if n < 1:
                raise ParameterError("sweep needs at least one point")
            if tokens[0] == "lin":
                return tuple(np.linspace(lo, hi, n).tolist())
            if lo <= 0 or hi <= 0:
                raise ParameterError("log sweep bounds must be > 0")
            return tuple(np.logspace(math.log10(lo), math.log10(hi), n).tolist())
        return tuple(float(t) for t in tokens)

    def points(self):
        return [{**self.fixed, self.param: v} for v in self.values]


def _threads():
    try:
        return max(1, int(os.environ.get("CVMEM_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items):
    """``map`` that may run in parallel but keeps input order."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- output ----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# --- record ------------------------------------------------------------------------


def _record_row(pt):
    rep = record_channel_report(pt["kappa"], pt["c"], pt["post_correct"])
    g = rep.gains
    return {
        "kappa": pt["kappa"],
        "c": pt["c"],
        "g": g["g"],
        "a": g["a"],
        "b": g.get("b", 1.0),
        "T": rep.T,
        "V_Nx": rep.V_Nx,
        "V_Np": rep.V_Np,
        "noise_excess_free": rep.noise_excess_free,
        "report": rep,
    }


def cmd_record(args):
    fixed = {"c": _positive("pre-squeeze", args.pre_squeeze), "post_correct": args.post_correct}
    if args.kappa_sweep:
        spec = SweepSpec("kappa", SweepSpec.parse_values(args.kappa_sweep), fixed, args.out, args.format)
    else:
        if args.kappa is None:
            raise UsageError("record needs --kappa or --kappa-sweep")
        spec = SweepSpec("kappa", (args.kappa,), fixed, args.out, args.format)
    for v in spec.values:
        _positive("kappa", v)
    rows = _ordered_map(_record_row, spec.points())
    if spec.fmt == "csv":
        text = _csv_text(RECORD_COLUMNS, rows)
    else:
        objs = [{"kappa": r["kappa"], "c": r["c"], "post_corrected": args.post_correct,
                 "T": r["T"], **r["report"].as_dict()} for r in rows]
        text = _json_text(objs[0] if len(objs) == 1 and not args.kappa_sweep else objs)
    _emit(text, spec.out)
    return EXIT_OK


# --- photon upload -----------------------------------------------------------------------


def _numeric_deviation(params):
    light = wg.wigner_squeezed_photon(params.a)
    Wn, sn = wg.postselect_upload_numeric(light, params.kappa, params.B, params.eta)
    Wc, sc = wg.closed_form_photon_state(params)
    g = np.linspace(-3, 3, 25)
    return float(np.max(np.abs(Wn.sample(g, g) - Wc.sample(g, g)))), abs(sn - sc)


def _photon_row(pt):
    params = wg.PostSelectParams(kappa=pt["kappa"], B=pt["B"], a=pt["a"], eta=pt["eta"])
    _, rep = wg.closed_form_photon_upload(params, pt["post_correct"])
    row = {"kappa": params.kappa, "a": params.a, "B": params.B, "eta": params.eta,
           "S": rep.S, "log10S": math.log10(rep.S), "F": rep.F, "N": rep.N, "report": rep}
    if pt["numeric_check"]:
        row["max_dev"], row["dS"] = _numeric_deviation(params)
    return row


def cmd_upload_photon(args):
    fixed = {"kappa": args.kappa, "a": args.a, "eta": args.eta, "B": args.B,
             "post_correct": args.post_correct, "numeric_check": args.numeric_check}
    if args.B_sweep:
        spec = SweepSpec("B", SweepSpec.parse_values(args.B_sweep), fixed, args.out, args.format)
    else:
        if args.B is None:
            raise UsageError("upload-photon needs --B or --B-sweep")
        spec = SweepSpec("B", (args.B,), fixed, args.out, args.format)
    rows = _ordered_map(_photon_row, spec.points())
    cols = PHOTON_COLUMNS + (["max_dev", "dS"] if args.numeric_check else [])
    if spec.fmt == "csv":
        text = _csv_text(cols, rows)
    else:
        objs = []
        for r in rows:
            o = r["report"].as_dict()
            if args.numeric_check:
                o.update(max_dev=r["max_dev"], dS=r["dS"])
            objs.append(o)
        text = _json_text(objs[0] if len(objs) == 1 and not args.B_sweep else objs)
    _emit(text, spec.out)
    return EXIT_OK


# --- cat upload ----------------------------------------------------------------------


def cmd_upload_cat(args):
    params = wg.PostSelectParams(kappa=args.kappa, B=args.B, a=args.a, x0=args.x0, eta=args.eta)
    W, rep = wg.closed_form_cat_upload(params, args.post_correct)
    _emit(_json_text(rep.as_dict()), args.out)
    if args.marginal_grid:
        lo, hi, n = args.marginal_grid
        n = int(n)
        if n < 1 or not hi > lo:
            raise ParameterError("marginal grid needs LO < HI and N >= 1")
        ps = np.linspace(lo, hi, n)
        marg = wg.marginal_p(W)(ps)
        cols = ["p", "P"]
        rows = [{"p": float(p), "P": float(v)} for p, v in zip(ps, marg)]
        if args.approx:
            if args.post_correct:
                raise ParameterError("approximate marginals describe the uncorrected state")
            cols += ["P_small_b", "P_reduced_amplitude"]
            f1 = wg.approx_marginal(params, "SMALL_B")(ps)
            f2 = wg.approx_marginal(params, "REDUCED_AMPLITUDE")(ps)
            for r, u, v in zip(rows, f1, f2):
                r.update(P_small_b=float(u), P_reduced_amplitude=float(v))
        _emit(_csv_text(cols, rows), args.marginal_out)
    return EXIT_OK


# --- oracle check ----------------------------------------------------------------------


def _oracle_case(case, kappa, a, B, x0, ntrunc):
    grid = np.linspace(-3, 3, 25)
    params = wg.PostSelectParams(kappa=kappa, B=B, a=a, x0=x0 if case == "cat" else 0.0)
    out = {"case": case, "kappa": kappa, "a": a, "B": B, "x0": params.x0, "ntrunc": ntrunc}
    if case == "photon":
        Wc, rep = wg.closed_form_photon_upload(params)
        Wc_phys = Wc
        rho, s = fo.upload_oracle(fo.squeezed_photon_state(a, ntrunc), kappa, B, ntrunc)
        f_oracle = fo.fock_metrics(rho).fidelity
        f_closed, s_closed = rep.F, rep.S
    elif case == "cat":
        _, rep = wg.closed_form_cat_upload(params)
        Wc_phys, _ = wg.closed_form_cat_state(params, frame="physical")
        rho, s = fo.upload_oracle(fo.cat_state(x0, a, ntrunc), kappa, B, ntrunc)
        f_oracle = fo.fidelity_with(rho, fo.cat_state(params.x0_prime, 1.0, ntrunc))
        f_closed, s_closed = rep.F, rep.S
    else:
        Wc_phys, s_closed = wg.closed_form_vacuum_state(params)
        f_closed = wg.fidelity(Wc_phys, wg.wigner_vacuum())
        rho, s = fo.upload_oracle(fo.fock_state(0, ntrunc), kappa, B, ntrunc)
        f_oracle = float(np.real(rho.matrix[0, 0]))
        light = GaussianState.vacuum(("L",), Convention.QUARTER)
        Wg, sg = wg.gaussian_window_upload(light, kappa, B)
        out["S_gaussian"] = sg
        out["max_gaussian_dev"] = float(np.max(np.abs(Wg.sample(grid, grid) - Wc_phys.sample(grid, grid))))
    Wo = fo.wigner_from_fock(rho, grid, grid)
    out.update(
        F_closed=f_closed,
        F_oracle=f_oracle,
        S_closed=s_closed,
        S_oracle=s,
        N_closed=wg.negativity(Wc_phys),
        N_oracle=fo.parity_negativity(rho),
        max_wigner_dev=float(np.max(np.abs(Wo - Wc_phys.sample(grid, grid)))),
    )
    return out


def cmd_oracle_check(args):
    if args.kappa > 0.3:
        warnings.warn(f"kappa = {args.kappa} is outside the oracle-validated regime (<= 0.3)", stacklevel=1)
    ntrunc = args.ntrunc
    if ntrunc is None:
        ntrunc = fo.default_ntrunc_cat(args.x0) if args.case == "cat" else fo.DEFAULT_NTRUNC_PHOTON
    if ntrunc < 2:
        raise ParameterError("ntrunc must be >= 2")
    try:
        out = _oracle_case(args.case, args.kappa, args.a, args.B, args.x0, ntrunc)
    except NumericalError as exc:
        if args.ntrunc is None:
            raise
        # an under-truncated oracle that cannot even condition is a failed validation
        out = {"case": args.case, "error": str(exc)}
        _emit(_json_text(out), args.out)
        return EXIT_VALIDATION
    devs = [abs(out["F_closed"] - out["F_oracle"]), abs(out["S_closed"] - out["S_oracle"]),
            abs(out["N_closed"] - out["N_oracle"]), out["max_wigner_dev"]]
    if "max_gaussian_dev" in out:
        devs += [out["max_gaussian_dev"], abs(out["S_gaussian"] - out["S_closed"])]
    out["max_deviation"] = max(devs)
    out["tolerance"] = args.tol
    out["passed"] = bool(out["max_deviation"] <= args.tol)
    _emit(_json_text(out), args.out)
    return EXIT_OK if out["passed"] else EXIT_VALIDATION


# --- parsing ------------------------------------------------------------------------------


def _positive(name, v):
    if not (math.isfinite(v) and v > 0):
        raise ParameterError(f"{name} must be finite and > 0, got {v}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="cvmem", description="Record and upload protocols for a CV quantum memory.")
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    r = sub.add_parser("record", help="deterministic record channel report")
    r.add_argument("--kappa", type=float)
    r.add_argument("--kappa-sweep", nargs="+", metavar="SPEC", help="lin|log START STOP NUM, or values")
    r.add_argument("--pre-squeeze", type=float, default=1.0, metavar="C")
    r.add_argument("--post-correct", action=argparse.BooleanOptionalAction, default=True)
    r.add_argument("--format", choices=["json", "csv"], default=None)
    r.add_argument("--out")
    r.set_defaults(func=cmd_record)

    u = sub.add_parser("upload-photon", help="post-selected upload of a squeezed photon")
    u.add_argument("--kappa", type=float, default=0.05)
    u.add_argument("--a", type=float, default=1.0)
    u.add_argument("--B", type=float)
    u.add_argument("--B-sweep", nargs="+", metavar="SPEC", help="lin|log START STOP NUM, or values")
    u.add_argument("--eta", type=float, default=1.0)
    u.add_argument("--post-correct", action="store_true")
    u.add_argument("--numeric-check", action="store_true")
    u.add_argument("--format", choices=["json", "csv"], default="csv")
    u.add_argument("--out")
    u.set_defaults(func=cmd_upload_photon)

    c = sub.add_parser("upload-cat", help="post-selected upload of a cat state")
    c.add_argument("--x0", type=float, default=4.0)
    c.add_argument("--kappa", type=float, default=0.1)
    c.add_argument("--a", type=float, default=1.0)
    c.add_argument("--B", type=float, default=0.01)
    c.add_argument("--eta", type=float, default=1.0)
    c.add_argument("--post-correct", action="store_true")
    c.add_argument("--marginal-grid", nargs=3, type=float, metavar=("LO", "HI", "N"))
    c.add_argument("--approx", action="store_true", help="add small-window approximation columns")
    c.add_argument("--out", help="JSON report path")
    c.add_argument("--marginal-out", help="CSV path for the p-marginal")
    c.set_defaults(func=cmd_upload_cat)

    o = sub.add_parser("oracle-check", help="compare the Fock oracle with the closed forms")
    o.add_argument("--case", choices=["photon", "cat", "vacuum"], default="photon")
    o.add_argument("--kappa", type=float, default=0.05)
    o.add_argument("--a", type=float, default=1.0)
    o.add_argument("--B", type=float, default=0.01)
    o.add_argument("--x0", type=float, default=2.0)
    o.add_argument("--ntrunc", type=int)
    o.add_argument("--tol", type=float, default=ORACLE_TOL)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle_check)
    return p


def read_config(path):
    """Parse a flat ``key = value`` file (``#`` comments, blank lines allowed)."""
    values = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            values[k.lstrip("-")] = v
    return values


def _truthy(text):
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _config_defaults(subparser, values):
    actions = {a.dest: a for a in subparser._actions}
    out = {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        act = actions.get(dest)
        if act is None or dest == "help":
            raise UsageError(f"unknown config key {key!r}")
        if act.nargs == 0 or isinstance(act, argparse.BooleanOptionalAction):
            out[dest] = _truthy(raw)
        elif act.nargs in ("+", "*") or isinstance(act.nargs, int):
            conv = act.type or str
            out[dest] = [conv(t) for t in raw.replace(",", " ").split()]
        else:
            out[dest] = (act.type or str)(raw)
        if act.choices is not None and out[dest] not in act.choices:
            raise UsageError(f"config key {key!r}: {raw!r} not in {list(act.choices)}")
    return out


def _parse(argv):
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config and pre.command:
        sub = parser._subparsers._group_actions[0].choices[pre.command]
        try:
            sub.set_defaults(**_config_defaults(sub, read_config(pre.config)))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a command is required")
    if getattr(args, "format", "csv") is None:
        args.format = "csv" if getattr(args, "kappa_sweep", None) else "json"
    return args


def main(argv=None):
    try:
        args = _parse(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"cvmem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cvmem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, DomainError) as exc:
        print(f"cvmem: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"cvmem: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
