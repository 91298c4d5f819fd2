"""Command-line front end.

Exit codes: 0 success, 2 validation error (unreadable or non-symplectic
input, bad parameter values, truncation too small), 3 domain error (the
requested protocol does not exist for this input), 64 usage error.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import codes, io, lossy
from .classification import classify
from .diagonalization import diagonalize
from .errors import NotSymplectic, TransducerError, TruncationTooSmall
from .interference import READ_OUT, WRITE_IN, correct, six_pass_swap
from .symplectic import SWAP

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3
EXIT_USAGE = 64

NTRUNC_ENV = "TRANSDUCER_NTRUNC"

LOSSY_HEADER = ("mode", "kappa_over_g", "Nq", "Np", "Nbar_min", "tau_C", "n_C", "Q")
CODE_COLUMNS = {"cat": "cat", "squeezed-cat": "squeezed_cat", "qsp": "qsp"}

_DIRECTION_ALIASES = {"1->2": WRITE_IN, "writein": WRITE_IN, "2->1": READ_OUT, "readout": READ_OUT}


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonzero_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if x == 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"{text!r} must be finite and nonzero")
    return x


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be at least 1")
    return n


def grid(start, stop, count, scale="linear"):
    """Sweep points; ``count >= 2`` and ``start < stop``."""
    if count < 2:
        raise ValidationError("--count must be at least 2")
    if not start < stop:
        raise ValidationError("--start must be smaller than --stop")
    if scale == "log":
        if start <= 0:
            raise ValidationError("a log sweep needs --start > 0")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _default_ntrunc():
    raw = os.environ.get(NTRUNC_ENV)
    if raw is None:
        return codes.DEFAULT_NTRUNC
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{NTRUNC_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ValidationError(f"{NTRUNC_ENV} must be positive")
    return n


def _run_parallel(func, items, workers):
    if workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


# -- classify -----------------------------------------------------------------


def _classify_report(T, meta):
    cls = classify(T)
    form = diagonalize(T)
    canon = form.canonical
    return form, {
        "label": meta.get("label", ""),
        "class": cls.label,
        "subclass": cls.subclass,
        "chi": cls.chi,
        "margin": cls.margin,
        "canonical": canon.tag,
        "parameter": canon.parameter,
        "diagonalization_residual": form.residual,
        "near_degenerate": form.near_degenerate,
    }


def cmd_classify(args):
    T, meta = io.load_matrix(args.path)
    form, rep = _classify_report(T, meta)
    if args.json:
        text = json.dumps(rep, indent=2) + "\n"
    else:
        text = (
            f"{rep['class']} {form.canonical}, chi={io.fmt(rep['chi'])}\n"
            f"margin: {io.fmt(rep['margin'])}\n"
            f"diagonalization residual: {io.fmt(rep['diagonalization_residual'])}\n"
        )
    io.write_output(text, args.out)
    return EXIT_OK


# -- correct ------------------------------------------------------------------


def _mat(M):
    return [[float(x) for x in row] for row in np.asarray(M)]


def _plan_report(plan):
    def locals_of(form):
        if form is None:
            return None
        return {k: _mat(getattr(form, k)) for k in ("L_in_1", "L_out_1", "L_in_2", "L_out_2")}

    fin = plan.finishing
    return {
        "direction": plan.direction,
        "passthrough": plan.passthrough,
        "gamma": plan.gamma,
        "composite_class": plan.resulting_class.label,
        "eta": plan.eta,
        "finishing": {
            "tag": fin.tag,
            "residual_sigma": fin.residual_sigma,
            "r": fin.r,
            "eta_D": fin.eta_D,
            "epsilon": fin.epsilon,
            "formula": fin.describe(),
        },
        "locals_I": locals_of(plan.form_I),
        "locals_III": locals_of(plan.form_III),
        "composite": _mat(plan.composite),
    }


def cmd_correct(args):
    T_I, _ = io.load_matrix(args.path_I)
    T_III, _ = io.load_matrix(args.path_III)
    direction = _DIRECTION_ALIASES[args.direction]
    kw = {}
    if args.r is not None:
        kw["r"] = args.r
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    try:
        plan = correct(T_I, T_III, direction, **kw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    rep = _plan_report(plan)
    if args.json:
        text = json.dumps(rep, indent=2) + "\n"
    else:
        lines = [
            f"gamma: {io.fmt(plan.gamma)}",
            f"composite class: {plan.resulting_class.label}",
            f"residual eta: {io.fmt(plan.eta)}",
            f"finishing: {plan.finishing.describe()}",
        ]
        if plan.passthrough:
            lines.append("passthrough: input already in class [[2,1]] or [[2,0]]")
        text = "\n".join(lines) + "\n"
    if args.composite:
        io.write_output(io.dump_matrix(plan.composite, label="composite"), args.composite)
    io.write_output(text, args.out)
    return EXIT_OK


# -- sweep-lossy --------------------------------------------------------------


def _lossy_point(job):
    mode, direction, g, kappa_over_g, tau = job
    fn = lossy.writein_metrics if direction == "writein" else lossy.readout_metrics
    r = fn(g, kappa_over_g * g, tau, mode)
    return (mode, kappa_over_g, r.Nq, r.Np, r.Nbar_min, r.tau_C, r.n_C, r.Q)


def cmd_sweep_lossy(args):
    if not (args.g > 0 and math.isfinite(args.g)):
        raise ValidationError("--g must be positive")
    tau = args.tau if args.tau is not None else math.pi / (20.0 * args.g)
    if not (tau > 0 and math.isfinite(tau)):
        raise ValidationError("--tau must be positive")
    if args.point is not None:
        points = np.array([args.point])
    else:
        points = grid(args.start, args.stop, args.count, args.scale)
    if np.any(points < 0) or np.any(points >= 4.0):
        raise ValidationError("kappa/g must lie in [0, 4)")
    modes = ("interference", "standard") if args.mode == "both" else (args.mode,)
    jobs = [(m, args.direction, args.g, float(k), tau) for m in modes for k in points]
    rows = _run_parallel(_lossy_point, jobs, args.workers)
    io.write_output(io.csv_text(LOSSY_HEADER, rows), args.out)
    return EXIT_OK


# -- code-fidelity ------------------------------------------------------------


def _fidelity_point(job):
    sigma, alpha, r, names, n_trunc = job
    row = [sigma]
    for name in names:
        if name == "cat":
            row.append(codes.average_fidelity(sigma, codes.CatCode(alpha, n_trunc)))
        elif name == "squeezed-cat":
            row.append(codes.average_fidelity(sigma, codes.SqueezedCatCode(alpha, r, n_trunc)))
        else:
            row.append(codes.qsp_average_fidelity(sigma, alpha, n_trunc))
    row.append(n_trunc)
    return tuple(row)


def cmd_code_fidelity(args):
    names = [c.strip() for c in args.codes.split(",") if c.strip()]
    unknown = [c for c in names if c not in CODE_COLUMNS]
    if unknown or not names:
        raise UsageError(f"--codes must be a subset of {','.join(CODE_COLUMNS)}")
    names = [c for c in CODE_COLUMNS if c in names]
    if not (args.alpha > 0 and math.isfinite(args.alpha)):
        raise ValidationError("--alpha must be positive")
    if not (args.squeeze > 0 and math.isfinite(args.squeeze)):
        raise ValidationError("--squeeze must be a positive factor e^r")
    if args.start < 0:
        raise ValidationError("sigma must be nonnegative")
    n_trunc = args.n_trunc if args.n_trunc is not None else _default_ntrunc()
    # fail early with a suggestion rather than inside a worker
    codes.cat_basis(args.alpha, n_trunc)
    sigmas = grid(args.start, args.stop, args.count, args.scale)
    r = math.log(args.squeeze)
    jobs = [(float(s), args.alpha, r, tuple(names), n_trunc) for s in sigmas]
    rows = _run_parallel(_fidelity_point, jobs, args.workers)
    header = ["sigma"] + [CODE_COLUMNS[n] for n in names] + ["n_trunc"]
    io.write_output(io.csv_text(header, rows), args.out)
    return EXIT_OK


# -- six-pass -----------------------------------------------------------------


def cmd_six_pass(args):
    res = six_pass_swap(args.eta1, args.eta2, args.eta3)
    dev = float(np.max(np.abs(res.composite - SWAP)))
    rep = {"gamma1": res.gamma1, "gamma2": res.gamma2, "deviation": dev}
    if args.json:
        text = json.dumps(rep, indent=2) + "\n"
    else:
        text = (
            f"gamma1: {io.fmt(res.gamma1)}\n"
            f"gamma2: {io.fmt(res.gamma2)}\n"
            f"max deviation from SWAP: {io.fmt(dev)}\n"
        )
    io.write_output(text, args.out)
    return EXIT_OK if dev < 1e-8 else EXIT_DOMAIN


# -- parser -------------------------------------------------------------------


def _add_range(p, start, stop, count):
    p.add_argument("--start", type=float, default=start)
    p.add_argument("--stop", type=float, default=stop)
    p.add_argument("--count", type=int, default=count)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--workers", type=_positive_int, default=1, help="worker processes")


def build_parser():
    parser = _Parser(prog="transducer", description="Two-mode transducer toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="classify a transducer matrix file")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("correct", help="build the two-pass interference correction")
    p.add_argument("path_I")
    p.add_argument("path_III")
    p.add_argument("--direction", choices=sorted(_DIRECTION_ALIASES), default="1->2")
    p.add_argument("--r", type=float, help="injected squeezing for the readout finish")
    p.add_argument("--epsilon", type=float, help="homodyne inefficiency for the write-in finish")
    p.add_argument("--composite", help="write the composite matrix to this file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("sweep-lossy", help="added noise and capacity versus kappa/g")
    _add_range(p, 0.0, 0.2, 21)
    p.add_argument("--point", type=float, help="evaluate a single kappa/g instead of a range")
    p.add_argument("--mode", choices=("interference", "standard", "both"), default="both")
    p.add_argument("--direction", choices=("writein", "readout"), default="writein")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--tau", type=float, help="total duration (default pi/(20 g))")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_lossy)

    p = sub.add_parser("code-fidelity", help="average logical fidelity versus sigma")
    _add_range(p, 0.0, 1.0, 11)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--squeeze", type=float, default=0.5, help="squeezing factor e^r (default 0.5)")
    p.add_argument("--codes", default="cat,squeezed-cat,qsp")
    p.add_argument("--n-trunc", type=_positive_int, help=f"Fock cutoff (default ${NTRUNC_ENV} or 60)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_code_fidelity)

    p = sub.add_parser("six-pass", help="squeezing-free SWAP from three sQND gates")
    p.add_argument("eta1", type=_nonzero_float)
    p.add_argument("eta2", type=_nonzero_float)
    p.add_argument("eta3", type=_nonzero_float)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_six_pass)
    return parser


def _fail(code, message):
    print(f"transducer: error: {message}", file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except (ValidationError, io.MatrixFileError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    except NotSymplectic as exc:
        return _fail(EXIT_VALIDATION, f"not symplectic: {exc}")
    except TruncationTooSmall as exc:
        hint = f"; try --n-trunc {exc.suggested}" if exc.suggested else ""
        return _fail(EXIT_VALIDATION, f"{exc}{hint}")
    except TransducerError as exc:
        return _fail(EXIT_DOMAIN, f"{type(exc).__name__}: {exc}")
    except OSError as exc:
        return _fail(EXIT_VALIDATION, f"cannot write output: {exc}")


if __name__ == "__main__":
    sys.exit(main())
