"""Command-line front end: analysis, simulation, excursion extraction,
tail fitting, the matched-M/M/1 comparison, and the invariant suite.

Exit codes: 0 success, 1 validation error, 2 verification failure,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (alpha_limits, mm1_comparison, prefactors,
                          rs_rd_stationary, tail_fit)
from .params import (DOWN, UP, InvalidParameters, Model, make_params,
                     params_from_json)
from .qbd import ConvergenceError, exact_stationary_model1, truncated_stationary
from .simulate import (empirical_distribution, excursion_verdict, ld_excursions,
                       regime_prediction, simulate)
from .spectral import characteristic_roots, stability
from .twist import twist_summary
from .verify import run_checks

_RNG_IDENTITY = "numpy.random.Generator(PCG64)"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _jsonable(obj):
    if isinstance(obj, float):
        return _Raw(_fmt(obj))
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return _Raw(_fmt(float(obj)))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class _Raw(str):
    """Float already rendered with 17 significant digits."""


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, _Raw):
        return str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{k}": {_dump(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [f"{pad}  {_dump(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return json.dumps(obj)


def _meta(params, model: Model, seed: int | None = None) -> dict:
    meta = {"version": __version__, "rng": _RNG_IDENTITY,
            "params": _jsonable(params.to_dict(model)), "model": model.value}
    if seed is not None:
        meta["seed"] = seed
    return meta


def _csv_header(params, model: Model, seed: int | None = None, **extra) -> str:
    lines = [f"# version={__version__}", f"# rng={_RNG_IDENTITY}"]
    for key, value in params.to_dict(model).items():
        lines.append(f"# {key}={_fmt(value) if isinstance(value, float) else value}")
    if seed is not None:
        lines.append(f"# seed={seed}")
    for key, value in extra.items():
        lines.append(f"# {key}={_fmt(value) if isinstance(value, float) else value}")
    return "\n".join(lines) + "\n"


def _add_param_flags(sub):
    sub.add_argument("--lambda", dest="lam", type=float)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--p", type=float, default=1.0)
    sub.add_argument("--C", dest="c", type=float, default=None)
    sub.add_argument("--model", choices=[m.value for m in Model], default="model1")
    sub.add_argument("--params", dest="params_file", help="JSON parameter file")
    sub.add_argument("--out", default="./out", help="output directory")


def _resolve_params(args):
    if args.params_file:
        return params_from_json(Path(args.params_file).read_text())
    if None in (args.lam, args.mu, args.alpha, args.beta):
        raise InvalidParameters("provide --lambda --mu --alpha --beta or --params FILE")
    model = Model(args.model)
    return make_params(args.lam, args.mu, args.alpha, args.beta,
                       p=args.p, C=args.c, model=model), model


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_analyze(args) -> int:
    params, model = _resolve_params(args)
    report = {"meta": _meta(params, model),
              "spectral": _jsonable(characteristic_roots(params)),
              "stability": _jsonable(stability(params, model))}
    if model is not Model.RSRD:
        if not (model is Model.MODEL2 and params.p < 1.0):
            report["twist"] = _jsonable(twist_summary(params, model))
        report["tail"] = _jsonable(prefactors(params, model, seed=args.seed))
    if args.limits:
        report["alpha_limits"] = _jsonable(
            alpha_limits(params.lam, params.mu, params.beta, p=params.p, model=model))
    out = _out_dir(args) / "analyze.json"
    out.write_text(_dump(report) + "\n")
    print(_dump(report))
    return 0


def _cmd_simulate(args) -> int:
    params, model = _resolve_params(args)
    traj = simulate(params, model, steps=args.steps, seed=args.seed)
    out = _out_dir(args)
    (out / "trajectory.csv").write_text(traj.to_csv())
    burn = args.burn_in if args.burn_in is not None else args.steps // 10
    emp = empirical_distribution(traj, burn_in=burn)
    lines = [_csv_header(params, model, seed=args.seed, burn_in=burn,
                         steps=args.steps)]
    lines.append("x,y,status,frequency\n" if model is not Model.MODEL1
                 else "x,status,frequency\n")
    for state in sorted(emp.entries):
        fields = ",".join(str(v) for v in state)
        lines.append(f"{fields},{_fmt(emp.entries[state])}\n")
    (out / "empirical.csv").write_text("".join(lines))
    for note in emp.notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'empirical.csv'}")
    return 0


def _cmd_ldpath(args) -> int:
    params, model = _resolve_params(args)
    traj = simulate(params, model, steps=args.steps, seed=args.seed)
    excursions = ld_excursions(traj, level_k=args.level, base_level=args.base_level)
    predicted = regime_prediction(params)
    verdict = excursion_verdict(excursions) if excursions else "NoExcursions"
    out = _out_dir(args)
    lines = [_csv_header(params, model, seed=args.seed, level=args.level,
                         base_level=args.base_level, predicted_regime=predicted,
                         excursion_verdict=verdict),
             "start,end,peak,down_fraction,slope\n"]
    for e in excursions:
        lines.append(f"{e.start_step},{e.end_step},{e.peak},"
                     f"{_fmt(e.down_fraction)},{_fmt(e.slope_estimate)}\n")
    (out / "excursions.csv").write_text("".join(lines))
    print(f"predicted={predicted} observed={verdict} excursions={len(excursions)}")
    return 0


def _cmd_tailfit(args) -> int:
    params, model = _resolve_params(args)
    sigma = UP if args.sigma == "up" else DOWN
    if model is Model.MODEL1:
        table = exact_stationary_model1(params, k_max=max(args.kmax + 5, 50))
    elif model is Model.MODEL2:
        table = truncated_stationary(params, model, x_max=args.xmax, y_max=args.xmax)
    else:
        table = rs_rd_stationary(params, x_max=args.xmax, y_max=args.xmax)
    fit = tail_fit(table, sigma, args.kmin, args.kmax, y=args.y)
    out = _out_dir(args)
    lines = [_csv_header(params, model, gamma_est=fit.gamma_est,
                         log_prefactor_est=fit.log_prefactor_est,
                         k_min=args.kmin, k_max=args.kmax),
             "k,pi,model_prediction,relative_error\n"]
    for k in range(args.kmin, args.kmax + 1):
        state = (k, sigma) if model is Model.MODEL1 else (k, args.y or 0, sigma)
        pi = table.prob(state)
        pred = np.exp(fit.log_prefactor_est) * fit.gamma_est ** k
        rel = (pi - pred) / pi if pi > 0 else float("nan")
        lines.append(f"{k},{_fmt(pi)},{_fmt(pred)},{_fmt(rel)}\n")
    (out / "tailfit.csv").write_text("".join(lines))
    print(f"gamma_est={_fmt(fit.gamma_est)} "
          f"max_relative_deviation={_fmt(fit.max_relative_deviation)}")
    return 0


def _cmd_compare_mm1(args) -> int:
    params, model = _resolve_params(args)
    report = {"meta": _meta(params, Model.MODEL1),
              "comparison": _jsonable(mm1_comparison(params))}
    out = _out_dir(args) / "compare_mm1.json"
    out.write_text(_dump(report) + "\n")
    print(_dump(report))
    return 0


def _cmd_verify(args) -> int:
    results = run_checks(grid=args.grid, seed=args.seed)
    all_ok = True
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        all_ok = all_ok and res.passed
        print(f"{tag} {res.name}: {res.detail}")
    return 0 if all_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqtail",
        description="Tail asymptotics of queues with an unreliable server")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="verb", required=True)

    analyze = subs.add_parser("analyze", help="closed-form analysis report (JSON)")
    _add_param_flags(analyze)
    analyze.add_argument("--limits", action="store_true",
                         help="include vanishing-breakdown-rate limits")
    analyze.add_argument("--seed", type=int, default=0)
    analyze.set_defaults(func=_cmd_analyze)

    sim = subs.add_parser("simulate", help="sample a trajectory (CSV)")
    _add_param_flags(sim)
    sim.add_argument("--steps", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--burn-in", type=int, default=None)
    sim.set_defaults(func=_cmd_simulate)

    ld = subs.add_parser("ldpath", help="extract rare upward excursions")
    _add_param_flags(ld)
    ld.add_argument("--steps", type=int, required=True)
    ld.add_argument("--level", type=int, required=True)
    ld.add_argument("--base-level", type=int, default=2)
    ld.add_argument("--seed", type=int, default=0)
    ld.set_defaults(func=_cmd_ldpath)

    fit = subs.add_parser("tailfit", help="log-linear tail fit (CSV)")
    _add_param_flags(fit)
    fit.add_argument("--sigma", choices=["up", "down"], default="up")
    fit.add_argument("--kmin", type=int, required=True)
    fit.add_argument("--kmax", type=int, required=True)
    fit.add_argument("--y", type=int, default=None)
    fit.add_argument("--xmax", type=int, default=60)
    fit.set_defaults(func=_cmd_tailfit)

    cmp_ = subs.add_parser("compare-mm1", help="matched reliable-queue comparison")
    _add_param_flags(cmp_)
    cmp_.set_defaults(func=_cmd_compare_mm1)

    verify = subs.add_parser("verify", help="run the invariant suite")
    verify.add_argument("--grid", type=int, default=200)
    verify.add_argument("--seed", type=int, default=7)
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameters as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    except (ArithmeticError, ValueError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
