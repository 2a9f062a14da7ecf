"""Command-line front end: ``lotto bounds | simulate | refine``.

Every output (CSV or JSON) carries a run manifest. Exit codes: 0 success,
2 usage or schema error, 3 assertion failure (``simulate --assert-bounds``).
The default seed comes from ``LOTTO_SEED`` when set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

from . import bounds, refinement
from ._manifest import RunManifest, csv_text, format_float
from ._util import as_fraction, frac_text, parse_sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ASSERT = 3


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("LOTTO_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"LOTTO_SEED must be an integer, got {raw!r}") from None


def _emit(manifest: RunManifest, header: list[str], rows: list[list], args) -> None:
    if args.out:
        manifest.outputs = [str(args.out)]
    if args.format == "json":
        payload = {
            "manifest": manifest.to_dict(),
            "columns": header,
            "rows": [dict(zip(header, [_json_value(v) for v in row])) for row in rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = csv_text(manifest, header, rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_value(v):
    # JSON has no inf or nan; those keep their CSV spelling
    if isinstance(v, float) and not math.isfinite(v):
        return format_float(v)
    return v


def _log10(x) -> float:
    if isinstance(x, bounds.LogProb):
        return x.log10
    return math.log10(x) if x > 0 else -math.inf


def _sweep(args, single: str, sweep: str, required: bool = True):
    one, many = getattr(args, single), getattr(args, sweep)
    if many is not None:
        return parse_sweep(many)
    if one is not None:
        return [as_fraction(one)]
    if required:
        raise UsageError(f"need --{single.replace('_', '-')} or --{sweep.replace('_', '-')}")
    return []


def _params(args, **extra) -> bounds.BoundParams:
    missing = [f for f in ("n_min", "c", "s", "alpha") if getattr(args, f) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + f.replace("_", "-") for f in missing))
    return bounds.BoundParams(
        n_min=args.n_min, c=args.c, s=args.s, alpha=as_fraction(args.alpha), sigma=args.sigma, **extra
    )


# ---- bounds ----------------------------------------------------------------


def cmd_bounds(args) -> int:
    modes = [m for m in ("theorem1", "secagg", "overselect", "pk", "phi", "epsilon") if getattr(args, m)]
    if len(modes) != 1:
        raise UsageError("choose exactly one of --theorem1, --secagg, --overselect, --pk, --phi, --epsilon")
    mode = modes[0]
    resolved = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format") and v is not None}
    manifest = RunManifest("bounds", resolved)

    if mode == "overselect":
        if args.n is None or args.s is None:
            raise UsageError("--overselect needs --n and --s")
        rows = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for a in _sweep(args, "alpha", "alpha_sweep"):
                v = bounds.overselection_success(args.n, args.s, a)
                rows.append([frac_text(a), float(v), _log10(v)])
        _emit(manifest, ["alpha", "success", "log10_success"], rows, args)
        return EXIT_OK

    if mode == "theorem1":
        params = _params(args)
        rows = []
        for eta in _sweep(args, "eta", "eta_sweep"):
            v = bounds.theorem1_bound(params, eta)
            rows.append([frac_text(eta), math.floor(eta * params.s), float(v), _log10(v)])
        _emit(manifest, ["eta", "k", "bound", "log10_bound"], rows, args)
        return EXIT_OK

    if mode == "secagg":
        params = _params(args)
        ts = _sweep(args, "t", "t_sweep")
        rows = []
        for t in ts:
            v = bounds.secagg_failure_bound(params, t)
            rows.append([frac_text(t), bounds.secagg_threshold(params, t), float(v), _log10(v)])
        _emit(manifest, ["t", "k", "bound", "log10_bound"], rows, args)
        return EXIT_OK

    if mode == "pk":
        params = _params(args)
        if args.rounds is None:
            raise UsageError("--pk needs --rounds")
        ks = [int(k) for k in _sweep(args, "k", "k_sweep")]
        rows = []
        for k in ks:
            v = bounds.p_k(params, k, args.rounds)
            rows.append([k, float(v), _log10(v)])
        _emit(manifest, ["k", "p_k", "log10_p_k"], rows, args)
        return EXIT_OK

    if mode == "phi":
        params = _params(args)
        if args.rounds is None:
            raise UsageError("--phi needs --rounds")
        rs = [int(r) for r in _sweep(args, "r", "r_sweep", required=False)] or list(range(args.rounds + 1))
        rows = []
        for r in rs:
            qc = bounds.q_r_client(params, r, args.rounds)
            row = [r, float(qc), _log10(qc)]
            if args.n_max is not None:
                qs = bounds.q_r_server(params, r, args.rounds, args.n_max)
                row += [float(qs), _log10(qs)]
            rows.append(row)
        header = ["r", "q_client", "log10_q_client"]
        if args.n_max is not None:
            header += ["q_server", "log10_q_server"]
        _emit(manifest, header, rows, args)
        return EXIT_OK

    # epsilon
    if args.rounds is None or args.delta is None:
        raise UsageError("--epsilon needs --rounds and --delta")
    extra = {}
    if args.t is not None:
        extra["t"] = as_fraction(args.t)
    params = _params(args, **extra)
    acct = bounds.make_accountant(args.accountant, args.constant)
    rows = []
    variants = ["client-centric"] + (["server-centric"] if args.n_max is not None else [])
    for variant in variants:
        if variant == "client-centric":
            res = bounds.epsilon_client_centric(params, args.rounds, args.delta, acct, detail=True)
        else:
            res = bounds.epsilon_server_centric(params, args.rounds, args.delta, args.n_max, acct, detail=True)
        rows.append(
            [
                variant,
                float(res.epsilon),
                "" if res.k is None else res.k,
                "" if res.r is None else res.r,
                "" if res.delta_prime is None else float(res.delta_prime),
                res.feasible,
            ]
        )
    _emit(manifest, ["variant", "epsilon", "k", "r", "delta_prime", "feasible"], rows, args)
    return EXIT_OK


# ---- simulate --------------------------------------------------------------


def cmd_simulate(args) -> int:
    from .simharness import ScenarioError, load_scenario, run_scenario, write_outputs

    seed = args.seed if args.seed is not None else (_default_seed() if "LOTTO_SEED" in os.environ else None)
    try:
        sc = load_scenario(args.scenario, seed_override=seed)
    except (OSError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.trials is not None:
        sc.trials = args.trials
        sc.raw = {**sc.raw, "trials": args.trials}
    if args.engine is not None:
        sc.engine = args.engine
        sc.raw = {**sc.raw, "engine": args.engine}
    if seed is not None:
        sc.raw = {**sc.raw, "seed": seed}
    result = run_scenario(sc)
    out_dir = Path(args.out or "out") / sc.name
    write_outputs(result, out_dir)
    for name, rep in result.reports.items():
        summ = rep.summary()
        print(
            f"{name}: trials={summ['trials']} completed={summ['completed']} "
            f"abort_rate={summ['abort_rate']:.4f} mean_x={summ['mean_x']:.4f} "
            f"honest_finalizations={summ['honest_finalizations']}"
        )
        for chk in result.checks.get(name, []):
            verdict = "pass" if chk.passed else "FAIL"
            print(f"  eta={frac_text(chk.eta)} empirical={chk.empirical:.3e} bound={chk.bound:.3e} {verdict}")
    for tr in result.transcripts[:1]:
        if tr.finalized is not None:
            print(f"finalized: {list(tr.finalized.ids)}")
    print(f"outputs in {out_dir}")
    if args.assert_bounds and not result.bounds_ok:
        print("bound assertion failed", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


# ---- refine ----------------------------------------------------------------


def cmd_refine(args) -> int:
    resolved = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format") and v is not None}
    seed = args.seed if args.seed is not None else _default_seed()
    manifest = RunManifest("refine", resolved, seed=seed)

    if args.worst_case:
        if args.base_rate is None:
            raise UsageError("--worst-case needs --base-rate")
        n = args.n or 100000
        rate = as_fraction(args.base_rate)
        c = rate * n
        rows = []
        for d in _sweep(args, "d", "d_sweep"):
            v = refinement.worst_case_base_rate(c, n, d)
            rows.append([frac_text(d), float(v), float(v / rate) - 1.0 if rate else 0.0])
        _emit(manifest, ["d", "dishonest_rate", "relative_increase"], rows, args)
        return EXIT_OK

    if args.zipf_gain:
        if args.p is None:
            raise UsageError("--zipf-gain needs --p")
        rows = [[frac_text(d), refinement.zipf_quality_gain(d, args.p)] for d in _sweep(args, "d", "d_sweep")]
        _emit(manifest, ["d", "gain"], rows, args)
        return EXIT_OK

    if args.table:
        try:
            pop = refinement.read_utility_table(Path(args.table))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    elif args.synthetic is not None:
        if args.synthetic < 1:
            raise UsageError("population is empty")
        pop = refinement.synthetic_population(args.synthetic, seed, args.zipf_a)
    else:
        raise UsageError("need --table, --synthetic, --worst-case or --zipf-gain")
    if not pop:
        raise UsageError("population is empty")
    if args.d is None:
        raise UsageError("--d is required")
    cfg = refinement.RefinementConfig(
        d=float(as_fraction(args.d)),
        strategy=refinement.Strategy(args.strategy),
        deadline_T=args.deadline,
        penalty_alpha=args.penalty,
        d_total=None if args.d_total is None else float(as_fraction(args.d_total)),
        or_union=args.or_union,
    )
    removed = set(refinement.exclusion_set(pop, cfg))
    rows = [[u.client_id, int(u.client_id not in removed)] for u in sorted(pop, key=lambda u: u.client_id)]
    _emit(manifest, ["client_id", "kept"], rows, args)
    print(f"removed {len(removed)} of {len(pop)}: {sorted(removed)}", file=sys.stderr)
    return EXIT_OK


# ---- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lotto", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    b = sub.add_parser("bounds", help="analytic bounds")
    for flag in ("theorem1", "secagg", "overselect", "pk", "phi", "epsilon"):
        b.add_argument(f"--{flag}", action="store_true")
    b.add_argument("--n-min", type=int)
    b.add_argument("--n", type=int, help="population size for --overselect")
    b.add_argument("--c", type=int)
    b.add_argument("--s", type=int)
    b.add_argument("--alpha")
    b.add_argument("--alpha-sweep")
    b.add_argument("--eta")
    b.add_argument("--eta-sweep")
    b.add_argument("--t")
    b.add_argument("--t-sweep")
    b.add_argument("--k")
    b.add_argument("--k-sweep")
    b.add_argument("--r")
    b.add_argument("--r-sweep")
    b.add_argument("--rounds", type=int)
    b.add_argument("--delta", type=float)
    b.add_argument("--n-max", type=int)
    b.add_argument("--sigma", type=float)
    b.add_argument("--accountant", default="mock", choices=sorted(bounds.ACCOUNTANTS) + ["constant"])
    b.add_argument("--constant", type=float, help="value for --accountant constant")
    outputs(b)
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("scenario")
    s.add_argument("--out", help="output directory (default ./out)")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--engine", choices=["auto", "fast", "protocol"])
    s.add_argument("--assert-bounds", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("refine", help="population refinement analytics")
    r.add_argument("--table", help="utility table CSV")
    r.add_argument("--synthetic", type=int, help="generate N synthetic clients")
    r.add_argument("--zipf-a", type=float, default=1.2)
    r.add_argument("--seed", type=int)
    r.add_argument("--strategy", choices=[st.value for st in refinement.Strategy], default="joint")
    r.add_argument("--d")
    r.add_argument("--d-sweep")
    r.add_argument("--d-total")
    r.add_argument("--or-union", action="store_true")
    r.add_argument("--deadline", type=float, default=1.0)
    r.add_argument("--penalty", type=float, default=2.0)
    r.add_argument("--worst-case", action="store_true")
    r.add_argument("--base-rate")
    r.add_argument("--n", type=int, help="population size for --worst-case")
    r.add_argument("--zipf-gain", action="store_true")
    r.add_argument("--p", type=float)
    outputs(r)
    r.set_defaults(func=cmd_refine)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
