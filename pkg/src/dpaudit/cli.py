"""dp-audit command line.

Verbs: test (run a tester against a mechanism or fixture), fixture
(build and emit a certified fixture), sweep (one experiment per
parameter value), calibrate (identity-test threshold for a null), and
certify (re-run a fixture's certification gate). Exit codes: 0 on
completion, 1 on usage or configuration errors, 2 when a certification
gate fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .distributions import DiscreteDistribution
from .fixtures import FIXTURE_NAMES, CertificationError, build_fixture
from .fullinfo import CalibrationCache, IdentityTesterConfig
from .harness import ExperimentConfig, run_experiment, sweep
from .mechanisms import SideInfo
from .noinfo import adp_test_budgeted
from .randomprivacy import (
    constant_family,
    data_distribution,
    random_privacy_test,
    value_flag_family,
)


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad usage; we reserve 2 for
    certification failures, so force usage errors to exit 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_params(pairs: list[str]) -> dict:
    params = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--params entries look like key=value, got {item!r}")
        params[key] = _coerce(value)
    return params


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _target_from_args(args) -> dict:
    if args.mech is not None:
        target: dict = {"mechanism": _load_json(args.mech)}
    elif args.fixture is not None:
        target = {
            "fixture": {
                "name": args.fixture,
                "params": _parse_params(args.fixture_params or []),
                "instance": args.instance,
            }
        }
    else:
        raise ValueError("give either --mech or --fixture")
    if args.side is not None:
        if args.side in ("truth", "claim"):
            target["side"] = args.side
        else:
            target["side"] = _load_json(args.side)
    return target


def _cmd_test(args) -> int:
    if args.tester == "random":
        return _cmd_test_random(args)
    tester: dict = {"kind": args.tester, "eps": args.eps, "alpha": args.alpha}
    if args.eps is None or args.alpha is None:
        raise ValueError("--eps and --alpha are required")
    if args.tester in ("adp-ni", "adp-budgeted", "adp-fi"):
        tester["delta"] = args.delta
    if args.tester == "adp-budgeted":
        if args.budget is None:
            raise ValueError("adp-budgeted needs --budget")
        tester["r"] = args.budget
    cfg = ExperimentConfig(
        tester=tester,
        target=_target_from_args(args),
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        threads=args.threads,
    )
    oc = run_experiment(cfg)
    row = oc.grid[0]
    _emit(
        {
            "tester": args.tester,
            "trials": args.trials,
            "distance_from_claim": row.distance,
            "accept_rate": row.accept_rate,
            "wilson_95": [row.wilson_low, row.wilson_high],
            "mean_queries": row.mean_queries,
            "csv": args.out,
        },
        None,
    )
    return 0


def _cmd_test_random(args) -> int:
    if args.family is None:
        raise ValueError("random needs --family")
    doc = _load_json(args.family)
    kind = doc.get("kind")
    if kind == "constant":
        family = constant_family(DiscreteDistribution.from_json(doc["dist"]))
        dd = data_distribution([0], db_size=args.db_size)
    elif kind == "value_flag":
        flag_prob = float(doc["flag_prob"])
        family = value_flag_family(
            {1},
            DiscreteDistribution.from_json(doc["flagged"]),
            DiscreteDistribution.from_json(doc["plain"]),
        )
        dd = data_distribution([0, 1], [1.0 - flag_prob, flag_prob], db_size=args.db_size)
    else:
        raise ValueError("family kind must be 'constant' or 'value_flag'")

    inner_eps = args.inner_eps if args.inner_eps is not None else 0.0
    inner_delta = args.inner_delta if args.inner_delta is not None else 0.0
    if args.inner_alpha is None or args.inner_budget is None:
        raise ValueError("random needs --inner-alpha and --inner-budget")

    def inner(mech, rng):
        return adp_test_budgeted(
            mech, inner_eps, inner_delta, args.inner_alpha, args.inner_budget
        )

    outcome = random_privacy_test(
        family,
        dd,
        inner,
        gamma=args.gamma,
        alpha=args.alpha,
        penalty_weight=args.penalty,
        rng=np.random.default_rng(args.seed),
    )
    _emit(
        {
            "verdict": outcome.verdict.name,
            "statistic": outcome.statistic,
            "threshold": outcome.threshold,
            "queries": list(outcome.queries_used),
            "diagnostics": {
                "trials": outcome.diagnostics["trials"],
                "reps": outcome.diagnostics["reps"],
            },
        },
        args.out,
    )
    return 0


def _fixture_doc(args) -> dict:
    params = _parse_params(args.params or [])
    if args.base is not None:
        params["base"] = _load_json(args.base)
    pair, side = build_fixture(args.name, params, seed=args.seed)
    doc = {"name": args.name, "seed": args.seed}
    doc.update(pair.to_json_dict())
    if side is not None:
        doc["side_info"] = side.to_json()
    return doc


def _cmd_fixture(args) -> int:
    _emit(_fixture_doc(args), args.out)
    return 0


def _cmd_certify(args) -> int:
    if args.fixture_file is not None:
        doc = _load_json(args.fixture_file)
        pair, _side = build_fixture(
            doc["name"], doc["params"], seed=doc.get("seed", 0)
        )
        rebuilt = pair.to_json_dict()
        for instance in ("private", "far"):
            for db in ("p0", "p1"):
                stored = DiscreteDistribution.from_json(doc[instance][db]).probs
                fresh = DiscreteDistribution.from_json(rebuilt[instance][db]).probs
                if stored.shape != fresh.shape or not np.allclose(
                    stored, fresh, rtol=0.0, atol=1e-12
                ):
                    raise CertificationError(
                        f"{instance}.{db} no longer matches its construction"
                    )
        _emit({"name": doc["name"], "certification": rebuilt["certification"]}, args.out)
        return 0
    if args.name is None:
        raise ValueError("give a fixture name or --fixture-file")
    doc = _fixture_doc(args)
    _emit({"name": doc["name"], "certification": doc["certification"]}, args.out)
    return 0


def _cmd_sweep(args) -> int:
    doc = _load_json(args.config)
    base = ExperimentConfig(
        tester=doc["tester"],
        target=doc["target"],
        trials=int(doc.get("trials", 1)),
        seed=int(doc.get("seed", 0)),
        threads=int(doc.get("threads", 1)),
    )
    values = [_coerce(v) for v in args.values.split(",") if v != ""]
    results = sweep(base, args.parameter, values)
    lines = ["value,distance,accept_rate,wilson_low,wilson_high,mean_queries"]
    for value, oc in zip(values, results):
        row = oc.grid[0]
        lines.append(
            f"{value},{repr(row.distance)},{repr(row.accept_rate)},"
            f"{repr(row.wilson_low)},{repr(row.wilson_high)},{repr(row.mean_queries)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def _cmd_calibrate(args) -> int:
    if args.null == "uniform":
        q = DiscreteDistribution(np.full(args.n, 1.0 / args.n))
    elif args.null == "twopoint":
        probs = np.zeros(args.n)
        probs[0], probs[1] = 0.75, 0.25
        q = DiscreteDistribution(probs)
    else:
        q = DiscreteDistribution.from_json(_load_json(args.null))
        if q.n != args.n:
            raise ValueError("--n does not match the null distribution file")
    cfg = IdentityTesterConfig.for_universe(args.n, args.alpha)
    cache = CalibrationCache(args.cache)
    threshold = cache.threshold_for(q, cfg, args.trials)
    _emit(
        {
            "n": args.n,
            "alpha": args.alpha,
            "sample_budget": cfg.sample_budget,
            "confidence": cfg.confidence,
            "trials": args.trials if args.trials is not None else cache.DEFAULT_TRIALS,
            "threshold": threshold,
        },
        args.out,
    )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="dp-audit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="run a tester")
    test.add_argument(
        "tester",
        choices=("adp-ni", "adp-budgeted", "adp-fi", "pdp-fi", "random"),
    )
    test.add_argument("--mech", help="mechanism config JSON file")
    test.add_argument("--fixture", choices=FIXTURE_NAMES)
    test.add_argument("--fixture-params", nargs="*", metavar="K=V")
    test.add_argument("--instance", choices=("private", "far"), default="private")
    test.add_argument("--side", help="'truth', 'claim', or a side-info JSON file")
    test.add_argument("--eps", type=float)
    test.add_argument("--delta", type=float, default=0.0)
    test.add_argument("--alpha", type=float)
    test.add_argument("--budget", type=int, help="per-database samples (adp-budgeted)")
    test.add_argument("--gamma", type=float, default=0.0)
    test.add_argument("--penalty", type=float, default=1.0)
    test.add_argument("--family", help="family JSON file (random)")
    test.add_argument("--db-size", type=int, default=1)
    test.add_argument("--inner-eps", type=float)
    test.add_argument("--inner-delta", type=float)
    test.add_argument("--inner-alpha", type=float)
    test.add_argument("--inner-budget", type=int)
    test.add_argument("--trials", type=int, default=1)
    test.add_argument("--seed", type=int, default=0)
    test.add_argument("--threads", type=int, default=1)
    test.add_argument("--out", help="per-trial CSV path")
    test.set_defaults(func=_cmd_test)

    fixture = sub.add_parser("fixture", help="build a certified fixture")
    fixture.add_argument("name", choices=FIXTURE_NAMES)
    fixture.add_argument("--params", nargs="*", metavar="K=V")
    fixture.add_argument("--base", help="base mechanism config JSON (mean-sideinfo)")
    fixture.add_argument("--seed", type=int, default=0)
    fixture.add_argument("--out")
    fixture.set_defaults(func=_cmd_fixture)

    sweep_p = sub.add_parser("sweep", help="one experiment per parameter value")
    sweep_p.add_argument("--config", required=True, help="experiment config JSON")
    sweep_p.add_argument("--parameter", required=True)
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    sweep_p.add_argument("--out")
    sweep_p.set_defaults(func=_cmd_sweep)

    calibrate = sub.add_parser("calibrate", help="identity-test threshold")
    calibrate.add_argument("--n", type=int, required=True)
    calibrate.add_argument("--alpha", type=float, required=True)
    calibrate.add_argument("--null", default="uniform", help="uniform, twopoint, or a JSON file")
    calibrate.add_argument("--trials", type=int)
    calibrate.add_argument("--cache", help="threshold cache JSON path")
    calibrate.add_argument("--out")
    calibrate.set_defaults(func=_cmd_calibrate)

    certify = sub.add_parser("certify", help="re-run a fixture's certification gate")
    certify.add_argument("name", nargs="?", choices=FIXTURE_NAMES)
    certify.add_argument("--params", nargs="*", metavar="K=V")
    certify.add_argument("--base", help="base mechanism config JSON (mean-sideinfo)")
    certify.add_argument("--fixture-file", help="re-certify an emitted fixture JSON")
    certify.add_argument("--seed", type=int, default=0)
    certify.add_argument("--out")
    certify.set_defaults(func=_cmd_certify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    except CertificationError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
