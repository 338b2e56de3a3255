"""Command-line front end: ``solve``, ``bench`` and ``verify``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .analysis import DEFAULT_RESOLUTION, run_verification
from .covariance import Box, CovarianceModel
from .selection import ProblemInstance

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_box(text: str) -> Box:
    vals = [float(v) for v in text.split(",")]
    if len(vals) % 2 or not vals:
        raise UsageError("--box needs 2*d comma-separated numbers: lo_1,...,lo_d,hi_1,...,hi_d")
    d = len(vals) // 2
    return Box(tuple(vals[:d]), tuple(vals[d:]))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spatial-greedy", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="select measurement locations for one instance")
    s.add_argument("--method", choices=["grid", "centroid", "both"], default="centroid")
    s.add_argument("--rho", type=int, help="grid points per axis (grid method)")
    s.add_argument("--matched", action="store_true", help="use rho = ceil(sqrt(2 |omega|))")
    s.add_argument("--omega-file", help="CSV of prediction points with header x,y[,z...]")
    s.add_argument("--box", help="measurement box lo_1,..,lo_d,hi_1,..,hi_d (default: from --env or omega bounds)")
    s.add_argument("--env", choices=sorted(harness.ENVIRONMENTS), default="small",
                   help="square environment preset for generated instances")
    s.add_argument("--n-pred", type=int, default=20, help="prediction points to generate without --omega-file")
    s.add_argument("--budget", type=int, default=8)
    s.add_argument("--sigma0", type=float, default=harness.DEFAULT_MODEL.sigma0)
    s.add_argument("--length-scale", type=float, default=harness.DEFAULT_MODEL.length_scale)
    s.add_argument("--noise-var", type=float, default=harness.DEFAULT_MODEL.noise_var)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--out", help="write the JSON result here instead of stdout")

    b = sub.add_parser("bench", help="run the benchmark protocol")
    b.add_argument("--suite-file", help="JSON suite overriding the default presets")
    b.add_argument("--out-dir", required=True)
    b.add_argument("--instances", type=int, help="instances per cell")
    b.add_argument("--envs", help="comma-separated subset of environments")
    b.add_argument("--regimes", help="comma-separated subset of regimes")
    b.add_argument("--seed", type=int)
    b.add_argument("--jobs", type=int, default=1)

    v = sub.add_parser("verify", help="run the structural checks")
    v.add_argument("--sweep-size", type=int, default=200)
    v.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    v.add_argument("--seed", type=int, default=0)
    return p


def _solve(args) -> int:
    model = CovarianceModel(args.sigma0, args.length_scale, args.noise_var)
    config = harness.RunConfig(method=args.method, rho=args.rho, matched_resource=args.matched,
                               seed=args.seed, repeats=args.repeats, output_path=args.out)
    if args.omega_file:
        omega = harness.load_omega_csv(args.omega_file)
        if args.box:
            box = _parse_box(args.box)
        else:
            box = Box(tuple(omega.min(axis=0)), tuple(omega.max(axis=0)))
        instance = ProblemInstance(box=box, omega=omega, budget=args.budget, model=model)
    else:
        box = _parse_box(args.box) if args.box else Box.square(harness.ENVIRONMENTS[args.env])
        instance = harness.generate_instance(box, args.n_pred, args.budget, model, args.seed)
    reports = harness.run(config, instance)
    doc = harness.run_document(config, instance, reports)
    text = json.dumps(doc, indent=2)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise harness.HarnessIOError(f"cannot write {args.out}: {exc}") from exc
        for r in reports:
            print(f"{r.method}: objective={r.objective:.6g} mse={r.total_mse:.6g} "
                  f"ground_set={r.ground_set_size} seconds={r.elapsed:.3f}")
    else:
        print(text)
    return EXIT_OK


def _subset(mapping: dict, names: str | None, what: str) -> dict:
    if not names:
        return mapping
    keys = [n.strip() for n in names.split(",") if n.strip()]
    missing = [k for k in keys if k not in mapping]
    if missing:
        raise UsageError(f"unknown {what}: {missing}; choose from {sorted(mapping)}")
    return {k: mapping[k] for k in keys}


def _bench(args) -> int:
    suite = harness.BenchmarkSuite.from_file(args.suite_file) if args.suite_file else harness.BenchmarkSuite()
    suite.environments = _subset(suite.environments, args.envs, "environments")
    suite.regimes = _subset(suite.regimes, args.regimes, "regimes")
    if args.instances is not None:
        suite.instances_per_cell = args.instances
    if args.seed is not None:
        suite.seed = args.seed
    summary = harness.bench(suite, args.out_dir, jobs=max(1, args.jobs))
    for name, cell in summary["cells"].items():
        c, g, e = cell["centroid"], cell["grid"], cell["escalation"]
        print(f"{name:16s} mse centroid={c['mse_mean']:.4g} grid={g['mse_mean']:.4g}  "
              f"parity {e['parity_reached']}/{e['n']}  time ratio {e['time_ratio_mean']:.2f}")
    print(f"results in {args.out_dir} ({summary['wall_seconds']:.1f}s)")
    return EXIT_OK


def _verify(args) -> int:
    report = run_verification(sweep_size=args.sweep_size, resolution=args.resolution, seed=args.seed)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": _solve, "bench": _bench, "verify": _verify}
    try:
        return handlers[args.command](args)
    except harness.HarnessIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
