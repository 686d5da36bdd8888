"""Command-line front end.

Method descriptors are colon-separated tokens, for example::

    bdf:smfc:iequi:inward:q=4:a=0.5
    adams:pmfcmj:icheb:fi3:q=4:a=0.2
    gbdf:smvc:explicit:q=3:a=0.75
    bdf:6                      (classical BDF-6; stability and experiments only)

The first two tokens are the family (adams, bdf, gbdf) and the index-set
strategy (pmfc, smvc, smfc, pmfcmj, smfcmj).  Remaining tokens may appear in
any order: a node family (iequi, icheb), an ordering (inward, outward,
classical), an implicitness (explicit, di, fully_implicit), an Adams endpoint
(vi, sweeping, fiL) and the keys q=, a= (or alpha=) and ell=.  Defaults are
iequi, inward and di.  ``--spec file.json`` accepts the same fields as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, diagrams, stability
from .builder import MethodSpec, build_method, make_spec, parse_endpoint, parse_implicitness
from .errors import ConfigurationError, PolyblockError
from .nodes import parse_family, parse_ordering

FAMILIES = ("adams", "bdf", "gbdf")
STRATEGIES = ("pmfc", "smvc", "smfc", "pmfcmj", "smfcmj")


def _try(parser, token):
    try:
        return parser(token)
    except ConfigurationError:
        return None


def parse_descriptor(text: str):
    """Parse an inline descriptor into a :class:`MethodSpec` or a classical BDF."""
    tokens = [t.strip() for t in text.strip().split(":") if t.strip()]
    if not tokens:
        raise ConfigurationError("empty method descriptor")
    head = tokens[0].lower()
    if head.startswith("bdf") and head[3:].isdigit():
        return bench.classical_bdf(int(head[3:]))
    if head == "bdf" and len(tokens) == 2 and tokens[1].isdigit():
        return bench.classical_bdf(int(tokens[1]))
    if head not in FAMILIES:
        raise ConfigurationError(f"descriptor field 'family': unknown value {tokens[0]!r}")
    if len(tokens) < 2 or tokens[1].lower() not in STRATEGIES:
        got = tokens[1] if len(tokens) > 1 else None
        raise ConfigurationError(f"descriptor field 'strategy': unknown value {got!r}")
    fields = {"family": head, "strategy": tokens[1].lower()}
    for tok in tokens[2:]:
        low = tok.lower()
        if "=" in low:
            key, _, val = low.partition("=")
            key = {"a": "alpha"}.get(key, key)
            if key not in ("q", "alpha", "ell"):
                raise ConfigurationError(f"descriptor: unknown key {key!r}")
            fields[key] = val
        elif _try(parse_family, low) is not None:
            fields["node_family"] = low
        elif _try(parse_ordering, low) is not None:
            fields["ordering"] = low
        elif low != "fi" and not (low.startswith("fi") and low[2:].isdigit()) \
                and _try(parse_implicitness, low) is not None:
            fields["implicitness"] = low
        elif _try(lambda v: parse_endpoint(v, ell=0), low) is not None:
            fields["endpoint"] = low
        else:
            raise ConfigurationError(f"descriptor: unrecognised token {tok!r}")
    return spec_from_fields(fields)


def spec_from_fields(fields: dict) -> MethodSpec:
    """Build a spec from wire fields, naming the offending field on failure."""
    for key in ("family", "strategy", "q", "alpha"):
        if key not in fields:
            raise ConfigurationError(f"descriptor field {key!r} is required")
    try:
        q = int(fields["q"])
    except (TypeError, ValueError):
        raise ConfigurationError(f"descriptor field 'q': not an integer ({fields['q']!r})") from None
    try:
        alpha = float(fields["alpha"])
    except (TypeError, ValueError):
        raise ConfigurationError(f"descriptor field 'alpha': not a number ({fields['alpha']!r})") from None
    ell = fields.get("ell")
    endpoint = fields.get("endpoint")
    if endpoint is not None:
        endpoint = parse_endpoint(endpoint, None if ell is None else int(ell))
    return make_spec(fields["family"], fields["strategy"], q, alpha,
                     node_family=fields.get("node_family", "equispaced"),
                     ordering=fields.get("ordering", "inward"),
                     implicitness=fields.get("implicitness", "diagonally_implicit"),
                     endpoint=endpoint)


def _method(args):
    if args.spec:
        try:
            data = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read spec file: {exc}") from None
        return spec_from_fields(data)
    if not args.descriptor:
        raise ConfigurationError("a descriptor or --spec file is required")
    return parse_descriptor(args.descriptor)


def _require_pbm(method):
    if not isinstance(method, MethodSpec):
        raise ConfigurationError("this command needs a polynomial block method descriptor")
    return method


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_coeffs(args) -> int:
    spec = _require_pbm(_method(args))
    m = build_method(spec)
    residual = m.consistency_residual()
    if args.format == "json":
        payload = m.to_json()
        payload["spec"] = spec.to_json()
        payload["consistency_residual"] = residual
        _emit(_json(payload), args.out)
    else:
        if not args.out:
            for name in "ABCD":
                sys.stdout.write(f"# {name}\n{m.to_csv(name)}")
        else:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name in "ABCD":
                (out / f"{name}.csv").write_text(m.to_csv(name))
        print(f"consistency residual |(A + C)1 - 1| = {residual:.3e}", file=sys.stderr)
    return 0


def _stability_matrices(method):
    return method.block_matrices() if isinstance(method, bench.ClassicalBDF) else build_method(method)


def cmd_stability(args) -> int:
    method = _method(args)
    if args.sweep:
        spec = _require_pbm(method)
        a0, a1, n = float(args.sweep[0]), float(args.sweep[1]), int(args.sweep[2])
        if not (0 < a0 <= a1) or n < 1:
            raise ConfigurationError("--sweep needs 0 < alpha0 <= alpha1 and n >= 1")
        sweep = stability.alpha_sweep(spec, np.linspace(a0, a1, n), jobs=args.jobs)
        _emit(sweep.to_csv(), args.out)
    elif args.region:
        re0, re1, im0, im1 = map(float, args.region[:4])
        nx, ny = int(args.region[4]), int(args.region[5])
        if nx < 2 or ny < 2:
            raise ConfigurationError("--region needs nx, ny >= 2")
        grid = stability.region_grid(_stability_matrices(method), (re0, re1), (im0, im1), nx, ny)
        _emit(grid.to_csv(), args.out)
    else:
        rep = stability.stability_angle(_stability_matrices(method), ray_samples=args.samples)
        _emit(_json(rep.to_json()), args.out)
    return 0


def _experiment_problem(args):
    name = args.name
    if name == "dahlquist":
        p = bench.dahlquist_problem(args.lam if args.lam is not None else -1.0)
        return p, (0.0, 1.0), p.exact(0.0), None
    if name == "prothero":
        p = bench.prothero_robinson_problem(args.lam if args.lam is not None else -50.0)
        return p, (0.0, 1.0), p.exact(0.0), None
    if name == "burgers":
        cfg = bench.BurgersConfig(N=args.N or 256)
        p = bench.burgers_problem(cfg)
        y0 = cfg.initial().astype(complex)
        return p, (0.0, cfg.t_end), y0, bench.reference_solution(p, (0.0, cfg.t_end), y0)
    cfg = bench.NlsConfig(N=args.N or 64, t_end=args.T or 1.0)
    p = bench.nls_problem(cfg)
    y0 = cfg.initial().astype(complex)
    return p, (0.0, cfg.t_end), y0, bench.reference_solution(p, (0.0, cfg.t_end), y0)


def _step_counts(args, t_span) -> list:
    T = t_span[1] - t_span[0]
    if args.steps:
        return [int(s) for s in args.steps]
    counts = []
    for h in args.hs:
        n = T / float(h)
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ConfigurationError(f"h={h} does not divide the interval of length {T:g}")
        counts.append(int(round(n)))
    return counts


def cmd_experiment(args) -> int:
    method = _method(args)
    problem, t_span, y0, ref = _experiment_problem(args)
    steps = _step_counts(args, t_span)
    run = bench.convergence_study(problem, method, steps, t_span, y0, ref, jobs=args.jobs)
    manifest = {
        "experiment": args.name,
        "problem": problem.name,
        "descriptor": args.descriptor,
        "method": method.to_json() if isinstance(method, MethodSpec) else {"classical_bdf": method.k},
        "steps": steps,
        "order": run.order,
        "conclusive": run.conclusive,
        "fit_range": run.fit_range,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "precision.csv").write_text(run.to_csv())
    (out / "manifest.json").write_text(_json(manifest))
    order = "inconclusive" if run.order is None else f"{run.order:.3f}"
    print(f"{run.label} on {problem.name}: observed order {order}")
    return 0


def cmd_diagram(args) -> int:
    spec = _require_pbm(_method(args))
    if args.kind == "node":
        svgs = {"": diagrams.node_diagram(spec)}
    elif args.kind == "expansion":
        svgs = {"": diagrams.expansion_diagram(spec)}
    else:
        panels = diagrams.polynomial_diagram(spec)
        svgs = {"": panels[0]} if len(panels) == 1 else {"_Ly": panels[0], "_LF": panels[1]}
    for suffix, svg in svgs.items():
        if args.out:
            p = Path(args.out)
            _emit(svg, str(p.with_name(p.stem + suffix + (p.suffix or ".svg"))))
        else:
            sys.stdout.write(svg)
    return 0


def _add_method_args(p):
    p.add_argument("descriptor", nargs="?", help="inline method descriptor (see module help)")
    p.add_argument("--spec", help="JSON file with descriptor fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyblock", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="emit block matrices A, B, C, D")
    _add_method_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output file (json) or directory (csv)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("stability", help="stability angle, region grid or alpha sweep")
    _add_method_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--angle", action="store_true", help="A(theta) angle (default)")
    g.add_argument("--region", nargs=6, metavar=("RE0", "RE1", "IM0", "IM1", "NX", "NY"))
    g.add_argument("--sweep", nargs=3, metavar=("A0", "A1", "N"))
    p.add_argument("--samples", type=int, default=stability.RAY_SAMPLES, help="samples per ray")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("experiment", help="convergence study on a test problem")
    p.add_argument("name", choices=("burgers", "nls", "prothero", "dahlquist"))
    _add_method_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--steps", nargs="+", type=int)
    g.add_argument("--hs", nargs="+", type=float)
    p.add_argument("--out", default="experiment_out")
    p.add_argument("--lam", type=float, help="lambda for dahlquist/prothero")
    p.add_argument("--N", type=int, help="spatial resolution for burgers/nls")
    p.add_argument("--T", type=float, help="final time for nls")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("diagram", help="SVG stencil diagrams")
    _add_method_args(p)
    p.add_argument("--kind", choices=("node", "expansion", "polynomial"), default="node")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagram)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolyblockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
