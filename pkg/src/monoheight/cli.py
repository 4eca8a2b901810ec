"""Command line front end: ``monoheight <command> [options]``.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input,
3 a hypothesis was not met.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .canonical import (
    HeightOptions,
    backward_canonical_height,
    forward_canonical_height,
    total_canonical_height,
)
from .errors import DegenerateDynamicsError, HypothesisError, MonoheightError
from .linalg import IntMatrix, backward_matrix, det
from .smallheight import dirichlet_small_forward, dirichlet_small_total, fibonacci_points
from .spectral import spectral_data
from .suite import SUITE_IDENTITIES, run_suite
from .torus import TorusPoint, weil_height
from .verify import VERIFIERS, preperiodicity_test

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3

COMMANDS = ("analyze", "height", "canheight", "verify", "gen-small", "suite")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    matrix: str | None = None
    points: list[str] = field(default_factory=list)
    n_max: int | None = None
    window: int | None = None
    tolerance: float = 1e-6
    epsilon: float = 0.01
    y_max: int = 10**6
    fmt: str = "json"
    seed: int = 42
    parallel: int = 0

    def __post_init__(self):
        if self.fmt not in ("json", "table"):
            raise InputError(f"format must be json or table, got {self.fmt!r}")
        for name in ("n_max", "window", "tolerance", "epsilon", "y_max"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InputError(f"--{name.replace('_', '')} must be positive")
        if self.parallel < 0:
            raise InputError("--parallel must be nonnegative")

    def height_options(self) -> HeightOptions:
        kw = {"tolerance": self.tolerance, "window": self.window}
        if self.n_max is not None:
            kw["n_max"] = self.n_max
        return HeightOptions(**kw)


def _load_json(text: str):
    """Inline JSON, or the path of a UTF-8 JSON file."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON and not a file: {text!r}") from exc


def parse_matrix(text: str | None) -> IntMatrix:
    if text is None:
        raise InputError("--matrix is required")
    return IntMatrix.from_json(_load_json(text))


def parse_point(text: str) -> TorusPoint:
    data = _load_json(text)
    if isinstance(data, list):
        data = [str(x) if not isinstance(x, str) else x for x in data]
    return TorusPoint.from_json(data)


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj)


def render(obj, fmt: str) -> str:
    obj = _clean(obj)
    if fmt == "json":
        return json.dumps(obj, indent=2)
    rows = list(_flatten(obj))
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def cmd_analyze(cfg: RunConfig):
    A = parse_matrix(cfg.matrix)
    out = spectral_data(A).to_json()
    out["matrix"] = A.tolist()
    out["det"] = det(A)
    out["backward_matrix"] = backward_matrix(A).tolist()
    return out, EXIT_OK


def cmd_height(cfg: RunConfig):
    out = []
    for text in cfg.points:
        P = parse_point(text)
        h = weil_height(P)
        out.append({"point": P.to_json(), "height": h.value, "exact_zero": h.exact_zero})
    return (out[0] if len(out) == 1 else out), EXIT_OK


def cmd_canheight(cfg: RunConfig, which: str, method: str):
    A = parse_matrix(cfg.matrix)
    opts = cfg.height_options()
    if method == "iterative":
        opts = HeightOptions(opts.n_max, opts.window, opts.tolerance, "iterative")
    fn = {"forward": forward_canonical_height, "backward": backward_canonical_height,
          "total": total_canonical_height}[which]
    out = []
    for text in cfg.points:
        P = parse_point(text)
        est = fn(A, P, opts).to_json()
        est["which"] = which
        est["point"] = P.to_json()
        out.append(est)
    return (out[0] if len(out) == 1 else out), EXIT_OK


def cmd_verify(cfg: RunConfig, identity: str):
    A = parse_matrix(cfg.matrix)
    opts = cfg.height_options()
    reports, code = [], EXIT_OK
    for text in cfg.points:
        P = parse_point(text)
        if identity == "preperiodic":
            res = preperiodicity_test(A, P).to_json()
            res["point"] = P.to_json()
            reports.append(res)
            continue
        fn = VERIFIERS[identity]
        rep = fn(A, P, opts=opts) if identity in ("functional-eq", "recurrence", "lower-bound") else fn(A, P)
        reports.append(rep.to_json())
        if not rep.hypotheses_met:
            code = EXIT_HYPOTHESIS if code == EXIT_OK else code
        elif not rep.passed:
            code = EXIT_FAIL
    return (reports[0] if len(reports) == 1 else reports), code


def cmd_gen_small(cfg: RunConfig, mode: str, k: int):
    opts = cfg.height_options()
    if mode == "fibonacci":
        cert = fibonacci_points(k, opts)
    else:
        A = parse_matrix(cfg.matrix)
        fn = dirichlet_small_forward if mode == "forward" else dirichlet_small_total
        cert = fn(A, cfg.epsilon, cfg.y_max, opts=opts)
    return cert.to_json(), (EXIT_OK if cert.holds else EXIT_FAIL)


def cmd_suite(cfg: RunConfig, count: int):
    summary = run_suite(cfg.seed, count, SUITE_IDENTITIES, opts=cfg.height_options(), parallel=cfg.parallel)
    return summary.to_json(), (EXIT_OK if summary.all_passed else EXIT_FAIL)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--matrix", help="integer matrix as JSON rows, {'n','rows'}, or a file path")
    common.add_argument("--point", action="append", default=[], help="point as JSON (repeatable)")
    common.add_argument("--nmax", type=int, default=None)
    common.add_argument("--window", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--format", choices=("json", "table"), default="json")

    p = argparse.ArgumentParser(prog="monoheight", description="Canonical heights of monomial maps over Q")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="spectral report of a matrix")
    sub.add_parser("height", parents=[common], help="Weil height of a point")
    ch = sub.add_parser("canheight", parents=[common], help="canonical height estimate")
    ch.add_argument("--which", choices=("forward", "backward", "total"), default="forward")
    ch.add_argument("--method", choices=("auto", "iterative"), default="auto")
    v = sub.add_parser("verify", parents=[common], help="check an identity or criterion")
    v.add_argument("--identity", choices=sorted(VERIFIERS) + ["preperiodic"], default="functional-eq")
    g = sub.add_parser("gen-small", parents=[common], help="points of small canonical height")
    g.add_argument("--mode", choices=("fibonacci", "forward", "total"), default="fibonacci")
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--epsilon", type=float, default=0.01)
    g.add_argument("--ymax", type=int, default=10**6)
    s = sub.add_parser("suite", parents=[common], help="randomized property suites")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--parallel", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            matrix=args.matrix,
            points=args.point,
            n_max=args.nmax,
            window=args.window,
            tolerance=args.tol,
            epsilon=getattr(args, "epsilon", 0.01),
            y_max=getattr(args, "ymax", 10**6),
            fmt=args.format,
            seed=getattr(args, "seed", 42),
            parallel=getattr(args, "parallel", 0),
        )
        if args.command in ("height", "canheight", "verify") and not cfg.points:
            raise InputError("--point is required")
        if args.command == "analyze":
            out, code = cmd_analyze(cfg)
        elif args.command == "height":
            out, code = cmd_height(cfg)
        elif args.command == "canheight":
            out, code = cmd_canheight(cfg, args.which, args.method)
        elif args.command == "verify":
            out, code = cmd_verify(cfg, args.identity)
        elif args.command == "gen-small":
            if args.k < 2:
                raise InputError("--k must be at least 2")
            out, code = cmd_gen_small(cfg, args.mode, args.k)
        else:
            if args.count < 1:
                raise InputError("--count must be positive")
            out, code = cmd_suite(cfg, args.count)
    except (HypothesisError, DegenerateDynamicsError) as exc:
        print(f"hypothesis not met: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (InputError, MonoheightError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(render(out, cfg.fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
