"""Command-line interface: ``hyperdiff <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 input validation error,
3 verification failure.
"""
import argparse
import json
import sys

import numpy as np

from . import core, diffusion, spectral, sssl, verification
from .operator import derivative_tower

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj, path):
    _emit(json.dumps(obj, indent=2) + "\n", path)


def _read_doc(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise core.HypergraphError(f"parse error in {path}: {exc}") from exc
    except OSError as exc:
        raise core.HypergraphError(f"cannot read {path}: {exc.strerror}") from exc


def _load(args):
    if not args.input:
        raise UsageError("--input is required")
    doc = _read_doc(args.input)
    return core.hypergraph_from_dict(doc), doc


def _vector(H, doc, key, seed):
    """Density vector from the input document, or a seeded Gaussian one."""
    if key in doc:
        f = np.asarray(doc[key], dtype=float)
        if f.shape != (H.n,):
            raise core.HypergraphError(f"'{key}' must have {H.n} entries")
        return f
    return np.random.default_rng(seed).standard_normal(H.n)


def cmd_expansion(args):
    H, _ = _load(args)
    if args.exact:
        phi, S = core.brute_force_phi_H(H)
        rep = core.expansion(H, S).to_dict()
        rep.update(method="exact", phi_H=phi)
    else:
        res = spectral.estimate_gamma2(H, restarts=args.restarts, seed=args.seed,
                                       threads=args.threads)
        rep = res.sweep.to_dict()
        rep.update(method="sweep", phi_upper_bound=res.sweep.phi)
    _dump(rep, args.output)
    return EXIT_OK


def cmd_diffuse(args):
    H, doc = _load(args)
    f0 = _vector(H, doc, "f0", args.seed)
    cfg = diffusion.IntegratorConfig(step=args.step, max_time=args.max_time or 10.0,
                                     stop_grad_tol=args.grad_tol if args.grad_tol is not None else 1e-9,
                                     record_every=args.record_every)
    recs = diffusion.run(H, f0, cfg)
    diffusion.write_trajectory_csv(recs, args.output or sys.stdout)
    if args.densities:
        diffusion.write_density_jsonl(recs, args.densities)
    return EXIT_OK


def cmd_spectral(args):
    H, _ = _load(args)
    cfg = None
    if args.step or args.max_time or args.grad_tol is not None:
        base = spectral.default_spectral_config(H)
        cfg = diffusion.IntegratorConfig(
            step=args.step or base.step, max_time=args.max_time or base.max_time,
            stop_grad_tol=base.stop_grad_tol if args.grad_tol is None else args.grad_tol)
    res = spectral.estimate_gamma2(H, restarts=args.restarts, config=cfg, seed=args.seed,
                                   threads=args.threads)
    _dump(res.to_dict(), args.output)
    return EXIT_OK


def cmd_sssl(args):
    H, doc = _load(args)
    if not args.labels:
        raise UsageError("--labels is required")
    raw = sssl.load_labels(args.labels)
    index = {name: i for i, name in enumerate(H.names)} if H.names else {}
    labels = {core._vertex_id(k, index): float(v) for k, v in raw.items()}
    f0 = doc.get("f0_N")
    prob = sssl.LabelProblem(H, labels, f0)
    kwargs = {"grad_tol": 1e-10 if args.grad_tol is None else args.grad_tol}
    if args.max_time:
        kwargs["max_time"] = args.max_time
    if args.step:
        kwargs["step"] = args.step
    rep = sssl.solve(prob, mode=args.mode, **kwargs)
    _dump(rep.to_dict(), args.output)
    return EXIT_OK


def cmd_verify(args):
    if args.input:
        H, _ = _load(args)
        results = verification.verify_instance(H, seed=args.seed)
    else:
        results = verification.run_criteria(seed=args.seed)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    if args.output:
        _dump([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
              args.output)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_derivatives(args):
    H, doc = _load(args)
    f = _vector(H, doc, "f", args.seed)
    if args.order < 0:
        raise UsageError("--order must be nonnegative")
    _dump(derivative_tower(H, f, args.order).to_dict(), args.output)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="hyperdiff", description="Diffusion on directed hypergraphs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--input", help="hypergraph JSON file")
        sp.add_argument("--output", help="output file (stdout when omitted)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        return sp

    def integ(sp):
        sp.add_argument("--step", type=float)
        sp.add_argument("--max-time", type=float)
        sp.add_argument("--grad-tol", type=float)

    sp = common(sub.add_parser("expansion", help="edge expansion"))
    sp.add_argument("--exact", action="store_true", help="enumerate all subsets")
    sp.add_argument("--restarts", type=int, default=8)
    sp.set_defaults(func=cmd_expansion)

    sp = common(sub.add_parser("diffuse", help="integrate the diffusion, CSV trajectory"))
    integ(sp)
    sp.add_argument("--record-every", type=int, default=1)
    sp.add_argument("--densities", help="JSON-lines dump of per-vertex densities")
    sp.set_defaults(func=cmd_diffuse)

    sp = common(sub.add_parser("spectral", help="estimate gamma_2 and sweep cut"))
    integ(sp)
    sp.add_argument("--restarts", type=int, default=8)
    sp.set_defaults(func=cmd_spectral)

    sp = common(sub.add_parser("sssl", help="semi-supervised label prediction"))
    integ(sp)
    sp.add_argument("--labels", help='labels JSON {"labels": {vertex: value}}')
    sp.add_argument("--mode", choices=("diffusion", "subgradient"), default="diffusion")
    sp.set_defaults(func=cmd_sssl)

    sp = common(sub.add_parser("verify", help="invariant / acceptance checks"))
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("derivatives", help="derivative tower dump"))
    sp.add_argument("--order", type=int, default=1)
    sp.set_defaults(func=cmd_derivatives)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if getattr(args, "restarts", 1) < 1:
            raise UsageError("--restarts must be >= 1")
        if getattr(args, "record_every", 1) < 1:
            raise UsageError("--record-every must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (core.HypergraphError, ValueError, KeyError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
