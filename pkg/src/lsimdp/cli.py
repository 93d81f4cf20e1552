"""Command-line entry point: ``lsimdp validate|solve|bounds|simulate|compare``.

Exit codes: 0 success, 1 invalid model or policy file, 2 solver error, 3 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .approx import solve_virtual
from .belief import reachable_beliefs
from .belief_dp import solve_belief_dp
from .bounds import gap_report, verify_theorem5, verify_theorem6
from .compare import DEFAULTS, compare
from .constrained import solve_constrained_dual, solve_constrained_primal
from .errors import HypothesisNotSatisfied, LsiMdpError, ModelError
from .full_info import solve_full_info
from .mdp import Policy
from .model import atomic_write, check_factorization, load_model
from .sim import JointPolicy, SimConfig, simulate_both

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 3
METHODS = ("full", "virtual", "belief-dp", "constrained")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a nonnegative number, got {text}")
    return v


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    # global flags work before or after the subcommand; subparsers must not reset them
    top = argparse.ArgumentParser(add_help=False)
    top.add_argument("--format", choices=("json", "table"), default="json", help="output format")
    top.add_argument("--out", metavar="PATH", default=None, help="write output here instead of stdout")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS, help="output format")
    common.add_argument("--out", metavar="PATH", default=argparse.SUPPRESS, help="write output here")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=_positive_float, default=DEFAULTS["tol"], help="value-iteration tolerance")
    solver.add_argument("--accuracy", type=_positive_float, default=DEFAULTS["accuracy"],
                        help="belief-DP truncation accuracy")
    solver.add_argument("--quant-tol", type=_nonneg_float, default=DEFAULTS["quant_tol"],
                        help="belief quantization step")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--episodes", type=_positive_int, default=DEFAULTS["episodes"], help="Monte Carlo episodes")
    sim.add_argument("--seed", type=_seed, default=DEFAULTS["seed"], help="64-bit RNG seed")

    depth = argparse.ArgumentParser(add_help=False)
    depth.add_argument("--depth", type=_nonneg_int, default=DEFAULTS["depth"], help="belief enumeration depth")

    epilog = "defaults: " + ", ".join(f"{k.replace('_', '-')} {v:g}" for k, v in DEFAULTS.items())
    epilog += ". Exit codes: 0 ok, 1 invalid input, 2 solver error, 3 usage error."
    p = _Parser(prog="lsimdp", description="Solvers for MDPs with a partially observed state.",
                formatter_class=fmt, parents=[top], epilog=epilog)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("validate", help="check a model file", formatter_class=fmt, parents=[common])
    s.add_argument("model")

    s = sub.add_parser("solve", help="solve a model by one method", formatter_class=fmt, parents=[common, solver])
    s.add_argument("model")
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--policy-out", metavar="PATH", default=None, help="also write the policy file here")
    s.add_argument("--graph", action="store_true", help="belief-dp: include the belief graph dump")

    s = sub.add_parser("bounds", help="gap constants and bound checks", formatter_class=fmt,
                       parents=[common, solver, depth])
    s.add_argument("model")
    s.add_argument("--graph", action="store_true", help="include the enumerated belief graph")

    s = sub.add_parser("simulate", help="Monte Carlo evaluation of a policy", formatter_class=fmt,
                       parents=[common, solver, sim])
    s.add_argument("model")
    s.add_argument("--policy", required=True, metavar="FILE|METHOD",
                   help=f"policy file, or one of {', '.join(METHODS)} to solve first")
    s.add_argument("--horizon", type=_positive_int, default=None,
                   help="steps per episode (default: bias <= 1e-6, or the DP horizon for belief-dp)")
    s.add_argument("--objective", choices=("true", "belief", "both"), default="true",
                   help="sampled hidden-state cost, belief-averaged cost, or both on paired paths")
    s.add_argument("--episodes-csv", metavar="PATH", default=None, help="dump per-episode totals")

    s = sub.add_parser("compare", help="run every method with cross-checks", formatter_class=fmt,
                       parents=[common, solver, sim, depth])
    s.add_argument("model")
    s.add_argument("--timings", action="store_true",
                   help="embed wall-clock times in the report (makes it run-dependent)")
    return p


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def flatten(obj, prefix=""):
    """``(dotted.path, json scalar text)`` pairs in document order."""
    if isinstance(obj, dict):
        if not obj:
            return [(prefix, "{}")]
        out = []
        for k, v in obj.items():
            out += flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list):
        if not obj:
            return [(prefix, "[]")]
        out = []
        for i, v in enumerate(obj):
            out += flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, json.dumps(obj))]


def render(doc, fmt):
    if fmt == "json":
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    rows = flatten(doc)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _settings(args, *names):
    return {n: getattr(args, n) for n in names}


def _solve(model, method, args):
    """Run one method; returns ``(report entry, policy object, policy file document)``."""
    if method == "full":
        sol = solve_full_info(model, tol=args.tol)
        doc = {"kind": "full-information", "policy": sol.policy.to_json()}
        return sol.to_dict(), JointPolicy(sol.policy), doc
    if method == "virtual":
        sol = solve_virtual(model, tol=args.tol)
        return sol.to_dict(), sol.policy, sol.policy.to_json()
    if method == "belief-dp":
        rep = solve_belief_dp(model, accuracy=args.accuracy, quant_tol=args.quant_tol)
        entry = rep.to_dict(include_graph=getattr(args, "graph", False))
        return entry, rep, {"method": "belief-dp", "accuracy": args.accuracy, "quant_tol": args.quant_tol}
    dual = solve_constrained_dual(model)
    entry = {"dual": dual.to_dict(), "primal": solve_constrained_primal(model).to_dict()}
    return entry, dual.policy, dual.policy.to_json()


def _cmd_validate(model, args):
    return {
        "valid": True,
        "n_obs": model.n_obs,
        "n_unobs": model.n_unobs,
        "n_actions": model.n_actions,
        "discount": model.discount,
        "factorized": check_factorization(model) is not None,
        "value_cap": model.value_cap,
    }


def _cmd_solve(model, args):
    entry, _, policy_doc = _solve(model, args.method, args)
    if args.policy_out:
        atomic_write(args.policy_out, json.dumps(_clean(policy_doc), indent=2) + "\n")
    return {"method": args.method, "settings": _settings(args, "tol", "accuracy", "quant_tol"), "result": entry}


def _cmd_bounds(model, args):
    graph = reachable_beliefs(model, max_depth=args.depth)
    doc = {
        "settings": _settings(args, "tol", "accuracy", "quant_tol", "depth"),
        "gap_constants": gap_report(model, graph).to_dict(),
    }
    try:
        doc["full_info_gap"] = verify_theorem5(model, tol=args.tol).to_dict()
        doc["belief_gap"] = verify_theorem6(model, tol=args.tol, graph=graph, accuracy=args.accuracy,
                                            quant_tol=args.quant_tol).to_dict()
    except HypothesisNotSatisfied as exc:
        doc["not_applicable"] = str(exc)
    if args.graph:
        doc["belief_graph"] = graph.to_dict()
    return doc


def _load_policy(model, spec, args):
    """Policy object from a method name or a policy file; returns ``(policy, description)``."""
    if spec in METHODS:
        _, pol, _ = _solve(model, spec, args)
        return pol, {"method": spec}
    try:
        with open(spec, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModelError(f"cannot read policy file {spec}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"parse error in policy file {spec}: {exc}") from None
    if not isinstance(data, dict):
        raise ModelError("policy file must hold a JSON object")
    try:
        if data.get("method") == "belief-dp":
            acc = float(data.get("accuracy", args.accuracy))
            q = float(data.get("quant_tol", args.quant_tol))
            rep = solve_belief_dp(model, accuracy=acc, quant_tol=q)
            return rep, {"file": spec, "method": "belief-dp", "accuracy": acc, "quant_tol": q}
        if data.get("kind") == "full-information":
            pol = Policy.from_json(data["policy"])
            if pol.n_states != model.n_obs * model.n_unobs:
                raise ValueError("full-information policy must cover every joint state")
            return JointPolicy(pol), {"file": spec, "kind": "full-information"}
        pol = Policy.from_json(data)
        if pol.n_states != model.n_obs:
            raise ValueError(f"policy covers {pol.n_states} observed states, model has {model.n_obs}")
        pol.matrix(model.n_actions)
        return pol, {"file": spec}
    except (ValueError, TypeError, KeyError) as exc:
        raise ModelError(f"invalid policy file {spec}: {exc}") from None


def _cmd_simulate(model, args):
    policy, desc = _load_policy(model, args.policy, args)
    horizon = args.horizon
    if horizon is None and hasattr(policy, "horizon_used"):
        horizon = max(policy.horizon_used, 1)
    config = SimConfig(episodes=args.episodes, horizon=horizon, seed=args.seed)
    true_res, belief_res = simulate_both(model, policy, config)
    h = true_res.horizon
    doc = {
        "settings": {**_settings(args, "tol", "accuracy", "quant_tol", "episodes", "seed"), "horizon": h,
                     "objective": args.objective},
        "policy": desc,
    }
    if args.objective in ("true", "both"):
        doc["result"] = true_res.to_dict()
    if args.objective in ("belief", "both"):
        doc["belief_objective"] = belief_res.to_dict()
    if args.episodes_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "true_total", "belief_total"])
        for e, (t, b) in enumerate(zip(true_res.totals, belief_res.totals)):
            w.writerow([e, repr(float(t)), repr(float(b))])
        atomic_write(args.episodes_csv, buf.getvalue())
    return doc


def _cmd_compare(model, args):
    report, timings = compare(model, tol=args.tol, accuracy=args.accuracy, quant_tol=args.quant_tol,
                              depth=args.depth, episodes=args.episodes, seed=args.seed)
    for name, secs in timings.items():
        print(f"{name}: {secs:.3f} s", file=sys.stderr)
    if args.timings:
        report["timings_seconds"] = timings
    return report


COMMANDS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
}


def run(argv=None):
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        model = load_model(args.model)
    except OSError as exc:
        print(f"error: cannot read model {args.model}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    except ModelError as exc:
        print(f"error: invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        doc = COMMANDS[args.command](model, args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LsiMdpError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = render(_clean(doc), args.format)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
