# main.py - Command-line runner for genodyn
#
# Every subcommand loads a .grn network (or takes plain numbers), runs one
# analysis and writes a single artifact: JSON or CSV with a metadata header
# (tool version, config hash, tolerances). Progress goes to stderr so stdout
# carries only the artifact.
#
# Exit status: 0 success, 2 usage/input error, 1 computation error. Errors
# are printed to stderr as {"status": "error", "kind": ..., "detail": ...}.

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import bifurc, netgraph, netlang, orbits
from .artifacts import build_meta, render_csv, render_json, render_text, write_artifact
from .config import TOOL_NAME, VERSION, Tolerances, default_tolerances
from .errors import ContinuationError, GenodynError, InducedStateError
from .field import NetworkField, bind

NETWORKS_DIR = Path(__file__).parent / "networks"

FORMATS = {
    "parse": ("text",),
    "layers": ("json",),
    "simulate": ("csv", "json"),
    "equilibria": ("json", "csv"),
    "basins": ("csv", "json"),
    "induce": ("json", "csv"),
    "continue": ("csv", "json"),
    "classify": ("json",),
    "qwindow": ("json",),
    "spectrum": ("csv", "json"),
}


class UsageError(GenodynError):
    kind = "usage"
    user_error = True


@dataclass
class RunConfig:
    command: str
    network: Optional[str] = None
    overrides: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "json"
    seed: Optional[int] = None
    rtol: Optional[float] = None
    atol: Optional[float] = None
    options: Dict[str, object] = field(default_factory=dict)
    quiet: bool = False

    def canonical(self) -> dict:
        """The configuration that determines the artifact (output path and verbosity excluded)."""
        data = asdict(self)
        data.pop("out")
        data.pop("quiet")
        if self.network is not None:
            data["network"] = Path(self.network).name
        return data


# =============================================================================
# HELPERS
# =============================================================================

def _progress(cfg: RunConfig, message: str) -> None:
    if not cfg.quiet:
        print(message, file=sys.stderr)


def _banner(cfg: RunConfig, title: str) -> None:
    _progress(cfg, "=" * 60)
    _progress(cfg, f"🧬 {TOOL_NAME.upper()} {VERSION} - {title}")
    _progress(cfg, "=" * 60)


def _parse_set(items: Optional[List[str]]) -> Dict[str, float]:
    overrides: Dict[str, float] = {}
    for item in items or []:
        ident, sep, value = item.partition("=")
        if not sep or not ident.strip():
            raise UsageError(f"--set expects id=value, got {item!r}")
        try:
            overrides[ident.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--set {ident.strip()}: {value!r} is not a number") from None
    return overrides


def _parse_vector(text: Optional[str], n: int, flag: str):
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if len(values) != n:
        raise UsageError(f"{flag} needs {n} values, got {len(values)}")
    return np.array(values)


def resolve_network_path(name: str) -> Path:
    """A path as given, or the shipped network of that name."""
    path = Path(name)
    if path.exists():
        return path
    for candidate in (NETWORKS_DIR / name, NETWORKS_DIR / f"{name}.grn"):
        if candidate.exists():
            return candidate
    return path


def _load(cfg: RunConfig):
    path = resolve_network_path(cfg.network)
    try:
        raw = netlang.load_network(path)
    except FileNotFoundError:
        raise UsageError(f"network file not found: {cfg.network}") from None
    net = netgraph.validate(raw)
    binding = bind(net, cfg.overrides)
    return raw, net, binding


def _tolerances(cfg: RunConfig) -> Tolerances:
    return default_tolerances().with_overrides(rtol=cfg.rtol, atol=cfg.atol)


def _emit(cfg: RunConfig, tol: Tolerances, data=None, header=None, rows=None, text=None) -> int:
    meta = build_meta(cfg.command, cfg.canonical(), tol)
    if cfg.format == "text":
        payload = render_text(meta, text)
    elif cfg.format == "csv":
        payload = render_csv(meta, header, rows)
    else:
        payload = render_json(cfg.command, meta, data)
    result = write_artifact(payload, cfg.out)
    if result["status"] != "success":
        raise UsageError(f"could not write artifact: {result['detail']}")
    if result["path"] != "-":
        _progress(cfg, f"  ✅ wrote {result['path']}")
    return 0


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def cmd_parse(cfg: RunConfig, args) -> int:
    path = resolve_network_path(cfg.network)
    try:
        raw = netlang.load_network(path)
    except FileNotFoundError:
        raise UsageError(f"network file not found: {cfg.network}") from None
    return _emit(cfg, _tolerances(cfg), text=netlang.format_network(raw))


def cmd_layers(cfg: RunConfig, args) -> int:
    _, net, _ = _load(cfg)
    decomposition = netgraph.core_and_layers(net, cfg.options["reading"])
    return _emit(cfg, _tolerances(cfg), data=decomposition.as_dict(net))


def cmd_simulate(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    x0 = _parse_vector(args.x0, net.n, "--x0")
    _progress(cfg, f"[step] integrating {net.name} to t={cfg.options['t_end']}")
    traj = orbits.simulate(net, binding, x0, cfg.options["t_end"], rtol=tol.rtol, atol=tol.atol)
    _progress(cfg, f"  accepted {traj.accepted} steps, rejected {traj.rejected}")
    header = ["t"] + list(net.genes)
    rows = [[float(t)] + [float(v) for v in x] for t, x in zip(traj.times, traj.states)]
    data = {"genes": list(net.genes), "t": [r[0] for r in rows], "x": [r[1:] for r in rows],
            "accepted": traj.accepted, "rejected": traj.rejected}
    return _emit(cfg, tol, data=data, header=header, rows=rows)


def cmd_equilibria(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    grid = cfg.options["grid"]
    _progress(cfg, f"[step] multistart Newton on a {grid}^{net.n} grid")
    search = orbits.search_equilibria(NetworkField(net, binding), grid, seed=cfg.seed, tolerances=tol)
    report = orbits.index_report(search.equilibria, net.n)
    _progress(cfg, f"  {len(search.equilibria)} equilibria, index sum {report.index_sum} "
                   f"(expected {report.expected})")
    header = list(net.genes) + ["stability", "det_sign", "re_lambda_max", "residual"]
    rows = [[float(v) for v in e.x] + [e.stability, e.det_sign, e.spectrum.leading_real, e.residual]
            for e in search.equilibria]
    data = {
        "genes": list(net.genes),
        "equilibria": [e.as_dict() for e in search.equilibria],
        "index": report.as_dict(),
        "starts": search.starts,
        "failures": search.failures,
    }
    return _emit(cfg, tol, data=data, header=header, rows=rows)


def cmd_basins(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    grid = cfg.options["grid"]
    _progress(cfg, f"[step] locating equilibria")
    eqs = orbits.search_equilibria(NetworkField(net, binding), grid, seed=cfg.seed,
                                   tolerances=tol).equilibria
    _progress(cfg, f"[step] integrating {grid ** net.n} grid starts")
    basins = orbits.basin_sample(net, binding, grid, equilibria=eqs, tolerances=tol)
    _progress(cfg, f"  labels: {basins.counts()}")
    header = list(net.genes) + ["label"]
    rows = [[float(v) for v in p] + [label] for p, label in zip(basins.points, basins.labels)]
    data = {
        "genes": list(net.genes),
        "equilibria": [e.as_dict() for e in basins.equilibria],
        "points": [[float(v) for v in p] for p in basins.points],
        "labels": basins.labels,
    }
    return _emit(cfg, tol, data=data, header=header, rows=rows)


def _induce_equilibrium(cfg, net, binding, decomposition, tol):
    core_genes = [g for g in net.genes if g in decomposition.core]
    if core_genes:
        core_net = netgraph.core_subnetwork(net, decomposition)
        core_eqs = orbits.search_equilibria(NetworkField(core_net, binding), cfg.options["grid"],
                                            seed=cfg.seed, tolerances=tol).equilibria
    else:
        core_eqs = [None]
    fld = NetworkField(net, binding)
    results = []
    for ce in core_eqs:
        values = {} if ce is None else dict(zip(core_genes, (float(v) for v in ce.x)))
        x = orbits.induced_equilibrium(values, net, binding, decomposition, tol.residual_check)
        full = orbits.classify_equilibrium(fld, x, tol.margin)
        results.append({
            "core_stability": None if ce is None else ce.stability,
            "x": [float(v) for v in x],
            "stability": full.stability,
            "residual": full.residual,
        })
    _progress(cfg, f"  {len(results)} induced equilibria")
    header = list(net.genes) + ["core_stability", "stability", "residual"]
    rows = [r["x"] + [r["core_stability"] or "", r["stability"], r["residual"]] for r in results]
    data = {"mode": "equilibrium", "genes": list(net.genes), "core": core_genes, "induced": results}
    return data, header, rows


def _induce_oscillation(cfg, net, binding, decomposition, tol, args):
    core_genes = [g for g in net.genes if g in decomposition.core]
    if not core_genes:
        raise InducedStateError("the core is empty; there is no core orbit to extend")
    core_net = netgraph.core_subnetwork(net, decomposition)
    x0 = _parse_vector(args.x0, core_net.n, "--x0")
    if x0 is None:
        # off the diagonal: symmetric rings keep symmetric states on it
        x0 = np.array(core_net.k) * np.linspace(0.2, 0.6, core_net.n)
    t_end = cfg.options["t_end"]
    _progress(cfg, f"[step] integrating the core ({', '.join(core_genes)}) to t={t_end}")
    traj = orbits.simulate(core_net, binding, x0, t_end, rtol=tol.rtol, atol=tol.atol)
    orbit = orbits.detect_periodic(traj)
    if orbit is None:
        raise InducedStateError("no periodic orbit found in the core trajectory")
    _progress(cfg, f"  core period T={orbit.period:.6f}")
    genes = [args.gene] if args.gene else decomposition.layer(1)
    genes = [g for g in genes if g in net.genes]
    rows, induced = [], {}
    for g in genes:
        y0 = orbits.induced_oscillation_ic(orbit, g, net, binding, decomposition)
        resid = orbits.induced_oscillation_residual(orbit, g, net, binding, y0, decomposition)
        induced[g] = {"y0": y0, "residual": resid}
        rows.append([g, y0, resid])
    data = {"mode": "oscillation", "core": core_genes, "orbit": orbit.as_dict(), "induced": induced}
    return data, ["gene", "y0", "residual"], rows


def cmd_induce(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    decomposition = netgraph.core_and_layers(net, cfg.options["reading"])
    if cfg.options["mode"] == "equilibrium":
        data, header, rows = _induce_equilibrium(cfg, net, binding, decomposition, tol)
    else:
        data, header, rows = _induce_oscillation(cfg, net, binding, decomposition, tol, args)
    return _emit(cfg, tol, data=data, header=header, rows=rows)


def _branch(cfg: RunConfig, net, binding, tol):
    param = cfg.options["param"]
    _progress(cfg, f"[step] continuing in {param} from {cfg.options['from']} to {cfg.options['to']} "
                   f"({cfg.options['steps']} steps)")
    branch = bifurc.continue_branch(net, binding, param, cfg.options["from"], cfg.options["to"],
                                    cfg.options["steps"], tolerances=tol,
                                    grid_per_axis=cfg.options["grid"])
    _progress(cfg, f"  {len(branch.samples)} points" + (" (stalled)" if branch.stalled else ""))
    return branch


def _stall_status(branch) -> int:
    """Exit status after a branch artifact was written: 1 when the branch stalled."""
    if not branch.stalled:
        return 0
    _fail(ContinuationError(f"continuation stalled at {branch.param}={branch.samples[-1].mu!r}").to_status())
    return 1


def cmd_continue(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    branch = _branch(cfg, net, binding, tol)
    header = ["mu"] + list(net.genes) + ["re_lambda_max", "det_j"]
    rows = [[p.mu] + [float(v) for v in p.x] + [p.leading_real, p.det] for p in branch.samples]
    data = {"param": branch.param, "genes": list(net.genes), "stalled": branch.stalled,
            "samples": [{"mu": r[0], "x": r[1:-2], "re_lambda_max": r[-2], "det_j": r[-1]}
                        for r in rows]}
    _emit(cfg, tol, data=data, header=header, rows=rows)
    return _stall_status(branch)


def cmd_classify(cfg: RunConfig, args) -> int:
    _, net, binding = _load(cfg)
    tol = _tolerances(cfg)
    branch = _branch(cfg, net, binding, tol)
    _progress(cfg, "[step] locating the first bifurcation")
    report = bifurc.first_bifurcation(branch)
    _progress(cfg, f"  kind={report.kind} mu0={report.mu0}")
    if cfg.options["check"] and report.kind != "none":
        _progress(cfg, "[step] post-bifurcation check")
        check = bifurc.post_bifurcation_check(net, binding, report, tol, cfg.options["grid"])
        report = report.with_post_check(check)
        _progress(cfg, f"  {check.message}")
    data = report.as_dict()
    data["stalled"] = branch.stalled
    _emit(cfg, tol, data=data)
    return _stall_status(branch)


def cmd_qwindow(cfg: RunConfig, args) -> int:
    try:
        window = bifurc.q_window(*cfg.options["abc"])
    except ValueError as e:
        raise UsageError(str(e)) from None
    return _emit(cfg, _tolerances(cfg), data=window.as_dict())


def cmd_spectrum(cfg: RunConfig, args) -> int:
    n = cfg.options["n"]
    alpha = cfg.options["alpha"]
    if len(alpha) == 1:
        alpha = alpha * n
    if len(alpha) != n:
        raise UsageError(f"--alpha needs 1 or {n} values, got {len(alpha)}")
    try:
        spectrum = bifurc.cyclic_spectrum(alpha, cfg.options["q"], cfg.options["mean"])
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = [[float(v.real), float(v.imag)] for v in spectrum]
    data = {"n": n, "q": cfg.options["q"], "alpha": alpha, "roots": rows}
    return _emit(cfg, _tolerances(cfg), data=data, header=["re", "im"], rows=rows)


COMMANDS = {
    "parse": cmd_parse,
    "layers": cmd_layers,
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "basins": cmd_basins,
    "induce": cmd_induce,
    "continue": cmd_continue,
    "classify": cmd_classify,
    "qwindow": cmd_qwindow,
    "spectrum": cmd_spectrum,
}


# =============================================================================
# ARGUMENTS
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="🧬 genodyn - gene regulatory network dynamics and first-bifurcation analysis",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  genodyn classify toggle.grn --param m --from 0 --to 3
  genodyn equilibria toggle.grn --set m=3
  genodyn classify repressilator.grn --param alpha --check
  genodyn qwindow 1 2 3
  genodyn spectrum --n 3 --q -8 --alpha 1
        """,
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Output file (default: stdout)")
    common.add_argument("--format", help="Artifact format (per subcommand: csv, json or text)")
    common.add_argument("--rtol", type=float, help="Integrator relative tolerance")
    common.add_argument("--atol", type=float, help="Integrator absolute tolerance")
    common.add_argument("--quiet", action="store_true", help="No progress output on stderr")

    netargs = argparse.ArgumentParser(add_help=False, parents=[common])
    netargs.add_argument("network", help="Path to a .grn file (or the name of a shipped network)")
    netargs.add_argument("--set", action="append", metavar="ID=VALUE",
                         help="Override a parameter (repeatable)")
    netargs.add_argument("--grid", type=int, default=8, help="Grid points per axis (default: 8)")
    netargs.add_argument("--seed", type=int, help="Seed for jittered multistart (off by default)")

    sub.add_parser("parse", parents=[common], help="Parse and print a network in canonical form") \
        .add_argument("network")
    p = sub.add_parser("layers", parents=[netargs], help="Core and layer decomposition")
    p.add_argument("--reading", choices=netgraph.READINGS, default="upstream")

    p = sub.add_parser("simulate", parents=[netargs], help="Integrate the network ODE")
    p.add_argument("--x0", help="Initial state, comma separated (default: half the box)")
    p.add_argument("--t-end", type=float, default=50.0, help="End time (default: 50)")

    sub.add_parser("equilibria", parents=[netargs], help="All equilibria in the box with index sum")
    sub.add_parser("basins", parents=[netargs], help="Basin labels on a grid of starts")

    p = sub.add_parser("induce", parents=[netargs], help="Extend core equilibria or a core orbit to all layers")
    p.add_argument("--mode", choices=("equilibrium", "oscillation"), default="equilibrium")
    p.add_argument("--gene", help="First-layer gene (oscillation mode; default: all)")
    p.add_argument("--reading", choices=netgraph.READINGS, default="upstream")
    p.add_argument("--x0", help="Initial core state for the orbit search")
    p.add_argument("--t-end", type=float, default=400.0, help="Core integration time (default: 400)")

    for name, text in (("continue", "Continue the stable equilibrium branch"),
                       ("classify", "Detect and classify the first bifurcation")):
        p = sub.add_parser(name, parents=[netargs], help=text)
        p.add_argument("--param", required=True, help="Bifurcation parameter id")
        p.add_argument("--from", dest="mu_from", type=float, help="Start value (default: param min)")
        p.add_argument("--to", dest="mu_to", type=float, help="End value (default: param max)")
        p.add_argument("--steps", type=int, default=100, help="Continuation steps (default: 100)")
        if name == "classify":
            p.add_argument("--check", action="store_true", help="Run the post-bifurcation check")
        p.set_defaults(grid=6)

    p = sub.add_parser("qwindow", parents=[common], help="Stability window of Q for a 3-gene cycle")
    p.add_argument("abc", nargs=3, type=float, metavar="RATE")

    p = sub.add_parser("spectrum", parents=[common], help="Roots of prod(lambda + alpha_i) = Q")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--alpha", type=float, nargs="+", required=True)
    p.add_argument("--mean", action="store_true", help="Replace the rates by their mean")
    return parser


def config_from_args(args) -> RunConfig:
    command = args.command
    fmt = args.format or FORMATS[command][0]
    if fmt not in FORMATS[command]:
        raise UsageError(f"{command} does not support --format {fmt} "
                         f"(choose from {', '.join(FORMATS[command])})")
    options: Dict[str, object] = {}
    for key in ("reading", "t_end", "grid", "mode", "gene", "param", "steps", "check",
                "abc", "n", "q", "alpha", "mean", "x0"):
        if hasattr(args, key):
            options[key] = getattr(args, key)
    if hasattr(args, "mu_from"):
        options["from"] = args.mu_from
        options["to"] = args.mu_to
    return RunConfig(
        command=command,
        network=getattr(args, "network", None),
        overrides=_parse_set(getattr(args, "set", None)),
        out=args.out,
        format=fmt,
        seed=getattr(args, "seed", None),
        rtol=args.rtol,
        atol=args.atol,
        options=options,
        quiet=args.quiet,
    )


def _fail(status: dict) -> None:
    print(json.dumps(status), file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Command-line arguments without the program name; sys.argv when None.

    Returns:
        Exit status: 0 on success, 2 for input errors, 1 for computation
        errors and stalled branches.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cfg = config_from_args(args)
            _banner(cfg, cfg.command)
            code = COMMANDS[cfg.command](cfg, args)
        except GenodynError as e:
            _fail(e.to_status())
            code = 2 if e.user_error else 1
        except (ValueError, OSError) as e:
            _fail({"status": "error", "kind": "input", "detail": str(e)})
            code = 2
    quiet = getattr(args, "quiet", False)
    for w in caught:
        if not quiet:
            print(f"[warn] {w.message}", file=sys.stderr)
    return code


def main() -> int:
    """CLI entry point."""
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
