"""Command-line front end: ``netrecon {simulate,analyze,reconstruct,probe,demo}``.

Every command reads a JSON config and writes its outputs to ``--out``.
Exit codes: 0 success, 1 usage or input error, 2 ambiguity found,
3 data inconsistent with the model or prior.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .errors import NetReconError, ParseError
from .geometry import PriorSet
from .gram import DEFAULT_RANK_TOL, compute_gram, pe_check
from .group import DEFAULT_ZERO_TOL, generic_verdict, kernel_orbit_containment
from .model import (GlvParameters, InputSignal, RegressorFamily, SinusoidalForcing, check_interaction_matrix,
                    glv_steady_state, random_stable_glv, simulate)
from .perturb import ADDITIVE, indistinguishable_pair, probe_orbit_instability, probe_pe_stability
from .properties import property_of
from .reconstruct import AMBIGUOUS, DEFAULT_CONSISTENCY_TOL, INCONSISTENT, reconstruct_network

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AMBIGUOUS = 2
EXIT_INCONSISTENT = 3

COMMANDS = ("simulate", "analyze", "reconstruct", "probe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- config -----------------------------------------------------------------


def demo_names():
    return sorted(p.name[:-5] for p in resources.files("netrecon.demos").iterdir() if p.name.endswith(".json"))


def load_demo(name):
    path = resources.files("netrecon.demos") / f"{name}.json"
    if not path.is_file():
        raise UsageError(f"unknown demo {name!r}; available: {', '.join(demo_names())}")
    return json.loads(path.read_text())


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object", 1)
    cfg.setdefault("base_dir", str(Path(path).resolve().parent))
    return cfg


def _tolerances(cfg, args):
    tol = {"rank": DEFAULT_RANK_TOL, "zero": DEFAULT_ZERO_TOL, "consistency": DEFAULT_CONSISTENCY_TOL}
    extra = set(cfg.get("tolerances", {})) - set(tol)
    if extra:
        raise UsageError(f"unknown tolerance(s): {', '.join(sorted(extra))}")
    tol.update(cfg.get("tolerances", {}))
    for key, flag in (("rank", args.tol_rank), ("zero", args.tol_zero), ("consistency", args.tol_consistency)):
        if flag is not None:
            tol[key] = flag
    for key, v in tol.items():
        if not (isinstance(v, (int, float)) and 0 < v < 1):
            raise UsageError(f"tolerance {key} must lie in (0, 1), got {v!r}")
    return {k: float(v) for k, v in tol.items()}


class Scenario:
    """Model, inputs and data described by one config section."""

    def __init__(self, section, seed, base_dir="."):
        self.section = section
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        model = section.get("model", {})
        self.reg = RegressorFamily.preset(model.get("preset", "glv"), model.get("uncertainty", "exact"))
        self.base_dir = Path(base_dir)
        self.A = None
        self.r = None
        self.extra = {}
        if "A" in model or "random_stable" in model:
            self._build_system(model)

    def _build_system(self, model):
        rs = model.get("random_stable")
        if rs is not None:
            A, r, xs = random_stable_glv(int(rs["n"]), self.rng, rs.get("coupling", 0.6))
            self.A, self.r = A, np.asarray(model.get("r", r), dtype=float)
        else:
            self.A = check_interaction_matrix(model["A"])
            n = self.A.shape[0]
            self.r = np.asarray(model.get("r", np.zeros(n)), dtype=float)
        n = self.A.shape[0]
        if self.r.shape != (n,):
            raise UsageError(f"growth rates must have length {n}")
        x0 = model.get("x0", "steady_state")
        if x0 == "steady_state":
            xs = glv_steady_state(self.A, self.r)
            if xs is None:
                raise UsageError("x0 = steady_state needs a nonsingular A")
            self.x0 = xs
        else:
            self.x0 = np.asarray(x0, dtype=float)
        self.forcing = self._forcing(model.get("forcing"), n)
        if model.get("pair"):
            self.A_pair, xs = indistinguishable_pair(self.A, self.r, seed=self.seed)
            self.x0 = xs

    def _forcing(self, spec, n):
        if spec is None:
            return None
        if "random" in spec:
            rnd = spec["random"]
            return SinusoidalForcing.random(n, self.rng, rnd.get("amplitude", 0.2), tuple(rnd.get("freq_range", (0.5, 3.0))),
                                            int(rnd.get("components", 2)))
        return SinusoidalForcing(spec["amplitudes"], spec["frequencies"], spec.get("phases"))

    def inputs(self):
        if self.reg.name == "glv":
            return GlvParameters(self.r).inputs(self.forcing)
        return InputSignal(self.r, self.forcing)

    def trajectory(self):
        if "trajectory" in self.section:
            return io.read_trajectory(self.base_dir / self.section["trajectory"])
        if self.A is None:
            raise UsageError("config needs either a trajectory file or a model with A")
        sim = self.section.get("simulation", {})
        return simulate(self.A, self.reg, self.x0, float(sim.get("horizon", 10.0)), float(sim.get("step", 0.01)),
                        self.inputs())

    def pair_trajectory(self):
        sim = self.section.get("simulation", {})
        return simulate(self.A_pair, self.reg, self.x0, float(sim.get("horizon", 10.0)), float(sim.get("step", 0.01)),
                        self.inputs())

    def system_report(self):
        if self.A is None:
            return None
        out = {"A": self.A, "r": self.r, "x0": self.x0, "preset": self.reg.name, "uncertainty": self.reg.uncertainty}
        if hasattr(self, "A_pair"):
            out["A_pair"] = self.A_pair
        return out


def _priors(spec, scenario, n):
    if spec == "pair":
        if not hasattr(scenario, "A_pair"):
            raise UsageError("prior 'pair' needs model.pair = true")
        return [PriorSet.discrete([scenario.A[i], scenario.A_pair[i]]) for i in range(n)]
    if isinstance(spec, dict) and "per_node" in spec:
        specs = spec["per_node"]
        if len(specs) != n:
            raise UsageError(f"per_node prior needs {n} entries")
        return [io.prior_from_spec(s, n) for s in specs]
    return io.prior_from_spec(spec, n)


# -- commands ---------------------------------------------------------------


def cmd_simulate(cfg, tol, out):
    sc = Scenario(cfg, cfg["seed"], cfg["base_dir"])
    if sc.A is None:
        raise UsageError("simulate needs a model with A or random_stable")
    traj = sc.trajectory()
    io.write_trajectory(traj, out / "trajectory.csv")
    report = {"command": "simulate", "system": sc.system_report(), "seed": sc.seed, "tolerances": tol,
              "samples": int(traj.t.size), "t0": traj.t0, "t1": traj.t1, "step": traj.step,
              "max_abs_state": float(np.max(np.abs(traj.x)))}
    if hasattr(sc, "A_pair"):
        other = sc.pair_trajectory()
        io.write_trajectory(other, out / "trajectory_pair.csv")
        report["pair_sup_distance"] = float(np.max(np.abs(traj.x - other.x)))
    io.write_json(report, out / "simulate.json")
    return EXIT_OK, report


def cmd_analyze(cfg, tol, out):
    sc = Scenario(cfg, cfg["seed"], cfg["base_dir"])
    traj = sc.trajectory()
    nodes = []
    for i in range(traj.n):
        g = compute_gram(traj, sc.reg, i, tol["rank"])
        cont = kernel_orbit_containment(g, zero_tol=tol["zero"])
        entry = g.report()
        entry.update({"orbit_containment": cont.status, "identifiable_adjacency": list(cont.identifiable),
                      "generic_verdict": generic_verdict(g, tol["zero"])})
        nodes.append(entry)
    report = {"command": "analyze", "system": sc.system_report(), "seed": sc.seed, "tolerances": tol,
              "samples": int(traj.t.size), "nodes": nodes, "all_pe": all(e["pe"] for e in nodes)}
    io.write_json(report, out / "analyze.json")
    return EXIT_OK, report


def cmd_reconstruct(cfg, tol, out):
    sc = Scenario(cfg, cfg["seed"], cfg["base_dir"])
    traj = sc.trajectory()
    kind = cfg.get("property", "identity")
    priors = _priors(cfg.get("prior"), sc, traj.n)
    verdicts, assembled = reconstruct_network(traj, sc.reg, priors, kind, tol["rank"], tol["zero"],
                                              tol["consistency"])
    report = {"command": "reconstruct", "property": kind, "system": sc.system_report(), "seed": sc.seed,
              "tolerances": tol, "samples": int(traj.t.size), "verdicts": [v.to_dict() for v in verdicts],
              "assembled": assembled}
    if sc.A is not None:
        report["truth"] = property_of(sc.A, kind, tol["zero"])
    if hasattr(sc, "A_pair"):
        report["pair_sup_distance"] = float(np.max(np.abs(traj.x - sc.pair_trajectory().x)))
    statuses = [v.status for v in verdicts]
    code = EXIT_OK
    if INCONSISTENT in statuses:
        code = EXIT_INCONSISTENT
    elif AMBIGUOUS in statuses:
        code = EXIT_AMBIGUOUS
    report["exit_code"] = code
    io.write_json(report, out / "reconstruct.json")
    return code, report


def cmd_probe(cfg, tol, out):
    jobs = cfg.get("probes")
    if not jobs:
        raise UsageError("probe config needs a non-empty 'probes' list")
    results = []
    for k, job in enumerate(jobs):
        section = {**{key: cfg[key] for key in ("model", "simulation", "trajectory") if key in cfg}, **job}
        sc = Scenario(section, job.get("seed", cfg["seed"]), cfg["base_dir"])
        traj = sc.trajectory()
        node = int(job.get("node", 0))
        g = compute_gram(traj, sc.reg, node, tol["rank"])
        kind = job.get("kind", "pe")
        entry = {"job": k, "kind": kind, "node": node, "system": sc.system_report()}
        if kind == "pe":
            margin = pe_check(g)[1]
            deltas = [float(d) for d in job.get("deltas", [])] + [f * margin for f in job.get("delta_over_margin", [])]
            rows = probe_pe_stability(traj, sc.reg, node, deltas, int(job.get("trials", 100)), sc.seed,
                                      job.get("deformation", ADDITIVE), tol["rank"])
            header = ("delta", "trials", "survived", "fraction")
            entry["margin"] = margin
        elif kind == "orbit":
            rows = probe_orbit_instability(g, [float(d) for d in job["deltas"]], tol["zero"])
            header = ("delta", "before", "after", "flipped")
        else:
            raise UsageError(f"unknown probe kind {kind!r}")
        entry["table"] = [dict(zip(header, row)) for row in rows]
        (out / f"probe_{k}_{kind}.tsv").write_text(io.table_to_text(header, rows))
        results.append(entry)
    report = {"command": "probe", "seed": cfg["seed"], "tolerances": tol, "probes": results}
    io.write_json(report, out / "probe.json")
    return EXIT_OK, report


HANDLERS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "reconstruct": cmd_reconstruct, "probe": cmd_probe}


def run(command, cfg, args):
    cfg = copy.deepcopy(cfg)
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    cfg.setdefault("base_dir", ".")
    if not (isinstance(cfg["seed"], int) and 0 <= cfg["seed"] < 2**64):
        raise UsageError("seed must be an unsigned 64-bit integer")
    tol = _tolerances(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return HANDLERS[command](cfg, tol, out)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="netrecon-out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help="random seed, overrides the config")
    common.add_argument("--tol-rank", type=float, help="relative singular-value threshold")
    common.add_argument("--tol-zero", type=float, help="relative zero threshold for supports and signs")
    common.add_argument("--tol-consistency", type=float, help="relative data-fit residual threshold")
    p = _Parser(prog="netrecon", description="Reconstructability analysis of networked dynamical systems.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} step from a config")
    d = sub.add_parser("demo", parents=[common], help="run a bundled demo config")
    d.add_argument("name", nargs="?", help="demo name; omit to list them")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            if args.name is None:
                print("\n".join(demo_names()))
                return EXIT_OK
            cfg = load_demo(args.name)
            command = cfg.get("command")
        else:
            if args.config is None:
                raise UsageError(f"{args.command} needs --config")
            cfg = load_config(args.config)
            command = args.command
        if command not in HANDLERS:
            raise UsageError(f"config names unknown command {command!r}")
        code, report = run(command, cfg, args)
    except (UsageError, NetReconError, OSError, KeyError, ValueError) as exc:
        msg = f"missing config key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"netrecon: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    print(f"netrecon {command}: exit {code}, outputs in {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
