"""Batch front-end: reach runs, witness certification, convergence studies, figures.

Commands
--------
  run       compute the sets on an N-step grid; write result.json + outlines.csv
  certify   witness-check a run; write certification.json; exit 1 on failure
  converge  self-convergence study over a list of N; write convergence.json
  plot      overlay SVG of final sets or tubes for a list of N

Systems come either from a JSON file (--spec) or a compiled-in example
(--builtin academic|dcdc).  All outputs are deterministic: rerunning an
identical configuration produces byte-identical files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import jsonio, svgfig
from .reach import reach_sets, verify_growth_bound
from .systems import BUILTIN_NAMES, SpecError, SystemSpec, builtin_system, load_spec_file
from .transition import TransitionOracle
from .validate import certify_under_approximation, convergence_study

__all__ = ["RunConfig", "cmd_run", "cmd_certify", "cmd_converge", "cmd_plot", "main"]

DEFAULT_DIRECTIONS = 360


@dataclass
class RunConfig:
    command: str
    spec_path: Optional[str] = None
    builtin: Optional[str] = None
    steps: Optional[int] = None
    steps_list: tuple[int, ...] = ()
    ref_steps: Optional[int] = None
    seed: int = 0
    tol: Optional[float] = None
    trials: int = 500
    out_dir: str = "."
    directions: int = DEFAULT_DIRECTIONS
    mode: str = "final"  # final | tube (converge, plot)
    oracle_mode: Optional[str] = None

    def load_system(self) -> SystemSpec:
        if (self.spec_path is None) == (self.builtin is None):
            raise SpecError("exactly one of --spec or --builtin is required")
        if self.builtin is not None:
            return builtin_system(self.builtin)
        return load_spec_file(self.spec_path)

    def out_path(self, name: str) -> Path:
        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return out / name

    def default_tol(self, spec: SystemSpec) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-5 if spec.singularities else 1e-6


def _outline_rows(result, directions):
    rows = []
    for i, z in enumerate(result.lambdas):
        t = float(result.grid.points[i])
        for x1, x2 in z.outline_2d(directions):
            rows.append((i, t, float(x1), float(x2)))
    return rows


def cmd_run(cfg: RunConfig) -> int:
    spec = cfg.load_system()
    if cfg.steps is None or cfg.steps < 1:
        raise SpecError("run requires --steps N with N >= 1")
    orc = TransitionOracle(spec, mode=cfg.oracle_mode)
    result = reach_sets(spec, orc, cfg.steps)

    ok, worst, bound = verify_growth_bound(spec, result)
    if not ok:
        raise RuntimeError(
            f"growth-bound sanity check failed: worst set norm {worst:.6g} "
            f"exceeds bound {bound:.6g}")

    jsonio.write_json(cfg.out_path("result.json"), result.to_json_dict())
    if spec.n == 2:
        jsonio.write_csv(cfg.out_path("outlines.csv"),
                         ("set_index", "t", "x1", "x2"),
                         _outline_rows(result, cfg.directions))
    print(f"run: {len(result.lambdas)} sets on [{spec.t_lo}, {spec.t_hi}], "
          f"N={cfg.steps}, accuracy={result.accuracy_class}")
    print(f"wrote {cfg.out_path('result.json')}")
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    spec = cfg.load_system()
    if cfg.steps is None or cfg.steps < 1:
        raise SpecError("certify requires --steps N with N >= 1")
    orc = TransitionOracle(spec, mode=cfg.oracle_mode)
    result = reach_sets(spec, orc, cfg.steps)
    tol = cfg.default_tol(spec)
    report = certify_under_approximation(
        spec, orc, result, trials=cfg.trials, tol=tol, seed=cfg.seed)
    jsonio.write_json(cfg.out_path("certification.json"), report.to_json_dict())
    status = "PASS" if report.passed else "FAIL"
    print(f"certify: {status} max witness error {report.max_error:.3e} "
          f"(tol {tol:g}, {report.witness_count} witnesses, "
          f"sets {list(report.checked_indices)})")
    print(f"wrote {cfg.out_path('certification.json')}")
    return 0 if report.passed else 1


def cmd_converge(cfg: RunConfig) -> int:
    spec = cfg.load_system()
    if not cfg.steps_list:
        raise SpecError("converge requires --steps-list N1,N2,...")
    if cfg.ref_steps is None:
        raise SpecError("converge requires --ref-steps")
    orc = TransitionOracle(spec, mode=cfg.oracle_mode)
    mode = "tube" if cfg.mode == "tube" else "final_set"
    report = convergence_study(spec, orc, cfg.steps_list, cfg.ref_steps, mode=mode)
    jsonio.write_json(cfg.out_path("convergence.json"), report.to_json_dict())
    print(f"converge[{mode}] reference N={report.reference_N}")
    for N, d in zip(report.Ns, report.distances):
        print(f"  N={N:>5}  distance {d:.6e}")
    for (a, b), r in zip(report.doubling_pairs, report.ratios):
        print(f"  ratio d({a})/d({b}) = {r:.3f}")
    print(f"wrote {cfg.out_path('convergence.json')}")
    return 0


def cmd_plot(cfg: RunConfig) -> int:
    spec = cfg.load_system()
    if not cfg.steps_list:
        raise SpecError("plot requires --steps-list N1,N2,...")
    if spec.n != 2:
        raise SpecError("plot supports 2-D state spaces only; coordinate "
                        "projection is out of scope")
    orc = TransitionOracle(spec, mode=cfg.oracle_mode)
    groups = []
    for idx, N in enumerate(cfg.steps_list):
        result = reach_sets(spec, orc, N)
        color = svgfig.PALETTE[idx % len(svgfig.PALETTE)]
        if cfg.mode == "tube":
            polys = [z.outline_2d(cfg.directions) for z in result.lambdas]
        else:
            polys = [result.lambdas[-1].outline_2d(cfg.directions)]
        groups.append((f"N={N}", color, polys))
    name = spec.name or "system"
    kind = "tube" if cfg.mode == "tube" else "final sets"
    svg = svgfig.render_overlay(groups, title=f"{name}: {kind}")
    path = cfg.out_path("figure.svg")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    print(f"wrote {path}")
    return 0


def _steps_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad steps list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("steps list is empty")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reachunder",
        description="Convergent zonotopic under-approximations of reachable "
                    "sets and tubes for linear time-varying systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--spec", help="JSON system description file")
        g.add_argument("--builtin", choices=BUILTIN_NAMES, help="compiled-in example system")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        sp.add_argument("--oracle", choices=TransitionOracle.MODES, default=None,
                        help="force a transition oracle mode")

    sp = sub.add_parser("run", help="compute reach sets and export them")
    common(sp)
    sp.add_argument("--steps", type=int, required=True, help="grid steps N")
    sp.add_argument("--directions", type=int, default=DEFAULT_DIRECTIONS,
                    help="outline directions for CSV export")

    sp = sub.add_parser("certify", help="witness-check a reach run")
    common(sp)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--trials", type=int, default=500, help="random witnesses per set")
    sp.add_argument("--tol", type=float, default=None,
                    help="witness tolerance (default 1e-6, or 1e-5 for singular data)")

    sp = sub.add_parser("converge", help="self-convergence study")
    common(sp)
    sp.add_argument("--steps-list", type=_steps_list, required=True,
                    metavar="N1,N2,...", help="grid sizes to compare")
    sp.add_argument("--ref-steps", type=int, required=True, help="reference grid size")
    sp.add_argument("--mode", choices=("final", "tube"), default="final")

    sp = sub.add_parser("plot", help="overlay SVG figure")
    common(sp)
    sp.add_argument("--steps-list", type=_steps_list, required=True, metavar="N1,N2,...")
    sp.add_argument("--mode", choices=("final", "tube"), default="final")
    sp.add_argument("--directions", type=int, default=DEFAULT_DIRECTIONS,
                    help="polygon directions per set")

    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        spec_path=getattr(args, "spec", None),
        builtin=getattr(args, "builtin", None),
        steps=getattr(args, "steps", None),
        steps_list=getattr(args, "steps_list", ()) or (),
        ref_steps=getattr(args, "ref_steps", None),
        seed=getattr(args, "seed", 0),
        tol=getattr(args, "tol", None),
        trials=getattr(args, "trials", 500),
        out_dir=getattr(args, "out", "."),
        directions=getattr(args, "directions", DEFAULT_DIRECTIONS),
        mode=getattr(args, "mode", "final"),
        oracle_mode=getattr(args, "oracle", None),
    )


_COMMANDS = {
    "run": cmd_run,
    "certify": cmd_certify,
    "converge": cmd_converge,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        return _COMMANDS[cfg.command](cfg)
    except (SpecError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
