"""Command-line driver.

    mcfgame <subcommand> [--preset NAME | --config PATH] [--eps E] [--nu V]
                         [--out DIR] [--threads K] [--seed S]

Exit codes: 0 success, 1 configuration error, 2 a verification check failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import export
from .dpp import asymptotic_run, extract_zero_set, refine_study, solve
from .game import GameConfig, play
from .pde import solve_reference
from .scenarios import Scenario, ScenarioError, load_scenario, preset_names
from .strategies import (ConcentricCarol, ConcentricPaul, RandomCarol, RandomPaul, SignRuleCarol,
                         adversary_panel, tube_strategy)
from .verify import run_suites

log = logging.getLogger("mcfgame")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _common(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="preset scenario name")
    src.add_argument("--config", help="scenario JSON file")
    p.add_argument("--eps", type=float, help="override epsilon")
    p.add_argument("--nu", type=float, help="override the driving force")
    p.add_argument("--t", type=float, help="override the time horizon")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid sweeps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true", help="per-level progress on stderr")


def build_parser():
    ap = _Parser(prog="mcfgame", description="Game approximation of obstacle mean curvature flow.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = sub.add_parser("solve", help="game value field by backward iteration")
    _common(p)
    p.add_argument("--M", type=int, help="direction count")
    p.add_argument("--h", type=float, help="grid spacing")
    p = sub.add_parser("simulate", help="play two strategies against each other")
    _common(p)
    p.add_argument("--paul", default="concentric",
                   help="concentric[:X,Y,...] (default centre 0) | random | tube (preset curve)")
    p.add_argument("--carol", default="random",
                   help="random[:P] | concentric:X,Y | reversed:X,Y | plus | minus | alternate | panel")
    p.add_argument("--rounds", type=int, help="number of rounds (sets the horizon)")
    p.add_argument("--x0", default="1,0", help="start position; its length sets d")
    p = sub.add_parser("verify", help="property suites")
    _common(p)
    p.add_argument("--suite", default="all", help="recurrences | concentric | containment | all")
    p = sub.add_parser("shape", help="asymptotic shape run against the scenario target")
    _common(p)
    p.add_argument("--M", type=int)
    p.add_argument("--h", type=float)
    p = sub.add_parser("oracle", help="finite-difference reference solution")
    _common(p)
    p.add_argument("--h", type=float, default=0.01)
    p = sub.add_parser("study", help="eps refinement table at probe points")
    _common(p)
    p.add_argument("--M", type=int)
    p.add_argument("--probes", help="x1,y1;x2,y2;... (default: scenario probes)")
    sub.add_parser("presets", help="list preset names")
    return ap


# ---------------------------------------------------------------------------


def _scenario(args, default=None) -> Scenario:
    src = args.preset or args.config or default
    if src is None:
        raise ConfigError("give --preset or --config")
    sc = load_scenario(src)
    if args.nu is not None:
        sc = replace(sc, nu=args.nu)
    if args.t is not None:
        sc = replace(sc, t_max=args.t)
    sc.validate()
    return sc


def _params(sc, args, **extra):
    over = {"n_jobs": args.threads}
    if getattr(args, "M", None):
        over["M"] = args.M
    if getattr(args, "h", None):
        over["h"] = args.h
    over.update(extra)
    return sc.solver_params(**over)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _vec(s: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in s.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse vector {s!r}") from None


def _write_field(out: Path, stem: str, fld):
    fld.to_csv(out / f"{stem}.csv")
    fld.to_pgm(out / f"{stem}.pgm")
    zs = extract_zero_set(fld)
    g = fld.grid
    box = (g.x0, g.x0 + (g.nx - 1) * g.h, g.y0, g.y0 + (g.ny - 1) * g.h)
    export.write_svg(out / f"{stem}_zero.svg", [(c, True) for c in zs.contours], box)
    return zs


def cmd_solve(args):
    sc = _scenario(args)
    cfg = sc.game_config(args.eps)
    params = _params(sc, args)
    grid = sc.grid(cfg.epsilon, params)
    fld = solve(cfg, params, grid)
    out = _outdir(args)
    zs = _write_field(out, "field", fld)
    print(f"solved {sc.name}: eps={cfg.epsilon:g} N={cfg.n_rounds} grid={grid.nx}x{grid.ny} h={grid.h:.4g}")
    print(f"zero set: {len(zs.contours)} contour(s); outputs in {out}")
    return 0


def _paul(spec: str, sc):
    kind, _, arg = spec.partition(":")
    if kind == "concentric":
        return ConcentricPaul(_vec(arg) if arg else None)
    if kind == "random":
        return RandomPaul(int(arg) if arg else 0)
    if kind == "tube":
        curve = sc.tube_curve() if sc is not None else None
        if curve is None:
            raise ConfigError("tube strategy needs a scenario with a curve")
        return tube_strategy(curve)
    raise ConfigError(f"unknown Paul strategy {spec!r}")


def _carol(spec: str, seed: int, d: int):
    kind, _, arg = spec.partition(":")
    if kind == "random":
        return RandomCarol(seed, float(arg) if arg else 0.5)
    if kind in ("concentric", "reversed"):
        z = _vec(arg) if arg else np.zeros(d)
        return ConcentricCarol(z, reversed=kind == "reversed")
    if kind in ("plus", "minus", "alternate"):
        return SignRuleCarol(kind)
    if kind == "panel":
        return adversary_panel("carol", np.zeros(d), seed=seed)
    raise ConfigError(f"unknown Carol strategy {spec!r}")


def cmd_simulate(args):
    sc = _scenario(args) if (args.preset or args.config) else None
    x0 = _vec(args.x0)
    d = len(x0) if sc is None else 2
    eps = args.eps if args.eps is not None else (sc.eps_list[0] if sc else 0.01)
    nu = args.nu if args.nu is not None else (sc.nu if sc else 0.0)
    if args.rounds is not None:
        t = args.rounds * eps * eps * (1 - 1e-12)
    else:
        t = sc.t_max if sc else 1.0
    if sc is not None:
        cfg = sc.game_config(eps, t)
        cfg = GameConfig(d=2, epsilon=eps, nu=nu, horizon_t=t, u0=cfg.source("u0"),
                         psi_minus=cfg.source("psi_minus"), psi_plus=cfg.source("psi_plus"), f=cfg.source("f"))
    else:
        cfg = GameConfig(d=d, epsilon=eps, nu=nu, horizon_t=t, u0=0.0)
    spec = args.paul
    if spec.startswith("concentric") and ":" not in spec:
        spec = "concentric:" + ",".join(["0"] * d)
    paul = _paul(spec, sc)
    if isinstance(paul, ConcentricPaul) and paul.z is not None and paul.z.shape != (d,):
        raise ConfigError(f"centre {paul.z.tolist()} does not match dimension {d}")
    carol = _carol(args.carol, args.seed, d)
    batch = 20 if args.carol == "panel" else 1
    starts = np.tile(x0, (batch, 1))
    outs = play(cfg, paul, carol, starts)
    out = _outdir(args)
    for k, o in enumerate(outs):
        name = "trajectory.csv" if batch == 1 else f"trajectory_{k:02d}.csv"
        o.to_csv(out / name)
    export.write_svg(out / "trajectory.svg", [o.trajectory[:, :2] for o in outs])
    (out / "simulate.json").write_text(json.dumps({
        "paul": spec, "carol": args.carol, "seed": args.seed, "epsilon": eps, "nu": nu,
        "rounds": cfg.n_rounds, "x0": x0.tolist()}, indent=2))
    o = outs[0]
    print(f"rounds {cfg.n_rounds} termination {o.termination} cost {o.cost:.17g}")
    if isinstance(paul, ConcentricPaul) and type(paul) is ConcentricPaul and nu == 0:
        z = paul.z
        err = 0.0
        for o in outs:
            n = np.arange(len(o.trajectory))
            r = np.linalg.norm(o.trajectory - z, axis=1)
            exact = np.sqrt(np.sum((x0 - z) ** 2) + 2 * (d - 1) * n * eps * eps)
            err = max(err, float(np.max(np.abs(r - exact) / exact)))
        print(f"max relative deviation from sqrt(R0^2 + 2(d-1) n eps^2): {err:.3e}")
    print(f"outputs in {out}")
    return 0


def cmd_verify(args):
    out = _outdir(args)
    reports = run_suites(args.suite, seed=args.seed)
    lines = ["suite\tname\tbound\tmeasured\tpass"]
    ok = True
    for r in reports:
        for c in r.checks:
            lines.append(f"{r.suite}\t{c.line()}")
        ok &= r.passed
        print(f"# {r.suite}: {'pass' if r.passed else 'FAIL'} ({r.seconds:.1f}s)")
        for ln in r.lines():
            print(ln)
    (out / "verify.tsv").write_text("\n".join(lines) + "\n")
    return 0 if ok else 2


def cmd_shape(args):
    sc = _scenario(args)
    cfg = sc.game_config(args.eps)
    params = _params(sc, args)
    grid = sc.grid(cfg.epsilon, params)
    target = sc.target_boundary(grid.h)
    rep = asymptotic_run(cfg, target, sc.checkpoints, params, grid)
    out = _outdir(args)
    zs = _write_field(out, "shape", rep.final_field)
    box = (grid.x0, grid.x0 + (grid.nx - 1) * grid.h, grid.y0, grid.y0 + (grid.ny - 1) * grid.h)
    paths = [(c, True, "black") for c in zs.contours]
    if len(target):
        paths.append((target, False, "red"))
    export.write_svg(out / "shape_vs_target.svg", paths, box)
    print(f"shape {sc.name}: target {sc.target['kind']}")
    for ln in rep.lines():
        print(ln)
    if rep.stick_time is not None:
        print(f"converged: finite stick time {rep.stick_time:.4f}")
    else:
        print("not converged within t_max")
    return 0


def cmd_oracle(args):
    sc = _scenario(args)
    cfg = sc.game_config(args.eps)
    fld = solve_reference(cfg, cfg.horizon_t, h=args.h, checkpoints=sc.checkpoints)
    out = _outdir(args)
    zs = _write_field(out, "oracle", fld)
    print(f"reference {sc.name}: t={cfg.horizon_t:g} grid={fld.grid.nx}x{fld.grid.ny}; {len(zs.contours)} contour(s)")
    return 0


def cmd_study(args):
    sc = _scenario(args, default="initial-condition")
    eps = sc.eps_list
    if args.probes:
        probes = np.array([_vec(p) for p in args.probes.split(";")])
    else:
        probes = np.asarray(sc.params.get("probes", [[0.0, 0.0]]), float)
    params = _params(sc, args)
    u0 = sc.game_config().u0(probes)
    table = refine_study(lambda e: sc.game_config(e), eps, probes, params, reference=lambda e, p: u0,
                         make_grid=lambda c: sc.grid(c.epsilon, params))
    out = _outdir(args)
    rows = [[e] + list(v) + [err] for e, v, err in zip(table.eps, table.values, table.errors)]
    export.write_rows(out / "study.csv", ["eps"] + [f"u{k}" for k in range(len(probes))] + ["max_abs_u_minus_u0"], rows)
    for ln in table.lines():
        print(ln)
    return 0


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "verify": cmd_verify, "shape": cmd_shape,
            "oracle": cmd_oracle, "study": cmd_study}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "presets":
        print("\n".join(preset_names()))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.cmd](args)
    except (ConfigError, ScenarioError, KeyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except MemoryError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
