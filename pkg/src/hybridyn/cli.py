"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or failed item, 2 conservation violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

from .config import ParseError, ValidationError, dump_config, parse_config, parse_statics_config, safe_label
from .dynamics import ConservationViolation, NonFinite
from .output import IoError, write_manifest, write_statics_csv, write_states_csv, write_trajectory_csv
from .scenarios import PRESETS, ComparisonReport, ScenarioFailure, Unrepresentable, preset, run_scenario, sweep
from .statics import search_static_solutions

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONSERVATION = 2

log = logging.getLogger("hybridyn")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _load(source: str, statics: bool = False):
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif source in PRESETS:
        text = f"preset = {source}\n"
    else:
        raise FileNotFoundError(f"no config file or preset named {source!r}")
    return parse_statics_config(text) if statics else parse_config(text)


def _override(cfg, args):
    changes = {}
    if getattr(args, "dt", None) is not None:
        # an explicit step is taken as-is
        changes.update(dt=args.dt, auto_dt=False)
    if getattr(args, "t_final", None) is not None:
        changes["t_final"] = args.t_final
    return cfg.with_integrator(**changes) if changes else cfg


def _emit(report: ComparisonReport, out: Path, elapsed: float) -> dict:
    cfg = report.config
    stem = safe_label(cfg.label)
    entries = []
    for regime, traj in report.trajectories.items():
        if "trajectory" in cfg.outputs:
            entries.append(write_trajectory_csv(traj, out / f"{stem}_{regime.lower()}.csv"))
        if "states" in cfg.outputs:
            entries.append(write_states_csv(traj, out / f"{stem}_{regime.lower()}_states.csv"))
    manifest = {
        "label": cfg.label,
        "config": dump_config(cfg),
        "outputs": entries,
        "conservation": {r: c.as_dict() for r, c in report.conservation.items()},
        "comparison": {
            "phase_deviation": {f"{a}-{b}": v for (a, b), v in report.phase_deviation.items()},
            "series_deviation": {f"{a}-{b}": v for (a, b), v in report.series_deviation.items()},
            "max_radius": {r: t.max_radius() for r, t in report.trajectories.items()},
        },
        "wall_clock_s": elapsed,
    }
    path = write_manifest(manifest, out / f"{stem}_manifest.json")
    manifest["manifest_path"] = str(path)
    return manifest


def _summary(report: ComparisonReport) -> str:
    parts = []
    for regime, traj in report.trajectories.items():
        c = traj.conservation
        parts.append(
            f"{regime}: samples={len(traj)} max_s_ent={traj.s_ent.max():.6f} "
            f"norm_drift={c.norm_drift:.1e} energy_drift={c.energy_drift:.1e}"
        )
    return "\n".join(parts)


def cmd_run(args) -> int:
    cfg = _override(_load(args.config), args)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConservationViolation)
            report = run_scenario(cfg)
    except NonFinite as exc:
        # divergence is the unbounded end of a conservation violation
        print(f"conservation violation: {exc} (try a smaller --dt)", file=sys.stderr)
        return EXIT_CONSERVATION
    manifest = _emit(report, Path(args.out), time.perf_counter() - t0)
    print(_summary(report))
    print(f"wrote {manifest['manifest_path']}")
    if report.violation:
        print("conservation violation: drift above 1e-6", file=sys.stderr)
        return EXIT_CONSERVATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    directory = Path(args.config_dir)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    files = sorted(directory.glob("*.cfg"))
    if not files:
        raise FileNotFoundError(f"no *.cfg files in {directory}")
    parsed: dict[int, object] = {}
    used: set[str] = set()
    for i, f in enumerate(files):
        try:
            cfg = _override(parse_config(f.read_text(encoding="utf-8")), args)
        except (ParseError, ValidationError, Unrepresentable, OSError) as exc:
            parsed[i] = ScenarioFailure(f.stem, f"{type(exc).__name__}: {exc}")
            continue
        if safe_label(cfg.label) in used:
            cfg = replace(cfg, label=f"{cfg.label}_{i}")
        used.add(safe_label(cfg.label))
        parsed[i] = cfg
    runnable = [i for i, c in parsed.items() if not isinstance(c, ScenarioFailure)]
    t0 = time.perf_counter()
    ran = sweep([parsed[i] for i in runnable], workers=args.workers)
    elapsed = time.perf_counter() - t0
    results = dict(parsed)
    results.update(zip(runnable, ran))
    out = Path(args.out)
    items = []
    failed = diverged = violated = False
    for i, f in enumerate(files):
        res = results[i]
        if isinstance(res, ScenarioFailure):
            items.append({"config": str(f), "label": res.label, "error": res.error})
            print(f"{f.name}: FAILED {res.error}", file=sys.stderr)
            failed |= not res.diverged
            diverged |= res.diverged
            continue
        m = _emit(res, out / safe_label(res.label), elapsed)
        items.append({"config": str(f), "label": res.label, "manifest": m["manifest_path"], "violation": res.violation})
        print(f"{f.name}: ok ({m['manifest_path']})")
        violated |= res.violation
    write_manifest({"items": items, "wall_clock_s": elapsed}, out / "sweep_manifest.json")
    if failed:
        return EXIT_INVALID
    return EXIT_CONSERVATION if violated or diverged else EXIT_OK


def cmd_statics(args) -> int:
    cfg, opts = _load(args.config, statics=True)
    sols = search_static_solutions(cfg.params, opts.guesses, opts.branches)
    path = Path(args.out) / f"{safe_label(cfg.label)}_statics.csv"
    write_statics_csv(sols, path)
    for s in sols:
        print(f"branch {s.branch}: x={s.x:.10g} p={s.p:.10g} E={s.eigenvalue:.10g} residual={s.residual:.1e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in PRESETS:
        cfg = preset(name)
        p = cfg.params
        print(
            f"{name:14s} regimes={','.join(cfg.regimes):9s} omega_s={p.omega_s:g} g1={p.g1:g} g2={p.g2:g} "
            f"lambda={p.lam:g} t_final={cfg.integrator.t_final:g}"
        )
    return EXIT_OK


def seed_check() -> int:
    from .selfcheck import run_checks

    ok = True
    for name, passed, detail in run_checks():
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridyn", description="Oscillator + two spins: QQ / SC / CB dynamics")
    parser.add_argument("--seed-check", action="store_true", help="run the invariant self-test suite and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--dt", type=float, help="fixed integration step; disables automatic refinement")
        p.add_argument("--t-final", type=float, dest="t_final", help="override the run length")

    p = sub.add_parser("run", help="run one scenario (config file or preset name)")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p.add_argument("config_dir")
    common(p)
    p.add_argument("--workers", type=int, default=None, help="parallel workers (default: HYBRIDYN_THREADS)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("statics", help="search for static solutions of the SC system")
    p.add_argument("config")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_statics)

    p = sub.add_parser("presets", help="list built-in scenarios")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed_check:
        return seed_check()
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    for name in ("dt", "t_final"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            print(f"hybridyn: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INVALID
    try:
        return args.func(args)
    except (ParseError, ValidationError, Unrepresentable, FileNotFoundError) as exc:
        print(f"hybridyn: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IoError as exc:
        print(f"hybridyn: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
