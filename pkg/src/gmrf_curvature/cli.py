"""Command line entry point: ``run``, ``forms`` and ``verify``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, reporting, verify
from .cycle import CycleConfig, detect_sign_changes, measure, run_cycle
from .geometry import SingularFirstForm

log = logging.getLogger("gmrf_curvature")


def _build_parser():
    p = argparse.ArgumentParser(prog="gmrf-curvature",
                                description="Curvature of Gaussian-Markov random field manifolds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="{run,forms,verify}")

    r = sub.add_parser("run", help="run a full inverse-temperature cycle")
    r.add_argument("--config", help="key = value config file (defaults if omitted)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--snapshot-at", default="",
                   help="comma-separated iterations whose lattice is saved as a .gmrf snapshot")

    f = sub.add_parser("forms", help="fundamental forms and curvatures of a lattice snapshot")
    f.add_argument("--snapshot", required=True)
    f.add_argument("--beta", type=float, default=0.0)
    f.add_argument("--ridge", type=float, default=None)

    v = sub.add_parser("verify", help="run the oracle checks")
    v.add_argument("--draws", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    return p


def _cmd_run(args) -> int:
    config = reporting.parse_config(args.config) if args.config else CycleConfig()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    wanted = {int(s) for s in args.snapshot_at.split(",") if s.strip()}
    snapshots = []

    def on_iteration(t, chain):
        if t in wanted:
            path = out / f"lattice_{t:04d}.gmrf"
            reporting.write_snapshot(chain.lattice, path)
            snapshots.append(str(path))
        if t % 100 == 0:
            log.info("iteration %d beta=%.4f", t, config.beta_at(t))

    t0 = time.perf_counter()
    records = run_cycle(config, on_iteration=on_iteration)
    runtime = time.perf_counter() - t0
    events = detect_sign_changes(records)

    csv_path = out / "cycle.csv"
    reporting.emit_csv(records, csv_path)
    summary_path = out / "summary.json"
    reporting.write_json(reporting.summary(config, records, events, runtime), summary_path)
    plots = reporting.emit_plots(records, events, out / "plots")
    manifest_path = out / "manifest.json"
    outputs = [str(csv_path), str(summary_path), *plots, *snapshots, str(manifest_path)]
    manifest = reporting.RunManifest(config, started, __version__, outputs)
    reporting.write_json(manifest.to_dict(), manifest_path)
    missing = manifest.missing_outputs()
    if missing:
        print(f"error: outputs missing after run: {missing}", file=sys.stderr)
        return 1
    for e in events:
        print(f"sign change at iteration {e.iteration} (beta={e.beta:.4f}): {e.direction.value}")
    print(f"wrote {len(outputs)} files to {out}")
    return 0


def _cmd_forms(args) -> int:
    lattice = reporting.read_snapshot(args.snapshot)
    forms, report, h = measure(lattice, args.beta, ridge=args.ridge)
    print(json.dumps({
        "beta": args.beta,
        "first": forms.first.tolist(),
        "second": forms.second.tolist(),
        "components": {k: float(v) for k, v in forms.components.items()},
        "gaussian_k": report.gaussian_k,
        "mean_h": report.mean_h,
        "principal": report.principal.tolist(),
        "entropy": h,
    }, indent=2))
    return 0


def _cmd_verify(args) -> int:
    checks = verify.run_suite(draws=args.draws, seed=args.seed)
    print(verify.format_table(checks))
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "forms": _cmd_forms, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, reporting.ConfigError, ValueError, OSError,
            SingularFirstForm, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
