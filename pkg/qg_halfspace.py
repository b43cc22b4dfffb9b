"""
Half-space quasi-geostrophic solver and verification suite.

Subcommands:
- run: integrate a configuration, persist snapshots, diagnostics and plots
- verify: run the invariant/identity checks, exit nonzero on any failure
- diagnose: recompute the diagnostics series from stored snapshots
- spectrum: per-band L2 energy and Besov contributions of a snapshot
"""
import sys
import os
import argparse
from pathlib import Path
from typing import List, Optional

# Add src to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.config import Config, RunConfig, parse_config
from src.diagnostics.equivalence import equivalence_report
from src.diagnostics.records import DiagnosticSettings, compute_record
from src.diagnostics.test_functions import test_function_suite
from src.dynamics.forcing import build_forcing
from src.dynamics.runner import run
from src.exceptions import ConfigError, SnapshotFormatError, WeakFormError
from src.reports.spectrum_report import RunReport
from src.storage.snapshot_store import SnapshotStore, read_snapshot
from src.tracking.diagnostics_logger import export_diagnostics
from src.utils.logger import setup_logger
from src.verification.checks import run_verification

logger = setup_logger("qg_halfspace")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Half-space QG solver and verification suite')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p):
        p.add_argument('--config', help='key = value configuration file')
        p.add_argument('--out', help='output directory')
        p.add_argument('--seed', type=int, help='override the configured seed')
        p.add_argument('--fixed-order', action='store_true', help='deterministic (exactly rounded) summation')
        p.add_argument('--threads', type=int, help='FFT worker threads')
        return p

    common(sub.add_parser('run', help='integrate and persist'))
    verify = common(sub.add_parser('verify', help='run the check suite'))
    verify.add_argument('--snapshot', help='verify on a stored snapshot instead of a config')
    common(sub.add_parser('diagnose', help='recompute diagnostics from stored snapshots'))
    spectrum = common(sub.add_parser('spectrum', help='per-band spectrum of a snapshot'))
    spectrum.add_argument('--snapshot', help='snapshot file (default: latest in --out)')
    spectrum.add_argument('--alpha', type=float, default=0.6, help='Besov smoothness for the contributions')
    return parser


def apply_process_flags(args):
    if args.fixed_order:
        Config.FIXED_ORDER = True
    if args.threads is not None:
        Config.FFT_WORKERS = args.threads
    Config.validate()


def load_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = parse_config(Path(args.config).read_text(encoding='utf-8'))
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.out:
        overrides['output_dir'] = args.out
    return cfg.with_overrides(**overrides) if overrides else cfg


def snapshot_config(path: str) -> RunConfig:
    """Minimal config reproducing a snapshot as initial data."""
    state = read_snapshot(path)
    slab = state.slab
    return RunConfig(n=slab.torus.n, nz=slab.nz, t_final=0.0, l=slab.torus.l, h=slab.h,
                     initial='snapshot', snapshot=path)


def write_equivalence(result, report: RunReport):
    trajectory = result.trajectory
    if len(trajectory) < 2:
        logger.info("Equivalence report skipped: fewer than 2 snapshots")
        return None
    suite = test_function_suite(trajectory[0].slab, trajectory[-1].t, 'closure', seed=result.config.seed)
    try:
        table = equivalence_report(trajectory, suite, result.forcing, result.params)
    except WeakFormError as e:
        logger.warning(f"Equivalence report skipped: {e}")
        return None
    report.write_equivalence(table)
    return table


def cmd_run(args) -> int:
    cfg = load_config(args)
    out = Path(cfg.output_dir)
    store = SnapshotStore(out)
    result = run(cfg, store)

    report = RunReport(out)
    if result.diagnostics:
        export_diagnostics(result.diagnostics, out / 'diagnostics.csv')
        report.plot_energy_series(result.diagnostics)
    write_equivalence(result, report)

    if result.halted:
        logger.error(f"❌ Run halted: {result.reason}")
        return 1
    logger.info(f"✅ Output written to {out}")
    return 0


def cmd_verify(args) -> int:
    if args.snapshot:
        cfg = snapshot_config(args.snapshot)
    else:
        cfg = load_config(args)
    results = run_verification(cfg)
    return 0 if all(r.passed for r in results) else 1


def cmd_diagnose(args) -> int:
    if not args.out:
        raise ConfigError("--out (a run output directory) is required for diagnose")
    store = SnapshotStore(args.out)
    cfg = store.read_config()
    settings = DiagnosticSettings.from_run_config(cfg)
    records = []
    forcing = None
    for step, state in store.load_all():
        if step % cfg.diagnostics_every:
            continue
        if forcing is None:
            forcing = build_forcing(cfg.forcing, state.slab, cfg.forcing_amplitude, cfg.forcing_frequency)
        records.append(compute_record(state, settings, forcing))
    if not records:
        logger.error(f"❌ No snapshots found in {args.out}")
        return 1
    export_diagnostics(records, Path(args.out) / 'diagnose.csv')
    RunReport(args.out).plot_energy_series(records, 'diagnose_energy.png')
    return 0


def cmd_spectrum(args) -> int:
    if args.snapshot:
        state = read_snapshot(args.snapshot)
        out = Path(args.out) if args.out else Path(args.snapshot).parent
    else:
        if not args.out:
            raise ConfigError("spectrum needs --snapshot or --out")
        store = SnapshotStore(args.out)
        steps = store.list_steps()
        if not steps:
            logger.error(f"❌ No snapshots found in {args.out}")
            return 1
        state = store.load(steps[-1])
        out = Path(args.out)
    RunReport(out).write_spectrum(state.theta, args.alpha)
    return 0


COMMANDS = {
    'run': cmd_run,
    'verify': cmd_verify,
    'diagnose': cmd_diagnose,
    'spectrum': cmd_spectrum,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        apply_process_flags(args)
        return COMMANDS[args.command](args)
    except (ConfigError, SnapshotFormatError, OSError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        return 2


if __name__ == '__main__':
    sys.exit(main())
