"""
Command-line front end

Subcommands:
    check-conditions   boundary, tail and moment conditions of the configured law
    walk               one ballot-type probability of the associated walk
    simulate           forward runs written as a GenStats CSV
    spine              one spine realization (and optionally a size-biased functional)
    experiment PRESET  run a preset end to end
    verdict DIR        recompute the verdict of a results directory
    presets            list the presets

Exit codes: 0 success, 2 configuration or domain error, 3 cost guard
refusal, 1 any other toolkit error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from core import __version__
from core.application import Application
from core.errors import ConfigError, StableBRWError
from core.rng import generator, split
from forward_sim.simulator import ForwardSimulator, genstats_frame, write_genstats_csv
from forward_sim.survival import first_surviving
from forward_sim.truncation import TruncationPolicy
from reproduction.conditions import check_conditions
from reproduction.factory import LawFactory
from spine_sim.estimators import size_biased_functional
from spine_sim.spine import sample_spine
from stable_walk.ballot import BallotKind, ballot_probability
from .experiment_config import ExperimentConfig
from .orchestrator import run_experiment
from .presets import PRESETS, canonical_preset_id
from .verdict import evaluate_directory, render_verdict_table

logger = logging.getLogger("cli")


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None,
                        help='Experiment or override configuration file (YAML or JSON)')
    common.add_argument('--seed', type=int, default=None, help='Master seed')
    common.add_argument('--replicas', type=int, default=None, help='Number of replicas')
    common.add_argument('--workers', type=int, default=None, help='Worker processes')
    common.add_argument('--out', type=str, default=None,
                        help='Output directory (default: $STABLEBRW_OUTPUT_ROOT or results/)')
    common.add_argument('--budget', type=float, default=None, help='Particle-step budget')
    common.add_argument('--log-level', type=str, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Set logging level')
    common.add_argument('--no-progress', action='store_true', help='Disable progress bars')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog='stablebrw', description='Stable branching random walk toolkit')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('check-conditions', parents=[common], help='Check the law conditions')
    p.add_argument('--reps', type=int, default=100_000, help='Number of broods')

    p = sub.add_parser('walk', parents=[common], help='Estimate a ballot-type probability')
    p.add_argument('--kind', type=str, default='stay_above', choices=[k.value for k in BallotKind])
    p.add_argument('--n', type=int, required=True, help='Horizon')
    p.add_argument('--reps', type=int, default=10_000, help='Number of walks')
    for name in ('a', 'b', 'u', 'v', 'lam'):
        p.add_argument(f'--{name}', type=float, default=None)

    p = sub.add_parser('simulate', parents=[common], help='Run forward trees')
    p.add_argument('--n', type=int, required=True, help='Number of generations')
    p.add_argument('--beta', type=float, default=None, help='Barrier depth of W_n^beta')
    p.add_argument('--survive', action='store_true', help='Condition every replica on survival')

    p = sub.add_parser('spine', parents=[common], help='Sample a spine realization')
    p.add_argument('--n', type=int, required=True, help='Spine length')
    p.add_argument('--functional', type=str, default=None, help='Size-biased functional to estimate')
    p.add_argument('--reps', type=int, default=10_000, help='Spines for the functional')

    p = sub.add_parser('experiment', parents=[common], help='Run an experiment preset')
    p.add_argument('preset', type=str, help='Preset id (see the presets subcommand)')

    p = sub.add_parser('verdict', parents=[common], help='Recompute a verdict from raw data')
    p.add_argument('results_dir', type=str, help='Results directory')

    sub.add_parser('presets', parents=[common], help='List experiment presets')
    return parser


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _seed(app: Application, args) -> int:
    return int(args.seed if args.seed is not None else app.config_manager.get("run.master_seed", 0))


def cmd_check_conditions(app: Application, args) -> int:
    law = LawFactory(app.config_manager).create()
    report = check_conditions(
        law, args.reps, app.config_manager.get("presets.check-conditions.y_grid", [2.0, 4.0, 8.0, 16.0]),
        generator(_seed(app, args)), seed=str(_seed(app, args)),
        z_score=float(app.config_manager.get("tolerances.z_score", 3.0)),
        tail_tolerance=float(app.config_manager.get("tolerances.hill", 0.1)),
        ks_pvalue=float(app.config_manager.get("tolerances.ks_pvalue", 0.01)))
    _write_json(app.output_root / "conditions.json", report.to_dict())
    print(report.to_json())
    return 0


def cmd_walk(app: Application, args) -> int:
    law = LawFactory(app.config_manager).create()
    if not law.satisfies_stable_tail:
        raise ConfigError("walk needs a law with a stable step law (family: brood)")
    params = {k: getattr(args, k) for k in ('a', 'b', 'u', 'v', 'lam') if getattr(args, k) is not None}
    est = ballot_probability(law.base, args.kind, params, args.n, args.reps, generator(_seed(app, args)))
    print(json.dumps(est.to_row(), indent=2, sort_keys=True))
    return 0


def cmd_simulate(app: Application, args) -> int:
    law = LawFactory(app.config_manager).create()
    sim = ForwardSimulator(law, TruncationPolicy.from_config(app.config_manager.section("truncation")),
                           args.beta if args.beta is not None
                           else app.config_manager.get("forward.beta", 1.0))
    replicas = args.replicas if args.replicas is not None else 1
    if replicas < 1:
        raise ConfigError("replicas must be >= 1")
    seed = _seed(app, args)
    runs = []
    for r in range(replicas):
        stream = split(seed, r)
        if args.survive:
            runs.append(first_surviving(sim, stream, args.n,
                                        int(app.config_manager.get("survival.max_attempts", 10_000))))
        else:
            runs.append(sim.run(stream, args.n))
    path = app.output_root / "genstats.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_genstats_csv(path, genstats_frame(runs, range(replicas)))
    survived = sum(run.survived for run in runs)
    print(f"{survived} of {replicas} runs survived to n={args.n}; statistics in {path}")
    return 0


def cmd_spine(app: Application, args) -> int:
    law = LawFactory(app.config_manager).create()
    seed = _seed(app, args)
    realization = sample_spine(law, args.n, seed)
    path = app.output_root / "spine.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(realization.to_json() + "\n")
    print(f"spine of length {args.n} written to {path}")
    if args.functional:
        est = size_biased_functional(law, args.n, args.functional, args.reps, seed)
        print(json.dumps({"functional": args.functional, **est._asdict()}, indent=2))
    return 0


def cmd_experiment(app: Application, args) -> int:
    manager = app.config_manager
    preset_id = canonical_preset_id(args.preset)
    config = ExperimentConfig.from_manager(manager, preset_id, {
        "master_seed": args.seed, "replicas": args.replicas, "budget": args.budget})
    out = Path(args.out) if args.out else app.output_root / preset_id
    workers = args.workers if args.workers is not None else int(manager.get("run.workers", 1))
    progress = not args.no_progress and bool(manager.get("system.progress", True))
    outcome = run_experiment(config, out, workers, progress, app.shutdown_event)
    print(render_verdict_table(outcome.verdict))
    print(f"results in {outcome.root}")
    return 0


def cmd_verdict(app: Application, args) -> int:
    outcome = evaluate_directory(args.results_dir)
    print(render_verdict_table(outcome.verdict))
    return 0


def cmd_presets(app: Application, args) -> int:
    for preset_id, cls in PRESETS.items():
        tag = " (qualitative)" if cls.qualitative else ""
        if cls.aliases:
            tag += f" [also: {', '.join(cls.aliases)}]"
        print(f"{preset_id:<18} {cls.description}{tag}")
    return 0


COMMANDS: Dict[str, Callable[[Application, argparse.Namespace], int]] = {
    'check-conditions': cmd_check_conditions,
    'walk': cmd_walk,
    'simulate': cmd_simulate,
    'spine': cmd_spine,
    'experiment': cmd_experiment,
    'verdict': cmd_verdict,
    'presets': cmd_presets,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    app = None
    try:
        app = Application(config_file=args.config, log_level=args.log_level, output_root=args.out,
                          install_signal_handlers=args.command == 'experiment')
        return COMMANDS[args.command](app, args)
    except StableBRWError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130
    finally:
        if app is not None:
            app.close()


if __name__ == "__main__":
    sys.exit(main())
