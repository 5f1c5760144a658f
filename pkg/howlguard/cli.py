import os
import sys
from typing import List, Optional

from .diagnostics import diagnose, diagnosis_frame, summarize
from .errors import UsageError, ValidationError
from .io import CSVWriter, TextWriter, apply_seed_env, load_config, load_scenario
from .modules import (AttenuatorParams, DetectorThresholds, PARAMETER_REGISTRY, Scenario,
                      SweepSpec, THRESHOLD_REGISTRY)
from .ops import arsech_phi_curves, component_curves, operation_curve
from .pipeline import run_trajectory, sweep
from .scenarios import builtin
from .utils import parse_overrides, parser

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _status(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _scenario(args) -> Scenario:
    scenario = builtin(args.builtin) if args.builtin else load_scenario(args.scenario)
    return apply_seed_env(scenario, os.environ)


def _patches(args):
    config_params, config_thresholds = load_config(args.config) if args.config else ({}, {})
    params = {**config_params, **parse_overrides(args.overrides, PARAMETER_REGISTRY)}
    thresholds = {**config_thresholds, **parse_overrides(getattr(args, "thresholds", []), THRESHOLD_REGISTRY)}
    return params, thresholds


def _params(patch, scenario: Optional[Scenario] = None) -> AttenuatorParams:
    scenario_params = scenario.params if scenario is not None else {}
    return AttenuatorParams().replace(**{**scenario_params, **patch})


def _attenuator_on(args, default):
    return default if args.attenuator is None else args.attenuator == "on"


def simulate_command(args) -> int:
    scenario = _scenario(args)
    params = _params(_patches(args)[0], scenario)
    _status(args, f"simulating {scenario.id}...")
    traj = run_trajectory(scenario, params=params,
                          attenuator_on=_attenuator_on(args, scenario.attenuator), mode=args.mode)
    CSVWriter(args.out).put(traj.to_frame())
    _status(args, f"finished {scenario.id}: {len(traj)} steps")
    return EXIT_OK


def curves_command(args) -> int:
    params = _params(_patches(args)[0])
    _status(args, f"tabulating {args.kind} curves...")
    if args.kind == "components":
        frame = component_curves(args.grid, params)
    elif args.kind == "arsech_phi":
        frame = arsech_phi_curves(args.grid, params)
    else:
        frame = operation_curve(args.w0, args.steps, params)
    CSVWriter(args.out).put(frame)
    return EXIT_OK


def sweep_command(args) -> int:
    scenario = _scenario(args)
    params = _params(_patches(args)[0], scenario)
    spec = SweepSpec(args.param, args.start, args.stop, args.steps, args.metric)
    _status(args, f"sweeping {spec.param} over {spec.steps} points on {scenario.id}...")
    table = sweep(scenario, spec, params=params,
                  attenuator_on=_attenuator_on(args, True), mode=args.mode,
                  n_jobs=args.n_jobs, show_progress=args.show_progress)
    CSVWriter(args.out).put(table)
    return EXIT_OK


def diagnose_command(args) -> int:
    scenario = _scenario(args)
    param_patch, threshold_patch = _patches(args)
    params = _params(param_patch, scenario)
    thresholds = DetectorThresholds().replace(**threshold_patch)
    _status(args, f"diagnosing {scenario.id}...")
    traj = run_trajectory(scenario, params=params,
                          attenuator_on=_attenuator_on(args, scenario.attenuator), mode=args.mode)
    diagnoses = diagnose(traj, scenario, thresholds)
    if args.format == "text":
        TextWriter(args.out).put(summarize(diagnoses, scenario.id))
    else:
        CSVWriter(args.out).put(diagnosis_frame(diagnoses))
    return EXIT_OK


COMMANDS = {
    "simulate": simulate_command,
    "curves": curves_command,
    "sweep": sweep_command,
    "diagnose": diagnose_command,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point.

    Returns 0 on success, 1 on a usage error, 2 on a validation error and 3
    on any other error. Messages go to standard error.
    """
    try:
        args = parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (None, 0) else EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
