from argparse import ArgumentParser, RawDescriptionHelpFormatter
from typing import Any, Dict, Iterable, Mapping

from ..errors import UsageError, ValidationError
from ..modules import (ATTENUATION_MODES, FieldInfo, PARAMETER_REGISTRY, SWEEP_METRICS,
                       THRESHOLD_REGISTRY)

TRUE_STRINGS = ("true", "1", "yes", "on")
FALSE_STRINGS = ("false", "0", "no", "off")
CURVE_KINDS = ("components", "arsech_phi", "operation")


class HowlguardArgumentParser(ArgumentParser):
    """ArgumentParser that raises `UsageError` instead of exiting."""
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def registry_help(title: str, registry: Mapping[str, FieldInfo]) -> str:
    lines = [f"{title}:"]
    for name, info in registry.items():
        lines.append(f"  {name} ({info.type.__name__}) default={info.default}")
    return "\n".join(lines)


def parameters_epilog() -> str:
    return (registry_help("attenuator parameters (--set NAME=VALUE)", PARAMETER_REGISTRY)
            + "\n\n"
            + registry_help("detector thresholds (--threshold NAME=VALUE)", THRESHOLD_REGISTRY))


def _parse_value(name: str, text: str, kind: type):
    try:
        if kind is bool:
            lowered = text.strip().lower()
            if lowered in TRUE_STRINGS:
                return True
            if lowered in FALSE_STRINGS:
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise ValidationError(f"malformed value for {name}: {text!r} is not a valid {kind.__name__}")


def parse_overrides(items: Iterable[str], registry: Mapping[str, FieldInfo] = PARAMETER_REGISTRY) -> Dict[str, Any]:
    """Turn `NAME=VALUE` strings into a typed patch.

    Parameters
    ----------
    items
        Strings such as `"gamma=2.5"`.

    registry
        Field registry giving the known names and their types.

    Raises
    ------
    ValidationError
        For an unknown name, a missing `=` or a value of the wrong type.
    """
    patch = {}
    for item in items:
        if "=" not in item:
            raise ValidationError(f"override must look like NAME=VALUE, got {item!r}")
        name, text = (part.strip() for part in item.split("=", 1))
        if name not in registry:
            raise ValidationError(f"unknown parameter: {name}")
        patch[name] = _parse_value(name, text, registry[name].type)
    return patch


def _scenario_arguments(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", type=str,
                        help="Name of a canned scenario.")
    source.add_argument("--scenario", type=str,
                        help="Path to a scenario JSON file.")


def _attenuator_arguments(parser, default_help):
    parser.add_argument("--attenuator", choices=("on", "off"), default=None,
                        help=f"Whether to apply the attenuator ({default_help}).")
    parser.add_argument("--mode", choices=ATTENUATION_MODES, default=None,
                        help="How attenuation is applied (default: the scenario's mode).")


def _common_arguments(parser):
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="NAME=VALUE",
                        help="Override an attenuator parameter; may be repeated.")
    parser.add_argument("--config", type=str,
                        help="YAML file with `params` and `thresholds` overrides.")
    parser.add_argument("--out", type=str,
                        help="Output path (default: standard output).")
    parser.add_argument("--quiet", default=False, action="store_true",
                        help="Do not print status lines to standard error.")


def parser() -> HowlguardArgumentParser:
    epilog = parameters_epilog()
    parser = HowlguardArgumentParser("howlguard", description="Salience attenuation simulator.",
                                     epilog=epilog, formatter_class=RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=HowlguardArgumentParser)
    commands.required = True

    simulate = commands.add_parser("simulate", help="Run a scenario and write its trajectory as CSV.",
                                   epilog=epilog, formatter_class=RawDescriptionHelpFormatter)
    _scenario_arguments(simulate)
    _attenuator_arguments(simulate, "default: the scenario's preference")
    _common_arguments(simulate)

    curves = commands.add_parser("curves", help="Tabulate attenuator curves as CSV.",
                                 epilog=epilog, formatter_class=RawDescriptionHelpFormatter)
    curves.add_argument("--kind", choices=CURVE_KINDS, default="components",
                        help="Which curve to emit.")
    curves.add_argument("--grid", type=int, default=1000,
                        help="Number of grid points for components and arsech_phi.")
    curves.add_argument("--w0", type=float, default=0.995,
                        help="Starting weight for the operation curve.")
    curves.add_argument("--steps", type=int, default=50,
                        help="Number of corrections for the operation curve.")
    _common_arguments(curves)

    sweep = commands.add_parser("sweep", help="Sweep one attenuator parameter.",
                                epilog=epilog, formatter_class=RawDescriptionHelpFormatter)
    _scenario_arguments(sweep)
    sweep.add_argument("--param", type=str, required=True,
                       help="Attenuator parameter to sweep.")
    sweep.add_argument("--from", dest="start", type=float, required=True,
                       help="First grid value.")
    sweep.add_argument("--to", dest="stop", type=float, required=True,
                       help="Last grid value.")
    sweep.add_argument("--steps", type=int, required=True,
                       help="Number of grid points.")
    sweep.add_argument("--metric", choices=SWEEP_METRICS, default="peak_w_max",
                       help="Metric recorded for each grid point.")
    sweep.add_argument("--n_jobs", type=int, default=1,
                       help="The number of parallel processes to use.")
    sweep.add_argument("--show_progress", action="store_true",
                       help="Whether to print progress to standard output.")
    _attenuator_arguments(sweep, "default: on")
    _common_arguments(sweep)

    diagnose = commands.add_parser("diagnose", help="Run a scenario and report detected failure modes.",
                                   epilog=epilog, formatter_class=RawDescriptionHelpFormatter)
    _scenario_arguments(diagnose)
    _attenuator_arguments(diagnose, "default: the scenario's preference")
    diagnose.add_argument("--threshold", dest="thresholds", action="append", default=[], metavar="NAME=VALUE",
                          help="Override a detector threshold; may be repeated.")
    diagnose.add_argument("--format", choices=("csv", "text"), default="csv",
                          help="Report format.")
    _common_arguments(diagnose)

    return parser
