"""Command-line runner: ``hardylab <command> [options]``.

Every invocation is turned into a RunConfig dictionary, validated against a
JSON schema, executed, and summarized as a deterministic JSON report.
Exit status is 0 when every check passes, 1 when a check fails and 2 when the
configuration is invalid.
"""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import platform
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    HardyLabError,
    InvalidGridError,
    InvalidOrderError,
)
from .hardy import is_power_of_two, pairs_to_complex
from .presets import SCENARIO_NAMES, THETA_PRESETS, list_presets, preset_config, preset_names
from .reports import Check, all_passed, checks_csv, dumps, report_payload, thread_count

COMMANDS = ("factor", "model", "theta", "probe", "suite")

_NUMBER_OR_PAIR = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 1}
_LADDER = {"type": "array", "items": _INT, "minItems": 1}
_RATIONAL = {
    "type": "object",
    "properties": {
        "num": {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
        "den": {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
    },
    "required": ["num"],
    "additionalProperties": False,
}

PARAMETER_SCHEMAS = {
    "factor": {
        "type": "object",
        "properties": {
            "poly": {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
            "M": _INT,
            "tol": _POS,
        },
        "required": ["poly"],
        "additionalProperties": False,
    },
    "model": {
        "type": "object",
        "properties": {
            "zeros": {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
            "N": _INT,
            "tol": _POS,
        },
        "required": ["zeros"],
        "additionalProperties": False,
    },
    "theta": {
        "type": "object",
        "properties": {
            "theta": {
                "type": "object",
                "properties": {"theta1": _RATIONAL, "theta2": _RATIONAL},
                "required": ["theta1", "theta2"],
                "additionalProperties": False,
            },
            "N": _INT,
            "M": _INT,
            "ladder": _LADDER,
            "checks": {
                "oneOf": [
                    {"const": "all"},
                    {"type": "array", "items": {"type": "string"}, "minItems": 1},
                ]
            },
            "tolerances": {"type": "object", "additionalProperties": _POS},
        },
        "additionalProperties": False,
    },
    "probe": {
        "type": "object",
        "properties": {
            "kind": {"enum": ["closability", "biorthogonality", "spectral"]},
            "scenario": {"enum": sorted(SCENARIO_NAMES)},
            "eps": _POS,
            "cap": {"type": "integer", "minimum": 0},
            "N": _INT,
            "M": _INT,
            "g": {
                "oneOf": [
                    {"enum": ["one", "zero"]},
                    {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
                ]
            },
            "theta": {"enum": sorted(THETA_PRESETS)},
            "K": _INT,
            "ladder": _LADDER,
            "lambdas": {"type": "array", "items": _NUMBER_OR_PAIR, "minItems": 1},
        },
        "required": ["kind"],
        "additionalProperties": False,
    },
    "suite": {
        "type": "object",
        "properties": {
            "name": {"enum": ["paper-example", "spectral-picture"]},
            "ladder": _LADDER,
            "N": _INT,
        },
        "required": ["name"],
        "additionalProperties": False,
    },
}

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": 1},
        "command": {"enum": list(COMMANDS)},
        "preset": {"type": ["string", "null"]},
        "parameters": {"type": "object"},
        "output": {"type": ["string", "null"]},
    },
    "required": ["schema", "command"],
    "additionalProperties": False,
}

DEFAULTS = {
    "factor": {"M": 1024, "tol": 1e-8},
    "model": {"N": 256, "tol": 1e-11},
    "theta": {"N": 128, "M": 1024, "ladder": [64, 128], "checks": "all", "tolerances": {}},
    "probe": {"eps": 1e-2, "cap": 40, "N": 256, "M": 1024, "g": "one", "theta": "paper-example", "K": 10,
              "ladder": [64, 128, 256], "lambdas": [0, 0.3, [0, 0.5], -0.7]},
    "suite": {"ladder": [64, 128, 256], "N": 256},
}

POWER_OF_TWO_KEYS = ("M",)


def _validate(instance, schema, prefix):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, [{"path": prefix + list(err.path), "message": err.message}])


def resolve_config(config: dict) -> dict:
    """Validate a RunConfig and fill in defaults; raises ConfigError."""
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a JSON object")
    _validate(config, RUN_CONFIG_SCHEMA, [])
    cfg = copy.deepcopy(config)
    cmd = cfg["command"]
    preset = cfg.get("preset")
    params = {}
    if preset is not None:
        if preset not in preset_names() and preset not in THETA_PRESETS:
            raise ConfigError(f"unknown preset {preset!r}", [{"path": ["preset"], "message": "unknown preset"}])
        if preset in preset_names():
            base = preset_config(preset)
            if base["command"] == cmd:
                params.update(base["parameters"])
            elif not (cmd == "theta" and preset in THETA_PRESETS):
                raise ConfigError(
                    f"preset {preset!r} belongs to command {base['command']!r}",
                    [{"path": ["preset"], "message": "command mismatch"}],
                )
    params.update(cfg.get("parameters") or {})
    _validate(params, PARAMETER_SCHEMAS[cmd], ["parameters"])
    full = copy.deepcopy(DEFAULTS[cmd])
    full.update(params)
    for key in POWER_OF_TWO_KEYS:
        if key in full and not is_power_of_two(full[key]):
            raise ConfigError(f"{key} must be a power of two", [{"path": ["parameters", key], "message": "not a power of two"}])
    if cmd == "theta" and "theta" not in full and preset not in THETA_PRESETS:
        raise ConfigError("theta command needs a Theta preset or explicit theta", [{"path": ["parameters"], "message": "missing theta"}])
    if cmd == "probe" and full["kind"] == "closability" and "scenario" not in full:
        raise ConfigError("closability probes need a scenario", [{"path": ["parameters", "scenario"], "message": "missing"}])
    if cmd == "theta" and full["N"] < 32:
        raise ConfigError("theta models need N >= 32", [{"path": ["parameters", "N"], "message": "too small"}])
    return {"schema": 1, "command": cmd, "preset": preset, "parameters": full, "output": cfg.get("output")}


def _complex_list(items) -> np.ndarray:
    return pairs_to_complex(items)


def _theta_from(cfg):
    from .theta import Theta

    p = cfg["parameters"]
    if "theta" in p:
        return Theta.from_json(p["theta"], name="custom")
    return THETA_PRESETS[cfg["preset"]]()


def _run_factor(p):
    from .probes import factor_checks

    return factor_checks(_complex_list(p["poly"]), p["M"], p["tol"])


def _run_model(p):
    from .probes import model_suite

    return model_suite(list(_complex_list(p["zeros"])), p["N"], p["tol"]), {}


def _run_theta(cfg):
    from .probes import paper_example_suite, theta_suite

    p = cfg["parameters"]
    if "theta" not in p and cfg["preset"] == "paper-example":
        checks = paper_example_suite(tuple(p["ladder"]), p["N"], p["M"], p["tolerances"])
    else:
        checks = theta_suite(_theta_from(cfg), p["N"], tuple(p["ladder"]), p["M"])
    if p["checks"] != "all":
        wanted = tuple(p["checks"])
        checks = [c for c in checks if c.name.startswith(wanted)]
        if not checks:
            raise ConfigError("no checks match the requested names", [{"path": ["parameters", "checks"], "message": "no match"}])
    return checks, {}


def _run_probe(p):
    from .probes import (
        ClosabilityScenario,
        biorthogonality_suite,
        closability_checks,
        kernel_vector,
        nonclosability_search,
        spectral_picture_suite,
    )
    from .theta import s_theta, theta_basis

    if p["kind"] == "closability":
        kind = SCENARIO_NAMES[p["scenario"]]
        params = {"M": p["M"]} if kind == "BILATERAL_ARCS" else {}
        scen = ClosabilityScenario(kind, params)
        g = p["g"]
        if kind == "BILATERAL_ARCS":
            gv = None if g == "one" else (0 * np.ones(p["M"]) if g == "zero" else _complex_list(g))
        else:
            gv = [1.0] if g == "one" else ([0.0] if g == "zero" else _complex_list(g))
        rep = nonclosability_search(scen, gv, p["eps"], p["cap"], p["N"])
        details = {"history": rep.history}
        if rep.witness is not None:
            details["degrees"] = rep.witness.degrees
        return closability_checks(rep, p["eps"], p["scenario"]), details
    theta = THETA_PRESETS[p["theta"]]()
    if p["kind"] == "biorthogonality":
        B = theta_basis(theta, p["N"])
        A = s_theta(B)
        f0, _ = kernel_vector(A)
        rep = biorthogonality_suite(A, f0, p["K"])
        return [Check("biorthogonality.deviation", rep.deviation, 1e-6, "le", p["N"])], {}
    lambdas = [complex(z) for z in _complex_list(p["lambdas"])]
    return spectral_picture_suite(theta, lambdas, tuple(p["ladder"])), {}


def _run_suite(p):
    from .probes import paper_example_suite, spectral_picture_suite
    from .theta import paper_example_theta

    if p["name"] == "paper-example":
        return paper_example_suite(tuple(p["ladder"]), p["N"]), {}
    return spectral_picture_suite(paper_example_theta(), ladder=tuple(p["ladder"])), {}


def execute(cfg: dict) -> tuple[list, dict]:
    cmd, p = cfg["command"], cfg["parameters"]
    if cmd == "factor":
        return _run_factor(p)
    if cmd == "model":
        return _run_model(p)
    if cmd == "theta":
        return _run_theta(cfg)
    if cmd == "probe":
        return _run_probe(p)
    return _run_suite(p)


INPUT_ERRORS = (ConfigError, DomainError, InvalidGridError, InvalidOrderError, DegenerateInputError)


def error_object(exc: Exception) -> dict:
    details = getattr(exc, "details", None) or []
    return {"error": {"type": type(exc).__name__, "message": str(exc), "details": details}}


def run(config: dict) -> tuple[int, dict, str | None]:
    """Execute a RunConfig; returns (exit status, report payload, CSV text)."""
    try:
        cfg = resolve_config(config)
        checks, details = execute(cfg)
    except INPUT_ERRORS as exc:
        return 2, error_object(exc), None
    except HardyLabError as exc:
        # numerical failures become a failing check, never a silent pass
        checks = [Check("error", f"{type(exc).__name__}: {exc}", "none", "eq")]
        details = {"report": getattr(exc, "report", {})}
    payload = report_payload(cfg, checks, details)
    return (0 if all_passed(checks) else 1), payload, checks_csv(checks)


def provenance() -> dict:
    from importlib.metadata import version

    return {
        "tool": "hardylab",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": version("scipy"),
        "jsonschema": version("jsonschema"),
        "platform": platform.platform(),
        "threads": thread_count(),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def write_outputs(out: str, payload: dict, csv_text: str | None) -> None:
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    if csv_text is not None:
        path.with_suffix(".csv").write_text(csv_text)
    Path(str(path) + ".provenance.json").write_text(dumps(provenance()))


def _split(text: str) -> list:
    return [complex(tok.replace(" ", "")) for tok in text.split(",") if tok.strip()]


def _jsonify_complex(values) -> list:
    return [v.real if v.imag == 0 else [v.real, v.imag] for v in values]


def _ints(text: str) -> list:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardylab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hardylab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="RunConfig JSON file (flags override its parameters)")
        p.add_argument("--preset", help="named preset, see `hardylab presets`")
        p.add_argument("--out", help="report path; CSV and provenance files are written beside it")

    p = sub.add_parser("factor", help="inner-outer factorization of a polynomial")
    common(p)
    p.add_argument("--poly", help="ascending coefficients, e.g. '1,-2.5,1'")
    p.add_argument("--M", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("model", help="checks of S(m) for a finite Blaschke product")
    common(p)
    p.add_argument("--zeros", help="comma-separated zeros, e.g. '0,0.5,-0.3j'")
    p.add_argument("--N", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("theta", help="checks of S(Theta) for an inner column")
    common(p)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--ladder", type=_ints)
    p.add_argument("--checks", help="'all' or comma-separated check-name prefixes")

    p = sub.add_parser("probe", help="closability, bi-orthogonality or spectral probes")
    common(p)
    p.add_argument("kind", nargs="?", choices=["closability", "biorthogonality", "spectral"])
    p.add_argument("--scenario", choices=sorted(SCENARIO_NAMES))
    p.add_argument("--eps", type=float)
    p.add_argument("--cap", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--g", help="'one', 'zero' or comma-separated coefficients")
    p.add_argument("--theta", help="Theta preset for operator probes")
    p.add_argument("--K", type=int)
    p.add_argument("--ladder", type=_ints)

    p = sub.add_parser("suite", help="consolidated verification suites")
    common(p)
    p.add_argument("name", nargs="?", choices=["paper-example", "spectral-picture"])
    p.add_argument("--ladder", type=_ints)
    p.add_argument("--N", type=int)

    sub.add_parser("presets", help="list the preset catalog")
    return parser


_FLAG_KEYS = ("M", "N", "tol", "ladder", "eps", "cap", "theta", "K", "kind", "scenario", "name")


def config_from_args(args) -> dict:
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}", [{"path": [], "message": str(exc)}]) from exc
        if not isinstance(cfg, dict):
            raise ConfigError("configuration must be a JSON object")
        if cfg.get("command", args.command) != args.command:
            raise ConfigError("config command does not match the subcommand", [{"path": ["command"], "message": "mismatch"}])
    else:
        cfg = {"schema": 1, "command": args.command}
    cfg.setdefault("command", args.command)
    params = dict(cfg.get("parameters") or {})
    for key in _FLAG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if getattr(args, "poly", None):
        params["poly"] = _jsonify_complex(_split(args.poly))
    if getattr(args, "zeros", None):
        params["zeros"] = _jsonify_complex(_split(args.zeros))
    g = getattr(args, "g", None)
    if g is not None:
        params["g"] = g if g in ("one", "zero") else _jsonify_complex(_split(g))
    checks = getattr(args, "checks", None)
    if checks is not None:
        params["checks"] = "all" if checks == "all" else [c for c in checks.split(",") if c]
    if args.preset:
        cfg["preset"] = args.preset
    cfg["parameters"] = params
    if args.out:
        cfg["output"] = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        sys.stdout.write(dumps({"schema": 1, "presets": list_presets()}))
        return 0
    try:
        cfg = config_from_args(args)
    except (ConfigError, ValueError) as exc:
        sys.stdout.write(dumps(error_object(exc)))
        return 2
    status, payload, csv_text = run(cfg)
    out = cfg.get("output")
    if out and status != 2:
        write_outputs(out, payload, csv_text)
    sys.stdout.write(dumps(payload))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
