"""Named configurations shipped with the command-line runner."""
from __future__ import annotations

import copy

from .theta import Theta, common_factor_z_theta, paper_example_theta, shift_theta

THETA_PRESETS = {
    "paper-example": paper_example_theta,
    "shift": shift_theta,
    "common-factor-z": common_factor_z_theta,
}

SCENARIO_NAMES = {
    "poly-vs-outer": "POLY_VS_OUTER",
    "poly-vs-kernels": "POLY_VS_KERNELS",
    "bilateral-arcs": "BILATERAL_ARCS",
}

_CATALOG = {
    "bilateral-arcs": {
        "description": "Indicator-weighted polynomials on two overlapping arcs of the circle",
        "config": {
            "schema": 1,
            "command": "probe",
            "preset": "bilateral-arcs",
            "parameters": {"kind": "closability", "scenario": "bilateral-arcs", "eps": 0.15, "cap": 40, "M": 1024},
        },
    },
    "common-factor-z": {
        "description": "Inner column whose entries share the factor z (not confluent)",
        "config": {
            "schema": 1,
            "command": "theta",
            "preset": "common-factor-z",
            "parameters": {"N": 128, "ladder": [64, 128], "M": 1024},
        },
    },
    "paper-example": {
        "description": "Theta = [3z/5; 4(2z-1)/(5(2-z))], the confluent worked example",
        "config": {
            "schema": 1,
            "command": "theta",
            "preset": "paper-example",
            "parameters": {"N": 256, "ladder": [64, 128, 256], "M": 1024, "checks": "all"},
        },
    },
    "poly-vs-kernels": {
        "description": "Polynomials against spans of Cauchy kernels at 0.5 ... 0.8",
        "config": {
            "schema": 1,
            "command": "probe",
            "preset": "poly-vs-kernels",
            "parameters": {"kind": "closability", "scenario": "poly-vs-kernels", "eps": 0.1, "cap": 30, "N": 256},
        },
    },
    "poly-vs-outer-exp": {
        "description": "Polynomials against polynomial multiples of the outer function e^z",
        "config": {
            "schema": 1,
            "command": "probe",
            "preset": "poly-vs-outer-exp",
            "parameters": {"kind": "closability", "scenario": "poly-vs-outer", "eps": 0.01, "cap": 40, "N": 256, "g": "one"},
        },
    },
    "shift": {
        "description": "Theta = [1; 0], whose model operator is the unilateral shift",
        "config": {
            "schema": 1,
            "command": "theta",
            "preset": "shift",
            "parameters": {"N": 128, "ladder": [64, 128], "M": 1024},
        },
    },
}


def list_presets() -> list[dict]:
    """Catalog entries sorted by name."""
    return [
        {"name": name, "description": entry["description"], "config": copy.deepcopy(entry["config"])}
        for name, entry in sorted(_CATALOG.items())
    ]


def preset_config(name: str) -> dict:
    return copy.deepcopy(_CATALOG[name]["config"])


def preset_names() -> list[str]:
    return sorted(_CATALOG)


def theta_from_preset(name: str) -> Theta:
    return THETA_PRESETS[name]()
