"""Check records, report serialization and the thread-pool helper."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1

_COMPARE = {
    "le": lambda v, t: v <= t,
    "ge": lambda v, t: v >= t,
    "gt": lambda v, t: v > t,
    "eq": lambda v, t: v == t,
}


@dataclass(frozen=True)
class Check:
    name: str
    value: object
    tol: object
    cmp: str = "le"
    N: int | None = None

    @property
    def passed(self) -> bool:
        v = self.value
        if isinstance(v, float) and math.isnan(v):
            return False
        return bool(_COMPARE[self.cmp](v, self.tol))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "N": self.N,
            "value": jsonable(self.value),
            "tol": jsonable(self.tol),
            "cmp": self.cmp,
            "pass": self.passed,
        }


def jsonable(x):
    """Convert numpy scalars, complex numbers and non-finite floats for JSON."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    return x


def sort_checks(checks) -> list:
    return sorted(checks, key=lambda c: (c.name, -1 if c.N is None else c.N))


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)


def report_payload(config: dict, checks, extra: dict | None = None) -> dict:
    payload = {
        "schema": SCHEMA_VERSION,
        "config": jsonable(config),
        "checks": [c.to_json() for c in sort_checks(checks)],
        "pass": all_passed(checks),
    }
    if extra:
        payload["details"] = jsonable(extra)
    return payload


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def checks_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "N", "value", "tolerance", "pass"])
    for c in sort_checks(checks):
        w.writerow([c.name, "" if c.N is None else c.N, jsonable(c.value), jsonable(c.tol), c.passed])
    return buf.getvalue()


def thread_count() -> int:
    raw = os.environ.get("HARDYLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)


def parallel_map(fn, items) -> list:
    """Order-preserving map over a thread pool sized by HARDYLAB_THREADS."""
    items = list(items)
    workers = min(thread_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
