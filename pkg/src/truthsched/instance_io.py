"""JSON round-trips for instances, constants and certificates.

Rationals are always written as ``"p/q"`` strings so files stay exact.

Instance layout (``"version": 1``)::

    {"kind": "matrix", "n": 2, "values": [["1", "2"], ["2", "1"]]}
    {"kind": "clustered", "n": 3, "ell": 1, "theta": "...", "B": "1000",
     "clusters": [[{"t": "1/2", "s": "1"}, ...], ...], "dummies": ["0", "0", "0"]}

An optional sibling ``"mechanism": {"id": ..., "config": {...}}`` names the
mechanism to run on the instance.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import Allocation, ClusteredInstance, ConstantsProfile, ContractViolation, CostMatrix, TaskValues
from .lowerbound import Certificate


FORMAT_VERSION = 1


def q(x) -> str:
    return str(Fraction(x))


def matrix_to_json(m: CostMatrix) -> dict:
    return {"version": FORMAT_VERSION, "kind": "matrix", "n": m.n, "values": [[q(v) for v in row] for row in m.values]}


def clustered_to_json(ci: ClusteredInstance) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "clustered",
        "n": ci.n,
        "ell": ci.ell,
        "theta": q(ci.theta),
        "B": q(ci.big_b),
        "clusters": [[{"t": q(tv.t), "s": q(tv.s)} for tv in c] for c in ci.clusters],
        "dummies": [q(d) for d in ci.dummies],
    }


def instance_to_json(inst) -> dict:
    if isinstance(inst, CostMatrix):
        return matrix_to_json(inst)
    if isinstance(inst, ClusteredInstance):
        return clustered_to_json(inst)
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def instance_from_json(obj: dict):
    kind = obj.get("kind")
    if obj.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ContractViolation(f"unsupported format version {obj['version']!r}")
    if kind == "matrix":
        m = CostMatrix.of(obj["values"])
        if "n" in obj and obj["n"] != m.n:
            raise ContractViolation(f"declared n={obj['n']} but {m.n} rows given")
        return m
    if kind == "clustered":
        clusters = tuple(tuple(TaskValues(tv["t"], tv["s"]) for tv in c) for c in obj["clusters"])
        return ClusteredInstance(
            obj["n"], obj["ell"], clusters, tuple(obj["dummies"]), Fraction(obj["theta"]), Fraction(obj["B"])
        )
    raise ContractViolation(f"unknown instance kind {kind!r}")


def consts_to_json(c: ConstantsProfile) -> dict:
    return {
        "n": c.n,
        "alpha": q(c.alpha),
        "beta": q(c.beta),
        "delta": q(c.delta),
        "delta_prime": q(c.delta_prime),
        "rho": q(c.rho),
        "ell": c.ell,
    }


def consts_from_json(obj: dict) -> ConstantsProfile:
    """Full profiles are validated as given; partial ones fill in the defaults."""
    if all(k in obj for k in ("alpha", "delta_prime", "rho")):
        return ConstantsProfile(
            obj["n"], obj["alpha"], obj["beta"], obj["delta"], obj["delta_prime"], obj["rho"], obj["ell"]
        )
    kw = {k: obj[k] for k in ("delta", "beta", "ell", "alpha") if k in obj}
    return ConstantsProfile.build(obj["n"], **kw)


def certificate_to_json(c: Certificate) -> dict:
    return {
        "kind": c.kind,
        "mechanism": c.mechanism,
        "instance": clustered_to_json(c.instance),
        "allocation": list(c.allocation.assignment),
        "mech_value": q(c.mech_value),
        "opt_value": q(c.opt_value),
        "ratio": q(c.ratio),
        "ratio_decimal": float(c.ratio),
        "pre_boost_ratio": None if c.pre_boost_ratio is None else q(c.pre_boost_ratio),
        "consts": None if c.consts is None else consts_to_json(c.consts),
        "notes": c.notes,
    }


def certificate_from_json(obj: dict) -> Certificate:
    return Certificate(
        kind=obj["kind"],
        mechanism=obj["mechanism"],
        instance=instance_from_json(obj["instance"]),
        allocation=Allocation.of(obj["allocation"]),
        mech_value=Fraction(obj["mech_value"]),
        opt_value=Fraction(obj["opt_value"]),
        ratio=Fraction(obj["ratio"]),
        consts=None if obj.get("consts") is None else consts_from_json(obj["consts"]),
        pre_boost_ratio=None if obj.get("pre_boost_ratio") is None else Fraction(obj["pre_boost_ratio"]),
        notes=obj.get("notes", {}),
    )


def dump(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load(path) -> dict:
    return json.loads(Path(path).read_text())
