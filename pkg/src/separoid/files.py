"""JSON file formats: models, regime families, strategies, reports.

Model file (regime family)::

    {"regimes": ["s0", "s1"],
     "variables": {"X": ["0", "1"], "T": ["0", "1"]},
     "decision_vars": {"Sigma": {"s0": "s0", "s1": "s1"}},
     "distributions": {"s0": [{"assign": {"X": "0", "T": "0"}, "p": "1/4"}, ...],
                       "s1": [...]},
     "info_base": {"stages": [{"observed": ["L1"], "action": "A1"}],
                   "outcome": ["Y"],
                   "unmeasured": [["U1"]]}}            # info_base optional

Single-distribution files omit "regimes"/"decision_vars" and carry one
"distribution" list.  Rationals are "num/den" strings; plain integers and
decimal strings are accepted.  Atoms not listed have mass zero.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

from .errors import InvalidModel, InvalidStrategy
from .models import DiscreteDistribution, RegimeFamily


def parse_fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidModel(f"bad rational {text!r}: {e}") from None


def format_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _atoms_to_pmf(variables: Mapping, atoms, where: str) -> dict:
    pmf: dict = {}
    if not isinstance(atoms, list):
        raise InvalidModel(f"{where}: expected a list of atoms")
    for atom in atoms:
        try:
            assign, p = atom["assign"], atom["p"]
        except (TypeError, KeyError):
            raise InvalidModel(f"{where}: atom needs 'assign' and 'p'") from None
        if set(assign) != set(variables):
            raise InvalidModel(f"{where}: assignment keys {sorted(assign)} must cover "
                               f"{sorted(variables)}")
        key = tuple(str(assign[n]) for n in sorted(variables))
        pmf[key] = pmf.get(key, Fraction(0)) + parse_fraction(p)
    return pmf


def distribution_from_dict(data: Mapping) -> DiscreteDistribution:
    variables = data.get("variables")
    if not isinstance(variables, dict) or not variables:
        raise InvalidModel("model needs a nonempty 'variables' map")
    atoms = data.get("distribution")
    return DiscreteDistribution(variables, _atoms_to_pmf(variables, atoms, "distribution"))


def family_from_dict(data: Mapping) -> RegimeFamily:
    regimes = data.get("regimes")
    if not isinstance(regimes, list) or not regimes:
        raise InvalidModel("family needs a nonempty 'regimes' list")
    variables = data.get("variables")
    if not isinstance(variables, dict) or not variables:
        raise InvalidModel("family needs a nonempty 'variables' map")
    dists_data = data.get("distributions")
    if not isinstance(dists_data, dict):
        raise InvalidModel("family needs a 'distributions' map keyed by regime")
    dists = {}
    for r in regimes:
        if str(r) not in dists_data:
            raise InvalidModel(f"missing distribution for regime {r!r}")
        dists[str(r)] = DiscreteDistribution(
            variables, _atoms_to_pmf(variables, dists_data[str(r)], f"regime {r}")
        )
    return RegimeFamily(
        [str(r) for r in regimes],
        dists,
        data.get("decision_vars") or {},
        data.get("info_base"),
    )


def model_from_dict(data: Mapping):
    return family_from_dict(data) if "regimes" in data else distribution_from_dict(data)


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise InvalidModel(f"{path}: {e}") from None
    return model_from_dict(data)


def distribution_to_dict(dist: DiscreteDistribution) -> dict:
    return {
        "variables": {n: list(dist.values[n]) for n in dist.names},
        "distribution": [
            {"assign": dict(zip(dist.names, key)), "p": format_fraction(p)}
            for key, p in sorted(dist.atoms())
        ],
    }


def family_to_dict(fam: RegimeFamily) -> dict:
    out: dict[str, Any] = {
        "regimes": list(fam.regimes),
        "variables": {n: list(v) for n, v in fam.variables.items()},
        "decision_vars": {n: dict(sorted(m.items())) for n, m in sorted(fam.decvars.items())},
        "distributions": {
            s: [
                {"assign": dict(zip(fam.dists[s].names, key)), "p": format_fraction(p)}
                for key, p in sorted(fam.dists[s].atoms())
            ]
            for s in fam.regimes
        },
    }
    if fam.info_base is not None:
        out["info_base"] = fam.info_base
    return out


def model_to_dict(model) -> dict:
    if isinstance(model, RegimeFamily):
        return family_to_dict(model)
    return distribution_to_dict(model)


def dump_model(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- strategies ---------------------------------------------------------------


def strategy_from_dict(data: Mapping):
    from .causal import Strategy

    label = data.get("label")
    if not isinstance(label, str) or not label:
        raise InvalidStrategy("strategy needs a nonempty 'label'")
    stages = data.get("stages")
    if not isinstance(stages, list):
        raise InvalidStrategy("strategy needs a 'stages' list")
    kernels = []
    actions = []
    for i, st in enumerate(stages):
        try:
            action = st["action"]
            rows = st["kernel"]
        except (TypeError, KeyError):
            raise InvalidStrategy(f"stage {i}: needs 'action' and 'kernel'") from None
        table: dict = {}
        for row in rows:
            try:
                given, dist = row["given"], row["dist"]
            except (TypeError, KeyError):
                raise InvalidStrategy(f"stage {i}: kernel rows need 'given' and 'dist'") from None
            key = tuple(sorted((str(n), str(v)) for n, v in given.items()))
            if key in table:
                raise InvalidStrategy(f"stage {i}: duplicate kernel row for {dict(given)!r}")
            table[key] = {str(v): parse_fraction(p) for v, p in dist.items()}
        actions.append(str(action))
        kernels.append(table)
    return Strategy(label, tuple(actions), tuple(kernels))


def load_strategy(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise InvalidStrategy(f"{path}: {e}") from None
    return strategy_from_dict(data)


def strategy_to_dict(strategy) -> dict:
    return {
        "label": strategy.label,
        "stages": [
            {
                "action": action,
                "kernel": [
                    {"given": dict(key), "dist": {v: format_fraction(p) for v, p in dist.items()}}
                    for key, dist in sorted(table.items())
                ],
            }
            for action, table in zip(strategy.actions, strategy.kernels)
        ],
    }
