import asyncio
import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config import InstanceConfig
from crossed_module import crossed_module_verify
from errors import ConfigError, NotInvertible, SforgeError
from gauss import gauss_decompose, presentation_relation_check
from homotopes import Tally, tower_relation_suite
from idempotents import check_idempotent_family
from quotients import express_as_commutators, f_alpha, g_alpha, merge_partition
from roots import Root, commutator_roots
from steinberg import (
    RELATIONS,
    SteinbergWord,
    check_commutator_identities,
    check_relation_instance,
    commutator,
    random_relation_instance,
    random_word,
    reduce,
    st_eval,
)

ARTIFACT_VERSION = "0.1.0"
EXHAUSTIVE_COMPONENT_LIMIT = 256
EXHAUSTIVE_ALGEBRA_LIMIT = 2 ** 16

SuiteResult = Dict[str, Any]


def _finish(tallies: Dict[str, Tally], **extra) -> SuiteResult:
    result = {name: t.to_json() for name, t in tallies.items()}
    result.update(extra)
    result["violations"] = sum(t.failed for t in tallies.values())
    result["status"] = "fail" if result["violations"] else "pass"
    return result


def family_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    check = check_idempotent_family(config.build_family())
    return {"violations": len(check["violations"]), "details": check["violations"], "status": "pass" if check["ok"] else "fail"}


def _exhaustive_instances(family, relation) -> Optional[List[Tuple[Tuple[int, ...], Tuple]]]:
    indices = {"St1": (1, 2), "St2": (1, 2, 1, 3), "St3": (1, 2, 3)}[relation]
    pairs = {"St1": ((1, 2), (1, 2)), "St2": ((1, 2), (1, 3)), "St3": ((1, 2), (2, 3))}[relation]
    if max(indices) > family.n:
        return None
    if any(family.component_size(*p) > EXHAUSTIVE_COMPONENT_LIMIT for p in pairs):
        return None
    left, right = (list(family.component_elements(*p)) for p in pairs)
    return [(indices, (a, b)) for a in left for b in right]


def plain_relation_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    """(St1)-(St3) under st and normal forms, plus commutator inclusion and commutator identities"""
    context = config.context("plain")
    family = context.family
    relations = RELATIONS if family.n >= 3 else RELATIONS[:2]
    tallies = {name: Tally() for name in relations}
    oracles: Dict[str, int] = {}
    for relation in relations:
        instances = [random_relation_instance(family, relation, rng) for _ in range(config.samples)]
        if config.exhaustive:
            instances += _exhaustive_instances(family, relation) or []
        for indices, payloads in instances:
            verdict = check_relation_instance(context, relation, indices, payloads, config.mutation)
            for oracle in verdict.oracles:
                oracles[oracle] = oracles.get(oracle, 0) + 1
            tallies[relation].record(
                verdict.ok, lambda: {"indices": list(indices), "payloads": [p.to_json() for p in payloads]}
            )

    inclusion = tallies["commutator_roots"] = Tally()
    n = family.n
    for _ in range(config.samples):
        i, j = (int(v) for v in rng.choice(np.arange(1, n + 1), size=2, replace=False))
        k, l = (int(v) for v in rng.choice(np.arange(1, n + 1), size=2, replace=False))
        alpha, beta = Root(i, j), Root(k, l)
        if beta == -alpha:
            continue
        a, b = family.random_component(i, j, rng), family.random_component(k, l, rng)
        word = commutator(SteinbergWord.letter(context, i, j, a), SteinbergWord.letter(context, k, l, b))
        allowed = {(r.i, r.j) for r in commutator_roots(alpha, beta, n)}
        rest = st_eval(word) - context.algebra.one()
        stray = [(p, q) for p in family.indices() for q in family.indices()
                 if (p, q) not in allowed and not family.peirce_project(rest, p, q).is_zero()]
        inclusion.record(not stray, lambda: {"alpha": alpha.to_json(), "beta": beta.to_json(), "stray": stray})

    identities = tallies["commutator_identities"] = Tally()
    for _ in range(config.samples):
        x, y, z = (random_word(context, rng, int(rng.integers(1, 3))) for _ in range(3))
        checks = check_commutator_identities(x, y, z)
        for name, grades in checks.items():
            identities.record(all(grades.values()), lambda: {"identity": name, "grades": grades})
    return _finish(tallies, oracles=dict(sorted(oracles.items())))


def homotope_relation_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    """(St1)-(St3^(t)) in the homotope contexts t = s^k, k = 0..k_max"""
    family = config.build_family()
    relations = RELATIONS if family.n >= 3 else RELATIONS[:2]
    tallies = {}
    for level in range(config.k_max + 1):
        context = config.context("homotope", level)
        for relation in relations:
            tally = tallies[f"{relation}@{level}"] = Tally()
            for _ in range(config.samples):
                indices, payloads = random_relation_instance(family, relation, rng)
                verdict = check_relation_instance(context, relation, indices, payloads, config.mutation)
                tally.record(verdict.ok, lambda: {"indices": list(indices), "payloads": [p.to_json() for p in payloads]})
    return _finish(tallies, scale=config.scale)


def quotient_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    """G_alpha after F_alpha is the identity on merged words; F_alpha after G_alpha keeps st"""
    context = config.context("plain")
    n = context.n
    if n < 3:
        return {"status": "inconclusive", "violations": 0, "reason": f"quotients need n >= 3, got {n}"}
    alpha = Root(1, 2)
    merged = context.family.merge(merge_partition(n, alpha))
    merged_context = context.with_family(merged)
    tallies = {"g_after_f": Tally(), "f_after_g": Tally()}
    for _ in range(config.samples):
        w = random_word(merged_context, rng, int(rng.integers(1, 5)))
        back = g_alpha(f_alpha(w), alpha, epi_only=n < 4, merged=merged)
        tallies["g_after_f"].record(reduce(back) == reduce(w), lambda: w.to_json())
        phi = random_word(context, rng, int(rng.integers(1, 5)))
        there = f_alpha(g_alpha(phi, alpha, epi_only=n < 4, merged=merged))
        tallies["f_after_g"].record(st_eval(there) == st_eval(phi), lambda: phi.to_json())
    return _finish(tallies, alpha=alpha.to_json(), epi_only=n < 4)


def perfectness_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    """Every x_ik(c) is a product of commutators with st-image 1 + c"""
    context = config.context("plain")
    family = context.family
    if family.n < 3:
        return {"status": "inconclusive", "violations": 0, "reason": f"needs n >= 3, got {family.n}"}
    tally = Tally()
    one = context.algebra.one()
    for i, k in itertools.permutations(family.indices(), 2):
        if config.exhaustive and family.component_size(i, k) <= EXHAUSTIVE_COMPONENT_LIMIT:
            payloads = family.component_elements(i, k)
        else:
            payloads = (family.random_component(i, k, rng) for _ in range(max(1, config.samples // 10)))
        for c in payloads:
            word = express_as_commutators(context, i, k, c)
            tally.record(st_eval(word) == one + c, lambda: {"i": i, "k": k, "c": c.to_json()})
    return _finish({"express_as_commutators": tally})


def decompose_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    """Gauss decomposition of the given element, of all of GL, or of random invertible elements"""
    context = config.context("plain")
    algebra = context.algebra
    result: SuiteResult = {}
    if config.element is not None:
        elements = [algebra.from_rows(config.element)]
    elif config.exhaustive:
        if algebra.order > EXHAUSTIVE_ALGEBRA_LIMIT:
            raise ConfigError(f"{algebra!r} has {algebra.order} elements, too many to enumerate")
        elements = algebra.general_linear()
        result["gl_order"] = len(elements)
    else:
        elements = [algebra.random_invertible(rng) for _ in range(config.samples)]

    factorizations = []
    errors = []
    failed = 0
    for g in elements:
        try:
            factorization = gauss_decompose(context, g)
        except NotInvertible as e:
            logging.error(f"Gauss decomposition refused {g.to_json()}: {e}")
            errors.append({"element": g.to_json(), "error": f"NotInvertible: {e}"})
            continue
        except SforgeError as e:
            logging.error(f"Gauss decomposition of {g.to_json()} failed: {e}")
            errors.append({"element": g.to_json(), "error": f"{type(e).__name__}: {e}"})
            continue
        if not factorization.verify(g):
            failed += 1
        if config.element is not None or config.exhaustive:
            factorizations.append({"element": g.to_json(), "factorization": factorization.to_json()})
    result.update(
        {
            "decomposed": len(elements) - len(errors),
            "failed": failed,
            "errors": errors,
            "factorizations": factorizations,
            "violations": failed + len(errors),
        }
    )
    result["status"] = "fail" if result["violations"] else "pass"
    return result


def presentation_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    context = config.context("plain")
    if context.n < 2:
        return {"status": "inconclusive", "violations": 0, "reason": "needs two idempotents"}
    result = presentation_relation_check(context, 1, None if config.exhaustive else rng, config.samples)
    result["violations"] = result["needs_more"]
    return result


def crossed_module_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    result = crossed_module_verify(config.context("plain"), config.samples, rng, config.fault, config.cross_path)
    result["violations"] = sum(v.get("failed", 0) for v in result.values() if isinstance(v, dict)) + len(
        result["errors"]
    )
    return result


def tower_suite(config: InstanceConfig, rng: np.random.Generator) -> SuiteResult:
    family = config.build_family()
    result = tower_relation_suite(family, config.scale, config.k_max, config.samples, rng, config.mutation)
    violations = sum(
        check.get("failed", 0) for level in result["levels"].values() for check in level.values()
    )
    result["violations"] = violations + result["lr_equivalence"].get("failed", 0)
    return result


COMMANDS: Dict[str, Tuple[Tuple[str, Callable[[InstanceConfig, np.random.Generator], SuiteResult]], ...]] = {
    "relations": (
        ("family", family_suite),
        ("plain", plain_relation_suite),
        ("homotope", homotope_relation_suite),
        ("quotient", quotient_suite),
        ("perfectness", perfectness_suite),
    ),
    "gauss": (("decompose", decompose_suite), ("presentation", presentation_suite)),
    "crossed-module": (("crossed_module", crossed_module_suite),),
    "tower": (("tower", tower_suite),),
}


@dataclass
class RunReport:
    command: str
    config: InstanceConfig
    suites: Dict[str, SuiteResult] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def violations(self) -> int:
        return sum(int(s.get("violations", 0)) for s in self.suites.values())

    @property
    def verdict(self) -> str:
        statuses = {s.get("status") for s in self.suites.values()}
        if "fail" in statuses or self.violations:
            return "fail"
        if statuses & {"warn", "inconclusive"}:
            return "warn"
        return "pass"

    def to_dict(self) -> Dict[str, Any]:
        # no timings: identical config and seed give identical bytes
        return {
            "artifact_version": ARTIFACT_VERSION,
            "command": self.command,
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "suites": self.suites,
            "verdict": self.verdict,
            "violations": self.violations,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def write(self, out_root: str) -> str:
        """Write report.json under a fresh <timestamp>-<hash> directory and return that directory"""
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        name = f"{stamp}-{self.config.config_hash()[:12]}"
        run_dir = os.path.join(out_root, name)
        suffix = 0
        while os.path.exists(run_dir):
            suffix += 1
            run_dir = os.path.join(out_root, f"{name}-{suffix}")
        os.makedirs(run_dir)
        with open(os.path.join(run_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
        logging.info(f"Report written to {run_dir}")
        return run_dir


class VerificationService:
    """Runs the suites of one command, each on its own seeded stream"""

    def __init__(self, config: InstanceConfig):
        self.config = config

    def _run_suite(self, index: int, name: str, suite) -> SuiteResult:
        rng = np.random.default_rng([self.config.seed, index])
        start = time.perf_counter()
        try:
            result = suite(self.config, rng)
        except ConfigError:
            raise
        except SforgeError as e:
            logging.error(f"Suite {name} aborted: {type(e).__name__}: {e}")
            result = {"status": "fail", "violations": 1, "error": f"{type(e).__name__}: {e}"}
        logging.info(f"Suite {name}: {result.get('status')} in {time.perf_counter() - start:.2f}s")
        return result

    async def run_async(self, command: str) -> List[SuiteResult]:
        suites = COMMANDS[command]
        tasks = [asyncio.to_thread(self._run_suite, idx, name, suite) for idx, (name, suite) in enumerate(suites)]
        return await asyncio.gather(*tasks)

    def run(self, command: str) -> RunReport:
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        start = time.perf_counter()
        logging.info(f"Running {command} with seed {self.config.seed} and {self.config.samples} samples")
        results = asyncio.run(self.run_async(command))
        report = RunReport(command, self.config)
        for (name, _), result in zip(COMMANDS[command], results):
            report.suites[name] = result
        report.elapsed = time.perf_counter() - start
        if report.violations:
            logging.warning(f"{command}: {report.violations} violations")
        return report
