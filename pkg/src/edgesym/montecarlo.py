"""Replicated rejection-frequency experiments over scenario x test grids.

Replication ``r`` of scenario ``s`` draws its sample from a Philox stream
keyed by ``(master_seed, s, r)``, and every test in the grid sees that same
sample.  Work is split into fixed blocks of replications, so the merged
report does not depend on the number of workers or on scheduling order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alternatives import SkewNormal, SkewT, parse_alternative
from .densities import parse_family
from .edgeworth import EdgeworthModel
from .errors import GrammarError, SymmetryError
from .statistics import TEST_IDS, run_test

__all__ = [
    "Scenario",
    "TestConfig",
    "SimulationSpec",
    "Cell",
    "SimulationReport",
    "parse_model",
    "stream",
    "run",
    "table1_spec",
    "table2_spec",
    "load_spec",
    "spec_from_dict",
    "DEFAULT_SEED",
    "CSV_HEADER",
]

DEFAULT_SEED = 20240601
BLOCK_SIZE = 100
SKIP_FLAG_FRACTION = 0.01
CSV_HEADER = ("scenario", "test", "n", "N", "rejections", "frequency", "stderr")

_EDGEWORTH = re.compile(r"^(?P<family>[a-z]+(?::[^-]+)?)-edgeworth(?::(?P<args>.*))?$")


def parse_model(text):
    """Parse a data-generating model string.

    ``<family>-edgeworth:xi=<x>[,theta=<t>][,sigma=<s>]`` for the skewed
    reference families (for example ``gaussian-edgeworth:xi=0.1`` or
    ``student:5-edgeworth:xi=0.05``), ``skewnormal:<lam>`` and
    ``skewt:<nu>:<lam>``.
    """
    raw = text
    text = text.strip().lower().replace(" ", "")
    if text.startswith(("skewnormal", "skewt")):
        return parse_alternative(text)
    m = _EDGEWORTH.match(text)
    if not m:
        raise GrammarError(raw, text.split(":")[0] or raw)
    try:
        f1 = parse_family(m.group("family"))
    except GrammarError as exc:
        raise GrammarError(raw, exc.token) from None
    params = {"xi": 0.0, "theta": 0.0, "sigma": 1.0}
    args = m.group("args")
    if args:
        for item in args.split(","):
            key, sep, value = item.partition("=")
            if not sep or key not in params:
                raise GrammarError(raw, item)
            try:
                params[key] = float(value)
            except ValueError:
                raise GrammarError(raw, value) from None
    try:
        return EdgeworthModel(f1, **params)
    except ValueError as exc:
        raise GrammarError(raw, str(exc)) from None


def model_string(model):
    if isinstance(model, EdgeworthModel):
        out = f"{model.f1}-edgeworth:xi={model.xi!r}"
        if model.theta != 0.0:
            out += f",theta={model.theta!r}"
        if model.sigma != 1.0:
            out += f",sigma={model.sigma!r}"
        return out
    if isinstance(model, SkewNormal):
        return f"skewnormal:{model.lam!r}"
    if isinstance(model, SkewT):
        return f"skewt:{model.nu!r}:{model.lam!r}"
    raise TypeError(f"unknown model {model!r}")


@dataclass(frozen=True)
class Scenario:
    label: str
    model: object

    @classmethod
    def parse(cls, text, label=None):
        return cls(label or text, parse_model(text))


@dataclass(frozen=True)
class TestConfig:
    """One column of the grid: which statistic, which center, which side."""

    __test__ = False

    label: str
    test_id: str
    sided: str = "two"
    location: str = "estimated"  # "specified", "median", "mean" or "estimated"
    f1: str | None = None

    def __post_init__(self):
        if self.test_id not in TEST_IDS:
            raise ValueError(f"unknown test id {self.test_id!r}")
        if self.sided not in ("one", "two"):
            raise ValueError(f"sided must be 'one' or 'two', got {self.sided!r}")
        if self.location not in ("specified", "median", "mean", "estimated"):
            raise ValueError(f"unknown location choice {self.location!r}")

    def evaluate(self, x, center):
        theta = center if self.location == "specified" else None
        location = self.location if self.location in ("median", "mean") else None
        return run_test(self.test_id, x, theta=theta, f1=self.f1, location=location)


@dataclass(frozen=True)
class SimulationSpec:
    scenarios: tuple
    tests: tuple
    n: int = 100
    N: int = 2000
    alpha: float = 0.05
    master_seed: int = DEFAULT_SEED
    workers: int = 1
    skip: frozenset = frozenset()  # (scenario label, test label) pairs left out
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "skip", frozenset(tuple(p) for p in self.skip))
        if self.N < 100:
            raise ValueError(f"N must be at least 100, got {self.N}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n < 10:
            raise ValueError(f"n must be at least 10, got {self.n}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if not self.scenarios or not self.tests:
            raise ValueError("need at least one scenario and one test")
        for kind, items in (("scenario", self.scenarios), ("test", self.tests)):
            labels = [item.label for item in items]
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate {kind} labels")

    def with_(self, **changes):
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return SimulationSpec(**data)

    def to_dict(self):
        return {
            "name": self.name,
            "n": self.n,
            "N": self.N,
            "alpha": self.alpha,
            "seed": self.master_seed,
            "scenarios": [{"label": s.label, "model": model_string(s.model)}
                          for s in self.scenarios],
            "tests": [{"label": t.label, "test": t.test_id, "sided": t.sided,
                       "location": t.location, "f1": t.f1} for t in self.tests],
            "skip": sorted(list(p) for p in self.skip),
        }


def stream(master_seed, scenario_index, replication):
    """Independent generator for one replication of one scenario."""
    seq = np.random.SeedSequence([master_seed, scenario_index, replication])
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class _Tally:
    rejections: int = 0
    skipped: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    reasons: dict = field(default_factory=dict)

    def merge(self, other):
        self.rejections += other.rejections
        self.skipped += other.skipped
        self.total += other.total
        self.total_sq += other.total_sq
        for k, v in other.reasons.items():
            self.reasons[k] = self.reasons.get(k, 0) + v


def _run_block(spec, s_index, start, stop):
    scenario = spec.scenarios[s_index]
    try:
        center = scenario.model.center
    except SymmetryError:
        center = None
    tests = [t for t in spec.tests if (scenario.label, t.label) not in spec.skip]
    tallies = {t.label: _Tally() for t in tests}
    digest = hashlib.sha256()
    for rep in range(start, stop):
        x = scenario.model.rvs(spec.n, stream(spec.master_seed, s_index, rep))
        x.setflags(write=False)
        before = hashlib.sha256(x.tobytes()).digest()
        for t in tests:
            tally = tallies[t.label]
            if center is None and t.location == "specified":
                tally.skipped += 1
                tally.reasons["NoCenter"] = tally.reasons.get("NoCenter", 0) + 1
                continue
            try:
                out = t.evaluate(x, center)
            except (SymmetryError, FloatingPointError, ZeroDivisionError) as exc:
                tally.skipped += 1
                name = type(exc).__name__
                tally.reasons[name] = tally.reasons.get(name, 0) + 1
                continue
            if not math.isfinite(out.statistic):
                tally.skipped += 1
                tally.reasons["NonFinite"] = tally.reasons.get("NonFinite", 0) + 1
                continue
            p = out.p_one_sided if t.sided == "one" else out.p_two_sided
            tally.rejections += int(p < spec.alpha)
            tally.total += out.statistic
            tally.total_sq += out.statistic**2
        if hashlib.sha256(x.tobytes()).digest() != before:
            raise RuntimeError("a statistic modified the shared sample")
        digest.update(before)
    return s_index, start, tallies, digest.hexdigest()


@dataclass(frozen=True)
class Cell:
    scenario: str
    test: str
    n: int
    N: int  # effective replications (skips removed)
    rejections: int
    skipped: int
    stat_mean: float
    stat_var: float
    skip_reasons: dict

    @property
    def frequency(self):
        return self.rejections / self.N if self.N else math.nan

    @property
    def stderr(self):
        p = self.frequency
        return math.sqrt(p * (1.0 - p) / self.N) if self.N else math.nan

    @property
    def flagged(self):
        return self.skipped > SKIP_FLAG_FRACTION * (self.N + self.skipped)

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "test": self.test,
            "n": self.n,
            "N": self.N,
            "rejections": self.rejections,
            "frequency": self.frequency,
            "stderr": self.stderr,
            "skipped": self.skipped,
            "flagged": self.flagged,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
            "statistic_mean": self.stat_mean,
            "statistic_variance": self.stat_var,
        }


@dataclass
class SimulationReport:
    spec: SimulationSpec
    cells: list
    digests: dict
    wall_time: float = 0.0
    workers: int = 1

    def cell(self, scenario, test):
        for c in self.cells:
            if c.scenario == scenario and c.test == test:
                return c
        raise KeyError((scenario, test))

    def frequencies(self):
        return {(c.scenario, c.test): c.frequency for c in self.cells}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in self.cells:
            w.writerow([c.scenario, c.test, c.n, c.N, c.rejections,
                        "%.17g" % c.frequency, "%.17g" % c.stderr])
        return buf.getvalue()

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "seed": self.spec.master_seed,
            "wall_time_seconds": self.wall_time,
            "workers": self.workers,
            "sample_digests": self.digests,
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _blocks(spec):
    for s in range(len(spec.scenarios)):
        for start in range(0, spec.N, BLOCK_SIZE):
            yield s, start, min(start + BLOCK_SIZE, spec.N)


def run(spec, workers=None):
    """Run every replication of ``spec`` and return the merged report."""
    workers = spec.workers if workers is None else workers
    workers = max(1, int(workers))
    t0 = time.perf_counter()
    jobs = list(_blocks(spec))
    if workers == 1:
        results = [_run_block(spec, *job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, spec, *job) for job in jobs]
            results = [f.result() for f in futures]
    results.sort(key=lambda r: (r[0], r[1]))

    merged = {}
    digests = {}
    for s_index, _, tallies, block_digest in results:
        label = spec.scenarios[s_index].label
        h = digests.setdefault(label, hashlib.sha256())
        h.update(block_digest.encode())
        for test_label, tally in tallies.items():
            merged.setdefault((s_index, test_label), _Tally()).merge(tally)

    cells = []
    for s_index, scenario in enumerate(spec.scenarios):
        for t in spec.tests:
            if (scenario.label, t.label) in spec.skip:
                continue
            tally = merged[(s_index, t.label)]
            n_eff = spec.N - tally.skipped
            mean = tally.total / n_eff if n_eff else math.nan
            var = (tally.total_sq - n_eff * mean * mean) / (n_eff - 1) if n_eff > 1 else math.nan
            cells.append(Cell(scenario.label, t.label, spec.n, n_eff, tally.rejections,
                              tally.skipped, mean, var, tally.reasons))
    return SimulationReport(spec, cells, {k: v.hexdigest() for k, v in digests.items()},
                            time.perf_counter() - t0, workers)


def _table_tests(sided):
    return (
        TestConfig("m3(theta)", "S1", sided, "specified"),
        TestConfig("T_dagger(theta)", "T_dagger", sided, "specified"),
        TestConfig("b1", "S2_b1", sided, "estimated"),
        TestConfig("T_laplace(theta)", "T_laplace", sided, "specified"),
        TestConfig("T_laplace(median)", "T_laplace", sided, "median"),
        TestConfig("T_logistic(theta)", "T_logistic", sided, "specified"),
        TestConfig("T_logistic(mean)", "T_logistic", sided, "mean"),
    )


def table1_spec(N=2000, n=100, seed=DEFAULT_SEED, workers=1):
    """Edgeworth scenarios (Gaussian and Laplace, xi in 0, 0.1, 0.2), one-sided tests."""
    scenarios = []
    for family, tag in (("gaussian", "SN"), ("laplace", "SL")):
        for xi in (0.0, 0.1, 0.2):
            scenarios.append(Scenario(f"{tag}({xi:g})", EdgeworthModel(family, xi=xi)))
    return SimulationSpec(scenarios, _table_tests("one"), n, N, 0.05, seed, workers,
                          name="table1")


def table2_spec(N=2000, n=100, seed=DEFAULT_SEED, workers=1):
    """Skew-normal and skew-t scenarios, two-sided tests."""
    scenarios = [Scenario(f"SN({lam:g})", SkewNormal(lam)) for lam in (0.0, 1.0, 2.0, 3.0)]
    for nu in (2, 4, 8):
        for lam in (0.0, 2.0, 4.0, 6.0):
            scenarios.append(Scenario(f"St({nu},{lam:g})", SkewT(nu, lam)))
    return SimulationSpec(scenarios, _table_tests("two"), n, N, 0.05, seed, workers,
                          name="table2")


def spec_from_dict(data):
    """Build a spec from its JSON form (see :meth:`SimulationSpec.to_dict`)."""
    if not isinstance(data, dict):
        raise ValueError("spec must be a JSON object")
    scenarios = []
    for item in data.get("scenarios", []):
        if isinstance(item, str):
            scenarios.append(Scenario.parse(item))
        else:
            scenarios.append(Scenario.parse(item["model"], item.get("label")))
    tests = []
    for item in data.get("tests", []):
        if isinstance(item, str):
            item = {"test": item}
        tests.append(TestConfig(item.get("label", item["test"]), item["test"],
                                item.get("sided", "two"), item.get("location", "estimated"),
                                item.get("f1")))
    return SimulationSpec(
        scenarios, tests,
        n=int(data.get("n", 100)),
        N=int(data.get("N", 2000)),
        alpha=float(data.get("alpha", 0.05)),
        master_seed=int(data.get("seed", DEFAULT_SEED)),
        skip=frozenset(tuple(p) for p in data.get("skip", [])),
        name=data.get("name", "custom"),
    )


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
