"""Monte-Carlo survey of real-solution counts over random four-bus susceptances.

Instance ``i`` draws its six susceptances from ``PCG64(SeedSequence([seed, i]))``
with numpy's standard normal transform, so every instance is reproducible on
its own and results do not depend on how instances are spread over workers.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .classify import split_real, split_trivial
from .eliminant import count_real_via_eliminant
from .errors import NonGenericCoordinateError, StructuralError
from .pf_model import FOUR_BUS_LINES, build_system, four_bus
from .tracker import HomotopyConfig, solve_all

log = logging.getLogger(__name__)

WORKERS_ENV = "PFREAL_WORKERS"
CSV_COLUMNS = ("instance", "seed_offset", "b12", "b13", "b14", "b23", "b24", "b34", "n_complex", "n_real", "n_trivial", "status")
CROSS_CHECK_EVERY = 100  # eliminant cross-check on 1% of instances
N_WITNESSES = 5


def gaussian_sampler(seed: int, i: int, mean: float, sigma: float) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))
    return mean + sigma * rng.standard_normal(len(FOUR_BUS_LINES))


@dataclass
class SurveyConfig:
    n_instances: int
    sigma: float = 8.0
    mean: float = 0.0
    seed: int = 0
    injections: tuple = (0.0, 0.0, 0.0)
    out: str | Path | None = None
    workers: int | None = None
    tracker: HomotopyConfig = field(default_factory=HomotopyConfig)
    sampler: Callable[[int, int, float, float], np.ndarray] | None = None

    def __post_init__(self):
        if self.n_instances < 1:
            raise ValueError("n_instances must be at least 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if len(self.injections) != 3:
            raise ValueError("injections must give P for buses 2, 3 and 4")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get(WORKERS_ENV)
        return max(1, int(env)) if env else 1

    def draw(self, i: int) -> np.ndarray:
        fn = self.sampler or gaussian_sampler
        return np.asarray(fn(self.seed, i, self.mean, self.sigma), dtype=float)


@dataclass(frozen=True)
class InstanceResult:
    instance: int
    b: tuple
    n_complex: int
    n_real: int
    n_trivial: int
    status: str
    cross_checked: bool = False

    def row(self) -> list:
        """CSV row: 1-based instance number, then the seed-sequence key."""
        return [self.instance + 1, self.instance, *(repr(float(v)) for v in self.b), self.n_complex, self.n_real, self.n_trivial, self.status]


@dataclass
class SurveyResult:
    histogram: dict[int, int]
    max_real: int
    witnesses: dict[int, list[tuple]]
    failures: int
    cross_checked: int
    instances: list[InstanceResult] = field(repr=False)

    def fraction(self, n_real: int) -> float:
        return self.histogram.get(n_real, 0) / len(self.instances)

    def summary(self) -> dict:
        return {
            "n_instances": len(self.instances),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "max_real": self.max_real,
            "failures": self.failures,
            "cross_checked": self.cross_checked,
            "witnesses": {str(k): [list(w) for w in v] for k, v in sorted(self.witnesses.items())},
        }


def solve_instance(cfg: SurveyConfig, i: int) -> InstanceResult:
    b = cfg.draw(i)
    ps = four_bus(b=tuple(b), p=tuple(cfg.injections))
    bt = tuple(float(v) for v in b)
    try:
        ss = solve_all(build_system(ps), cfg.tracker)
    except (StructuralError, FloatingPointError) as err:
        log.warning("instance %d: %s", i, err)
        return InstanceResult(i, bt, 0, 0, 0, "failed")
    if ss.failed_count:
        return InstanceResult(i, bt, len(ss.solutions), 0, 0, "failed")
    real, _ = split_real(ss.solutions)
    trivial, _ = split_trivial(ss.solutions)
    checked = False
    if i % CROSS_CHECK_EVERY == 0 and not any(cfg.injections):
        try:
            count_real_via_eliminant(ss)
            checked = True
        except NonGenericCoordinateError:
            log.info("instance %d: no separating coordinate for the eliminant", i)
        except StructuralError as err:
            log.warning("instance %d: %s", i, err)
            return InstanceResult(i, bt, len(ss.solutions), len(real), len(trivial), "mismatch", False)
    return InstanceResult(i, bt, len(ss.solutions), len(real), len(trivial), "ok", checked)


def _job(args):
    cfg, i = args
    return solve_instance(cfg, i)


def aggregate(results: list[InstanceResult]) -> SurveyResult:
    results = sorted(results, key=lambda r: r.instance)
    ok = [r for r in results if r.status == "ok"]
    hist = Counter(r.n_real for r in ok)
    witnesses: dict[int, list[tuple]] = {}
    for r in ok:
        w = witnesses.setdefault(r.n_real, [])
        if len(w) < N_WITNESSES:
            w.append(r.b)
    return SurveyResult(
        histogram=dict(sorted(hist.items())),
        max_real=max(hist) if hist else 0,
        witnesses=witnesses,
        failures=len(results) - len(ok),
        cross_checked=sum(r.cross_checked for r in results),
        instances=results,
    )


def run_survey(cfg: SurveyConfig) -> SurveyResult:
    jobs = [(cfg, i) for i in range(cfg.n_instances)]
    workers = cfg.resolved_workers()
    if workers > 1 and cfg.n_instances > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(workers) as pool:
            results = pool.map(_job, jobs, chunksize=max(1, cfg.n_instances // (8 * workers)))
    else:
        results = [_job(j) for j in jobs]
    res = aggregate(results)
    if cfg.out is not None:
        write_csv(res, cfg.out)
        Path(cfg.out).with_suffix(".json").write_text(json.dumps(res.summary(), indent=2) + "\n")
    return res


def survey_csv(res: SurveyResult) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in res.instances:
        w.writerow(r.row())
    return buf.getvalue()


def write_csv(res: SurveyResult, path) -> None:
    Path(path).write_text(survey_csv(res))
