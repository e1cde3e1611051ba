"""Obstacle-density sweep comparing equilibrium play against deviations."""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baselines import DeceptivePathQuery, default_horizon, solve_deceptive
from .defender import DEFENDERS, defender_from_name
from .equilibrium import MixedAttackerStrategy, solve
from .errors import DPPError, InputError
from .evaluate import outcome
from .graphcore import GridSpec, gen_grid
from .scenario import Scenario, canonicalize, check

logger = logging.getLogger(__name__)

ATTACKERS = ("equilibrium", "exaggeration", "ambiguity")


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int = 20
    cols: int = 20
    densities: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4)
    samples: int = 200
    base_seed: int = 0
    prior: tuple[float, float] = (0.6, 0.4)
    start: tuple[int, int] | None = None
    goal1: tuple[int, int] | None = None
    goal2: tuple[int, int] | None = None
    defenders: tuple[str, ...] = ("sigma_star", "greedy_dragan")
    attackers: tuple[str, ...] = ATTACKERS
    horizon_multiplier: float = 3
    max_attempts: int = 1000

    def __post_init__(self):
        if self.samples < 1:
            raise InputError("samples must be at least 1")
        for d in self.densities:
            if not 0 <= d <= 0.5:
                raise InputError(f"density {d} outside [0, 0.5]")
        for name in self.defenders:
            if name not in DEFENDERS:
                raise InputError(f"unknown defender {name!r}")
        for name in self.attackers:
            if name not in ATTACKERS:
                raise InputError(f"unknown attacker {name!r}")
        # default layout: start mid-left edge, goals at the two right corners
        if self.start is None:
            object.__setattr__(self, "start", (self.rows // 2, 0))
        if self.goal1 is None:
            object.__setattr__(self, "goal1", (0, self.cols - 1))
        if self.goal2 is None:
            object.__setattr__(self, "goal2", (self.rows - 1, self.cols - 1))

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        for key in ("densities", "prior", "start", "goal1", "goal2", "defenders", "attackers"):
            if kw.get(key) is not None:
                kw[key] = tuple(kw[key])
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResultRow:
    density: float
    sample: int
    map_seed: int
    defender: str
    attacker: str
    u1: float
    u2: float
    u: float
    voi: float


CSV_FIELDS = [f.name for f in fields(ResultRow)]


def sample_seed(base_seed: int, density_index: int, sample_index: int) -> int:
    ss = np.random.SeedSequence([base_seed, density_index, sample_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def build_scenario(config: ExperimentConfig, density: float, seed: int) -> Scenario:
    spec = GridSpec(config.rows, config.cols, density, config.start, config.goal1, config.goal2, seed)
    graph = gen_grid(spec, max_attempts=config.max_attempts)
    goals = [graph.index_of(tuple(config.goal1)), graph.index_of(tuple(config.goal2))]
    return check(canonicalize(graph, goals, graph.index_of(tuple(config.start)), config.prior))


def attacker_strategies(scenario: Scenario, names: Sequence[str], horizon_multiplier) -> dict:
    out = {}
    for name in names:
        if name == "equilibrium":
            out[name] = solve(scenario).strategy
        else:
            h = default_horizon(scenario, horizon_multiplier)
            paths = [solve_deceptive(scenario, DeceptivePathQuery(th, h, name)) for th in (1, 2)]
            out[name] = MixedAttackerStrategy.pure(*paths)
    return out


def run_sample(config: ExperimentConfig, density_index: int, sample_index: int):
    """Evaluate every configured strategy pair on one generated map.

    Returns ``(rows, seconds, error)``; ``error`` is a message when the sample failed.
    """
    density = config.densities[density_index]
    seed = sample_seed(config.base_seed, density_index, sample_index)
    t0 = time.perf_counter()
    try:
        scenario = build_scenario(config, density, seed)
        attackers = attacker_strategies(scenario, config.attackers, config.horizon_multiplier)
        rows = []
        for dname in config.defenders:
            defender = defender_from_name(dname)
            for aname in config.attackers:
                res = outcome(defender, attackers[aname], scenario)
                rows.append(
                    ResultRow(density, sample_index, seed, dname, aname,
                              float(res.u1), float(res.u2), float(res.u), float(res.voi))
                )
    except DPPError as exc:
        msg = f"density={density} sample={sample_index} seed={seed}: {type(exc).__name__}: {exc}"
        logger.warning("sample failed: %s", msg)
        return [], time.perf_counter() - t0, msg
    return rows, time.perf_counter() - t0, None


def _run_one(args):
    return run_sample(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1):
    jobs = [(config, di, si) for di in range(len(config.densities)) for si in range(config.samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=4))
    else:
        results = [_run_one(j) for j in jobs]
    rows: list[ResultRow] = []
    failures: list[str] = []
    timings: dict[float, list[float]] = {}
    for (_, di, _), (r, secs, err) in zip(jobs, results):
        rows.extend(r)
        timings.setdefault(config.densities[di], []).append(secs)
        if err:
            failures.append(err)
    order = {name: i for i, name in enumerate(config.defenders)}
    aorder = {name: i for i, name in enumerate(config.attackers)}
    rows.sort(key=lambda r: (r.density, r.sample, order[r.defender], aorder[r.attacker]))
    return rows, summarize(config, rows, failures, timings)


def _stats(values: Iterable[float]) -> dict:
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        return {"n": 0}
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {
        "n": int(x.size), "mean": float(x.mean()), "median": float(med),
        "min": float(x.min()), "max": float(x.max()),
        "q1": float(q1), "q3": float(q3), "iqr": float(q3 - q1),
    }


def summarize(config: ExperimentConfig, rows: Sequence[ResultRow], failures: Sequence[str], timings=None) -> dict:
    per_density = []
    for d in config.densities:
        entry: dict = {"density": d, "pairs": {}}
        for dname in config.defenders:
            for aname in config.attackers:
                vals = [r.voi for r in rows if r.density == d and r.defender == dname and r.attacker == aname]
                entry["pairs"][f"{dname}/{aname}"] = _stats(vals)
        if timings and d in timings:
            entry["mean_sample_seconds"] = float(np.mean(timings[d]))
        per_density.append(entry)
    total = len(config.densities) * config.samples
    return {
        "config": config.to_dict(),
        "samples_total": total,
        "failures": len(failures),
        "failure_rate": len(failures) / total,
        "failure_messages": list(failures),
        "per_density": per_density,
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([_fmt(getattr(r, f)) for f in CSV_FIELDS])
    return buf.getvalue()
