"""Monte Carlo experiment driver: ETTR/MTTR estimation, sweeps, CSV output
and analytic cross-checks."""

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np

from rendezvous import analytic
from rendezvous.engine import make_users, run_async, run_sync
from rendezvous.errors import InvalidInput
from rendezvous.permutations import find_generator, next_prime_pad, random_permutation
from rendezvous.scenarios import (
    CognitiveRadioSpec,
    TwoUserSpec,
    gen_cognitive_radio,
    gen_three_user,
    gen_two_user,
)
from rendezvous.schedules import (
    Lsh2Schedule,
    ModuloSchedule,
    OneCyclePowerSchedule,
    RandomPermSchedule,
)
from rendezvous.strategies import StrategyKind

ALGORITHMS = ("random", "pi-random", "modulo", "lsh2", "rotation")
CONSISTENT = ("pi-random", "modulo", "lsh2", "rotation")
ONE_CYCLE = ("modulo", "rotation")
SCENARIOS = ("two", "three", "cr")
AXES = ("n12", "n_core", "n_exclusive", "core_size", "J")
CSV_HEADER = ("algorithm", "strategy", "setting", "N", "K", "axis", "axis_value", "J",
              "trials", "ettr", "ettr_stderr", "mttr", "timeouts", "analytic_ettr",
              "mttr_bound")
TOL_TWO_USER = 0.03
TOL_THREE_USER = 0.02
UNRELIABLE_TIMEOUT_RATE = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one Monte Carlo estimate.

    ``scenario`` selects the generator: ``two`` uses (N, n1, n2, n12),
    ``three`` the symmetric profile (n, n_core, n_exclusive), ``cr`` the
    cognitive-radio field.  ``P``/``g`` default to the smallest prime above
    N and its largest primitive root.
    """

    algorithm: str = "modulo"
    strategy: str = "generic"
    setting: str = "sync"
    scenario: str = "two"
    N: int = 256
    n: int = 60
    n1: Optional[int] = None
    n2: Optional[int] = None
    n12: int = 30
    n_core: int = 1
    n_exclusive: int = 1
    K: int = 100
    num_pus: int = 50
    area_side: float = 1000.0
    interference_range: float = 500.0
    core_size: int = 10
    trials: int = 10_000
    max_slots: int = 20_000
    T0: int = 20
    p0: float = 0.75
    fallback: str = "random"
    master_seed: int = 0
    P: Optional[int] = None
    g: Optional[int] = None
    offset_range: Optional[int] = None
    batch: int = 100
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidInput(f"unknown algorithm {self.algorithm!r}")
        StrategyKind(self.strategy)
        if self.setting not in ("sync", "async"):
            raise InvalidInput(f"unknown setting {self.setting!r}")
        if self.scenario not in SCENARIOS:
            raise InvalidInput(f"unknown scenario {self.scenario!r}")
        if self.trials < 1 or self.max_slots < 1 or self.batch < 1 or self.workers < 1:
            raise InvalidInput("trials, max_slots, batch and workers must be positive")
        if self.strategy == "spreadout3" and self.num_users != 3:
            raise InvalidInput("spreadout3 needs exactly three users")
        if self.setting == "async":
            if self.T0 < 1:
                raise InvalidInput("T0 must be >= 1")
            if not 0.0 <= self.p0 <= 1.0:
                raise InvalidInput("p0 must lie in [0, 1]")
        if self.algorithm == "modulo" and self.P is not None and self.P - 1 < self.N:
            raise InvalidInput(f"prime {self.P} is too small for N={self.N}")
        self.scenario_spec()

    @property
    def num_users(self) -> int:
        return {"two": 2, "three": 3}.get(self.scenario, self.K)

    @property
    def sizes(self):
        return (self.n1 if self.n1 is not None else self.n,
                self.n2 if self.n2 is not None else self.n)

    def scenario_spec(self):
        if self.scenario == "two":
            n1, n2 = self.sizes
            return TwoUserSpec(self.N, n1, n2, self.n12)
        if self.scenario == "three":
            return analytic.ThreeUserProfile.symmetric(self.n, self.n_core, self.n_exclusive, self.N)
        return CognitiveRadioSpec(self.N, self.K, self.num_pus, self.area_side,
                                  self.interference_range, self.core_size)

    def modulo_params(self):
        P = self.P if self.P is not None else next_prime_pad(self.N)[0]
        g = self.g if self.g is not None else find_generator(P)
        return P, g

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class Estimate:
    ettr: float
    ettr_stderr: float
    mttr: float
    timeouts: int
    trials: int

    @property
    def unreliable(self) -> bool:
        return self.timeouts > UNRELIABLE_TIMEOUT_RATE * self.trials


@lru_cache(maxsize=16)
def _modulo(P, g):
    return ModuloSchedule(P, g)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial]))


def draw_sets(cfg: ExperimentConfig, rng: np.random.Generator):
    spec = cfg.scenario_spec()
    if cfg.scenario == "two":
        return list(gen_two_user(spec, rng))
    if cfg.scenario == "three":
        return list(gen_three_user(spec, rng))
    return gen_cognitive_radio(spec, rng)


def _schedule(cfg: ExperimentConfig, rng: np.random.Generator):
    if cfg.algorithm == "random":
        return None
    if cfg.algorithm == "pi-random":
        return RandomPermSchedule(cfg.N, int(rng.integers(2**63)))
    if cfg.algorithm == "modulo":
        return _modulo(*cfg.modulo_params())
    if cfg.algorithm == "lsh2":
        return Lsh2Schedule(random_permutation(cfg.N, rng), random_permutation(cfg.N, rng))
    return OneCyclePowerSchedule.rotation(cfg.N)


def run_trial(cfg: ExperimentConfig, trial: int) -> Optional[int]:
    """TTR of one independent scenario draw and run (None on timeout)."""
    rng = trial_rng(cfg.master_seed, trial)
    sets = draw_sets(cfg, rng)
    sched = _schedule(cfg, rng)
    K = len(sets)
    seeds = rng.integers(0, 2**63, size=K)
    if cfg.setting == "sync":
        users = make_users(sets, seeds)
        res = run_sync(users, sched, cfg.strategy, cfg.max_slots, record_events=False)
    else:
        span = cfg.offset_range if cfg.offset_range is not None else cfg.N
        offsets = rng.integers(0, span, size=K)
        users = make_users(sets, seeds, offsets)
        res = run_async(users, sched, cfg.strategy, cfg.T0, cfg.p0, cfg.max_slots,
                        fallback=cfg.fallback, record_events=False)
    return res.ttr


def _run_range(args):
    cfg, lo, hi = args
    return [run_trial(cfg, i) for i in range(lo, hi)]


def run_trials(cfg: ExperimentConfig) -> np.ndarray:
    """TTRs of trials ``0 .. trials-1``; timeouts are encoded as -1."""
    if cfg.workers == 1:
        out = _run_range((cfg, 0, cfg.trials))
    else:
        step = max(1, math.ceil(cfg.trials / (cfg.workers * 8)))
        chunks = [(cfg, lo, min(lo + step, cfg.trials)) for lo in range(0, cfg.trials, step)]
        with ProcessPoolExecutor(cfg.workers) as ex:
            out = [t for part in ex.map(_run_range, chunks) for t in part]
    return np.array([-1 if t is None else t for t in out], dtype=np.int64)


def summarize(ttrs: np.ndarray, batch: int = 100) -> Estimate:
    done = ttrs[ttrs >= 0]
    timeouts = int((ttrs < 0).sum())
    if done.size == 0:
        return Estimate(math.nan, math.nan, math.nan, timeouts, int(ttrs.size))
    stderr = float(done.std(ddof=1) / math.sqrt(done.size)) if done.size > 1 else math.nan
    maxima = [b[b >= 0].max() for b in np.array_split(ttrs, max(1, ttrs.size // batch))
              if (b >= 0).any()]
    return Estimate(float(done.mean()), stderr, float(np.mean(maxima)), timeouts, int(ttrs.size))


def estimate_ettr(cfg: ExperimentConfig) -> Estimate:
    return summarize(run_trials(cfg), cfg.batch)


def estimate_mttr(cfg: ExperimentConfig) -> Estimate:
    if cfg.trials % cfg.batch:
        raise InvalidInput(f"trials ({cfg.trials}) must be a multiple of the batch size ({cfg.batch})")
    return summarize(run_trials(cfg), cfg.batch)


def n12_for_jaccard(J: float, n1: int, n2: int) -> int:
    return int(round(J * (n1 + n2) / (1 + J)))


def apply_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis not in AXES:
        raise InvalidInput(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")
    if axis == "J":
        if cfg.scenario != "two":
            raise InvalidInput("the J axis applies to the two-user scenario")
        n1, n2 = cfg.sizes
        return cfg.replace(n12=n12_for_jaccard(float(value), n1, n2))
    return cfg.replace(**{axis: int(value)})


def scenario_jaccard(cfg: ExperimentConfig) -> Optional[Fraction]:
    if cfg.scenario == "two":
        n1, n2 = cfg.sizes
        return analytic.jaccard_counts(n1, n2, cfg.n12)
    if cfg.scenario == "three":
        return cfg.scenario_spec().jaccard
    return None


def analytic_columns(cfg: ExperimentConfig):
    """(analytic ETTR, MTTR bound, tolerance) where an oracle exists."""
    ettr = bound = tol = None
    if cfg.setting != "sync":
        return ettr, bound, tol
    J = scenario_jaccard(cfg)
    if cfg.scenario == "two" and cfg.strategy == "generic":
        n1, n2 = cfg.sizes
        if cfg.algorithm in CONSISTENT:
            ettr, tol = analytic.ettr_consistent(J), TOL_TWO_USER
        elif cfg.algorithm == "random":
            ettr, tol = analytic.ettr_random_baseline(n1, n2, cfg.n12), TOL_TWO_USER
    elif cfg.scenario == "three" and cfg.algorithm == "pi-random":
        prof = cfg.scenario_spec()
        if cfg.strategy == "generic":
            ettr, tol = analytic.ettr_consistent(J), TOL_TWO_USER
        elif cfg.strategy == "stick":
            ettr, tol = analytic.stick_ettr3(prof), TOL_THREE_USER
        elif cfg.strategy == "spreadout3":
            ettr, tol = analytic.spreadout_ettr3(prof), TOL_THREE_USER
    if cfg.algorithm in ONE_CYCLE and cfg.strategy != "spreadout3":
        if cfg.scenario == "two":
            bound = analytic.mttr_bound(cfg.N, cfg.n12)
        elif cfg.scenario == "three":
            bound = analytic.mttr_bound(cfg.N, cfg.n_core)
    return ettr, bound, tol


def make_row(cfg: ExperimentConfig, est: Optional[Estimate], axis: str = "",
             axis_value="") -> Dict:
    a_ettr, bound, tol = analytic_columns(cfg)
    J = scenario_jaccard(cfg)
    return {
        "algorithm": cfg.algorithm, "strategy": cfg.strategy, "setting": cfg.setting,
        "N": cfg.N, "K": cfg.num_users, "axis": axis, "axis_value": axis_value,
        "J": None if J is None else float(J),
        "trials": est.trials if est else 0,
        "ettr": est.ettr if est else None,
        "ettr_stderr": est.ettr_stderr if est else None,
        "mttr": est.mttr if est else None,
        "timeouts": est.timeouts if est else None,
        "analytic_ettr": None if a_ettr is None else analytic.as_float(a_ettr),
        "mttr_bound": bound,
        "_tol": tol,
    }


def sweep(cfg: ExperimentConfig, axis: str, values: Sequence) -> List[Dict]:
    rows = []
    for v in values:
        c = apply_axis(cfg, axis, v)
        rows.append(make_row(c, estimate_ettr(c), axis, v))
    return rows


def check_rows(rows: Sequence[Dict]) -> List[str]:
    """Disagreements between Monte Carlo columns and their oracles."""
    problems = []
    for r in rows:
        where = f"{r['algorithm']}/{r['strategy']}/{r['setting']} {r['axis']}={r['axis_value']}"
        a, e, tol = r.get("analytic_ettr"), r.get("ettr"), r.get("_tol")
        if a is not None and e is not None and tol is not None and math.isfinite(a):
            rel = abs(e - a) / a
            if rel > tol:
                problems.append(f"{where}: ettr {e:.6g} vs analytic {a:.6g} "
                                f"({rel:.2%} > {tol:.0%})")
        b, m = r.get("mttr_bound"), r.get("mttr")
        if b is not None and m is not None and m > b:
            problems.append(f"{where}: mttr {m:.6g} exceeds bound {b}")
        t = r.get("timeouts")
        if t and t > UNRELIABLE_TIMEOUT_RATE * r["trials"]:
            problems.append(f"{where}: {t} timeouts out of {r['trials']} trials")
    return problems


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf"
        return f"{v:.6g}"
    return str(v)


def write_csv(rows: Sequence[Dict], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([format_value(r.get(k)) for k in CSV_HEADER])


def emit_csv(rows: Sequence[Dict], path) -> None:
    with open(path, "w", newline="") as fh:
        write_csv(rows, fh)
