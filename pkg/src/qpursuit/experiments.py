"""Seeded Monte Carlo harness for exact-recovery frequency experiments.

Problem instances are generated from per-cell seeds derived by a stable
mixing chain, every configured algorithm consumes the identical instance
(paired trials), and aggregation uses integer counters plus trial-ordered
digest concatenation, so reports are bit-identical across runs, process
counts, and scheduling. All trial computation pins BLAS to one thread.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .analytics import residual_decay_report
from .errors import PursuitError
from .linalg import SparseSignal, normalize_columns
from .pursuit import RecoveryResult, StoppingRule, gomp, omp, qomp, refine_support
from .sampling import add_noise, derive_seed, gaussian_matrix, sparse_signal

ALGORITHM_CHOICES = ("omp_s", "omp_2s", "gomp2_s", "gomp2_2s", "qomp_s")

SEED_RULE = (
    "cell seed = splitmix64 chain over (base_seed, n_ratio, s, trial); "
    "matrix/signal/noise streams = chain(seed, 1|2|3); Philox generator"
)


@dataclass(frozen=True)
class ProblemInstance:
    """One seeded recovery problem: matrix, ground truth, and measurement."""

    matrix: object
    truth: SparseSignal
    measurement: np.ndarray
    noise_eps: float
    seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid definition for a frequency experiment.

    sparsity_range is an inclusive (low, high) pair; None defaults to
    (2, floor(0.4 * m)). threads and collect_timing affect execution only,
    never the recovery results.
    """

    m: int
    n_ratios: tuple = (4,)
    sparsity_range: tuple | None = None
    trials: int = 100
    algorithms: tuple = ("omp_s", "qomp_s")
    noise_eps: float = 0.0
    base_seed: int = 0
    threads: int = 1
    value_distribution: str = "gaussian"
    collect_timing: bool = False

    def __post_init__(self):
        if int(self.m) < 4:
            raise ValueError("m must be at least 4")
        object.__setattr__(self, "m", int(self.m))
        ratios = tuple(int(r) for r in self.n_ratios)
        if not ratios or any(r < 1 for r in ratios):
            raise ValueError("n_ratios must be positive integers")
        object.__setattr__(self, "n_ratios", ratios)
        if self.sparsity_range is None:
            rng = (2, max(2, int(0.4 * self.m)))
        else:
            rng = (int(self.sparsity_range[0]), int(self.sparsity_range[1]))
        if not 1 <= rng[0] <= rng[1]:
            raise ValueError("sparsity_range must be an increasing pair of positives")
        object.__setattr__(self, "sparsity_range", rng)
        if int(self.trials) < 1:
            raise ValueError("trials must be positive")
        object.__setattr__(self, "trials", int(self.trials))
        algos = tuple(self.algorithms)
        unknown = [a for a in algos if a not in ALGORITHM_CHOICES]
        if unknown or not algos:
            raise ValueError(
                f"algorithms must be a nonempty subset of {ALGORITHM_CHOICES}"
            )
        object.__setattr__(self, "algorithms", algos)
        if float(self.noise_eps) < 0:
            raise ValueError("noise_eps must be nonnegative")
        object.__setattr__(self, "noise_eps", float(self.noise_eps))
        object.__setattr__(self, "base_seed", int(self.base_seed))
        if int(self.threads) < 1:
            raise ValueError("threads must be positive")
        object.__setattr__(self, "threads", int(self.threads))
        if self.value_distribution not in ("gaussian", "rademacher"):
            raise ValueError("value_distribution must be gaussian or rademacher")


@dataclass
class CellResult:
    """Aggregated outcome for one (algorithm, m, n, s) grid cell."""

    algorithm: str
    m: int
    n: int
    s: int
    trials: int
    success_count: int
    frequency: float
    mean_iterations: float
    mean_runtime_ms: float | None
    instance_digest: str


@dataclass
class ExperimentReport:
    """Cells plus provenance for one frequency experiment."""

    config: ExperimentConfig
    cells: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


def make_instance(m, n, s, noise_eps, seed, value_distribution="gaussian"):
    """Generate the seeded problem instance for one trial.

    The seed fully determines the matrix, the truth, and the noise via
    derived per-component streams; the measurement is matrix @ truth plus
    (for noise_eps > 0) a noise vector of norm exactly noise_eps.
    """
    matrix = gaussian_matrix(m, n, derive_seed(seed, 1))
    truth = sparse_signal(n, s, derive_seed(seed, 2), value_distribution)
    b = matrix.entries @ truth.to_dense()
    if float(noise_eps) > 0:
        b = add_noise(b, noise_eps, derive_seed(seed, 3))
    return ProblemInstance(
        matrix=matrix,
        truth=truth,
        measurement=b,
        noise_eps=float(noise_eps),
        seed=int(seed),
    )


def exact_recovery(result, truth, noiseless):
    """Recovery predicate.

    Noiseless: the estimate matches the truth within relative 1e-6 in
    Euclidean norm. Noisy: the true support is contained in the estimate's
    support. ``result`` may be a RecoveryResult or a SparseSignal.
    """
    estimate = result.estimate if isinstance(result, RecoveryResult) else result
    if noiseless:
        diff = estimate.to_dense() - truth.to_dense()
        xn = float(np.linalg.norm(truth.to_dense()))
        return bool(float(np.linalg.norm(diff)) <= 1e-6 * xn)
    return set(truth.support.tolist()) <= set(estimate.support.tolist())


def _check_monotone(history):
    history = np.asarray(history)
    if history.size >= 2 and np.any(np.diff(history) > 1e-10):
        raise RuntimeError("residual history increased beyond tolerance")


def _run_algorithm(name, normalized, instance, s):
    """Run one named algorithm on a shared instance; returns (estimate, iters)."""
    m = instance.matrix.rows
    b = instance.measurement
    if name == "omp_s":
        result = omp(normalized, b, StoppingRule(s))
        estimate = result.estimate
    elif name == "omp_2s":
        result = omp(normalized, b, StoppingRule(min(2 * s, m - 1)))
        estimate = result.estimate
    elif name == "gomp2_s":
        result = gomp(normalized, b, 2, StoppingRule(s))
        estimate = result.estimate
    elif name == "gomp2_2s":
        result = gomp(normalized, b, 2, StoppingRule(min(2 * s, m // 2)))
        estimate = result.estimate
    elif name == "qomp_s":
        result = qomp(normalized, b, StoppingRule(s))
        estimate = refine_support(instance.matrix, result.support, b)
    else:
        raise ValueError(f"unknown algorithm {name!r}")
    _check_monotone(result.residual_history)
    return estimate, result.iterations_run


def _instance_digest(instance):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(instance.matrix.entries).tobytes())
    h.update(np.ascontiguousarray(instance.measurement).tobytes())
    h.update(np.ascontiguousarray(instance.truth.support).tobytes())
    h.update(np.ascontiguousarray(instance.truth.values).tobytes())
    return h.digest()


def _frequency_chunk(task):
    """Worker: run all algorithms over one contiguous trial range of a cell."""
    (m, ratio, s, t0, t1, noise_eps, base_seed, algorithms, dist, timing) = task
    n = ratio * m
    noiseless = noise_eps == 0.0
    success = {a: 0 for a in algorithms}
    iters = {a: 0 for a in algorithms}
    runtime = {a: 0.0 for a in algorithms}
    digests = []
    with threadpool_limits(limits=1):
        for t in range(t0, t1):
            seed = derive_seed(base_seed, ratio, s, t)
            instance = make_instance(m, n, s, noise_eps, seed, dist)
            digests.append(_instance_digest(instance))
            normalized = normalize_columns(instance.matrix)
            for name in algorithms:
                start = time.perf_counter() if timing else 0.0
                try:
                    estimate, it = _run_algorithm(name, normalized, instance, s)
                    ok = exact_recovery(estimate, instance.truth, noiseless)
                except PursuitError:
                    ok, it = False, 0
                if timing:
                    runtime[name] += (time.perf_counter() - start) * 1000.0
                success[name] += int(ok)
                iters[name] += it
    return success, iters, runtime, digests


def run_frequency_experiment(config):
    """Exact-recovery frequencies over the configured (n, s) grid.

    Each trial's instance is shared by all configured algorithms. Budgets:
    omp_s runs s iterations, omp_2s runs 2s, gomp2_s runs s iterations of
    two indices, gomp2_2s runs min(2s, m/2), qomp_s runs s pair iterations
    followed by the sparse least-squares refinement. Trial failures count
    as non-recovery. The report is bit-identical for any thread count.
    """
    cfg = config
    lo, hi = cfg.sparsity_range
    cells_axis = [(ratio, s) for ratio in cfg.n_ratios for s in range(lo, hi + 1)]
    chunk = max(1, -(-cfg.trials // max(1, cfg.threads * 4)))
    tasks = []
    task_keys = []
    for ratio, s in cells_axis:
        for t0 in range(0, cfg.trials, chunk):
            t1 = min(cfg.trials, t0 + chunk)
            tasks.append(
                (
                    cfg.m,
                    ratio,
                    s,
                    t0,
                    t1,
                    cfg.noise_eps,
                    cfg.base_seed,
                    cfg.algorithms,
                    cfg.value_distribution,
                    cfg.collect_timing,
                )
            )
            task_keys.append((ratio, s))

    if cfg.threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(_frequency_chunk, tasks))
    else:
        outcomes = [_frequency_chunk(t) for t in tasks]

    # Merge in task order: counters are order-independent, digests are
    # concatenated by increasing trial index within each cell.
    merged = {}
    for key, (success, iters, runtime, digests) in zip(task_keys, outcomes):
        slot = merged.setdefault(
            key,
            (
                {a: 0 for a in cfg.algorithms},
                {a: 0 for a in cfg.algorithms},
                {a: 0.0 for a in cfg.algorithms},
                [],
            ),
        )
        for a in cfg.algorithms:
            slot[0][a] += success[a]
            slot[1][a] += iters[a]
            slot[2][a] += runtime[a]
        slot[3].extend(digests)

    cells = []
    for ratio, s in cells_axis:
        success, iters, runtime, digests = merged[(ratio, s)]
        digest = hashlib.sha256(b"".join(digests)).hexdigest()[:16]
        for a in cfg.algorithms:
            cells.append(
                CellResult(
                    algorithm=a,
                    m=cfg.m,
                    n=ratio * cfg.m,
                    s=s,
                    trials=cfg.trials,
                    success_count=success[a],
                    frequency=success[a] / cfg.trials,
                    mean_iterations=iters[a] / cfg.trials,
                    mean_runtime_ms=(runtime[a] / cfg.trials) if cfg.collect_timing else None,
                    instance_digest=digest,
                )
            )
    cells.sort(key=lambda c: (c.algorithm, c.n, c.s))

    from . import __version__

    provenance = {
        "base_seed": cfg.base_seed,
        "seed_rule": SEED_RULE,
        "predicate": (
            "relative l2 error <= 1e-6" if cfg.noise_eps == 0.0 else "support containment"
        ),
        "value_distribution": cfg.value_distribution,
        "software_version": __version__,
        "config_echo_note": (
            "threads and collect_timing are execution-only and omitted "
            "from the config echo so reports are identical across them"
        ),
    }
    return ExperimentReport(config=cfg, cells=cells, provenance=provenance)


def run_decay_experiment(m, n, s, trials, base_seed):
    """Residual decay reports for seeded pair-wise pursuit runs.

    Requires n >= 2m and 2s <= m so the closed-form rate applies. Each
    trial runs the pair-wise pursuit with budget s on a fresh noiseless
    instance and reports its worst-step decay ratio.
    """
    m, n, s, trials = int(m), int(n), int(s), int(trials)
    if n < 2 * m:
        raise ValueError("decay experiment requires n >= 2m")
    if 2 * s > m:
        raise ValueError("decay experiment requires 2s <= m")
    reports = []
    with threadpool_limits(limits=1):
        for t in range(trials):
            seed = derive_seed(base_seed, n, s, t)
            instance = make_instance(m, n, s, 0.0, seed)
            result = qomp(
                normalize_columns(instance.matrix),
                instance.measurement,
                StoppingRule(s),
            )
            _check_monotone(result.residual_history)
            K = max(1, result.iterations_run)
            reports.append(residual_decay_report(result, instance.matrix, K))
    return reports
