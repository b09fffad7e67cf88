"""Batch estimation of lattice functionals with mergeable statistics.

Estimates are accumulated with Welford's algorithm, whose parallel merge
rule makes sharded runs combine exactly (up to float rounding, which is
what the merge-invariance check bounds). Because the sampler hashes
``(seed, sample index, tree position)`` rather than keeping generator
state, the same seed always produces the same replicate set regardless of
the shard plan or worker count, and a sweep over a p grid reuses one
shared set of uniforms per seed (coupled mode: grids are cell-wise
monotone in p). Independent per-p streams are derived on request.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import geometry, rng, sampler
from .analytic import ModelParams

_FUNCTIONAL_INDEX = {"V0": 0, "V1": 1, "V2": 2}


@dataclass
class McEstimate:
    """Streaming mean/variance accumulator (count, mean, sum of squared
    deviations); merge is associative and commutative up to rounding."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "McEstimate") -> "McEstimate":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else float("nan")

    @property
    def stderr(self) -> float:
        if self.count > 1:
            return math.sqrt(self.m2 / (self.count * (self.count - 1)))
        return float("nan")


@dataclass
class ExperimentResult:
    """Per-(target, functional) estimates for one (M, p, d, n) cell."""

    params: ModelParams
    n: int
    seed: int
    samples: int
    connectivity: int
    estimates: dict
    spanning: dict = field(default_factory=dict)
    elapsed: float = 0.0
    shards: int = 1

    def rescaled_mean(self, target: str, functional: str) -> float | None:
        """Mean scaled by r^{n(D-k)}, attached only in the nonempty regime."""
        if not self.params.non_empty_regime:
            return None
        k = _FUNCTIONAL_INDEX[functional]
        mu = self.params.M**self.params.d * float(self.params.p)
        scale = (self.params.M**k / mu) ** self.n
        return self.estimates[(target, functional)].mean * scale

    def to_rows(self) -> list:
        rows = []
        for (target, functional), est in sorted(self.estimates.items()):
            rows.append(
                {
                    "M": self.params.M,
                    "p": float(self.params.p),
                    "n": self.n,
                    "functional": functional,
                    "target": target,
                    "mean": est.mean,
                    "stderr": est.stderr,
                    "count": est.count,
                    "rescaled_mean": self.rescaled_mean(target, functional),
                }
            )
        for axis, est in sorted(self.spanning.items()):
            rows.append(
                {
                    "M": self.params.M,
                    "p": float(self.params.p),
                    "n": self.n,
                    "functional": f"span_{axis}",
                    "target": "F",
                    "mean": est.mean,
                    "stderr": est.stderr,
                    "count": est.count,
                    "rescaled_mean": None,
                }
            )
        return rows


def _new_estimates(functionals, targets):
    return {(t, f) for t in targets for f in functionals}


def _run_shard(args):
    (params, n, seed, start, count, functionals, targets, connectivity, axes,
     budget_bytes) = args
    estimates = {key: McEstimate() for key in _new_estimates(functionals, targets)}
    spanning = {axis: McEstimate() for axis in axes}
    for i in range(start, start + count):
        grid = sampler.sample(params, n, seed, i, budget_bytes=budget_bytes)
        for target in targets:
            g = grid if target == "F" else sampler.complement(grid)
            mv = geometry.minkowski(g)
            for functional in functionals:
                k = _FUNCTIONAL_INDEX[functional]
                estimates[(target, functional)].push(float(mv.vk(k)))
        if axes:
            lab = geometry.label(grid, connectivity)
            for axis in axes:
                hit = lab.spans_x if axis == "x" else lab.spans_y
                spanning[axis].push(1.0 if hit else 0.0)
    return estimates, spanning


def _shard_plan(samples: int, shards: int):
    base, extra = divmod(samples, shards)
    start = 0
    for i in range(shards):
        count = base + (1 if i < extra else 0)
        if count:
            yield start, count
        start += count


def run_experiment(
    params: ModelParams,
    n: int,
    samples: int,
    seed: int,
    functionals: tuple = ("V0", "V1", "V2"),
    targets: tuple = ("F", "C"),
    connectivity: int = 8,
    spanning_axes: tuple = (),
    workers: int = 1,
    shards: int | None = None,
    budget_bytes: int = sampler.DEFAULT_BUDGET_BYTES,
) -> ExperimentResult:
    """Sample ``samples`` replicates of F_n and accumulate the requested
    functionals on the requested targets.

    The replicate set is fully determined by (params, n, seed); the shard
    plan and worker count only affect the merge order of the accumulators.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples for a standard error")
    for f in functionals:
        if f not in _FUNCTIONAL_INDEX:
            raise ValueError(f"unknown functional {f!r}")
        if _FUNCTIONAL_INDEX[f] > params.d:
            raise ValueError(f"{f} undefined for d = {params.d}")
    shards = shards or max(1, workers)
    t0 = time.perf_counter()
    shard_args = [
        (params, n, seed, start, count, tuple(functionals), tuple(targets),
         connectivity, tuple(spanning_axes), budget_bytes)
        for start, count in _shard_plan(samples, shards)
    ]
    if workers > 1 and len(shard_args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_shard, shard_args))
    else:
        partials = [_run_shard(a) for a in shard_args]
    estimates = {key: McEstimate() for key in _new_estimates(functionals, targets)}
    spanning = {axis: McEstimate() for axis in spanning_axes}
    for est_part, span_part in partials:
        for key, est in est_part.items():
            estimates[key].merge(est)
        for axis, est in span_part.items():
            spanning[axis].merge(est)
    return ExperimentResult(
        params, n, seed, samples, connectivity, estimates, spanning,
        elapsed=time.perf_counter() - t0, shards=len(shard_args),
    )


def spanning_probability(
    params: ModelParams,
    n: int,
    samples: int,
    seed: int,
    connectivity: int = 8,
    axis: str = "x",
    workers: int = 1,
    budget_bytes: int = sampler.DEFAULT_BUDGET_BYTES,
) -> McEstimate:
    """Fraction of replicates with a component joining the opposite
    boundaries along ``axis`` (binomial standard error)."""
    result = run_experiment(
        params, n, samples, seed,
        functionals=(), targets=(), connectivity=connectivity,
        spanning_axes=(axis,), workers=workers, budget_bytes=budget_bytes,
    )
    return result.spanning[axis]


def per_p_seed(master_seed: int, p) -> int:
    """Derived seed giving independent streams across a p grid."""
    return rng.derive_seed(master_seed, f"p={float(p)!r}")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("M", "p", "n", "functional", "target", "mean", "stderr", "count", "rescaled_mean")


def format_float(x) -> str:
    """17 significant digits: round-trips float64 exactly."""
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def write_csv(rows: list, path) -> None:
    """Rows are dicts with the CSV_COLUMNS keys; floats get 17 digits."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fields = []
            for col in CSV_COLUMNS:
                value = row.get(col)
                if col in ("M", "n", "count"):
                    fields.append("" if value is None else str(value))
                elif col in ("functional", "target"):
                    fields.append(str(value))
                else:
                    fields.append(format_float(value))
            fh.write(",".join(fields) + "\n")


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_manifest(path, *, seed: int, config_text: str, elapsed: float, extra=None) -> dict:
    """JSON sidecar recording how a randomized run was produced."""
    manifest = {
        "seed": seed,
        "config_sha256": config_digest(config_text),
        "config": config_text,
        "elapsed_seconds": elapsed,
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
