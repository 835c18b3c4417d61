"""Monte Carlo symbol error simulation with counter-based determinism.

The channel is y = kappa * lam + sigma * z with lam an unscaled integer
constellation point, z i.i.d. standard normal, and sigma = 10**(-osnr_db/10)
(optical SNR in dB is 10*log10(1/sigma)).  Trials run in fixed-size batches;
batch b draws all of its randomness from a Philox generator keyed by
(seed, b), and results commit in batch order, so counts are bit-identical
for any worker count.  Stopping (enough errors or the trial cap) is evaluated
on the committed prefix only.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass

import numpy as np

from .constellations import XI_MINUS, XI_PLUS, ConstellationSpec
from .lattices import decode_shifted_union_batch, nearest_point_dn_batch

__all__ = [
    "SerRecord",
    "cubic_ser_formula",
    "osnr_to_sigma",
    "q_function",
    "ser_sweep",
    "sigma_to_osnr",
    "simulate_ser",
    "union_bound_ser",
    "wilson_interval",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile
_SQRT1_2 = 1.0 / math.sqrt(2.0)
_erfc = np.vectorize(math.erfc, otypes=[np.float64])


def q_function(x):
    """Gaussian upper-tail probability, elementwise."""
    arr = np.asarray(x, dtype=np.float64)
    out = 0.5 * _erfc(arr * _SQRT1_2)
    return float(out) if arr.ndim == 0 else out


def osnr_to_sigma(osnr_db):
    return 10.0 ** (-np.asarray(osnr_db, dtype=np.float64) / 10.0)


def sigma_to_osnr(sigma):
    return -10.0 * np.log10(np.asarray(sigma, dtype=np.float64))


def union_bound_ser(spec: ConstellationSpec, osnr_db):
    """Nearest-neighbor pairwise bound: kissing * Q(d_min / (2 sigma))."""
    if spec.kissing is None:
        raise ValueError(f"no pairwise bound defined for kind {spec.kind!r}")
    sigma = osnr_to_sigma(osnr_db)
    return spec.kissing * q_function(spec.scaled_min_distance / (2.0 * sigma))


def cubic_ser_formula(spec: ConstellationSpec, osnr_db):
    """Exact symbol error rate of the unshaped per-coordinate design."""
    if spec.kind != "cubic":
        raise ValueError("closed-form SER applies to the cubic design only")
    sigma = osnr_to_sigma(osnr_db)
    levels = spec.peak_unscaled + 1
    p_dim = (2.0 * (levels - 1) / levels) * q_function(
        float(spec.kappa) / (2.0 * sigma)
    )
    return 1.0 - (1.0 - p_dim) ** spec.n


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class SerRecord:
    """One measured operating point."""

    osnr_db: float
    trials: int
    errors: int
    ser: float
    ci95_low: float
    ci95_high: float
    seed: int
    ub: float | None = None


# -- batch engine ------------------------------------------------------------


def _batch_generator(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, batch_index)))
    )


def _simulate_batch(
    spec: ConstellationSpec, sigma: float, seed: int, batch_index: int, count: int
) -> int:
    """Run one batch and return its error count.

    The draw order inside a batch is fixed (points, code words, coset bits,
    noise), so the outcome depends only on (spec, sigma, seed, batch_index,
    count).
    """
    rng = _batch_generator(seed, batch_index)
    noise_gain = sigma / float(spec.kappa)
    if spec.kind == "cubic":
        lam = rng.integers(0, spec.peak_unscaled + 1, size=(count, spec.n))
        w = lam + noise_gain * rng.standard_normal((count, spec.n))
        est = np.clip(np.rint(w), 0, spec.peak_unscaled).astype(np.int64)
        return int((est != lam).any(axis=1).sum())
    if spec.kind == "tcc":
        lam = spec.sampler.sample(rng, count)
        w = lam + noise_gain * rng.standard_normal((count, spec.n))
        est = nearest_point_dn_batch(w)
        return int((est != lam).any(axis=1).sum())
    d = spec.sampler.sample(rng, count)
    c = spec.code.codebook[rng.integers(0, 1 << spec.k_c, size=count)]
    a = rng.integers(0, 2, size=count)
    shift = np.where((d[:, 0] % 2 == 1)[:, None], XI_MINUS, XI_PLUS)
    lam = 4 * d + 2 * c + a[:, None] * shift
    w = lam + noise_gain * rng.standard_normal((count, spec.n))
    est, _, _ = decode_shifted_union_batch(
        w, (np.zeros(spec.n, dtype=np.int64), XI_MINUS), code=spec.code
    )
    return int((est != lam).any(axis=1).sum())


_POOL_STATE: tuple | None = None


def _pool_init(spec, sigma, seed):
    global _POOL_STATE
    _POOL_STATE = (spec, sigma, seed)


def _pool_run(args: tuple[int, int]) -> tuple[int, int]:
    batch_index, count = args
    spec, sigma, seed = _POOL_STATE
    return batch_index, _simulate_batch(spec, sigma, seed, batch_index, count)


def simulate_ser(
    spec: ConstellationSpec,
    osnr_db: float,
    *,
    seed: int = 0,
    target_errors: int | None = 100,
    max_trials: int = 20_000_000,
    batch_size: int = 4096,
    threads: int = 1,
) -> SerRecord:
    """Estimate the symbol error rate at one operating point.

    Runs batches until the committed error count reaches target_errors (if
    set) or the committed trial count reaches max_trials.  The committed
    sequence, and hence the returned counts, do not depend on ``threads``.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be positive")
    sigma = float(osnr_to_sigma(osnr_db))

    def batch_count(index: int) -> int:
        return min(batch_size, max_trials - index * batch_size)

    def stopped(trials: int, errors: int) -> bool:
        if target_errors is not None and errors >= target_errors:
            return True
        return trials >= max_trials

    trials = errors = 0
    if threads <= 1:
        index = 0
        while not stopped(trials, errors):
            count = batch_count(index)
            errors += _simulate_batch(spec, sigma, seed, index, count)
            trials += count
            index += 1
    else:
        total_batches = -(-max_trials // batch_size)
        window = 2 * threads
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_pool_init, initargs=(spec, sigma, seed)
        ) as pool:
            next_submit = next_commit = 0
            running = set()
            done: dict[int, int] = {}
            while not stopped(trials, errors) and next_commit < total_batches:
                while (
                    next_submit < total_batches
                    and len(running) + len(done) < window
                ):
                    running.add(
                        pool.submit(_pool_run, (next_submit, batch_count(next_submit)))
                    )
                    next_submit += 1
                finished, running = wait(running, return_when=FIRST_COMPLETED)
                for fut in finished:
                    index, err = fut.result()
                    done[index] = err
                while next_commit in done and not stopped(trials, errors):
                    errors += done.pop(next_commit)
                    trials += batch_count(next_commit)
                    next_commit += 1
            for fut in running:
                fut.cancel()

    ser = errors / trials
    lo, hi = wilson_interval(errors, trials)
    ub = union_bound_ser(spec, osnr_db) if spec.kissing is not None else None
    return SerRecord(
        osnr_db=float(osnr_db),
        trials=trials,
        errors=errors,
        ser=ser,
        ci95_low=lo,
        ci95_high=hi,
        seed=seed,
        ub=ub,
    )


def ser_sweep(
    spec: ConstellationSpec,
    osnr_grid,
    *,
    seed: int = 0,
    target_errors: int | None = 100,
    max_trials: int = 20_000_000,
    batch_size: int = 4096,
    threads: int = 1,
) -> list[SerRecord]:
    """simulate_ser over a grid, with per-point seeds derived from ``seed``.

    SER should fall as OSNR rises; a rise between consecutive grid points
    whose confidence intervals do not even overlap is reported as a warning
    (never an error, since the estimates are noisy by nature).
    """
    grid = [float(v) for v in np.atleast_1d(np.asarray(osnr_grid, dtype=np.float64))]
    child_seeds = np.random.SeedSequence(seed).generate_state(len(grid), np.uint64)
    records = [
        simulate_ser(
            spec,
            osnr,
            seed=int(child),
            target_errors=target_errors,
            max_trials=max_trials,
            batch_size=batch_size,
            threads=threads,
        )
        for osnr, child in zip(grid, child_seeds)
    ]
    for prev, cur in zip(records, records[1:]):
        if prev.osnr_db < cur.osnr_db and cur.ci95_low > prev.ci95_high:
            warnings.warn(
                f"SER rose from {prev.ser:.3e} at {prev.osnr_db} dB to "
                f"{cur.ser:.3e} at {cur.osnr_db} dB beyond both intervals",
                stacklevel=2,
            )
    return records
