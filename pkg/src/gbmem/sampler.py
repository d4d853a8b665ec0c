"""Monte Carlo sampling of detector models and logical-error-rate estimation.

Shots are bit rows over detectors (and observables) packed into uint64
words, little-endian within each word: output bit b lives in word b // 64
at bit b % 64, matching the detector model's packed signatures.

Sampling strategy: mechanisms are grouped by exact firing probability and
each group is treated as one flat Bernoulli process over
len(group) * shots independent trials.  Hit positions are drawn with
geometric gap sampling, so the work scales with the number of firings
rather than with mechanisms x shots.  Each hit XORs the mechanism's
packed signature into its shot row.

RNG: Philox (counter-based) seeded through numpy's SeedSequence, so
results reproduce across platforms.  adaptive_run derives one child
stream per batch via SeedSequence(entropy=seed, spawn_key=(batch,)),
which makes the shot stream independent of batch size boundaries in
distribution and bit-exact for a fixed batch size.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .detectors import DetectorModel

# two-sided 95% standard-normal quantile, used by the Wilson interval
_Z95 = 1.959963984540054

CSV_FIELDS = ("code", "p", "t_coherence_s", "rounds", "shots", "errors",
              "p_L_per_round", "seed")


def _unpack_rows(words: np.ndarray, n_bits: int) -> np.ndarray:
    """Packed uint64 rows -> dense uint8 bit rows (shots, n_bits)."""
    if words.shape[0] == 0 or n_bits == 0:
        return np.zeros((words.shape[0], n_bits), dtype=np.uint8)
    u8 = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(u8, axis=1, bitorder="little", count=n_bits)


@dataclass(frozen=True)
class ShotBatch:
    """Packed sampling output: one row per shot."""

    shots: int
    n_detectors: int
    n_observables: int
    det_words: np.ndarray
    obs_words: np.ndarray
    seed: int

    def syndromes(self) -> np.ndarray:
        return _unpack_rows(self.det_words, self.n_detectors)

    def observable_flips(self) -> np.ndarray:
        return _unpack_rows(self.obs_words, self.n_observables)


@dataclass(frozen=True)
class LerResult:
    """Outcome of an adaptive logical-error-rate run."""

    shots: int
    errors: int
    p_L_per_round: float
    rounds: int
    confidence: tuple

    @property
    def p_shot(self) -> float:
        return self.errors / self.shots


def _class_plan(probs: np.ndarray):
    """Group mechanism indices by exact probability; zero class dropped."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0:
        return []
    classes, inverse = np.unique(probs, return_inverse=True)
    order = np.argsort(inverse, kind="stable").astype(np.int64)
    counts = np.bincount(inverse, minlength=len(classes))
    groups = np.split(order, np.cumsum(counts)[:-1])
    return [(float(p), g) for p, g in zip(classes, groups) if p > 0.0]


def _fire(plan, model: DetectorModel, shots: int, rng: np.random.Generator,
          det: np.ndarray, obs: np.ndarray) -> bool:
    """XOR fired signatures into packed buffers; True if anything fired."""
    fired = False
    for p, mechs in plan:
        total = int(mechs.size) * shots
        hits = []
        pos = -1
        while True:
            remaining = total - 1 - pos
            if remaining <= 0:
                break
            expect = remaining * p
            n = min(int(expect + 6.0 * math.sqrt(expect) + 16.0), remaining)
            gaps = rng.geometric(p, size=n)
            cpos = pos + np.cumsum(gaps)
            hits.append(cpos[cpos < total])
            if cpos[-1] >= total:
                break
            pos = int(cpos[-1])
        pos_all = np.concatenate(hits)
        if pos_all.size == 0:
            continue
        mech_idx = mechs[pos_all // shots]
        shot_idx = pos_all % shots
        _kernels.scatter_xor(det, shot_idx, model.det_words, mech_idx)
        _kernels.scatter_xor(obs, shot_idx, model.obs_words, mech_idx)
        fired = True
    return fired


def sample(model: DetectorModel, shots: int, seed: int) -> ShotBatch:
    """Draw `shots` independent samples of the detector model."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed)))
    det = np.zeros((shots, model.det_words.shape[1]), dtype=np.uint64)
    obs = np.zeros((shots, model.obs_words.shape[1]), dtype=np.uint64)
    _fire(_class_plan(model.probs), model, shots, rng, det, obs)
    return ShotBatch(shots=shots, n_detectors=model.n_detectors,
                     n_observables=model.n_observables,
                     det_words=det, obs_words=obs, seed=seed)


def per_round_ler(n_errors: int, n_shots: int, rounds: int) -> float:
    """Exact per-round rate 1 - (1 - N_e/N_s)^(1/rounds)."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    if not 0 <= n_errors <= n_shots:
        raise ValueError("n_errors must lie in [0, n_shots]")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    return 1.0 - (1.0 - n_errors / n_shots) ** (1.0 / rounds)


def wilson_interval(errors: int, shots: int, z: float = _Z95) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    ph = errors / shots
    z2 = z * z
    denom = 1.0 + z2 / shots
    center = (ph + z2 / (2.0 * shots)) / denom
    half = z * math.sqrt(ph * (1.0 - ph) / shots
                         + z2 / (4.0 * shots * shots)) / denom
    # center - half is exactly 0 at ph = 0 (and 1 at ph = 1); pin the
    # boundary so rounding noise cannot leak through
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == shots else min(1.0, center + half)
    return (lo, hi)


def adaptive_run(model: DetectorModel, decoder, stop: dict | None = None, *,
                 seed: int = 0, rounds: int | None = None,
                 batch_size: int = 65536) -> LerResult:
    """Sample and decode batches until min_errors or max_shots is reached.

    A shot counts as an error when any decoded observable disagrees with
    the true flip.  Shots with an all-zero syndrome skip the decoder call:
    BP converges at iteration zero on a zero syndrome with the zero
    correction, so the prediction is identically zero and only the true
    flip decides.  The confidence field is the 95% Wilson interval of the
    per-shot failure rate mapped through the per-round formula (which is
    monotone, so the interval transforms endpoint-wise).
    """
    rule = {"min_errors": 1000, "max_shots": 10 ** 9}
    if stop:
        unknown = set(stop) - set(rule)
        if unknown:
            raise ValueError(f"unknown stop keys: {sorted(unknown)}")
        rule.update(stop)
    min_errors = int(rule["min_errors"])
    max_shots = int(rule["max_shots"])
    if min_errors < 1 or max_shots < 1:
        raise ValueError("stop thresholds must be >= 1")
    if rounds is None:
        rounds = int(model.det_meta[:, 2].max()) if model.det_meta.size else 1

    plan = _class_plan(model.probs)
    dw = model.det_words.shape[1]
    ow = model.obs_words.shape[1]
    zero_pred = np.zeros(model.n_observables, dtype=np.uint8)

    shots_done = 0
    errors = 0
    batch = 0
    while shots_done < max_shots and errors < min_errors:
        n = min(batch_size, max_shots - shots_done)
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(batch,))))
        det = np.zeros((n, dw), dtype=np.uint64)
        obs = np.zeros((n, ow), dtype=np.uint64)
        if _fire(plan, model, n, rng, det, obs):
            active = np.flatnonzero((det != 0).any(axis=1)
                                    | (obs != 0).any(axis=1))
            if active.size:
                syn_rows = _unpack_rows(det[active], model.n_detectors)
                obs_rows = _unpack_rows(obs[active], model.n_observables)
                for r in range(active.size):
                    if syn_rows[r].any():
                        pred = decoder.decode(syn_rows[r]).predicted_observables
                    else:
                        pred = zero_pred
                    if not np.array_equal(pred, obs_rows[r]):
                        errors += 1
        shots_done += n
        batch += 1

    lo, hi = wilson_interval(errors, shots_done)
    return LerResult(
        shots=shots_done, errors=errors,
        p_L_per_round=per_round_ler(errors, shots_done, rounds),
        rounds=rounds,
        confidence=(1.0 - (1.0 - lo) ** (1.0 / rounds),
                    1.0 - (1.0 - hi) ** (1.0 / rounds)))


def append_result_csv(path, code_name: str, p: float, t_coherence_s: float,
                      result: LerResult, seed: int) -> None:
    """Append one run to a results CSV, writing the header on first use."""
    path = Path(path)
    fresh = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if fresh:
            w.writerow(CSV_FIELDS)
        w.writerow([code_name, str(p), str(t_coherence_s), result.rounds,
                    result.shots, result.errors, str(result.p_L_per_round),
                    seed])


def rate_chi_square(counts_a, shots_a: int, counts_b, shots_b: int):
    """Two-sample pooled z^2 statistic over per-bin firing rates.

    Bins where the pooled rate is 0 or 1 carry no comparison information
    and are excluded; returns (statistic, degrees_of_freedom).  Under the
    null (same underlying rates) the statistic is approximately
    chi-square with dof degrees of freedom.
    """
    ca = np.asarray(counts_a, dtype=np.float64)
    cb = np.asarray(counts_b, dtype=np.float64)
    if ca.shape != cb.shape:
        raise ValueError("count vectors must have matching shape")
    pooled = (ca + cb) / (shots_a + shots_b)
    mask = (pooled > 0.0) & (pooled < 1.0)
    var = pooled[mask] * (1.0 - pooled[mask]) * (1.0 / shots_a + 1.0 / shots_b)
    z = (ca[mask] / shots_a - cb[mask] / shots_b) / np.sqrt(var)
    return float(np.sum(z * z)), int(mask.sum())
