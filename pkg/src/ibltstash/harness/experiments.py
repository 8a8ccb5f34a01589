"""Monte-Carlo experiments over the IBLT decoder and the full sketch pipeline.

Every trial draws its randomness from ``SeedSequence([master_seed, trial])``,
so any single trial can be replayed on its own and trials may run in any
order.  Keys are sampled uniformly without replacement from [1, 2^w - 1].
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from ..hashing import HashSeeds
from ..iblt import Iblt, odd_keys
from ..signed import SignedSketch, signed_sym_diff
from ..sketch import Sketch, Status

SCHEMA_VERSION = 1


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial]))


def sample_keys(rng: np.random.Generator, count: int, w: int) -> np.ndarray:
    """``count`` distinct keys from [1, 2^w - 1], in draw order."""
    hi = 1 << w
    if count > hi - 1:
        raise ValueError("more keys requested than the universe holds")
    if 2 * count > hi:
        return rng.choice(np.arange(1, hi, dtype=np.uint64), size=count, replace=False)
    out = np.empty(0, dtype=np.uint64)
    while out.size < count:
        draw = rng.integers(1, hi, size=count - out.size + 16, dtype=np.uint64)
        both = np.concatenate([out, draw])
        _, first = np.unique(both, return_index=True)
        out = both[np.sort(first)][:count]
    return out


def wilson(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


@dataclass
class TrialRecord:
    trial: int
    D: int
    r: int
    n: int
    w: int
    seed: int
    set_size: int
    iblt_success: bool
    residual_size: int
    foreign_key_count: int
    steps: int
    timed_out: bool = False
    stash_activated: bool = False
    stash_success: bool = False
    final_exact: bool = False
    checksum_aliased: bool = False
    t_build: float = 0.0
    t_report: float = 0.0

    def as_row(self) -> dict:
        row = asdict(self)
        row["schema"] = SCHEMA_VERSION
        return row


CSV_FIELDS = ["schema"] + [f.name for f in fields(TrialRecord)]


def summarize(records) -> dict:
    records = list(records)
    total = len(records)
    ok = sum(r.iblt_success for r in records)
    exact = sum(r.final_exact for r in records)
    act = sum(r.stash_activated for r in records)
    return {
        "trials": total,
        "iblt_success": ok,
        "iblt_success_rate": ok / total if total else float("nan"),
        "iblt_success_ci": wilson(ok, total),
        "final_exact": exact,
        "final_exact_rate": exact / total if total else float("nan"),
        "final_exact_ci": wilson(exact, total),
        "stash_activated": act,
        "stash_activation_rate": act / total if total else float("nan"),
        "stash_activation_ci": wilson(act, total),
        "mean_report_time": sum(r.t_report for r in records) / total if total else float("nan"),
    }


def write_csv(path, records, summary: dict | None = None) -> None:
    """One row per trial, then a summary row whose ``trial`` column reads ``summary``."""
    records = list(records)
    if summary is None:
        summary = summarize(records)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS + ["summary"])
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.as_row())
        brief = {k: v for k, v in summary.items() if not isinstance(v, (list, dict))}
        writer.writerow({"schema": SCHEMA_VERSION, "trial": "summary",
                         "summary": ";".join(f"{k}={v}" for k, v in brief.items())})


def _decode_trial(trial, D, n, w, master_seed, seeds) -> TrialRecord:
    rng = trial_rng(master_seed, trial)
    keys = sample_keys(rng, D, w)
    t0 = time.perf_counter()
    table = Iblt(n, w, seeds)
    table.toggle_many(keys)
    t1 = time.perf_counter()
    toggled, steps, timed_out = table.peel()
    t2 = time.perf_counter()
    recovered = odd_keys(toggled)
    residual = int(np.setxor1d(keys, recovered, assume_unique=True).size)
    return TrialRecord(
        trial=trial, D=D, r=0, n=n, w=w, seed=master_seed, set_size=D,
        iblt_success=residual == 0, residual_size=residual,
        foreign_key_count=int(np.setdiff1d(recovered, keys, assume_unique=True).size),
        steps=steps, timed_out=timed_out, final_exact=residual == 0,
        t_build=t1 - t0, t_report=t2 - t1,
    )


def run_failure_rate(D: int, ratio, trials: int, master_seed: int = 0, w: int = 32,
                     seeds: HashSeeds | None = None) -> list:
    """Decode a D-key IBLT of ceil(ratio * D) cells, ``trials`` times."""
    ratio = Fraction(str(ratio)) if isinstance(ratio, float) else Fraction(ratio)
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    n = math.ceil(ratio * D)
    seeds = seeds or HashSeeds()
    return [_decode_trial(t, D, n, w, master_seed, seeds) for t in range(trials)]


@dataclass
class TailResult:
    trials: int
    failures: int
    residuals: list
    thresholds: tuple

    def tail(self, r: int) -> float:
        """Empirical Pr[residual > r | failure]."""
        if not self.failures:
            return float("nan")
        return sum(1 for x in self.residuals if x > r) / self.failures

    def median(self) -> float:
        return float(np.median(self.residuals)) if self.residuals else float("nan")


def run_residual_tail(D: int, ratio, trials: int, master_seed: int = 0, w: int = 32,
                      min_failures: int | None = None, thresholds=(8, 16, 32),
                      seeds: HashSeeds | None = None, keep_records: bool = False):
    """Residual sizes |S xor S_dec| of failed decodes.

    Runs ``trials`` trials, or, when ``min_failures`` is set, stops as soon as
    that many failures were seen with ``trials`` acting as the cap.
    """
    ratio = Fraction(str(ratio)) if isinstance(ratio, float) else Fraction(ratio)
    n = math.ceil(ratio * D)
    seeds = seeds or HashSeeds()
    residuals, records = [], []
    done = 0
    for t in range(trials):
        rec = _decode_trial(t, D, n, w, master_seed, seeds)
        done += 1
        if keep_records:
            records.append(rec)
        if not rec.iblt_success:
            residuals.append(rec.residual_size)
            if min_failures is not None and len(residuals) >= min_failures:
                break
    result = TailResult(done, len(residuals), residuals, tuple(thresholds))
    return (result, records) if keep_records else result


def run_stash_pipeline(D: int, r: int, trials: int, master_seed: int = 0, w: int = 16,
                       set_size: int | None = None, seeds: HashSeeds | None = None) -> list:
    """Insert ``set_size`` (default D) random keys into a fresh sketch and report."""
    seeds = seeds or HashSeeds()
    size = D if set_size is None else set_size
    records = []
    for t in range(trials):
        rng = trial_rng(master_seed, t)
        keys = sample_keys(rng, size, w)
        t0 = time.perf_counter()
        sk = Sketch(D, r, w, seeds)
        sk.insert_many(keys)
        t1 = time.perf_counter()
        res = sk.report()
        t2 = time.perf_counter()
        truth = set(keys.tolist())
        dec = res.decode.recovered
        residual = truth ^ dec
        exact = res.ok and res.keys == truth
        records.append(TrialRecord(
            trial=t, D=D, r=r, n=sk.n, w=w, seed=master_seed, set_size=size,
            iblt_success=not residual, residual_size=len(residual),
            foreign_key_count=len(dec - truth), steps=res.decode.steps,
            timed_out=res.decode.timed_out, stash_activated=res.used_stash,
            stash_success=res.used_stash and res.status is Status.STASH_CORRECTED and exact,
            final_exact=exact,
            checksum_aliased=bool(residual) and res.status is Status.IBLT_CLEAN,
            t_build=t1 - t0, t_report=t2 - t1,
        ))
    return records


@dataclass
class SignedTrial:
    trial: int
    diff_size: int
    exact: bool
    status: str
    sign_errors: int
    iblt_success: bool
    residual_size: int
    foreign_key_count: int


def run_signed_pipeline(D: int, r: int, trials: int, master_seed: int = 0, w: int = 16,
                        max_diff: int | None = None, common: int = 100,
                        seeds: HashSeeds | None = None) -> list:
    """Reconcile S and T sharing ``common`` keys and differing in 1..max_diff keys.

    Each differing key is put on a random side.  ``sign_errors`` counts keys
    reported with the wrong side, among keys that are true differences.
    """
    seeds = seeds or HashSeeds()
    max_diff = D if max_diff is None else max_diff
    out = []
    for t in range(trials):
        rng = trial_rng(master_seed, t)
        d = int(rng.integers(1, max_diff + 1))
        keys = sample_keys(rng, common + d, w).tolist()
        shared, extra = keys[:common], keys[common:]
        side = rng.integers(0, 2, size=d).tolist()
        a, b = SignedSketch(D, r, w, seeds), SignedSketch(D, r, w, seeds)
        for x in shared:
            a.insert(x)
            b.insert(x)
        for x, s in zip(extra, side):
            (a if s == 0 else b).insert(x)
        truth = {x: 1 if s == 0 else 2 for x, s in zip(extra, side)}
        res = a.diff(b).report()
        s_dec: dict = {}
        for x, s in res.decode.toggled:
            s_dec = signed_sym_diff(s_dec, {x: s})
        dec = set(s_dec)
        sign_errors = sum(1 for x, s in res.keys.items() if x in truth and truth[x] != s)
        out.append(SignedTrial(
            trial=t, diff_size=d, exact=res.ok and res.keys == truth, status=res.status.value,
            sign_errors=sign_errors, iblt_success=s_dec == truth,
            residual_size=len(set(truth) ^ dec), foreign_key_count=len(dec - set(truth)),
        ))
    return out
