"""Monte-Carlo experiments and brute-force reference implementations."""

from .experiments import (
    TailResult,
    TrialRecord,
    run_failure_rate,
    run_residual_tail,
    run_signed_pipeline,
    run_stash_pipeline,
    sample_keys,
    summarize,
    trial_rng,
    wilson,
    write_csv,
)

__all__ = [
    "TailResult", "TrialRecord", "run_failure_rate", "run_residual_tail", "run_signed_pipeline",
    "run_stash_pipeline", "sample_keys", "summarize", "trial_rng", "wilson", "write_csv",
]
