"""Seeded Monte-Carlo reproductions of the three verification figures.

Every sample draws from its own stream ``rng_for(seed, index)``, so a record
depends only on (experiment, n, samples, seed).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channels import apply, completeness_defect, depolarize_reference
from .correctability import ou_channel, ou_converted
from .ru import depolarize_ru
from .state_ru import decompose
from .states import bloch_distance_sq, bloch_purity, projector, random_density, random_pure, rng_for


@dataclass
class ExperimentRecord:
    experiment: str
    n: int
    samples: int
    seed: int
    per_sample: list[dict]
    runtime_ms: float = field(default=0.0, compare=False)

    @property
    def max_bloch_dist_sq(self) -> float:
        return max(row["bloch_dist_sq"] for row in self.per_sample)

    @property
    def mean_bloch_dist_sq(self) -> float:
        return float(np.mean([row["bloch_dist_sq"] for row in self.per_sample]))

    def summary(self, timing: bool = False) -> dict:
        out = {
            "max_bloch_dist_sq": self.max_bloch_dist_sq,
            "mean_bloch_dist_sq": self.mean_bloch_dist_sq,
        }
        if timing:
            out["runtime_ms"] = self.runtime_ms
        return out

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "experiment": self.experiment,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "per_sample": self.per_sample,
            "summary": self.summary(timing),
        }


def _run(name: str, n: int, samples: int, seed: int, one) -> ExperimentRecord:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    start = time.perf_counter()
    rows = [one(i, rng_for(seed, i)) for i in range(samples)]
    elapsed = (time.perf_counter() - start) * 1000
    return ExperimentRecord(name, n, samples, seed, rows, elapsed)


def fig1(n: int = 4, samples: int = 1000, seed: int = 0) -> ExperimentRecord:
    """Recursive RU depolarization versus the closed-form channel."""
    if n < 2:
        raise ValueError("n must be >= 2")

    def one(i, rng):
        rho = random_density(n, rng)
        p = float(rng.uniform())
        expected = depolarize_reference(rho, p)
        got = depolarize_ru(rho, p)
        return {
            "index": i,
            "p": p,
            "pb_expected": bloch_purity(expected),
            "pb_reconstructed": bloch_purity(got),
            "bloch_dist_sq": bloch_distance_sq(expected, got),
        }

    return _run("fig1", n, samples, seed, one)


def fig2_sample(rho, p: float) -> dict:
    f = ou_channel(p)
    f_tilde = ou_converted(p).F_tilde
    out_f = apply(f, rho)
    out_t = apply(f_tilde, rho)
    return {
        "p": p,
        "pb_expected": bloch_purity(out_f),
        "pb_reconstructed": bloch_purity(out_t),
        "bloch_dist_sq": bloch_distance_sq(out_f, out_t),
    }


def fig2(samples: int = 1000, seed: int = 0) -> ExperimentRecord:
    """OU phase noise versus its conversion onto the RU reference operators."""

    def one(i, rng):
        rho = random_density(4, rng)
        p = float(rng.uniform())
        return {"index": i, **fig2_sample(rho, p)}

    return _run("fig2", 4, samples, seed, one)


def fig3(n: int = 4, samples: int = 1000, seed: int = 0) -> ExperimentRecord:
    """State-dependent RU reconstruction of random (pure, mixed) pairs."""
    if n < 2:
        raise ValueError("n must be >= 2")

    def one(i, rng):
        psi = random_pure(n, rng)
        rho_out = random_density(n, rng)
        dec = decompose(psi, rho_out)
        got = sum(k @ projector(psi) @ k.conj().T for k in dec.kraus.operators)
        return {
            "index": i,
            "pb_expected": bloch_purity(rho_out),
            "pb_reconstructed": bloch_purity(got),
            "bloch_dist_sq": bloch_distance_sq(rho_out, got),
            "kraus_completeness": completeness_defect(dec.kraus),
        }

    return _run("fig3", n, samples, seed, one)
