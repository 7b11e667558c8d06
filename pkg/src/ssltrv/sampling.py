"""Generation of Type-II censored samples from the tampered step-stress model.

Samples are drawn by inversion (uniform draws through the tampered quantile
function), sorted, and truncated at the r-th failure. A sample is classified
by the number N of failures observed before the stress change at tau:
all r before tau (Case I), a strict mix (Case II), or none before (Case III).

Reproducibility contract: every stochastic entry point takes a
``numpy.random.Generator`` (PCG64 recommended) or an integer seed; fixed
seeds reproduce draws bit-for-bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .gumbel import ModelParams, TamperingTime, trv_quantile

__all__ = [
    "Case",
    "ExperimentDesign",
    "CensoredSample",
    "make_rng",
    "replicate_rng",
    "draw_trv_lifetimes",
    "generate_censored_sample",
    "classify_case",
]


class Case(enum.Enum):
    """Failure-count taxonomy relative to the stress-change time."""

    I = "I"
    II = "II"
    III = "III"


@dataclass(frozen=True)
class ExperimentDesign:
    """Test plan: n units on test, stop at the r-th failure, stress change at tau."""

    n: int
    r: int
    tau: float

    def __post_init__(self):
        if not (1 <= self.r <= self.n):
            raise ValueError(f"need 1 <= r <= n, got r={self.r}, n={self.n}")
        if not (self.tau > 0):
            raise ValueError(f"tau must be > 0, got {self.tau}")

    @property
    def tampering_time(self) -> TamperingTime:
        return TamperingTime(self.tau)


@dataclass(frozen=True)
class CensoredSample:
    """Ordered observed failure times with the pre-tau count N and case tag.

    ``times[i] <= tau`` exactly for ``i < n_pre_tau`` (a failure at exactly
    tau counts as pre-tau).
    """

    times: np.ndarray
    n_pre_tau: int
    design: ExperimentDesign
    case: Case

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.shape != (self.design.r,):
            raise ValueError(f"expected {self.design.r} observed times, got {times.shape}")
        if np.any(times <= 0):
            raise ValueError("failure times must be > 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("failure times must be strictly increasing")
        n_pre = int(np.count_nonzero(times <= self.design.tau))
        if n_pre != self.n_pre_tau:
            raise ValueError(f"n_pre_tau={self.n_pre_tau} inconsistent with times (counted {n_pre})")
        if classify_case(times, self.design.tau) is not self.case:
            raise ValueError(f"case tag {self.case} inconsistent with times")


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a PCG64 generator; pass through an existing Generator unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def replicate_rng(master_seed: int, replicate: int, attempt: int = 0) -> np.random.Generator:
    """Independent per-replicate stream derived from a master seed.

    Keyed by (master_seed, replicate, attempt) so resampled replicates get a
    fresh stream without disturbing any other replicate.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, replicate, attempt])))


def classify_case(times, tau: float) -> Case:
    """Tag an ordered failure-time vector by its pre-tau failure count."""
    arr = np.asarray(times, dtype=float)
    if arr.size == 0:
        raise ValueError("times must be nonempty")
    if np.any(np.diff(arr) <= 0):
        raise ValueError("times must be strictly increasing")
    n_pre = int(np.count_nonzero(arr <= tau))
    if n_pre == arr.size:
        return Case.I
    if n_pre == 0:
        return Case.III
    return Case.II


def draw_trv_lifetimes(p: ModelParams, tau: TamperingTime, n: int, rng) -> np.ndarray:
    """Draw n i.i.d. tampered lifetimes by inversion of the tampered CDF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = make_rng(rng)
    u = gen.random(n)
    # random() lies in [0, 1); nudge an exact 0 into the open interval
    u[u == 0.0] = math.ulp(0.0)
    return np.asarray(trv_quantile(p, tau, u))


def _break_ties(sorted_times: np.ndarray) -> np.ndarray:
    # Floating-point ties (probability zero in theory) break strict ordering;
    # bump the later draw by one ulp.
    out = sorted_times
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


def generate_censored_sample(p: ModelParams, d: ExperimentDesign, rng) -> CensoredSample:
    """Draw n lifetimes, keep the r smallest, and classify the sample."""
    draws = draw_trv_lifetimes(p, d.tampering_time, d.n, rng)
    draws.sort()
    if np.any(np.diff(draws) <= 0):
        draws = _break_ties(draws)
    times = draws[: d.r].copy()
    n_pre = int(np.count_nonzero(times <= d.tau))
    return CensoredSample(times=times, n_pre_tau=n_pre, design=d, case=classify_case(times, d.tau))
