"""Distribution estimation on the 21-point distance support, TV distance,
bootstrap uncertainty, and mixing-time threshold extraction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import RngStream

MAX_DISTANCE = 20  # God's number: support of 3x3x3 distances is 0..20
SUPPORT_SIZE = MAX_DISTANCE + 1

TV_EPSILONS = (0.5, 0.4, 0.3, 0.25, 0.2, 0.1)

NOT_REACHED = None


class SampleRangeError(ValueError):
    def __init__(self, value, index):
        super().__init__(f"sample {value!r} at index {index} outside 0..{MAX_DISTANCE}")
        self.value = value
        self.index = index


@dataclass
class EmpiricalDistribution:
    counts: np.ndarray  # int64, length 21
    total: int

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


def empirical(samples, support_size: int = SUPPORT_SIZE) -> EmpiricalDistribution:
    """Count distance samples; rejects empties and out-of-range values."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("cannot estimate a distribution from zero samples")
    bad = (samples < 0) | (samples >= support_size)
    if bad.any():
        i = int(np.argmax(bad))
        raise SampleRangeError(int(samples[i]), i)
    counts = np.bincount(samples.astype(np.int64), minlength=support_size)
    return EmpiricalDistribution(counts, int(samples.size))


def tv(p, q) -> float:
    """Total variation: half the L1 distance between probability vectors."""
    p = p.probabilities if isinstance(p, EmpiricalDistribution) else np.asarray(p, dtype=float)
    q = q.probabilities if isinstance(q, EmpiricalDistribution) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"distribution shapes differ: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass
class TvEstimate:
    point: float
    stderr: float       # bootstrap replicate standard deviation (the "+/-")
    ci_low: float       # 2.5 percentile of replicates
    ci_high: float      # 97.5 percentile
    resamples: int


def bootstrap_tv(samples_a, samples_b, resamples: int = 1000,
                 rng: RngStream | None = None,
                 support_size: int = SUPPORT_SIZE) -> TvEstimate:
    """Plug-in TV between two sample sets with bootstrap uncertainty.

    Each replicate resamples both sets with replacement at their own sizes.
    The point estimate is always the plug-in TV, independent of resampling.
    """
    if resamples < 2:
        raise ValueError("resamples must be >= 2")
    ea = empirical(samples_a, support_size)
    eb = empirical(samples_b, support_size)
    point = tv(ea, eb)
    gen = (rng or RngStream(0)).generator
    pa = ea.probabilities
    pb = eb.probabilities
    reps = np.empty(resamples)
    for r in range(resamples):
        ca = gen.multinomial(ea.total, pa)
        cb = gen.multinomial(eb.total, pb)
        reps[r] = 0.5 * np.abs(ca / ea.total - cb / eb.total).sum()
    stderr = float(reps.std(ddof=1))
    lo, hi = np.percentile(reps, [2.5, 97.5])
    return TvEstimate(point, stderr, float(min(lo, point)), float(max(hi, point)), resamples)


@dataclass
class DecayCurve:
    """Sequence of (step, tv, stderr) points; stderr is None for exact curves."""

    points: list = field(default_factory=list)  # (n, tv, stderr-or-None)
    source: str = "monte-carlo"                 # "exact" | "monte-carlo"

    def append(self, n: int, tv_value: float, stderr: float | None = None) -> None:
        if self.points and n <= self.points[-1][0]:
            raise ValueError("steps must be strictly increasing")
        if not 0.0 <= tv_value <= 1.0 + 1e-12:
            raise ValueError(f"tv out of range: {tv_value}")
        self.points.append((n, tv_value, stderr))

    def steps(self):
        return [p[0] for p in self.points]

    def tvs(self):
        return [p[1] for p in self.points]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "tv", "stderr"])
        for n, t, se in self.points:
            w.writerow([n, _fmt(t), "" if se is None else _fmt(se)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "DecayCurve":
        curve = cls(source="unknown")
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                se = row.get("stderr", "")
                curve.append(
                    int(row["n"]), float(row["tv"]),
                    None if se in ("", None) else float(se),
                )
        return curve


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def mixing_threshold(curve: DecayCurve, epsilon: float):
    """First step whose TV is <= epsilon, or NOT_REACHED.

    First crossing even if the curve later rises: decay curves of projected
    functionals are legitimately non-monotone.
    """
    for n, tv_value, _ in curve.points:
        if tv_value <= epsilon:
            return n
    return NOT_REACHED


def threshold_report(curve: DecayCurve, epsilons=TV_EPSILONS) -> list:
    """[(epsilon, first crossing step or NOT_REACHED)] in the given order."""
    return [(eps, mixing_threshold(curve, eps)) for eps in epsilons]


def threshold_report_csv(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "n"])
        for eps, n in report:
            w.writerow([_fmt(eps), "" if n is NOT_REACHED else n])
