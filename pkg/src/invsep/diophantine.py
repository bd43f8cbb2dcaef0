"""Simultaneous-return search: exponents driving several unit-modulus
numbers' powers close to 1 at once.

The search is a direct minimal scan.  Angle sets carrying exact rational
representations (theta = 2*pi*p/q) are scanned with integer residues, so an
exact return (defect 0) is recognized regardless of floating noise, and the
:func:`rational_shortcut` closed form always agrees with the scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL_DEFAULT = 1e-9
M_MAX_DEFAULT = 10 ** 6
_SCAN_CHUNK = 4096


class ReturnSearchExhausted(RuntimeError):
    """No exponent up to m_max met the tolerance; retry with a larger bound."""


@dataclass(frozen=True)
class AngleSet:
    """Deduplicated angles in [0, 2*pi), with optional exact fractions.

    ``fractions[j]`` is the turn theta_j / (2*pi) when exactly known, else
    None.  ``counts`` carries cluster multiplicities when the set came from
    clustering orbit values.
    """

    angles: tuple[float, ...]
    fractions: tuple[Fraction | None, ...] = None
    counts: tuple[int, ...] = None

    def __post_init__(self):
        angles = tuple(float(a) % TWO_PI for a in self.angles)
        object.__setattr__(self, "angles", angles)
        if self.fractions is None:
            object.__setattr__(self, "fractions", (None,) * len(angles))
        if self.counts is None:
            object.__setattr__(self, "counts", (1,) * len(angles))
        if len(self.fractions) != len(angles) or len(self.counts) != len(angles):
            raise ValueError("fractions/counts length mismatch")

    @classmethod
    def from_turns(cls, turns: Sequence[Fraction]) -> "AngleSet":
        turns = [Fraction(t) % 1 for t in turns]
        uniq = sorted(set(turns))
        return cls(tuple(TWO_PI * float(t) for t in uniq), tuple(uniq))

    @property
    def all_rational(self) -> bool:
        return len(self.angles) > 0 and all(f is not None for f in self.fractions)

    def __len__(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class ReturnResult:
    m: int
    max_defect: float


def power_defect(A: AngleSet, m: int) -> float:
    """max_j |exp(i*theta_j*m) - 1|, exact for rational angles."""
    worst = 0.0
    for theta, frac in zip(A.angles, A.fractions):
        if frac is not None:
            res = (frac * m) % 1
            d = 0.0 if res == 0 else 2.0 * abs(math.sin(math.pi * float(res)))
        else:
            rem = math.remainder(theta * m, TWO_PI)
            d = 2.0 * abs(math.sin(rem / 2.0))
        worst = max(worst, d)
    return worst


def simultaneous_return(A: AngleSet, tol: float, m_max: int = M_MAX_DEFAULT,
                        start: int = 1) -> ReturnResult:
    """Smallest m in [start, m_max] with every |exp(i*theta*m) - 1| < tol.

    Minimality within the scanned range is guaranteed by scan order.  For
    irrational angle sets existence holds but no a-priori bound does, so
    exhaustion raises and the caller retries with a larger m_max.
    """
    if not 0 < tol:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if len(A) == 0:
        return ReturnResult(max(start, 1), 0.0)
    if A.all_rational:
        nums = np.array([f.numerator for f in A.fractions], dtype=np.int64)
        dens = np.array([f.denominator for f in A.fractions], dtype=np.int64)
        for lo in range(max(start, 1), m_max + 1, _SCAN_CHUNK):
            ms = np.arange(lo, min(lo + _SCAN_CHUNK, m_max + 1), dtype=np.int64)
            res = (ms[:, None] * nums[None, :]) % dens[None, :]
            defects = 2.0 * np.abs(np.sin(np.pi * res / dens[None, :]))
            defects[res == 0] = 0.0
            hit = np.nonzero(defects.max(axis=1) < tol)[0]
            if hit.size:
                i = int(hit[0])
                return ReturnResult(int(ms[i]), float(defects[i].max()))
        raise ReturnSearchExhausted(f"no return time <= {m_max} under tol {tol}")
    thetas = np.asarray(A.angles)
    for lo in range(max(start, 1), m_max + 1, _SCAN_CHUNK):
        ms = np.arange(lo, min(lo + _SCAN_CHUNK, m_max + 1), dtype=np.float64)
        rem = np.remainder(ms[:, None] * thetas[None, :] + math.pi, TWO_PI) - math.pi
        defects = 2.0 * np.abs(np.sin(rem / 2.0))
        hit = np.nonzero(defects.max(axis=1) < tol)[0]
        if hit.size:
            i = int(hit[0])
            return ReturnResult(int(ms[i]), float(defects[i].max()))
    raise ReturnSearchExhausted(f"no return time <= {m_max} under tol {tol}")


def rational_shortcut(A: AngleSet) -> int:
    """Exact least common return time for angles 2*pi*p/q: lcm of the
    reduced denominators (defect 0 there)."""
    if not A.all_rational:
        raise ValueError("rational_shortcut needs exact fractions on every angle")
    return math.lcm(*(f.denominator for f in A.fractions), 1)


def angle_cluster(values: Sequence[complex], eta: float,
                  angle_tol: float = ANGLE_TOL_DEFAULT) -> AngleSet:
    """Cluster the arguments of the values with modulus >= eta.

    Returns cluster representatives with multiplicities; clusters within
    angle_tol coalesce, including across the 0 / 2*pi seam.
    """
    kept = [complex(v) for v in values if abs(v) >= eta]
    if not kept:
        return AngleSet(())
    angles = sorted(math.atan2(v.imag, v.real) % TWO_PI for v in kept)
    clusters: list[list[float]] = [[angles[0]]]
    for a in angles[1:]:
        if a - clusters[-1][-1] <= angle_tol:
            clusters[-1].append(a)
        else:
            clusters.append([a])
    # wraparound: last cluster may touch the first one through 2*pi
    if len(clusters) > 1 and (angles[0] + TWO_PI) - clusters[-1][-1] <= angle_tol:
        merged = clusters.pop()
        clusters[0] = [a - TWO_PI for a in merged] + clusters[0]
    reps = tuple(float(np.mean(c)) % TWO_PI for c in clusters)
    counts = tuple(len(c) for c in clusters)
    return AngleSet(reps, counts=counts)
