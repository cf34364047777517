"""Scalar radius recurrences of concentric play and their exit times.

Under concentric play the distance to the centre evolves by

    toward:  T_h(R) = sqrt((R - nu h)^2 + 2h)   (Paul drifts toward z)
    away:    T_h(R) = sqrt((R + nu h)^2 + 2h)   (drift points away)
    none:    T_h(R) = sqrt(R^2 + 2(d-1)h)       (no drift)

with h = eps^2. The toward map has the fixed point 1/nu + nu h / 2.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_STEPS = 100_000_000


@dataclass(frozen=True)
class DriftRecurrence:
    nu: float
    h: float
    sign: str = "toward"
    d: int = 2

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.sign not in ("toward", "away", "none"):
            raise ValueError(f"unknown sign {self.sign!r}")
        if self.d < 2:
            raise ValueError("d must be at least 2")

    @property
    def _shift(self) -> float:
        return {"toward": -self.nu * self.h, "away": self.nu * self.h, "none": 0.0}[self.sign]

    @property
    def _add(self) -> float:
        return 2.0 * self.h * ((self.d - 1) if self.sign == "none" else 1)

    @property
    def fixed_point(self) -> float:
        if self.sign != "toward" or self.nu == 0:
            return math.inf
        return 1.0 / self.nu + 0.5 * self.nu * self.h

    def halved(self) -> "DriftRecurrence":
        return DriftRecurrence(self.nu, self.h / 2, self.sign, self.d)


def apply_T(rec: DriftRecurrence, R):
    R = np.asarray(R, float)
    if np.any(R < 0):
        raise ValueError("radius must be nonnegative")
    out = np.sqrt((R + rec._shift) ** 2 + rec._add)
    return float(out) if out.ndim == 0 else out


@njit(cache=True)
def _iterate(R0, shift, add, n):
    out = np.empty(n + 1)
    out[0] = R0
    r = R0
    for k in range(n):
        r = math.sqrt((r + shift) ** 2 + add)
        out[k + 1] = r
    return out


def iterate_T(rec: DriftRecurrence, R0: float, n: int) -> np.ndarray:
    """R_0, ..., R_n."""
    if R0 < 0:
        raise ValueError("radius must be nonnegative")
    return _iterate(float(R0), rec._shift, rec._add, int(n))


def closed_form(rec: DriftRecurrence, R0: float, n) -> float:
    if rec.sign != "none":
        raise ValueError("closed form exists only without drift")
    return np.sqrt(R0 ** 2 + 2.0 * (rec.d - 1) * np.asarray(n, float) * rec.h)


@njit(cache=True)
def _count_below(a, b, shift, add, cap):
    r = a
    k = 0
    while r < b:
        k += 1
        if k > cap:
            return -1
        nr = math.sqrt((r + shift) ** 2 + add)
        if nr - r < 1e-15:
            return -2
        r = nr
    return k


def exit_count(rec: DriftRecurrence, a: float, b: float, cap: int = MAX_STEPS) -> int:
    """Number of iterates T^n(a), n >= 0, strictly below b."""
    if a < 0:
        raise ValueError("radius must be nonnegative")
    k = _count_below(float(a), float(b), rec._shift, rec._add, int(cap))
    if k < 0:
        raise ValueError("infinite exit time")
    return int(k)


def exit_time(rec: DriftRecurrence, a: float, b: float, cap: int = MAX_STEPS) -> float:
    """h times the number of iterates strictly below b."""
    return rec.h * exit_count(rec, a, b, cap)


def write_table(path, R: np.ndarray):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "R_n"])
        for k, r in enumerate(R):
            w.writerow([k, repr(float(r))])
