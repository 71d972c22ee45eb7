"""Finite prefixes of scalar sequences, in float or exact rational arithmetic.

Plain-text format: one value per line, either a decimal (``0.25``,
``1e-3``, ``1+2j``) or an exact ``p/q`` / integer.  A file whose values are
all integers or ``p/q`` is read in exact mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .operators import parse_number


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """c_0 .. c_{L-1} with an arithmetic mode.

    ``decay_hint`` estimates lim sup |c_n|^(1/n).  ``infinite_tail`` marks
    the values as a prefix of an infinite series rather than a finitely
    supported one.
    """

    values: tuple
    arithmetic: str = "float"
    decay_hint: float | None = None
    infinite_tail: bool = False

    def __post_init__(self):
        if self.arithmetic not in ("float", "exact_rational"):
            raise ValueError(f"unknown arithmetic {self.arithmetic!r}")
        if self.arithmetic == "exact_rational":
            if not all(isinstance(v, Fraction) for v in self.values):
                raise ValueError("exact_rational mode needs Fraction values")
        if self.decay_hint is None:
            object.__setattr__(self, "decay_hint", estimate_decay(self.values))

    @classmethod
    def of(cls, values: Iterable, infinite_tail: bool = False, arithmetic: str | None = None):
        """Build from raw values, picking exact mode when every value is
        an int or Fraction."""
        vals = [v if isinstance(v, (Fraction, float, complex)) else parse_number(v)
                for v in values]
        exact = all(isinstance(v, Fraction) for v in vals)
        if arithmetic is None:
            arithmetic = "exact_rational" if exact else "float"
        if arithmetic == "exact_rational":
            vals = [Fraction(v) if not isinstance(v, Fraction) else v for v in vals]
        else:
            vals = [complex(v) if isinstance(v, complex) else float(v) for v in vals]
        return cls(tuple(vals), arithmetic, None, infinite_tail)

    @property
    def exact(self) -> bool:
        return self.arithmetic == "exact_rational"

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        """Float (or complex) numpy copy of the values."""
        if any(isinstance(v, complex) for v in self.values):
            return np.array([complex(v) for v in self.values])
        return np.array([float(v) for v in self.values])

    def as_object(self) -> np.ndarray:
        return np.array(self.values, dtype=object)

    def to_float(self) -> "CoefficientSequence":
        return CoefficientSequence(tuple(self.as_array().tolist()), "float",
                                   self.decay_hint, self.infinite_tail)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return all(v == 0 for v in self.values)
        return bool(np.all(np.abs(self.as_array()) <= tol))


def estimate_decay(values) -> float:
    """max |c_n|^(1/n) over the last dyadic window [L/2, L), n >= 1."""
    L = len(values)
    if L < 2:
        return 0.0
    lo = max(1, L // 2)
    best = 0.0
    for n in range(lo, L):
        a = abs(complex(values[n])) if not isinstance(values[n], Fraction) else abs(values[n])
        if a == 0:
            continue
        if isinstance(a, Fraction):
            # log of a huge rational without float overflow
            lg = (math.log(a.numerator) - math.log(a.denominator))
        else:
            lg = math.log(a)
        best = max(best, math.exp(lg / n))
    return best


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, complex):
        return repr(v).strip("()")
    s = format(float(v), ".17g")
    # keep floats distinguishable from exact integers on re-read
    return s if any(ch in s for ch in ".en") else s + ".0"


def write_sequence(seq: CoefficientSequence, path) -> None:
    Path(path).write_text("".join(format_value(v) + "\n" for v in seq.values))


def read_sequence(path, infinite_tail: bool = False) -> CoefficientSequence:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    vals = []
    for ln in lines:
        if not ln or ln.startswith("#"):
            continue
        if "/" in ln or ln.lstrip("+-").isdigit():
            vals.append(Fraction(ln))
        elif "j" in ln:
            vals.append(complex(ln))
        else:
            vals.append(float(ln))
    return CoefficientSequence.of(vals, infinite_tail=infinite_tail)
