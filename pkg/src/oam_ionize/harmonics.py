"""Spherical-harmonic indices, finite expansions, and pointwise evaluation.

Conventions: quantum-normalized complex spherical harmonics with the
Condon-Shortley phase,

    Y_L^M(theta, phi) = N_LM * P_L^M(cos theta) * exp(i M phi),
    Y_L^(-|M|) = (-1)^|M| * conj(Y_L^|M|),

where P_L^M is the Ferrers associated Legendre function (Condon-Shortley
phase included, as in ``scipy.special.lpmv``).  With this convention the
extremal harmonic satisfies

    Y_L^L = (-1)^L sqrt((2L+1)!) sin^L(theta) e^{i L phi} / (2^L L! sqrt(4 pi)).
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, NamedTuple

import numpy as np
from scipy.special import lpmv

__all__ = [
    "DROP_TOL",
    "HarmonicIndex",
    "HarmonicExpansion",
    "check_index",
    "sph_harm",
    "theta_part",
]

#: Default tolerance below which expansion coefficients are dropped
#: (double-precision noise floor after exact-rational -> float conversion).
DROP_TOL = 1e-14

_FOUR_PI = 4.0 * math.pi


class HarmonicIndex(NamedTuple):
    """Index (L, M) of a spherical harmonic; valid when L >= 0 and |M| <= L."""

    L: int
    M: int


def check_index(idx: tuple[int, int]) -> HarmonicIndex:
    """Validate and normalize an (L, M) pair."""
    L, M = int(idx[0]), int(idx[1])
    if L < 0 or abs(M) > L:
        raise ValueError(f"invalid harmonic index (L={L}, M={M})")
    return HarmonicIndex(L, M)


def _norm_constant(L: int, M: int) -> float:
    # sqrt((2L+1)/(4 pi) * (L-M)!/(L+M)!) with the factorial ratio exact
    ratio = math.factorial(L - M) / math.factorial(L + M)
    return math.sqrt((2 * L + 1) / _FOUR_PI * ratio)


def theta_part(L: int, M: int, costheta) -> np.ndarray:
    """Polar factor of Y_L^M, i.e. Y_L^M = theta_part * exp(i M phi)."""
    check_index((L, M))
    x = np.asarray(costheta, dtype=float)
    if M >= 0:
        return _norm_constant(L, M) * lpmv(M, L, x)
    m = -M
    return (-1) ** m * _norm_constant(L, m) * lpmv(m, L, x)


def sph_harm(L: int, M: int, theta, phi) -> np.ndarray:
    """Evaluate Y_L^M at polar angle(s) theta and azimuth(s) phi."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return theta_part(L, M, np.cos(theta)) * np.exp(1j * M * phi)


class HarmonicExpansion:
    """Finite map (L, M) -> complex coefficient, a function on the sphere.

    Represents ``f(theta, phi) = sum c_LM Y_L^M``.  Terms with
    ``|c| < drop_tol`` are removed by :meth:`cleanup`; all mutating
    helpers return ``self`` for chaining.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[HarmonicIndex, complex] | None = None):
        self.terms: dict[HarmonicIndex, complex] = {}
        if terms:
            for idx, c in terms.items():
                self.terms[check_index(idx)] = complex(c)

    def __getitem__(self, idx: tuple[int, int]) -> complex:
        return self.terms.get(HarmonicIndex(*idx), 0.0 + 0.0j)

    def __iter__(self) -> Iterator[tuple[HarmonicIndex, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        inner = ", ".join(f"({i.L},{i.M}): {c:.6g}" for i, c in sorted(self.terms.items()))
        return f"HarmonicExpansion({{{inner}}})"

    def add(self, idx: tuple[int, int], c: complex) -> "HarmonicExpansion":
        key = check_index(idx)
        self.terms[key] = self.terms.get(key, 0.0 + 0.0j) + complex(c)
        return self

    def scaled(self, c: complex) -> "HarmonicExpansion":
        return HarmonicExpansion({i: v * c for i, v in self.terms.items()})

    def cleanup(self, drop_tol: float = DROP_TOL) -> "HarmonicExpansion":
        self.terms = {i: c for i, c in self.terms.items() if abs(c) >= drop_tol}
        return self

    @property
    def max_L(self) -> int:
        return max((i.L for i in self.terms), default=-1)

    def indices(self) -> Iterable[HarmonicIndex]:
        return self.terms.keys()

    def evaluate(self, theta, phi) -> np.ndarray:
        """Pointwise value sum_LM c_LM Y_L^M(theta, phi)."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
        for (L, M), c in self.terms.items():
            out += c * sph_harm(L, M, theta, phi)
        return out

    def to_json_obj(self) -> list[dict]:
        return [
            {"L": i.L, "M": i.M, "re": c.real, "im": c.imag}
            for i, c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json_obj(cls, obj: list[dict]) -> "HarmonicExpansion":
        exp = cls()
        for t in obj:
            exp.add((t["L"], t["M"]), t["re"] + 1j * t["im"])
        return exp
