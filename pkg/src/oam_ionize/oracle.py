"""Brute-force verification of the angular algebra by sphere quadrature.

Ground truth for the selection rules: every transition integral is
evaluated by direct numerical integration (Gauss-Legendre in cos theta
times a uniform trapezoid rule in phi, spectrally exact for the
band-limited integrands at issue) and compared against the rule
predicate, with no shared code path with the algebraic side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .angular import AngularFactor, SelectionRuleSet
from .harmonics import check_index, theta_part

__all__ = [
    "NONZERO_MIN",
    "ZERO_MAX",
    "ResolutionWarning",
    "SphereQuadrature",
    "RuleVerification",
    "integrate_triple",
    "verify_rule_set",
]

#: |value| above this counts as a genuine nonzero integral.
NONZERO_MIN = 1e-8
#: |value| below this counts as zero; anything in between is flagged as
#: a resolution artifact.
ZERO_MAX = 1e-12


class ResolutionWarning(UserWarning):
    """Requested integrand degree exceeds the quadrature's exactness."""


@lru_cache(maxsize=64)
def _nodes(n_theta: int, n_phi: int):
    x, w = leggauss(n_theta)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    return x, w, phi


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre (cos theta) x uniform (phi) product rule.

    Exact for integrands polynomial in cos theta up to degree
    2*n_theta - 1 carrying azimuthal frequencies |k| < n_phi.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("quadrature sizes must be positive")

    @classmethod
    def for_scan(cls, L_max: int, factor: AngularFactor) -> "SphereQuadrature":
        """Sizes guaranteeing exactness for all L <= L_max transition scans."""
        n_theta = L_max + factor.sin_power // 2 + 2
        n_phi = 2 * L_max + abs(factor.azimuthal) + 2
        return cls(n_theta=n_theta, n_phi=n_phi)

    def nodes(self):
        return _nodes(self.n_theta, self.n_phi)

    def check_resolution(self, factor: AngularFactor, La: int, Lb: int) -> None:
        theta_deg = La + Lb + factor.sin_power
        k = abs(factor.azimuthal) + La + Lb
        if 2 * self.n_theta - 1 < theta_deg or self.n_phi <= k:
            warnings.warn(
                f"quadrature ({self.n_theta} x {self.n_phi}) is not exact for "
                f"degree {theta_deg} / azimuthal order {k}",
                ResolutionWarning,
                stacklevel=3,
            )


def integrate_triple(
    f: AngularFactor | tuple[int, int],
    a: tuple[int, int],
    b: tuple[int, int],
    quad: SphereQuadrature,
) -> complex:
    """Quadrature of Int dOmega conj(Y_a) (sin theta)^n e^{i m phi} Y_b."""
    if not isinstance(f, AngularFactor):
        f = AngularFactor(*f)
    a = check_index(a)
    b = check_index(b)
    quad.check_resolution(f, a.L, b.L)
    x, w, phi = quad.nodes()
    sin_t = np.sqrt(1.0 - x * x)
    theta_vals = (
        theta_part(a.L, a.M, x) * theta_part(b.L, b.M, x) * sin_t**f.sin_power
    )
    phase = np.exp(1j * (f.azimuthal + b.M - a.M) * phi)
    return complex(np.sum(w * theta_vals) * (2.0 * math.pi / quad.n_phi) * np.sum(phase))


def _all_indices(L_max: int):
    return [(L, M) for L in range(L_max + 1) for M in range(-L, L + 1)]


def _theta_matrix(quad: SphereQuadrature, L_max: int, sin_power: int) -> np.ndarray:
    """T[a, b] = sum_j w_j theta_a(x_j) theta_b(x_j) sin(x_j)^n for all pairs."""
    x, w, _ = quad.nodes()
    idx = _all_indices(L_max)
    th = np.array([theta_part(L, M, x) for (L, M) in idx])
    weighted = th * (w * np.sqrt(1.0 - x * x) ** sin_power)
    return th @ weighted.T


def _phi_factor(quad: SphereQuadrature, k: int) -> complex:
    _, _, phi = quad.nodes()
    return complex(2.0 * math.pi / quad.n_phi * np.sum(np.exp(1j * k * phi)))


@dataclass
class RuleVerification:
    """Outcome of scanning all transitions against a rule set.

    ``disagreements`` lists rule-forbidden transitions where the oracle
    found a nonzero integral (any entry means the rule set is wrong);
    ``accidental_zeros`` lists rule-allowed transitions whose integral
    vanishes anyway; ``flagged`` holds values between the zero and
    nonzero thresholds (resolution artifacts).
    """

    rules: SelectionRuleSet
    L_max: int
    n_theta: int
    n_phi: int
    n_pairs: int = 0
    disagreements: list[tuple[int, int, int, int, float]] = field(default_factory=list)
    accidental_zeros: list[tuple[int, int, int, int, float]] = field(default_factory=list)
    flagged: list[tuple[int, int, int, int, float]] = field(default_factory=list)
    class_hits: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.disagreements and not self.flagged

    def missing_classes(self) -> list[tuple[int, int]]:
        """Allowed (dL, dM) classes never seen with a nonzero integral."""
        return [
            cls
            for cls in self.rules.allowed_classes(self.L_max)
            if self.class_hits.get(cls, 0) == 0
        ]

    def to_json_obj(self) -> dict:
        def tuples(rows):
            return [
                {"Li": r[0], "Mi": r[1], "Lf": r[2], "Mf": r[3], "value": r[4]}
                for r in rows
            ]

        return {
            "rules": self.rules.to_json_obj(),
            "L_max": self.L_max,
            "quadrature": {"n_theta": self.n_theta, "n_phi": self.n_phi},
            "n_pairs": self.n_pairs,
            "disagreements": tuples(self.disagreements),
            "accidental_zeros": tuples(self.accidental_zeros),
            "flagged": tuples(self.flagged),
            "class_hits": [
                {"dL": k[0], "dM": k[1], "nonzero_pairs": v}
                for k, v in sorted(self.class_hits.items())
            ],
            "missing_classes": [
                {"dL": k[0], "dM": k[1]} for k in self.missing_classes()
            ],
            "ok": self.ok,
        }


def _oracle_factors(rules: SelectionRuleSet) -> list[AngularFactor]:
    """Angular factors whose integrals realize the rule set's part.

    For the linear part each active Delta M branch contributes the factor
    (sin theta)^{|ell|+1} e^{i dM phi}; the branches live on disjoint
    Delta M so they can be scanned independently.  For the quadratic part
    the oscillating term's angular factor is (sin theta)^{2|ell|}
    e^{i 2 ell phi} regardless of polarization (the alpha^2 + beta^2
    scalar in front does not change which transitions are angularly
    allowed).
    """
    if rules.hamiltonian_part == "HI":
        n = abs(rules.ell) + 1
        return [AngularFactor(n, dM) for dM in rules.allowed_dM]
    return [AngularFactor(2 * abs(rules.ell), 2 * rules.ell)]


def verify_rule_set(
    rules: SelectionRuleSet,
    L_max: int,
    quad: SphereQuadrature | None = None,
) -> RuleVerification:
    """Scan every (Li,Mi) -> (Lf,Mf) with L <= L_max against the rules.

    The oracle value of a transition is the sum of integrals of the
    part's angular factors (see :func:`_oracle_factors`); branches carry
    distinct azimuthal transfer, so no cross-branch cancellation can
    mask a disagreement.
    """
    factors = _oracle_factors(rules)
    if quad is None:
        widest = max(factors, key=lambda f: (f.sin_power, abs(f.azimuthal)))
        quad = SphereQuadrature.for_scan(L_max, widest)
    for f in factors:
        quad.check_resolution(f, L_max, L_max)

    idx = _all_indices(L_max)
    n_idx = len(idx)
    values = np.zeros((n_idx, n_idx), dtype=complex)
    for f in factors:
        T = _theta_matrix(quad, L_max, f.sin_power)
        phis = np.array(
            [
                [_phi_factor(quad, f.azimuthal + Mb - Ma) for (_, Mb) in idx]
                for (_, Ma) in idx
            ]
        )
        values += T * phis

    report = RuleVerification(
        rules=rules, L_max=L_max, n_theta=quad.n_theta, n_phi=quad.n_phi
    )
    for ib, (Li, Mi) in enumerate(idx):
        for ia, (Lf, Mf) in enumerate(idx):
            report.n_pairs += 1
            v = abs(values[ia, ib])
            allowed = rules.allows(Li, Mi, Lf, Mf)
            if v > NONZERO_MIN:
                if allowed:
                    key = (Lf - Li, Mf - Mi)
                    report.class_hits[key] = report.class_hits.get(key, 0) + 1
                else:
                    report.disagreements.append((Li, Mi, Lf, Mf, v))
            elif v < ZERO_MAX:
                if allowed:
                    report.accidental_zeros.append((Li, Mi, Lf, Mf, v))
            else:
                report.flagged.append((Li, Mi, Lf, Mf, v))
    return report
