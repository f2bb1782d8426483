"""Angular algebra for vortex-beam ionization matrix elements.

Everything here is exact algebra on spherical harmonics: decomposition of
the interaction's angular factors ``(sin theta)^n exp(i m phi)`` into
harmonics, point products of two harmonics via Clebsch-Gordan coupling,
the angular coupling coefficients of the linear (A.p) and quadratic (A^2)
interaction terms, and the (Delta L, Delta M) selection rules they imply.
No numerical integration is used; the quadrature module provides the
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType

from .cg import clebsch_gordan, clebsch_gordan_exact
from .harmonics import DROP_TOL, HarmonicExpansion, HarmonicIndex, check_index

__all__ = [
    "AngularFactor",
    "Polarization",
    "SelectionRuleSet",
    "expand_sin_power_phase",
    "product_expansion",
    "expansion_product",
    "hi_angular_coupling",
    "hii_angular_coupling",
    "derive_selection_rules",
]

_FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class AngularFactor:
    """The angular factor (sin theta)^sin_power * exp(i * azimuthal * phi)."""

    sin_power: int
    azimuthal: int

    def __post_init__(self):
        if self.sin_power < 0:
            raise ValueError("sin_power must be non-negative")


@dataclass(frozen=True)
class Polarization:
    """Transverse polarization (alpha, beta) of the field amplitude.

    Normalized so that |alpha|^2 + |beta|^2 = 1.  The combinations

        c_plus  = (alpha - i beta) / 2     (weights Delta M = ell + 1)
        c_minus = (alpha + i beta) / 2     (weights Delta M = ell - 1)

    select which azimuthal branch of the linear interaction survives:
    right circular (beta = i alpha) keeps only c_plus, left circular
    (beta = -i alpha) keeps only c_minus.
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        n = math.sqrt(abs(self.alpha) ** 2 + abs(self.beta) ** 2)
        if n == 0.0:
            raise ValueError("polarization vector must be nonzero")
        object.__setattr__(self, "alpha", complex(self.alpha) / n)
        object.__setattr__(self, "beta", complex(self.beta) / n)

    @classmethod
    def linear_x(cls) -> "Polarization":
        return cls(1.0, 0.0)

    @classmethod
    def linear_y(cls) -> "Polarization":
        return cls(0.0, 1.0)

    @classmethod
    def circular_right(cls) -> "Polarization":
        return cls(1.0, 1.0j)

    @classmethod
    def circular_left(cls) -> "Polarization":
        return cls(1.0, -1.0j)

    _NAMES = ("linear-x", "linear-y", "circ-right", "circ-left")

    @classmethod
    def from_name(cls, name: str) -> "Polarization":
        table = {
            "linear-x": cls.linear_x,
            "linear-y": cls.linear_y,
            "circ-right": cls.circular_right,
            "circ-left": cls.circular_left,
        }
        try:
            return table[name]()
        except KeyError:
            raise ValueError(
                f"unknown polarization {name!r}; expected one of {sorted(table)}"
            ) from None

    def coupling_weights(self) -> tuple[complex, complex]:
        """(c_plus, c_minus) weighting the Delta M = ell+1 / ell-1 branches."""
        c_plus = (self.alpha - 1j * self.beta) / 2.0
        c_minus = (self.alpha + 1j * self.beta) / 2.0
        return c_plus, c_minus

    def quadratic_weight(self) -> complex:
        """alpha^2 + beta^2, the scalar multiplying the 2-omega A^2 term."""
        return self.alpha**2 + self.beta**2


@lru_cache(maxsize=4096)
def _product_terms(l1: int, l2: int, m1: int, m2: int):
    """Cached immutable term map for Y_l1^m1 * Y_l2^m2."""
    M = m1 + m2
    out: dict[HarmonicIndex, complex] = {}
    for L in range(abs(l1 - l2), l1 + l2 + 1):
        if abs(M) > L:
            continue
        s1, _ = clebsch_gordan_exact(l1, l2, 0, 0, L, 0)
        if s1 == 0:
            continue
        s2, _ = clebsch_gordan_exact(l1, l2, m1, m2, L, M)
        if s2 == 0:
            continue
        pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) / (_FOUR_PI * (2 * L + 1)))
        c = (
            pref
            * clebsch_gordan(l1, l2, 0, 0, L, 0)
            * clebsch_gordan(l1, l2, m1, m2, L, M)
        )
        out[HarmonicIndex(L, M)] = complex(c)
    return MappingProxyType(out)


def product_expansion(
    a: tuple[int, int], b: tuple[int, int]
) -> HarmonicExpansion:
    """Expansion of the pointwise product Y_a * Y_b in spherical harmonics.

    Support is limited to |l1 - l2| <= L <= l1 + l2 with M = m1 + m2;
    terms whose Clebsch-Gordan factors vanish exactly are absent (they
    are detected in exact rational arithmetic, never by a float
    threshold).
    """
    a = check_index(a)
    b = check_index(b)
    return HarmonicExpansion(dict(_product_terms(a.L, b.L, a.M, b.M)))


def expansion_product(
    e1: HarmonicExpansion, e2: HarmonicExpansion, drop_tol: float = DROP_TOL
) -> HarmonicExpansion:
    """Product of two finite expansions, re-expanded in harmonics."""
    out = HarmonicExpansion()
    for i1, c1 in e1:
        for i2, c2 in e2:
            w = c1 * c2
            for idx, c in _product_terms(i1.L, i2.L, i1.M, i2.M).items():
                out.add(idx, w * c)
    return out.cleanup(drop_tol)


def _sin2_expansion() -> HarmonicExpansion:
    # sin^2 theta = (4 sqrt(pi)/3) * (Y_0^0 - Y_2^0/sqrt(5))
    c = 4.0 * math.sqrt(math.pi) / 3.0
    return HarmonicExpansion(
        {HarmonicIndex(0, 0): c, HarmonicIndex(2, 0): -c / math.sqrt(5.0)}
    )


def _extremal_coefficient(m: int) -> float:
    # sin^|m| theta * e^{i m phi} = coeff * Y_|m|^m, from
    # Y_L^L = (-1)^L sqrt((2L+1)!) sin^L e^{iL phi} / (2^L L! sqrt(4 pi))
    # and Y_L^-L = conj-partner without the (-1)^L sign.
    am = abs(m)
    coeff = 2**am * math.factorial(am) * math.sqrt(_FOUR_PI / math.factorial(2 * am + 1))
    if m >= 0:
        coeff *= (-1) ** m
    return coeff


@lru_cache(maxsize=1024)
def _expand_cached(n: int, m: int):
    if n < abs(m) or (n - abs(m)) % 2 != 0:
        raise ValueError(
            f"(sin theta)^{n} e^(i {m} phi) has no finite harmonic expansion: "
            "need sin_power >= |azimuthal| with the same parity"
        )
    exp = HarmonicExpansion({HarmonicIndex(abs(m), m): _extremal_coefficient(m)})
    sin2 = _sin2_expansion()
    for _ in range((n - abs(m)) // 2):
        exp = expansion_product(exp, sin2)
    exp.cleanup()
    return MappingProxyType(dict(exp.terms))


def expand_sin_power_phase(
    factor: AngularFactor | tuple[int, int]
) -> HarmonicExpansion:
    """Finite harmonic expansion of (sin theta)^n * exp(i m phi).

    Built recursively from the extremal harmonic Y_|m|^m and repeated
    multiplication by the sin^2 theta expansion; the result has support
    L <= n and reproduces the factor pointwise on the sphere.

    Raises
    ------
    ValueError
        If n < |m| or n - |m| is odd; such factors are not band-limited
        (no finite expansion exists).
    """
    if not isinstance(factor, AngularFactor):
        factor = AngularFactor(*factor)
    return HarmonicExpansion(dict(_expand_cached(factor.sin_power, factor.azimuthal)))


def _transition_coefficient(
    expansion: HarmonicExpansion,
    initial: HarmonicIndex,
    final: HarmonicIndex,
) -> complex:
    """Coefficient of Y_final in (expansion * Y_initial).

    Equals the integral over the sphere of conj(Y_final) * f * Y_initial
    for f given by the expansion, by orthonormality.
    """
    val = 0.0 + 0.0j
    for (K, mf), c in expansion:
        if mf + initial.M != final.M:
            continue
        terms = _product_terms(K, initial.L, mf, initial.M)
        hit = terms.get(final)
        if hit is not None:
            val += c * hit
    return val


def hi_angular_coupling(
    ell: int,
    pol: Polarization,
    initial: tuple[int, int],
    final: tuple[int, int],
) -> complex:
    """Angular coefficient of the linear-interaction transition element.

    Returns the coefficient multiplying exp(-i omega t) (absorption side)
    of the angular integral

        Int dOmega conj(Y_final) [alpha (sin theta)^{|ell|+1} cos phi
            + beta (sin theta)^{|ell|+1} sin phi] e^{i ell phi} Y_initial,

    built entirely from :func:`expand_sin_power_phase` and
    :func:`product_expansion`.  Radial factors, the (E_i - E_f) energy
    prefactor and the global exp(i chi) phase are omitted; the emission
    (exp(+i omega t)) coefficient is the complex conjugate with
    ell -> -ell.  The value is exactly zero for every transition the
    selection rules forbid.
    """
    initial = check_index(initial)
    final = check_index(final)
    c_plus, c_minus = pol.coupling_weights()
    n = abs(ell) + 1
    val = 0.0 + 0.0j
    if c_plus != 0.0:
        val += c_plus * _transition_coefficient(
            expand_sin_power_phase((n, ell + 1)), initial, final
        )
    if c_minus != 0.0:
        val += c_minus * _transition_coefficient(
            expand_sin_power_phase((n, ell - 1)), initial, final
        )
    return val


def hii_angular_coupling(
    ell: int,
    pol: Polarization,
    initial: tuple[int, int],
    final: tuple[int, int],
) -> complex:
    """Angular coefficient of the oscillating (2 omega) part of the A^2 term.

    Returns (alpha^2 + beta^2) times the angular integral of
    conj(Y_final) (sin theta)^{2|ell|} e^{i 2 ell phi} Y_initial.  The
    polarization scalar alpha^2 + beta^2 vanishes identically for
    circular polarization (the A^2 envelope is then time independent);
    the angular structure itself is what the quadratic selection rules
    describe.  The time-independent ponderomotive part is not included
    here (it is handled by the propagator directly).
    """
    initial = check_index(initial)
    final = check_index(final)
    scalar = pol.quadratic_weight()
    if scalar == 0.0:
        return 0.0 + 0.0j
    exp = expand_sin_power_phase((2 * abs(ell), 2 * ell))
    return scalar * _transition_coefficient(exp, initial, final)


@dataclass(frozen=True)
class SelectionRuleSet:
    """Decidable predicate for allowed (Delta L, Delta M) transitions.

    ``dL_parity`` is the required value of Delta L mod 2; ``allowed_dM``
    the tuple of permitted Delta M values.  The universal constraints
    L >= 0 and |M| <= L always apply on both sides.
    """

    hamiltonian_part: str
    ell: int
    max_abs_dL: int
    dL_parity: int
    allowed_dM: tuple[int, ...]

    def allows(self, Li: int, Mi: int, Lf: int, Mf: int) -> bool:
        check_index((Li, Mi))
        check_index((Lf, Mf))
        dL = Lf - Li
        dM = Mf - Mi
        return (
            abs(dL) <= self.max_abs_dL
            and dL % 2 == self.dL_parity
            and dM in self.allowed_dM
        )

    def allowed_classes(self, L_max: int) -> list[tuple[int, int]]:
        """All (dL, dM) classes realizable by some valid pair with L <= L_max."""
        out = []
        for dL in range(-self.max_abs_dL, self.max_abs_dL + 1):
            if dL % 2 != self.dL_parity:
                continue
            for dM in self.allowed_dM:
                if any(
                    0 <= Li + dL <= L_max
                    and abs(Mi) <= Li
                    and abs(Mi + dM) <= Li + dL
                    for Li in range(L_max + 1)
                    for Mi in range(-Li, Li + 1)
                ):
                    out.append((dL, dM))
        return out

    def to_json_obj(self) -> dict:
        return {
            "hamiltonian_part": self.hamiltonian_part,
            "ell": self.ell,
            "max_abs_dL": self.max_abs_dL,
            "dL_parity": self.dL_parity,
            "allowed_dM": list(self.allowed_dM),
        }

    def describe(self) -> str:
        parity = "even" if self.dL_parity == 0 else "odd"
        dm = ", ".join(f"{d:+d}" for d in self.allowed_dM)
        return (
            f"{self.hamiltonian_part}: |dL| <= {self.max_abs_dL}, "
            f"dL {parity}, dM in {{{dm}}}"
        )


def derive_selection_rules(
    ell: int, pol: Polarization, part: str
) -> SelectionRuleSet:
    """Selection rules of the linear ("HI") or quadratic ("HII") coupling.

    For the linear part: |Delta L| <= |ell| + 1 with Delta L + |ell| + 1
    even, and Delta M drawn from {ell + 1, ell - 1} according to which
    polarization weight survives.  For the quadratic 2-omega part:
    |Delta L| <= 2 |ell|, Delta L even, Delta M = 2 ell (a polarization-
    independent angular structure).
    """
    if part == "HI":
        c_plus, c_minus = pol.coupling_weights()
        dM = []
        if c_plus != 0.0:
            dM.append(ell + 1)
        if c_minus != 0.0:
            dM.append(ell - 1)
        return SelectionRuleSet(
            hamiltonian_part="HI",
            ell=ell,
            max_abs_dL=abs(ell) + 1,
            dL_parity=(abs(ell) + 1) % 2,
            allowed_dM=tuple(sorted(dM)),
        )
    if part == "HII":
        return SelectionRuleSet(
            hamiltonian_part="HII",
            ell=ell,
            max_abs_dL=2 * abs(ell),
            dL_parity=0,
            allowed_dM=(2 * ell,),
        )
    raise ValueError(f"unknown Hamiltonian part {part!r}; expected 'HI' or 'HII'")
