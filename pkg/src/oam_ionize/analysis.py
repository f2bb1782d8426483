"""Observables of the evolving state: ground/excited split, spherical-
harmonic channel probabilities, kinetic angular momentum, position
expectations, plane projections, and selection-rule compliance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import ndimage

from .angular import Polarization, SelectionRuleSet, derive_selection_rules
from .beam import PropagationField, PulseConfig
from .grid import GridSpec, Wavefunction
from .harmonics import HarmonicIndex, theta_part
from .utils import fft3, ifft3

__all__ = [
    "SphericalSpectrum",
    "ComplianceReport",
    "split_excited",
    "spherical_spectrum",
    "compliance",
    "multiphoton_closure",
    "kinetic_oam",
    "position_expectation",
    "xy_projection",
    "weight_within_radius",
    "mean_radius",
]


@dataclass
class SphericalSpectrum:
    """Channel probabilities P_{L,M} of a state, for L <= L_max.

    P_{L,M} = Int_0^{r_max} dr r^2 |u_{L,M}(r)|^2 with u the radial
    amplitude of the Y_L^M channel.
    """

    entries: dict[HarmonicIndex, float]
    L_max: int
    r_max: float

    @property
    def total(self) -> float:
        return float(sum(self.entries.values()))

    def ranked(self) -> list[tuple[HarmonicIndex, float]]:
        return sorted(self.entries.items(), key=lambda kv: -kv[1])

    def __getitem__(self, idx) -> float:
        return self.entries.get(HarmonicIndex(*idx), 0.0)

    def to_json_obj(self) -> dict:
        return {
            "L_max": self.L_max,
            "r_max": self.r_max,
            "entries": [
                {"L": i.L, "M": i.M, "P": p} for i, p in sorted(self.entries.items())
            ],
        }

    def to_csv(self, path) -> None:
        rows = [(i.L, i.M, p) for i, p in sorted(self.entries.items())]
        np.savetxt(
            path,
            np.asarray(rows, dtype=float),
            delimiter=",",
            header="L,M,P",
            comments="",
            fmt=("%d", "%d", "%.14e"),
        )


def split_excited(
    psi: Wavefunction, ground: Wavefunction
) -> tuple[complex, Wavefunction]:
    """Decompose |psi> = alpha |ground> + |delta>, with <ground|delta> = 0."""
    if psi.grid != ground.grid:
        raise ValueError("state and ground live on different grids")
    alpha = ground.inner(psi)
    delta = psi.values - alpha * ground.values
    return alpha, Wavefunction(delta, psi.grid)


def _interpolator(values: np.ndarray, grid: GridSpec):
    """Tricubic interpolation of a complex grid field at physical points."""
    filt_re = ndimage.spline_filter(values.real, order=3, output=np.float64)
    filt_im = ndimage.spline_filter(values.imag, order=3, output=np.float64)
    origin = np.array([grid.axis(i)[0] for i in range(3)])

    def interp(points: np.ndarray) -> np.ndarray:
        coords = (points - origin).T / grid.h
        re = ndimage.map_coordinates(filt_re, coords, order=3, prefilter=False)
        im = ndimage.map_coordinates(filt_im, coords, order=3, prefilter=False)
        return re + 1j * im

    return interp


def spherical_spectrum(
    delta_psi: Wavefunction,
    L_max: int,
    n_radial: int = 64,
    r_max: float | None = None,
    n_theta: int | None = None,
    n_phi: int | None = None,
) -> SphericalSpectrum:
    """Spherical-harmonic channel probabilities of a (excited) state.

    The Cartesian amplitudes are interpolated onto Gauss-Legendre
    spherical shells of radius up to ``r_max`` (which should stay inside
    the absorber-free region), projected on Y_L^M by Gauss-Legendre x
    uniform-phi quadrature, and integrated radially.
    """
    if L_max < 0:
        raise ValueError("L_max must be >= 0")
    grid = delta_psi.grid
    if r_max is None:
        r_max = 0.8 * min(grid.box_lengths) / 2.0
    n_theta = n_theta if n_theta is not None else L_max + 8
    n_phi = n_phi if n_phi is not None else 2 * L_max + 12
    if n_theta < L_max + 1 or n_phi < 2 * L_max + 1:
        raise ValueError(
            f"angular resolution ({n_theta} x {n_phi}) too low for L_max={L_max}"
        )

    xg, wg = leggauss(n_theta)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    xr, wr = leggauss(n_radial)
    radii = 0.5 * (xr + 1.0) * r_max
    wr = 0.5 * r_max * wr

    sin_t = np.sqrt(1.0 - xg**2)
    dirs = np.stack(
        [
            np.outer(sin_t, np.cos(phi)),
            np.outer(sin_t, np.sin(phi)),
            np.outer(xg, np.ones_like(phi)),
        ],
        axis=-1,
    )  # (n_theta, n_phi, 3)

    interp = _interpolator(delta_psi.values, grid)
    center = np.asarray(grid.center)
    shell_vals = np.empty((n_radial, n_theta, n_phi), dtype=complex)
    for k, r in enumerate(radii):
        pts = center + r * dirs.reshape(-1, 3)
        shell_vals[k] = interp(pts).reshape(n_theta, n_phi)

    entries: dict[HarmonicIndex, float] = {}
    for L in range(L_max + 1):
        for M in range(-L, L + 1):
            # u_LM(r_k) = sum_j w_j theta_LM(x_j) sum_m (2pi/nphi) e^{-iM phi_m} psi
            az = shell_vals @ (np.exp(-1j * M * phi) * (2.0 * math.pi / n_phi))
            u = az @ (theta_part(L, M, xg) * wg)
            entries[HarmonicIndex(L, M)] = float(np.sum(wr * radii**2 * np.abs(u) ** 2))
    return SphericalSpectrum(entries=entries, L_max=L_max, r_max=r_max)


def multiphoton_closure(
    ell: int, pol: Polarization, order: int, L_max: int
) -> set[HarmonicIndex]:
    """(L, M) channels reachable from (0,0) by up to ``order`` rule steps.

    Each step applies either interaction part's selection rules; the
    closure is what a dynamics obeying the rules can populate after that
    many exchanges.
    """
    rules = [derive_selection_rules(ell, pol, part) for part in ("HI", "HII")]
    moves = []
    for rs in rules:
        for dL in range(-rs.max_abs_dL, rs.max_abs_dL + 1):
            if dL % 2 != rs.dL_parity:
                continue
            moves.extend((dL, dM) for dM in rs.allowed_dM)
    reached = {HarmonicIndex(0, 0)}
    frontier = {HarmonicIndex(0, 0)}
    for _ in range(order):
        nxt = set()
        for (L, M) in frontier:
            for dL, dM in moves:
                Lf, Mf = L + dL, M + dM
                if 0 <= Lf <= L_max and abs(Mf) <= Lf:
                    idx = HarmonicIndex(Lf, Mf)
                    if idx not in reached:
                        nxt.add(idx)
        reached |= nxt
        frontier = nxt
    return reached


@dataclass
class ComplianceReport:
    """Spectrum weight classified against the multi-photon rule closure."""

    allowed_weight: float
    forbidden_weight: float
    order: int
    allowed_set: frozenset[HarmonicIndex]
    per_channel: dict[HarmonicIndex, str]

    @property
    def total(self) -> float:
        return self.allowed_weight + self.forbidden_weight

    @property
    def forbidden_fraction(self) -> float:
        return self.forbidden_weight / self.total if self.total > 0 else 0.0

    def to_json_obj(self) -> dict:
        return {
            "order": self.order,
            "allowed_weight": self.allowed_weight,
            "forbidden_weight": self.forbidden_weight,
            "forbidden_fraction": self.forbidden_fraction,
            "allowed_set": [
                {"L": i.L, "M": i.M} for i in sorted(self.allowed_set)
            ],
            "channels": [
                {"L": i.L, "M": i.M, "class": c}
                for i, c in sorted(self.per_channel.items())
            ],
        }


def compliance(
    spec: SphericalSpectrum, ell: int, pol: Polarization, order: int
) -> ComplianceReport:
    """Classify spectrum weight as allowed/forbidden at the given closure order."""
    if order < 0:
        raise ValueError("order must be >= 0")
    allowed = multiphoton_closure(ell, pol, order, spec.L_max)
    aw = fw = 0.0
    per = {}
    for idx, p in spec.entries.items():
        if idx in allowed:
            aw += p
            per[idx] = "allowed"
        else:
            fw += p
            per[idx] = "forbidden"
    return ComplianceReport(
        allowed_weight=aw,
        forbidden_weight=fw,
        order=order,
        allowed_set=frozenset(allowed),
        per_channel=per,
    )


def kinetic_oam(
    psi: Wavefunction,
    pulse: PulseConfig | None = None,
    t: float = 0.0,
    q: float = -1.0,
    field_model: str = "near_origin",
) -> np.ndarray:
    """<r x (p - qA)> / <psi|psi>, the gauge-invariant angular momentum.

    With no pulse (or outside the pulse window) this is the canonical
    <r x p> computed by spectral differentiation.
    """
    grid = psi.grid
    v = psi.values
    h3 = grid.cell_volume
    x, y, z = grid.axes()
    kx, ky, kz = (grid.k_axis(i) for i in range(3))
    norm2 = float(np.sum(np.abs(v) ** 2).real * h3)
    if norm2 == 0.0:
        raise ValueError("zero-norm state")
    vh = fft3(v.astype(np.complex128, copy=True))
    px = ifft3(vh * kx[:, None, None])
    py = ifft3(vh * ky[None, :, None])
    pz = ifft3(vh * kz[None, None, :])
    del vh
    cv = np.conj(v)
    X, Y, Z = x[:, None, None], y[None, :, None], z[None, None, :]
    L = np.array(
        [
            np.sum(cv * (Y * pz - Z * py)).real,
            np.sum(cv * (Z * px - X * pz)).real,
            np.sum(cv * (X * py - Y * px)).real,
        ]
    ) * h3
    if pulse is not None:
        fld = PropagationField(pulse, x, y, z, model=field_model)
        g = fld.coefficient(t)
        if np.any(g):
            if np.ndim(g) == 0:
                ax = 2.0 * np.real(pulse.pol.alpha * g * fld.P)[:, :, None]
                ay = 2.0 * np.real(pulse.pol.beta * g * fld.P)[:, :, None]
            else:
                ax = 2.0 * np.real(pulse.pol.alpha * g[None, None, :] * fld.P[:, :, None])
                ay = 2.0 * np.real(pulse.pol.beta * g[None, None, :] * fld.P[:, :, None])
            dens = (cv * v).real
            # A_z = 0: r x A = (-z Ay, z Ax, x Ay - y Ax)
            L[0] -= q * float(np.sum(dens * (-Z * ay)) * h3)
            L[1] -= q * float(np.sum(dens * (Z * ax)) * h3)
            L[2] -= q * float(np.sum(dens * (X * ay - Y * ax)) * h3)
    return L / norm2


def position_expectation(delta_psi: Wavefunction) -> np.ndarray:
    """<r> over the normalized excited part."""
    grid = delta_psi.grid
    dens = np.abs(delta_psi.values) ** 2
    norm2 = float(dens.sum() * grid.cell_volume)
    if norm2 <= 0.0:
        raise ValueError("zero-norm excited state")
    x, y, z = grid.axes()
    return (
        np.array(
            [
                np.sum(dens.sum(axis=(1, 2)) * x),
                np.sum(dens.sum(axis=(0, 2)) * y),
                np.sum(dens.sum(axis=(0, 1)) * z),
            ]
        )
        * grid.cell_volume
        / norm2
    )


def xy_projection(delta_psi: Wavefunction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """z-integrated density map: (proj[x, y], x_axis, y_axis)."""
    grid = delta_psi.grid
    proj = np.sum(np.abs(delta_psi.values) ** 2, axis=2) * grid.h
    return proj, grid.axis(0), grid.axis(1)


def weight_within_radius(wf: Wavefunction, radius: float) -> float:
    """Probability weight inside |r - center| <= radius (unnormalized)."""
    inside = wf.grid.radius_sq() <= radius**2
    return float(np.sum(np.abs(wf.values[inside]) ** 2) * wf.grid.cell_volume)


def mean_radius(wf: Wavefunction) -> float:
    """<|r|> of the normalized state."""
    dens = np.abs(wf.values) ** 2
    norm2 = float(dens.sum() * wf.grid.cell_volume)
    if norm2 <= 0.0:
        raise ValueError("zero-norm state")
    r = np.sqrt(wf.grid.radius_sq())
    return float(np.sum(dens * r) * wf.grid.cell_volume / norm2)
