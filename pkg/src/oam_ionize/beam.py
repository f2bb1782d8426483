"""Vortex-pulse vector potential: Laguerre-Gaussian transverse profile,
sin^2 temporal envelope with step-function windowing, polarization, and
the near-origin polynomial reduction used for the atom-scale dynamics.

All quantities are in atomic units.  The field is transverse (x, y
components only); the electric field is the analytic time derivative
E = -dA/dt, including envelope-derivative terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre

from .angular import Polarization

__all__ = [
    "C_AU",
    "PulseConfig",
    "FieldSample",
    "lg_mode",
    "vector_potential",
    "near_origin_potential",
    "cep_map",
    "PropagationField",
]

#: Speed of light in atomic units.
C_AU = 137.035999084


@dataclass(frozen=True)
class PulseConfig:
    """All parameters of the pulsed vortex beam.

    ``amplitude`` is the vector-potential amplitude A0.  Alternatively
    ``target_field = (rho_ref, E_ref)`` solves for the A0 that produces a
    peak electric-field amplitude E_ref at transverse distance rho_ref
    from the vortex (the convenient "field gradient" parametrization for
    near-vortex dynamics); exactly one of the two must be given.

    ``origin_offset`` is the constant a_o added to z in the envelope
    argument; it is kept as written in the field definition and can be
    set to 0.  ``atom_displacement`` is the atom position in the beam
    frame: field evaluation at grid point r uses the beam coordinates
    r + atom_displacement, i.e. the vortex sits at -atom_displacement on
    the grid.
    """

    omega: float
    n_cyc: int
    ell: int
    pol: Polarization
    w0: float
    p: int = 0
    amplitude: float | None = None
    target_field: tuple[float, float] | None = None
    chi: float = 0.0
    origin_offset: float = 1.0
    atom_displacement: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.n_cyc < 1:
            raise ValueError("n_cyc must be >= 1")
        if self.w0 <= 0:
            raise ValueError("waist w0 must be positive")
        if self.p < 0:
            raise ValueError("radial index p must be >= 0")
        if (self.amplitude is None) == (self.target_field is None):
            raise ValueError("specify exactly one of amplitude / target_field")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def omega_env(self) -> float:
        """Envelope frequency pi / (n_cyc * period) = omega / (2 n_cyc)."""
        return self.omega / (2.0 * self.n_cyc)

    @property
    def duration(self) -> float:
        """Window length pi / omega_env = n_cyc carrier periods."""
        return self.n_cyc * self.period

    @property
    def t_start(self) -> float:
        """Window opening time at z = 0."""
        return self.origin_offset / C_AU

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    def profile_constant(self) -> float:
        """Scalar in front of (sqrt(2) rho / w0)^|ell| e^{i ell phi} at the waist."""
        n = abs(self.ell)
        c_norm = math.sqrt(
            2.0 * math.factorial(self.p) / (math.pi * math.factorial(self.p + n))
        )
        return c_norm * eval_genlaguerre(self.p, n, 0.0) / self.w0

    def resolved_amplitude(self) -> float:
        """A0, either as given or solved from the target-field condition."""
        if self.amplitude is not None:
            return self.amplitude
        rho_ref, e_ref = self.target_field
        if rho_ref <= 0 and abs(self.ell) > 0:
            raise ValueError("target_field radius must be positive for ell != 0")
        # Peak |E| ~ omega * |A| at the envelope maximum.
        profile = self.profile_constant() * (math.sqrt(2.0) * rho_ref / self.w0) ** abs(
            self.ell
        )
        a_at_ref = 2.0 * self.w0 * profile
        return e_ref / (self.omega * a_at_ref)


@dataclass
class FieldSample:
    """Vector potential and electric field at spacetime point(s), shape (..., 3)."""

    A: np.ndarray
    E: np.ndarray


def lg_mode(rho, phi, z, k: float, cfg: PulseConfig):
    """Laguerre-Gaussian mode LG_{ell,p}(rho, phi, z) at wavenumber k.

    Standard normalization sqrt(2 p! / (pi (p+|ell|)!)) / w(z), with the
    (sqrt(2) rho / w)^|ell| radial factor, generalized Laguerre
    polynomial, Gaussian decay, azimuthal phase e^{i ell phi}, wavefront
    curvature phase and Gouy phase.
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    z = np.asarray(z, dtype=float)
    n = abs(cfg.ell)
    zr = k * cfg.w0**2 / 2.0
    w = cfg.w0 * np.sqrt(1.0 + (z / zr) ** 2)
    c_norm = math.sqrt(
        2.0 * math.factorial(cfg.p) / (math.pi * math.factorial(cfg.p + n))
    )
    arg = 2.0 * rho**2 / w**2
    gouy = (2 * cfg.p + n + 1) * np.arctan2(z, zr)
    inv_r = z / (z**2 + zr**2)  # 1/R(z), finite at z = 0
    return (
        c_norm
        / w
        * (np.sqrt(2.0) * rho / w) ** n
        * eval_genlaguerre(cfg.p, n, arg)
        * np.exp(-(rho**2) / w**2)
        * np.exp(1j * (cfg.ell * phi + k * rho**2 * inv_r / 2.0 - gouy))
    )


def _window(u, half_period_c: float):
    """theta(u + pi c / omega_e) - theta(u) for u = z - c t + a_o."""
    return ((u > -half_period_c) & (u < 0.0)).astype(float)


def _split_r(r):
    r = np.asarray(r, dtype=float)
    return r[..., 0], r[..., 1], r[..., 2]


def _assemble(cfg: PulseConfig, carrier_profile, env, denv, win):
    """Common A/E assembly: A = A0 w0 env win 2 Re[pol carrier_profile]."""
    a0 = cfg.resolved_amplitude()
    pol = np.array([cfg.pol.alpha, cfg.pol.beta, 0.0])
    base = 2.0 * np.real(pol * carrier_profile[..., None])
    dbase = 2.0 * np.real(pol * (-1j * cfg.omega) * carrier_profile[..., None])
    scale = a0 * cfg.w0 * win[..., None]
    A = scale * env[..., None] * base
    E = -scale * (denv[..., None] * base + env[..., None] * dbase)
    return FieldSample(A=A, E=E)


def vector_potential(r, t, cfg: PulseConfig) -> FieldSample:
    """Full pulsed vector potential and electric field at points r, time t.

    ``r`` has shape (..., 3) in grid coordinates (atom at the origin);
    ``t`` is a scalar or broadcastable array.
    """
    x, y, z = _split_r(r)
    x = x + cfg.atom_displacement[0]
    y = y + cfg.atom_displacement[1]
    z = z + cfg.atom_displacement[2]
    t = np.asarray(t, dtype=float)
    rho = np.hypot(x, y)
    phi = np.arctan2(y, x)

    we = cfg.omega_env
    u = z - C_AU * t + cfg.origin_offset
    win = _window(u, math.pi * C_AU / we)
    a = we * u / C_AU
    env = np.sin(a) ** 2
    denv = -we * np.sin(2.0 * a)  # d/dt of sin^2(a), da/dt = -we

    k = cfg.omega / C_AU
    carrier = np.exp(1j * (k * (z - C_AU * t) + cfg.chi))
    profile = lg_mode(rho, phi, z, k, cfg)
    return _assemble(cfg, carrier * profile, env, denv, win)


def near_origin_potential(r, t, cfg: PulseConfig) -> FieldSample:
    """Atom-scale reduction of the field: A ~ (sqrt(2) rho/w0)^|ell| e^{i ell phi}.

    Drops the Gaussian decay, curvature and Gouy phases and all z
    dependence (profile, carrier and envelope alike), keeping the
    temporal envelope, window and carrier.  This is the field form whose
    matrix elements produce the angular selection rules; it is
    z-translation invariant by construction.
    """
    x, y, _ = _split_r(r)
    x = x + cfg.atom_displacement[0]
    y = y + cfg.atom_displacement[1]
    t = np.asarray(t, dtype=float)
    rho = np.hypot(x, y)
    phi = np.arctan2(y, x)

    we = cfg.omega_env
    u = -C_AU * t + cfg.origin_offset
    win = _window(u, math.pi * C_AU / we)
    a = we * u / C_AU
    env = np.sin(a) ** 2
    denv = -we * np.sin(2.0 * a)

    carrier = np.exp(1j * (cfg.chi - cfg.omega * t))
    profile = cfg.profile_constant() * (
        np.sqrt(2.0) * rho / cfg.w0
    ) ** abs(cfg.ell) * np.exp(1j * cfg.ell * phi)
    profile = profile * np.ones_like(env)
    return _assemble(cfg, carrier * profile, env, denv, win)


def cep_map(
    cfg: PulseConfig, radius: float, n_phi: int = 64, samples_per_cycle: int = 60
) -> list[tuple[float, float]]:
    """Carrier-envelope offset of the local waveform around the vortex.

    For azimuthal positions phi on a circle of the given radius (z = 0),
    returns (phi, cep) where cep is the carrier phase at the envelope
    peak, measured by demodulating the dominant transverse component of
    A(t) at the carrier frequency.  The offset is independent of the
    radius; for winding number ell it sweeps 2 pi ell over one circle.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    nt = cfg.n_cyc * samples_per_cycle
    ts = np.linspace(cfg.t_start, cfg.t_end, nt, endpoint=False)
    dt = ts[1] - ts[0]
    t_env = 0.5 * (cfg.t_start + cfg.t_end)
    comp = 0 if abs(cfg.pol.alpha) >= abs(cfg.pol.beta) else 1
    out = []
    for phi in np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False):
        point = np.array([radius * math.cos(phi), radius * math.sin(phi), 0.0])
        wave = np.array(
            [vector_potential(point, t, cfg).A[comp] for t in ts]
        )
        demod = np.sum(wave * np.exp(1j * cfg.omega * ts)) * dt
        cep = math.atan2(demod.imag, demod.real) - cfg.omega * t_env
        cep = (cep + math.pi) % (2.0 * math.pi) - math.pi
        out.append((float(phi), float(cep)))
    return out


class PropagationField:
    """Grid-facing form of the field for the propagator.

    In the near-origin model the transverse profile is the polynomial
    (x + i s y)^|ell| (s = sign(ell)), so each component is

        A_j(x, y, t) = 2 Re[pol_j g(t) P(x, y)],

    with every scalar folded into the complex coefficient g(t).  The x/y
    antiderivatives of P are again polynomials, which the propagator
    uses as exact gauge phases.  In the "full" model g additionally
    carries the z-dependent carrier and envelope as a 1D array over the
    grid's z axis (the transverse profile is evaluated at the waist; for
    desk-scale boxes with w0 >> box the dropped Gaussian and Gouy/
    curvature factors are below 1e-6 relative).
    """

    def __init__(self, cfg: PulseConfig, x: np.ndarray, y: np.ndarray,
                 z: np.ndarray, model: str = "near_origin"):
        if model not in ("near_origin", "full"):
            raise ValueError(f"unknown field model {model!r}")
        self.cfg = cfg
        self.model = model
        self.n_abs = abs(cfg.ell)
        xb = x[:, None] + cfg.atom_displacement[0]
        yb = y[None, :] + cfg.atom_displacement[1]
        self.zb = z + cfg.atom_displacement[2]
        s = 1 if cfg.ell >= 0 else -1
        if self.n_abs == 0:
            self.P = np.ones((x.size, y.size), dtype=complex)
            self.Pint_x = (xb * np.ones_like(yb)).astype(complex)
            self.Pint_y = (yb * np.ones_like(xb)).astype(complex)
        else:
            zeta = xb + 1j * s * yb
            self.P = zeta**self.n_abs
            self.Pint_x = zeta ** (self.n_abs + 1) / (self.n_abs + 1)
            self.Pint_y = zeta ** (self.n_abs + 1) / (1j * s * (self.n_abs + 1))
        # scalar prefactor: A0 * w0 * C_norm * (sqrt(2)/w0)^|ell|
        self.scale = (
            cfg.resolved_amplitude()
            * cfg.w0
            * cfg.profile_constant()
            * (math.sqrt(2.0) / cfg.w0) ** self.n_abs
        )

    @property
    def uniform(self) -> bool:
        """True when A has no transverse spatial dependence (ell = 0)."""
        return self.n_abs == 0 and self.model == "near_origin"

    def coefficient(self, t: float):
        """g(t): scalar (near-origin) or shape (nz,) array (full model)."""
        cfg = self.cfg
        we = cfg.omega_env
        if self.model == "near_origin":
            u = -C_AU * t + cfg.origin_offset
        else:
            u = self.zb - C_AU * t + cfg.origin_offset
        win = _window(np.asarray(u), math.pi * C_AU / we)
        env = np.sin(we * u / C_AU) ** 2
        if self.model == "near_origin":
            carrier = np.exp(1j * (cfg.chi - cfg.omega * t))
        else:
            carrier = np.exp(1j * (cfg.omega / C_AU * (self.zb - C_AU * t) + cfg.chi))
        g = self.scale * env * win * carrier
        if self.model == "near_origin":
            return complex(g)
        return g

    def envelope_peak_coefficient(self) -> complex:
        """|g| at the envelope maximum (near-origin), for cycle-averaged uses."""
        return abs(self.scale)
