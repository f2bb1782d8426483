"""3D split-operator propagation of the electron under the vortex pulse.

Velocity gauge with the full space-dependent vector potential.  The
minimal-coupling kinetic energy decomposes exactly over components,

    (p - qA)^2 / 2 = sum_j (p_j - q A_j)^2 / 2        (A_z = 0),

and each component factor is exponentiated exactly through a gauge
phase: with dS_j/dx_j = q A_j,

    exp(-i tau (p_j - q A_j)^2 / 2)
        = e^{i S_j} F_j^{-1} e^{-i tau k_j^2 / 2} F_j e^{-i S_j},

where F_j is the FFT along axis j.  For the vortex profile the
transverse dependence is the polynomial (x + i s y)^|ell|, so S_j is
analytic (see ``beam.PropagationField``).  One step is the symmetric
composition

    U/2 . Gx/2 . Gy/2 . Gz . Gy/2 . Gx/2 . U/2,

with the field frozen at the half-step time: every factor is unitary,
so the scheme conserves the norm to machine precision and is exactly
time reversible; the only error is O(dt^2) operator splitting.  A
generic Taylor-series treatment of the symmetrized A.p term is kept as
a cross-check scheme (``scheme="taylor"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .beam import PropagationField, PulseConfig
from .grid import GridSpec, Wavefunction, write_checkpoint
from .utils import fft3, fft_axis, ifft3, ifft_axis

__all__ = [
    "AbsorberSpec",
    "PropagatorConfig",
    "PropagationError",
    "RelaxationError",
    "TrajectoryRecord",
    "Propagator",
    "init_ground_state",
    "step",
    "run",
    "ponderomotive_profile",
]


class PropagationError(RuntimeError):
    """Norm blow-up or non-finite amplitudes during propagation."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RelaxationError(RuntimeError):
    """Imaginary-time relaxation failed to converge."""


@dataclass(frozen=True)
class AbsorberSpec:
    """Boundary absorber: cos^8 mask over the outer band of each axis.

    ``width`` in au; None means 20% of the half box length per axis.
    The mask is raised to ``strength`` and applied once per step.
    """

    type: str = "cos_mask"
    width: float | None = None
    strength: float = 1.0

    def __post_init__(self):
        if self.type not in ("cos_mask", "none"):
            raise ValueError(f"unknown absorber type {self.type!r}")
        if self.width is not None and self.width <= 0:
            raise ValueError("absorber width must be positive")


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float = 0.005
    gauge: str = "velocity"
    soft_core_a: float = 0.05
    absorber: AbsorberSpec = field(default_factory=AbsorberSpec)
    q: float = -1.0
    potential: str = "soft_core"  # "soft_core" | "none"
    field_model: str = "near_origin"  # "near_origin" | "full"
    scheme: str = "chirp"  # "chirp" | "taylor"
    taylor_order: int = 4
    precision: str = "double"  # "double" | "single"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.gauge != "velocity":
            raise ValueError("only the velocity gauge is implemented")
        if self.soft_core_a < 0:
            raise ValueError("soft_core_a must be >= 0")
        if self.potential not in ("soft_core", "none"):
            raise ValueError(f"unknown potential {self.potential!r}")
        if self.field_model not in ("near_origin", "full"):
            raise ValueError(f"unknown field model {self.field_model!r}")
        if self.scheme not in ("chirp", "taylor"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.precision not in ("double", "single"):
            raise ValueError(f"unknown precision {self.precision!r}")

    @property
    def cdtype(self):
        return np.complex128 if self.precision == "double" else np.complex64


def _absorber_width(grid: GridSpec, absorber: AbsorberSpec) -> float:
    if absorber.width is not None:
        return absorber.width
    return 0.2 * min(grid.box_lengths) / 2.0


def _build_mask(grid: GridSpec, absorber: AbsorberSpec) -> np.ndarray | None:
    if absorber.type == "none":
        return None
    width = _absorber_width(grid, absorber)
    parts = []
    for i in range(3):
        half = grid.box_lengths[i] / 2.0
        if width >= half:
            raise ValueError("absorber width must be smaller than the half box")
        xi = (np.abs(grid.axis(i) - grid.center[i]) - (half - width)) / width
        m = np.ones_like(xi)
        band = xi > 0
        m[band] = np.cos(0.5 * np.pi * np.minimum(xi[band], 1.0)) ** 8
        parts.append(m**absorber.strength)
    return (
        parts[0][:, None, None] * parts[1][None, :, None] * parts[2][None, None, :]
    )


def _potential_energy(grid: GridSpec, cfg: PropagatorConfig) -> np.ndarray:
    """Electron potential energy (the q*V term of the Hamiltonian).

    Physically -1/sqrt(r^2 + a^2) regardless of the sign convention
    chosen for q (V itself is this divided by q).
    """
    if cfg.potential == "none":
        return np.zeros(grid.n)
    return -1.0 / np.sqrt(grid.radius_sq() + cfg.soft_core_a**2)


class Propagator:
    """Precomputed split-operator stepper for one (grid, config, pulse)."""

    def __init__(
        self,
        grid: GridSpec,
        cfg: PropagatorConfig,
        pulse: PulseConfig | None = None,
    ):
        self.grid = grid
        self.cfg = cfg
        self.pulse = pulse
        self._U = _potential_energy(grid, cfg)
        kx, ky, kz = (grid.k_axis(i) for i in range(3))
        self._k = (kx, ky, kz)
        self._k2 = (
            (kx**2)[:, None, None] + (ky**2)[None, :, None] + (kz**2)[None, None, :]
        )
        mask = _build_mask(grid, cfg.absorber)
        self._mask = None if mask is None else mask.astype(
            np.float64 if cfg.precision == "double" else np.float32
        )
        self.field = (
            None
            if pulse is None
            else PropagationField(pulse, *grid.axes(), model=cfg.field_model)
        )
        self._factors_dt: float | None = None
        self._expU_half = None
        self._expK_full = None
        self._expK_axis_half = None

    def _ensure_factors(self, dt: float) -> None:
        if self._factors_dt == dt:
            return
        cdtype = self.cfg.cdtype
        self._expU_half = np.exp(-0.5j * dt * self._U).astype(cdtype)
        self._expK_full = np.exp(-0.5j * dt * self._k2).astype(cdtype)
        self._expK_axis_half = [
            np.exp(-0.25j * dt * k**2).astype(cdtype) for k in self._k
        ]
        self._factors_dt = dt

    # -- elementary stages -------------------------------------------------

    def _axis_kinetic(self, v, axis: int, factor_1d):
        shape = [1, 1, 1]
        shape[axis] = -1
        v = fft_axis(v, axis)
        v *= factor_1d.reshape(shape)
        return ifft_axis(v, axis)

    def _chirped_axis(self, v, axis: int, S, half_factor):
        """exp(iS) F^-1 exp(-i dt/2 k^2/2) F exp(-iS) along one axis."""
        chirp = np.exp(-1j * S).astype(v.dtype)
        if S.ndim == 2 and axis in (0, 1):
            chirp = chirp[:, :, None]
        v *= chirp
        v = self._axis_kinetic(v, axis, half_factor)
        v *= np.conj(chirp)
        return v

    def _step_chirp(self, v, g):
        fld = self.field
        q = self.cfg.q
        alpha, beta = self.pulse.pol.alpha, self.pulse.pol.beta
        # S_j with dS_j/dx_j = q A_j; shapes (nx, ny) or (nx, ny, nz)
        if np.ndim(g) == 0:
            Sx = 2.0 * q * np.real((alpha * g) * fld.Pint_x)
            Sy = 2.0 * q * np.real((beta * g) * fld.Pint_y)
        else:  # full model: g varies along z
            Sx = 2.0 * q * np.real((alpha * g)[None, None, :] * fld.Pint_x[:, :, None])
            Sy = 2.0 * q * np.real((beta * g)[None, None, :] * fld.Pint_y[:, :, None])
        fx, fy, fz = self._expK_axis_half
        v *= self._expU_half
        v = self._chirped_axis(v, 0, Sx, fx)
        v = self._chirped_axis(v, 1, Sy, fy)
        v = self._axis_kinetic(v, 2, fz * fz)  # full-dt z kinetic
        v = self._chirped_axis(v, 1, Sy, fy)
        v = self._chirped_axis(v, 0, Sx, fx)
        v *= self._expU_half
        return v

    def _step_uniform(self, v, g, dt):
        # ell = 0 near-origin: A is spatially uniform, kinetic + coupling
        # diagonal in k space (exact Volkov-type factor).
        q = self.cfg.q
        ax = 2.0 * np.real(self.pulse.pol.alpha * g)
        ay = 2.0 * np.real(self.pulse.pol.beta * g)
        kx, ky, kz = self._k
        phase = (
            ((kx - q * ax) ** 2)[:, None, None]
            + ((ky - q * ay) ** 2)[None, :, None]
            + (kz**2)[None, None, :]
        )
        v *= self._expU_half
        v = fft3(v)
        v *= np.exp(-0.5j * dt * phase).astype(v.dtype)
        v = ifft3(v)
        v *= self._expU_half
        return v

    def _apply_pA(self, v, ax2d, ay2d, div_a):
        """Symmetrized coupling M v = i q (A . grad v) + (i q / 2) (div A) v."""
        q = self.cfg.q
        vh = fft3(v.copy())
        kx, ky, _ = self._k
        dxv = ifft3(vh * (1j * kx)[:, None, None])
        dyv = ifft3(vh * (1j * ky)[None, :, None])
        out = (1j * q) * (ax2d[:, :, None] * dxv + ay2d[:, :, None] * dyv)
        out += (0.5j * q) * div_a[:, :, None] * v
        return out

    def _step_taylor(self, v, g, dt):
        # Cross-check scheme: D/2 . K/2 . exp(-i dt M)|Taylor . K/2 . D/2
        # with D = U + q^2 A^2 / 2 and M the symmetrized A.p coupling
        # applied via spectral gradients (one forward, two inverse
        # transforms per application).
        fld = self.field
        q = self.cfg.q
        alpha, beta = self.pulse.pol.alpha, self.pulse.pol.beta
        ax = 2.0 * np.real(alpha * g * fld.P)
        ay = 2.0 * np.real(beta * g * fld.P)
        n = fld.n_abs
        if n == 0:
            dP_dx = np.zeros_like(fld.P)
            dP_dy = np.zeros_like(fld.P)
        else:
            s = 1 if self.pulse.ell >= 0 else -1
            x, y, _ = self.grid.axes()
            zeta = (x[:, None] + fld.cfg.atom_displacement[0]) + 1j * s * (
                y[None, :] + fld.cfg.atom_displacement[1]
            )
            dP_dx = n * zeta ** (n - 1)
            dP_dy = 1j * s * n * zeta ** (n - 1)
        div_a = 2.0 * np.real(g * (alpha * dP_dx + beta * dP_dy))
        a2 = ax**2 + ay**2
        expD = np.exp(-0.5j * dt * (q**2 * 0.5 * a2))[:, :, None] * self._expU_half
        kfac = np.sqrt(self._expK_full)  # exp(-i dt/4 k^2): half-step kinetic

        v *= expD
        v = fft3(v)
        v *= kfac
        v = ifft3(v)
        acc = v.copy()
        term = v
        for k in range(1, self.cfg.taylor_order + 1):
            term = (-1j * dt / k) * self._apply_pA(term, ax, ay, div_a)
            acc += term
        v = fft3(acc)
        v *= kfac
        v = ifft3(v)
        v *= expD
        return v

    def _step_free(self, v):
        v *= self._expU_half
        v = fft3(v)
        v *= self._expK_full
        v = ifft3(v)
        v *= self._expU_half
        return v

    # -- public stepping ----------------------------------------------------

    def step_values(self, v: np.ndarray, t: float, dt: float | None = None):
        """Advance raw amplitudes by one step from t; returns (v, absorbed)."""
        dt = self.cfg.dt if dt is None else dt
        self._ensure_factors(dt)
        g = None if self.field is None else self.field.coefficient(t + 0.5 * dt)
        field_off = g is None or not np.any(g)
        if field_off:
            v = self._step_free(v)
        elif self.field.uniform:
            v = self._step_uniform(v, complex(g), dt)
        elif self.cfg.scheme == "taylor":
            if self.cfg.field_model != "near_origin":
                raise ValueError("taylor scheme supports the near_origin model only")
            v = self._step_taylor(v, complex(g), dt)
        else:
            v = self._step_chirp(v, g)
        absorbed = 0.0
        if self._mask is not None:
            before = float(np.sum(np.abs(v) ** 2).real)
            v *= self._mask
            after = float(np.sum(np.abs(v) ** 2).real)
            absorbed = (before - after) * self.grid.cell_volume
        return v, absorbed

    def energy(self, values: np.ndarray) -> float:
        """<K> + <U of the electron> for a normalized state."""
        h3 = self.grid.cell_volume
        vh = fft3(values.copy())
        n_tot = values.size
        ekin = float(np.sum(0.5 * self._k2 * np.abs(vh) ** 2).real * h3 / n_tot)
        epot = float(np.sum(self._U * np.abs(values) ** 2).real * h3)
        return ekin + epot


def step(
    psi: Wavefunction, t: float, cfg: PropagatorConfig, pulse: PulseConfig | None
) -> Wavefunction:
    """One split-operator step (convenience wrapper; loops should use
    :class:`Propagator` or :func:`run` to reuse precomputed factors)."""
    prop = Propagator(psi.grid, cfg, pulse)
    v = psi.values.astype(cfg.cdtype)
    v, _ = prop.step_values(v, t)
    return Wavefunction(v, psi.grid)


def _analytic_1s(grid: GridSpec) -> np.ndarray:
    r = np.sqrt(grid.radius_sq())
    return np.exp(-r) / math.sqrt(math.pi)


def init_ground_state(
    grid: GridSpec,
    cfg: PropagatorConfig,
    dtau: float = 0.05,
    tol: float = 1e-12,
    max_iter: int = 20000,
    check_every: int = 20,
) -> Wavefunction:
    """Imaginary-time relaxation to the discrete ground state.

    Starts from the analytic 1s orbital and relaxes under the discrete
    split-operator Hamiltonian until the energy change per check falls
    below ``tol``; the relaxed energy is stored on the returned state.
    Relaxation always runs in double precision.
    """
    relax_cfg = replace(
        cfg, precision="double", absorber=AbsorberSpec(type="none")
    )
    prop = Propagator(grid, relax_cfg, pulse=None)
    h3 = grid.cell_volume
    v = _analytic_1s(grid).astype(np.complex128)
    v /= math.sqrt(float(np.sum(np.abs(v) ** 2) * h3))

    expU = np.exp(-0.5 * dtau * prop._U)
    expK = np.exp(-0.5 * dtau * prop._k2)
    e_prev = None
    for it in range(1, max_iter + 1):
        v *= expU
        v = fft3(v)
        v *= expK
        v = ifft3(v)
        v *= expU
        v /= math.sqrt(float(np.sum(np.abs(v) ** 2).real * h3))
        if it % check_every == 0:
            e = prop.energy(v)
            if e_prev is not None and abs(e - e_prev) < tol * max(1.0, abs(e)):
                return Wavefunction(v, grid, energy=e)
            e_prev = e
    raise RelaxationError(
        f"ground-state relaxation did not converge in {max_iter} iterations "
        f"(last energy {e_prev})"
    )


@dataclass
class TrajectoryRecord:
    """Time series of run observables (arrays of equal length)."""

    t: np.ndarray
    pop_ground: np.ndarray
    norm: np.ndarray
    Lz: np.ndarray
    x_mean: np.ndarray
    y_mean: np.ndarray
    z_mean: np.ndarray
    absorbed: np.ndarray

    COLUMNS = ("t", "pop_ground", "norm", "Lz", "x_mean", "y_mean", "z_mean", "absorbed")

    def to_csv(self, path) -> None:
        data = np.column_stack([getattr(self, c) for c in self.COLUMNS])
        np.savetxt(path, data, delimiter=",", header=",".join(self.COLUMNS), comments="")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryRecord":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(*(data[:, i] for i in range(len(cls.COLUMNS))))

    def at_time(self, t: float) -> dict:
        i = int(np.argmin(np.abs(self.t - t)))
        return {c: float(getattr(self, c)[i]) for c in self.COLUMNS}


def _lz_kinetic(values, grid: GridSpec, field, t, q, norm2) -> float:
    """<L_z> = <x pi_y - y pi_x> with pi = p - qA, via spectral gradients."""
    h3 = grid.cell_volume
    x, y, _ = grid.axes()
    kx, ky, _ = (grid.k_axis(i) for i in range(3))
    vh = fft3(values.copy())
    # p_x psi and p_y psi from the single 3D transform
    pxv = ifft3(vh * kx[:, None, None])
    pyv = ifft3(vh * ky[None, :, None])
    del vh
    conj_v = np.conj(values)
    lz = np.sum(conj_v * (x[:, None, None] * pyv - y[None, :, None] * pxv)).real * h3
    if field is not None:
        g = field.coefficient(t)
        if np.any(g):
            alpha, beta = field.cfg.pol.alpha, field.cfg.pol.beta
            dens = (conj_v * values).real
            if np.ndim(g) == 0:
                ax = 2.0 * np.real(alpha * g * field.P)[:, :, None]
                ay = 2.0 * np.real(beta * g * field.P)[:, :, None]
            else:
                ax = 2.0 * np.real(alpha * g[None, None, :] * field.P[:, :, None])
                ay = 2.0 * np.real(beta * g[None, None, :] * field.P[:, :, None])
            lz -= q * float(
                np.sum(dens * (x[:, None, None] * ay - y[None, :, None] * ax)) * h3
            )
    return float(lz) / norm2


def run(
    grid: GridSpec,
    prop: PropagatorConfig,
    pulse: PulseConfig | None,
    record_every: int = 10,
    tail_time: float = 0.0,
    t_end: float | None = None,
    ground: Wavefunction | None = None,
    checkpoint_every: int = 0,
    out_dir=None,
    observer=None,
    observe_every: int = 0,
    progress: bool = False,
) -> tuple[Wavefunction, TrajectoryRecord]:
    """Propagate the relaxed ground state through the pulse (plus tail).

    Deterministic given the configurations.  ``observer(t, step, values)``
    is invoked every ``observe_every`` steps (and at the end) for in-flight
    analysis; checkpoints go to ``out_dir`` every ``checkpoint_every``
    steps when both are set.  Raises :class:`PropagationError` on NaN or
    norm blow-up.
    """
    if ground is None:
        ground = init_ground_state(grid, prop)
    if t_end is None:
        t_end = (pulse.t_end if pulse is not None else 0.0) + tail_time
    n_steps = int(math.ceil(t_end / prop.dt - 1e-12))

    stepper = Propagator(grid, prop, pulse)
    g_vals = ground.values.astype(np.complex128)
    v = ground.values.astype(prop.cdtype)
    h3 = grid.cell_volume
    x, y, z = grid.axes()

    rows = {c: [] for c in TrajectoryRecord.COLUMNS}
    absorbed_total = 0.0

    def record(t):
        dens = (np.conj(v) * v).real.astype(np.float64)
        norm2 = float(np.sum(dens) * h3)
        if not np.isfinite(norm2) or norm2 > 1.5:
            raise PropagationError(
                "norm blow-up or NaN detected",
                {"t": t, "norm2": norm2, "absorbed": absorbed_total},
            )
        amp = complex(np.sum(np.conj(g_vals) * v) * h3)
        lz = _lz_kinetic(v, grid, stepper.field, t, prop.q, norm2)
        rows["t"].append(t)
        rows["pop_ground"].append(abs(amp) ** 2)
        rows["norm"].append(norm2)
        rows["Lz"].append(lz)
        rows["x_mean"].append(float(np.sum(dens.sum(axis=(1, 2)) * x) * h3) / norm2)
        rows["y_mean"].append(float(np.sum(dens.sum(axis=(0, 2)) * y) * h3) / norm2)
        rows["z_mean"].append(float(np.sum(dens.sum(axis=(0, 1)) * z) * h3) / norm2)
        rows["absorbed"].append(absorbed_total)

    record(0.0)
    for i in range(n_steps):
        t = i * prop.dt
        v, absorbed = stepper.step_values(v, t)
        absorbed_total += absorbed
        t_next = t + prop.dt
        is_last = i == n_steps - 1
        if record_every and ((i + 1) % record_every == 0 or is_last):
            record(t_next)
        if observer is not None and observe_every and (
            (i + 1) % observe_every == 0 or is_last
        ):
            observer(t_next, i + 1, v)
        if checkpoint_every and out_dir is not None and (
            (i + 1) % checkpoint_every == 0 and not is_last
        ):
            write_checkpoint(
                Path(out_dir) / f"state_{i + 1:07d}.wf",
                Wavefunction(np.asarray(v, dtype=np.complex128), grid),
                t_next,
                i + 1,
            )
        if progress and (i + 1) % 200 == 0:
            print(f"  step {i + 1}/{n_steps}  t={t_next:.3f}", flush=True)

    record_arrays = TrajectoryRecord(**{c: np.asarray(rows[c]) for c in rows})
    final = Wavefunction(np.asarray(v, dtype=np.complex128), grid)
    return final, record_arrays


def ponderomotive_profile(
    pulse: PulseConfig, grid: GridSpec, q: float = -1.0, model: str = "near_origin"
) -> np.ndarray:
    """Cycle-averaged q^2 <A^2> / 2 at the envelope peak, on the grid.

    The effective trapping potential of the quadratic interaction: for
    winding number ell it grows like rho^(2|ell|) away from the vortex
    (constant for ell = 0).
    """
    fld = PropagationField(pulse, *grid.axes(), model="near_origin")
    gpk = fld.envelope_peak_coefficient()
    profile2d = (q**2) * (abs(gpk) ** 2) * np.abs(fld.P) ** 2
    return np.broadcast_to(profile2d[:, :, None], grid.n).copy()
