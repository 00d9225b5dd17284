"""Drive and parametric-pump parameters and their closed-form consequences.

Everything here is algebra: the Bogoliubov diagonalization of the pumped
oscillator, the rescaled loop quantities it implies (enclosed phase, loop
period, Ising coupling), the perturbative rotating-frame shift that marks
the breakdown of the rotating-wave treatment, and small utility bounds.
Angular frequencies (rad/s) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from .errors import ConfigError, SqueezingRegimeError
from .ion_crystal import NormalModeSet, TrapConfig

__all__ = [
    "DriveParams",
    "DecoherenceRates",
    "BogoliubovMode",
    "BogoliubovSet",
    "bogoliubov",
    "bogoliubov_set",
    "loop_quantities",
    "j_of_theta",
    "spectator_bound",
    "pa_feasibility",
    "derived_parameters",
]


@dataclass(frozen=True)
class DriveParams:
    """Spin-dependent-force and parametric-drive settings.

    ``f`` is the center-of-mass force coupling in rad/s; alternatively give
    the peak force in newtons and it is converted per mode as F z0_m / 2hbar.
    ``g`` is the center-of-mass parametric coupling in rad/s; alternatively
    give the drive voltage, converted as q V / (M omega_m d_t^2). With
    ``use_mode_dependent_g`` false a single g applies to every mode.
    """

    mu: float
    f: float | None = None
    force: float | None = None
    g: float = 0.0
    voltage: float | None = None
    theta: float = 0.0
    use_mode_dependent_g: bool = False

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ConfigError("mu must be positive")
        if (self.f is None) == (self.force is None):
            raise ConfigError("specify exactly one of f (rad/s) or force (N)")
        if self.f is not None and self.f < 0.0:
            raise ConfigError("f must be non-negative")
        if self.force is not None and self.force < 0.0:
            raise ConfigError("force must be non-negative")
        if self.voltage is not None and self.voltage < 0.0:
            raise ConfigError("voltage must be non-negative")
        if self.voltage is None and self.g < 0.0:
            raise ConfigError("g must be non-negative")


@dataclass(frozen=True)
class DecoherenceRates:
    """Spin decoherence rates in 1/s; derived combinations are recomputed."""

    gamma_el: float = 0.0
    gamma_ud: float = 0.0
    gamma_du: float = 0.0

    def __post_init__(self) -> None:
        if min(self.gamma_el, self.gamma_ud, self.gamma_du) < 0.0:
            raise ConfigError("decoherence rates must be non-negative")

    @property
    def gamma_r(self) -> float:
        """Total spin-flip (Raman) rate."""
        return self.gamma_ud + self.gamma_du

    @property
    def gamma_asym(self) -> float:
        """Flip asymmetry gamma = (up-to-down minus down-to-up) / 4."""
        return (self.gamma_ud - self.gamma_du) / 4.0

    @property
    def gamma_tot(self) -> float:
        """Transverse coherence decay rate (gamma_r + gamma_el) / 2."""
        return (self.gamma_r + self.gamma_el) / 2.0


@dataclass(frozen=True)
class BogoliubovMode:
    """Rescaled single-mode drive parameters under the parametric pump."""

    delta: float
    g: float
    theta: float
    mu: float
    f: float
    r: float
    s: float
    delta_p: float
    f_p: complex
    rwa_shift: float


def bogoliubov(
    delta: float, g: float, theta: float, mu: float, f: float = 1.0
) -> BogoliubovMode:
    """Diagonalize the pumped mode at detuning delta.

    Returns the squeeze parameter r = (1/4) log[(delta+g)/(delta-g)], the
    driven-quadrature factor s(theta) = (cosh 2r + cos theta sinh 2r)^(-1/2),
    the rescaled detuning delta_p = sqrt(delta^2 - g^2), the rescaled drive
    f_p = f (cosh r + e^{i theta} sinh r), and the second-order frequency
    pulling rwa_shift = g^2 / (4 s^2 mu) that bounds the rotating-wave
    treatment. Requires |g| < delta.
    """
    if abs(g) >= delta:
        raise SqueezingRegimeError(
            f"|g| = {abs(g):.6g} rad/s is not below delta = {delta:.6g} rad/s; "
            "the pumped mode is outside the stable squeezing regime"
        )
    if mu <= 0.0:
        raise ConfigError("bogoliubov requires mu > 0")
    r = 0.25 * math.log((delta + g) / (delta - g))
    ch2, sh2 = math.cosh(2.0 * r), math.sinh(2.0 * r)
    s = 1.0 / math.sqrt(ch2 + math.cos(theta) * sh2)
    delta_p = math.sqrt((delta - g) * (delta + g))
    f_p = f * (math.cosh(r) + complex(math.cos(theta), math.sin(theta)) * math.sinh(r))
    rwa_shift = g**2 / (4.0 * s**2 * mu)
    return BogoliubovMode(
        delta=delta,
        g=g,
        theta=theta,
        mu=mu,
        f=f,
        r=r,
        s=s,
        delta_p=delta_p,
        f_p=f_p,
        rwa_shift=rwa_shift,
    )


@dataclass(frozen=True)
class BogoliubovSet:
    """Per-mode rescaled parameters for a whole chain drive."""

    modes: tuple[BogoliubovMode, ...]

    def __getitem__(self, m: int) -> BogoliubovMode:
        return self.modes[m]

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    @property
    def delta(self) -> np.ndarray:
        return np.array([b.delta for b in self.modes])

    @property
    def f(self) -> np.ndarray:
        return np.array([b.f for b in self.modes])

    @property
    def g(self) -> np.ndarray:
        return np.array([b.g for b in self.modes])

    @property
    def delta_p(self) -> np.ndarray:
        return np.array([b.delta_p for b in self.modes])

    @property
    def s(self) -> np.ndarray:
        return np.array([b.s for b in self.modes])

    @property
    def rwa_shift(self) -> np.ndarray:
        return np.array([b.rwa_shift for b in self.modes])


def _com_couplings(
    drive: DriveParams, modes: NormalModeSet, cfg: TrapConfig | None
) -> tuple[float, float]:
    """Resolve (f1, g1) in rad/s from whichever form the drive carries."""
    if drive.f is not None:
        f1 = drive.f
    else:
        f1 = drive.force * modes.z0[0] / (2.0 * hbar)
    if drive.voltage is not None:
        if cfg is None:
            raise ConfigError("voltage-specified g requires the trap config")
        g1 = cfg.charge * drive.voltage / (cfg.mass * modes.omega[0] * cfg.d_t**2)
        return f1, g1
    return f1, drive.g


def bogoliubov_set(
    drive: DriveParams, modes: NormalModeSet, cfg: TrapConfig | None = None
) -> BogoliubovSet:
    """Per-mode Bogoliubov entries for the full transverse band.

    The force coupling scales with the mode ground-state size,
    f_m = f1 sqrt(omega_1/omega_m). The pump coupling is uniform unless
    ``use_mode_dependent_g`` is set, in which case g_m = g1 omega_1/omega_m.
    Requires mu above the band top (blue-detuned operation) and g below
    every delta_m.
    """
    f1, g1 = _com_couplings(drive, modes, cfg)
    omega = modes.omega
    if drive.mu <= omega[0]:
        raise ConfigError(
            "mu must exceed the center-of-mass frequency for blue-detuned "
            "operation (all delta_m > 0)"
        )
    entries = []
    for m in range(len(omega)):
        delta_m = drive.mu - omega[m]
        f_m = f1 * math.sqrt(omega[0] / omega[m])
        g_m = g1 * (omega[0] / omega[m]) if drive.use_mode_dependent_g else g1
        entries.append(bogoliubov(delta_m, g_m, drive.theta, drive.mu, f_m))
    return BogoliubovSet(modes=tuple(entries))


def loop_quantities(f: float, delta: float, g: float) -> tuple[float, float, float]:
    """Single-loop geometric phase, loop period, and Ising coupling at theta=0.

    phi_loop = 4 pi f^2 / [(delta-g)^(3/2) (delta+g)^(1/2)] is the exact
    enclosed-phase closed form; it reduces to 4 pi (f/delta)^2 without the
    pump and grows as the inverse-gap power near g -> delta. tau = 2 pi /
    delta_p; J = f^2 / (delta - g).
    """
    if not (0.0 <= g < delta):
        raise ConfigError("loop_quantities requires 0 <= g < delta")
    if f <= 0.0:
        raise ConfigError("loop_quantities requires f > 0")
    delta_p = math.sqrt((delta - g) * (delta + g))
    tau = 2.0 * math.pi / delta_p
    j = f**2 / (delta - g)
    phi_loop = 4.0 * math.pi * f**2 / ((delta - g) ** 1.5 * (delta + g) ** 0.5)
    return phi_loop, tau, j


def j_of_theta(f: float, delta: float, g: float, theta: float) -> float:
    """Ising coupling at pump phase theta, exact two-quadrature form.

    J(theta) = f^2/(delta-g) (1+cos theta)/2 + f^2/(delta+g) (1-cos theta)/2.
    Flat to first order around theta = 0, where the amplified quadrature
    carries all the drive.
    """
    if not (0.0 <= g < delta):
        raise ConfigError("j_of_theta requires 0 <= g < delta")
    c = math.cos(theta)
    return f**2 * ((1.0 + c) / (2.0 * (delta - g)) + (1.0 - c) / (2.0 * (delta + g)))


def spectator_bound(
    f_m: float,
    delta_m: float,
    g: float,
    omega1: float | None = None,
    omega_m: float | None = None,
) -> tuple[float, float | None]:
    """Worst-case residual displacement of an off-resonant mode.

    Returns (2 f_m / (delta_m - g), 2 f_m / (omega1 - omega_m) or None).
    The first is the exact maximum of |alpha_m(t)| over the closed-form
    trajectory at theta = 0; the second is the cruder mode-gap estimate,
    available when the frequencies are supplied.
    """
    if delta_m <= g:
        raise ConfigError("spectator_bound requires delta_m > g")
    bound = 2.0 * f_m / (delta_m - g)
    gap_bound = None
    if omega1 is not None and omega_m is not None and omega1 > omega_m:
        gap_bound = 2.0 * f_m / (omega1 - omega_m)
    return bound, gap_bound


def pa_feasibility(v: float, v_t: float, omega1: float) -> float:
    """Achievable pump coupling estimate g1 = (V/V_T) omega1/4.

    V_T is the trap drive amplitude; advisory hardware scaling only.
    """
    if v < 0.0 or v_t <= 0.0:
        raise ConfigError("pa_feasibility requires v >= 0 and v_t > 0")
    return (v / v_t) * omega1 / 4.0


def derived_parameters(
    drive: DriveParams, modes: NormalModeSet, cfg: TrapConfig | None = None
) -> dict:
    """JSON-ready block of all per-mode rescaled parameters."""
    bset = bogoliubov_set(drive, modes, cfg)
    return {
        "mu_hz": drive.mu / (2.0 * math.pi),
        "theta_rad": drive.theta,
        "modes": [
            {
                "m": m + 1,
                "omega_hz": modes.omega[m] / (2.0 * math.pi),
                "delta_hz": b.delta / (2.0 * math.pi),
                "f_hz": b.f / (2.0 * math.pi),
                "g_hz": b.g / (2.0 * math.pi),
                "r": b.r,
                "s": b.s,
                "delta_p_hz": b.delta_p / (2.0 * math.pi),
                "f_p_hz": [b.f_p.real / (2.0 * math.pi), b.f_p.imag / (2.0 * math.pi)],
                "rwa_shift_hz": b.rwa_shift / (2.0 * math.pi),
            }
            for m, b in enumerate(bset)
        ],
    }
