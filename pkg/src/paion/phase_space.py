"""Phase-space trajectories of driven, pumped modes and derived loop metrics.

Each motional mode, conditioned on a spin branch, undergoes c-number
displacement dynamics: the Hamiltonian is linear plus quadratic, so the
displacement obeys a closed classical equation and the enclosed area gives
the spin-dependent phase. Two levels of description are supported:

* RWA     -- the co-rotating terms only, solvable in closed form,
* FULL    -- includes every counter-rotating term at 2 mu and 4 mu.

The integrated state carries the interaction-picture displacement and the
quadratic-part propagator together, so the loop area is accumulated exactly
in the picture where the pump's breathing has been removed. Loop period and
loop phase are then extracted from the numerics the same way for both
levels, which is what makes the effective squeezing s_eff an operational
quantity instead of an algebraic one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import OK, STEP_BUDGET, STEP_UNDERFLOW, dp5_propagate
from .drive_model import BogoliubovMode, BogoliubovSet, bogoliubov
from .errors import ConfigError, IntegrationError, SolverError
from .ion_crystal import NormalModeSet

__all__ = [
    "RWA",
    "FULL",
    "SpinBranch",
    "IntegratorConfig",
    "TrajectoryRecord",
    "rwa_trajectory",
    "integrate_modes",
    "integrate_full",
    "geometric_phase",
    "extract_loop_period",
    "loop_phase",
    "SEffResult",
    "s_eff",
    "rwa_region",
]

RWA = "RWA"
FULL = "FULL"

VALID = "VALID"
MARGINAL = "MARGINAL"
BROKEN = "BROKEN"


@dataclass(frozen=True)
class SpinBranch:
    """A joint spin configuration and its per-mode displacement weights."""

    sigma: tuple[int, ...]
    s: np.ndarray

    @classmethod
    def from_configuration(cls, modes: NormalModeSet, sigma) -> "SpinBranch":
        sig = tuple(int(x) for x in sigma)
        if len(sig) != modes.n_ions:
            raise ConfigError("spin configuration length must match ion count")
        if any(x not in (-1, 1) for x in sig):
            raise ConfigError("spin configuration entries must be +1 or -1")
        weights = modes.U.T @ np.asarray(sig, dtype=float)
        return cls(sigma=sig, s=weights)


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-stepper settings.

    ``max_step`` and ``h0`` default to fractions of the fastest relevant
    period (loop period for RWA, counter-rotating period for FULL) when left
    unset. ``n_max`` is a runaway guard on attempted steps per mode.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None
    h0: float | None = None
    n_max: int = 100_000_000
    method: str = "dp5"

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ConfigError("integrator tolerances must be positive")
        if self.method != "dp5":
            raise ConfigError(f"unknown integrator method {self.method!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled displacement trajectories for a set of modes.

    ``alpha[m, k]`` is the rotating-frame displacement of mode m at t[k];
    ``beta_ip`` the interaction-picture displacement with the quadratic-part
    propagator removed; ``phi`` the accumulated loop area summed over modes.
    """

    t: np.ndarray
    alpha: np.ndarray
    beta_ip: np.ndarray
    phi_per_mode: np.ndarray
    phi: np.ndarray
    mode_of: str
    frame: str


def rwa_trajectory(
    f: float, delta: float, g: float, theta: float, s: float, t
) -> np.ndarray:
    """Closed-form co-rotating displacement of one mode at branch weight s.

    General-theta solution of the pumped, driven mode: with
    beta_st = -i f s (delta + g e^{-i theta}) / delta_p^2,
    beta(t) = beta_st - A(t) beta_st - B(t) beta_st*,
    A = cos(delta_p t) - i (delta/delta_p) sin(delta_p t),
    B = -i (g e^{-i theta}/delta_p) sin(delta_p t).
    The loop closes exactly at multiples of 2 pi / delta_p for every theta.
    """
    if not (0.0 <= g < delta):
        raise ConfigError("rwa_trajectory requires 0 <= g < delta")
    t = np.asarray(t, dtype=float)
    dp = math.sqrt((delta - g) * (delta + g))
    emith = complex(math.cos(theta), -math.sin(theta))
    beta_st = -1j * f * s * (delta + g * emith) / dp**2
    swt = np.sin(dp * t)
    a_t = np.cos(dp * t) - 1j * (delta / dp) * swt
    b_t = (-1j * g * emith / dp) * swt
    return beta_st - a_t * beta_st - b_t * np.conj(beta_st)


def _frame_factors(b: BogoliubovMode, frame: str) -> tuple[float, complex]:
    if frame == "a":
        return 1.0, 0.0 + 0j
    if frame == "b":
        emith = complex(math.cos(b.theta), -math.sin(b.theta))
        return math.cosh(b.r), math.sinh(b.r) * emith
    raise ConfigError(f"unknown frame {frame!r}; use 'a' or 'b'")


def _step_defaults(
    b: BogoliubovMode, icfg: IntegratorConfig, hamiltonian: str
) -> tuple[float, float]:
    if hamiltonian == FULL:
        fast = 2.0 * math.pi / (4.0 * b.mu)
        h0 = fast / 8.0
        max_step = 0.25 * fast
    else:
        t_loop = 2.0 * math.pi / b.delta_p
        h0 = t_loop / 64.0
        max_step = 0.25 * t_loop
    if icfg.h0 is not None:
        h0 = icfg.h0
    if icfg.max_step is not None:
        max_step = icfg.max_step
    return h0, max_step


def _propagate_mode(
    b: BogoliubovMode,
    s_m: float,
    t: np.ndarray,
    icfg: IntegratorConfig,
    hamiltonian: str,
    frame: str,
    bip0: complex,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One kernel invocation; returns (beta_ip, A, B, phi) at the samples."""
    tc, ts = _frame_factors(b, frame)
    h0, max_step = _step_defaults(b, icfg, hamiltonian)
    n = t.shape[0]
    out_bip = np.empty(n, dtype=np.complex128)
    out_a = np.empty(n, dtype=np.complex128)
    out_b = np.empty(n, dtype=np.complex128)
    out_phi = np.empty(n, dtype=np.float64)
    status, _ = dp5_propagate(
        t,
        float(b.delta),
        float(b.g),
        float(b.theta),
        float(b.mu),
        float(b.f * s_m),
        hamiltonian == FULL,
        float(tc),
        complex(ts),
        complex(bip0),
        float(icfg.rel_tol),
        float(icfg.abs_tol),
        float(icfg.abs_tol),
        float(icfg.abs_tol),
        float(h0),
        float(max_step),
        int(icfg.n_max),
        out_bip,
        out_a,
        out_b,
        out_phi,
    )
    if status == STEP_UNDERFLOW:
        raise IntegrationError(
            f"step size underflow at delta={b.delta:.6g}, g={b.g:.6g}"
        )
    if status == STEP_BUDGET:
        raise IntegrationError(
            f"step budget {icfg.n_max} exhausted at delta={b.delta:.6g}, "
            f"g={b.g:.6g}; raise IntegratorConfig.n_max or relax tolerances"
        )
    assert status == OK
    return out_bip, out_a, out_b, out_phi


def _branch_weights(bset: BogoliubovSet, s) -> np.ndarray:
    if isinstance(s, SpinBranch):
        weights = s.s
    else:
        weights = np.atleast_1d(np.asarray(s, dtype=float))
        if weights.size == 1:
            weights = np.full(len(bset), weights[0])
    if weights.size != len(bset):
        raise ConfigError("branch weight count must match mode count")
    return weights


def integrate_modes(
    bset: BogoliubovSet | BogoliubovMode,
    s,
    t,
    icfg: IntegratorConfig | None = None,
    hamiltonian: str = FULL,
    frame: str = "a",
    bip0: complex = 0j,
) -> TrajectoryRecord:
    """Integrate every mode of a drive over the sample times t.

    ``s`` may be a SpinBranch, an array of per-mode weights, or a scalar
    applied to all modes. ``bip0`` seeds an initial displacement (same value
    for each mode; the default 0 is the switched-on-from-rest protocol).
    """
    if isinstance(bset, BogoliubovMode):
        bset = BogoliubovSet(modes=(bset,))
    if hamiltonian not in (RWA, FULL):
        raise ConfigError(f"unknown hamiltonian {hamiltonian!r}")
    icfg = icfg or IntegratorConfig()
    t = np.ascontiguousarray(np.asarray(t, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ConfigError("sample times must be a non-empty 1-D array")
    if np.any(t < 0.0) or np.any(np.diff(t) <= 0.0):
        raise ConfigError("sample times must be non-negative and increasing")
    weights = _branch_weights(bset, s)

    n_modes = len(bset)
    n_t = t.size
    alpha = np.empty((n_modes, n_t), dtype=np.complex128)
    beta_ip = np.empty((n_modes, n_t), dtype=np.complex128)
    phi_pm = np.empty((n_modes, n_t), dtype=np.float64)
    for m, b in enumerate(bset):
        bip, a_t, b_t, phi = _propagate_mode(
            b, weights[m], t, icfg, hamiltonian, frame, bip0
        )
        beta_ip[m] = bip
        alpha[m] = a_t * bip + b_t * np.conj(bip)
        phi_pm[m] = phi
    return TrajectoryRecord(
        t=t,
        alpha=alpha,
        beta_ip=beta_ip,
        phi_per_mode=phi_pm,
        phi=phi_pm.sum(axis=0),
        mode_of=hamiltonian,
        frame=frame,
    )


def integrate_full(
    bset,
    s,
    t,
    icfg: IntegratorConfig | None = None,
    frame: str = "a",
    bip0: complex = 0j,
) -> TrajectoryRecord:
    """Full-dynamics integration including all counter-rotating terms."""
    return integrate_modes(
        bset, s, t, icfg=icfg, hamiltonian=FULL, frame=frame, bip0=bip0
    )


def geometric_phase(rec: TrajectoryRecord) -> np.ndarray:
    """Accumulated loop area Phi(t), summed over modes.

    The quantity is carried as integrator state, so this is an accessor; it
    exists to name the convention: Phi = 2 Im integral beta_ip* d(beta_ip),
    which makes the single unpumped loop at drive-to-detuning ratio f/delta
    enclose exactly 4 pi (f/delta)^2.
    """
    return rec.phi


def _drive_value(b: BogoliubovMode, s_m: float, t: float, hamiltonian: str, frame: str) -> complex:
    d = b.f * s_m * (1.0 + np.exp(-2j * b.mu * t)) if hamiltonian == FULL else complex(b.f * s_m)
    tc, ts = _frame_factors(b, frame)
    if ts != 0:
        d = tc * d - ts * np.conj(d)
    return d


def _radial_velocity(
    b: BogoliubovMode,
    s_m: float,
    t: float,
    icfg: IntegratorConfig,
    hamiltonian: str,
) -> float:
    """d|beta_ip|^2/dt / 2 at time t, for root-polishing loop closures."""
    arr = np.array([t])
    bip, a_t, b_t, _ = _propagate_mode(b, s_m, arr, icfg, hamiltonian, "a", 0j)
    d = _drive_value(b, s_m, t, hamiltonian, "a")
    dbip = np.conj(a_t[0]) * d - b_t[0] * np.conj(d)
    return float(np.real(np.conj(bip[0]) * dbip))


def extract_loop_period(
    b: BogoliubovMode,
    s_m: float = 1.0,
    icfg: IntegratorConfig | None = None,
    hamiltonian: str = FULL,
) -> float:
    """Loop period extracted from the dynamics as the paper's procedure implies.

    The interaction-picture displacement returns near zero once per loop;
    the loop period is the location of that minimum of |beta_ip|^2. For RWA
    dynamics the minimum is polished to machine precision by a safeguarded
    secant on the radial velocity. For FULL dynamics the counter-rotating
    wiggles make the pointwise minimum ill-defined, so the minimum of a
    least-squares parabola through a window spanning many wiggle periods is
    used instead (the window average is the physically meaningful envelope).
    """
    icfg = icfg or IntegratorConfig()
    t_est = 2.0 * math.pi / b.delta_p
    if hamiltonian == RWA:
        lo, hi, n = 0.9 * t_est, 1.1 * t_est, 801
    else:
        # The counter-rotating terms speed the loop up, strongly so near
        # breakdown, so the first true closure can sit far left of the
        # co-rotating estimate. Scan from (nearly) zero and take the first
        # envelope minimum after the excursion has opened up, rather than
        # trusting any single shift estimate.
        lo, hi, n = 1e-3 * t_est, 2.6 * t_est, 24001

    grid = np.linspace(lo, hi, n)
    bip, _, _, _ = _propagate_mode(b, s_m, grid, icfg, hamiltonian, "a", 0j)
    y = np.abs(bip) ** 2
    dx = grid[1] - grid[0]

    if hamiltonian == FULL:
        # Average away the 2 mu wiggles before looking for minima.
        k = max(3, int(math.ceil(10.0 * math.pi / b.mu / dx)) | 1)
        kern = np.ones(k) / k
        ys = np.convolve(y, kern, mode="same")
        edge = k // 2 + 1
    else:
        ys = y
        edge = 1
    peak = float(np.max(ys))
    floor = 1e-2 * peak
    # Only minima reached after the excursion has passed a quarter of its
    # global peak count as closures; that rejects wiggle-scale dips on the
    # small initial rise, where everything sits below the floor.
    opened = 0.25 * peak
    i0 = -1
    high = ys[edge]
    for i in range(edge, n - edge):
        if high >= opened and ys[i] <= ys[i - 1] and ys[i] < ys[i + 1] and ys[i] < floor:
            i0 = i
            break
        if ys[i] > high:
            high = ys[i]
    if i0 < 0:
        raise SolverError(
            "loop-period extraction: no deep envelope minimum of |beta_ip|^2 "
            f"in [{lo:.3e}, {hi:.3e}] s at delta={b.delta:.6g}, g={b.g:.6g}"
        )

    if hamiltonian == RWA:
        t_lo, t_hi = grid[i0] - dx, grid[i0] + dx
        g_lo = _radial_velocity(b, s_m, t_lo, icfg, hamiltonian)
        g_hi = _radial_velocity(b, s_m, t_hi, icfg, hamiltonian)
        t0, t1, g0, g1 = t_lo, t_hi, g_lo, g_hi
        for _ in range(80):
            if g1 == g0:
                break
            t2 = t1 - g1 * (t1 - t0) / (g1 - g0)
            if not (t_lo - 5 * dx <= t2 <= t_hi + 5 * dx):
                t2 = 0.5 * (t0 + t1)
            if abs(t2 - t1) < 1e-13 * t_est:
                return t2
            t0, g0 = t1, g1
            t1, g1 = t2, _radial_velocity(b, s_m, t2, icfg, hamiltonian)
        return t1

    # FULL: least-squares parabola over a window of many wiggle periods.
    half_width = max(10.0 * math.pi / b.mu, 10.0 * dx)
    mask = np.abs(grid - grid[i0]) <= half_width
    tw = grid[mask] - grid[i0]
    c2, c1, _ = np.polyfit(tw, y[mask], 2)
    if c2 <= 0.0:
        raise SolverError(
            "loop-period extraction: envelope fit has no minimum at "
            f"delta={b.delta:.6g}, g={b.g:.6g}"
        )
    return float(grid[i0] - c1 / (2.0 * c2))


def loop_phase(
    b: BogoliubovMode,
    s_m: float = 1.0,
    icfg: IntegratorConfig | None = None,
    hamiltonian: str = FULL,
) -> tuple[float, float]:
    """(loop period, enclosed phase over one loop) for a single mode."""
    t_loop = extract_loop_period(b, s_m, icfg, hamiltonian)
    icfg = icfg or IntegratorConfig()
    _, _, _, phi = _propagate_mode(
        b, s_m, np.array([t_loop]), icfg, hamiltonian, "a", 0j
    )
    return t_loop, float(phi[0])


@dataclass(frozen=True)
class SEffResult:
    """Operational squeezing at a fixed-period, fixed-phase design point.

    delta is the design detuning, solving sqrt(delta^2 - g^2) = 2 pi / tau;
    f and t_loop are the drive strength and true closure time of the full
    dynamics there, and f_sdf, t_loop_sdf the unpumped (g = 0) references
    built the same way at their own design detuning 2 pi / tau. s_bog and
    region describe the co-rotating algebra at the design point; s_eff is
    judged against s_bog.
    """

    s_eff: float
    s_bog: float
    delta: float
    f: float
    t_loop: float
    region: str
    delta_sdf: float
    f_sdf: float
    t_loop_sdf: float


def s_eff(
    g: float,
    tau: float,
    omega1: float,
    phi_target: float,
    theta: float = 0.0,
    icfg: IntegratorConfig | None = None,
) -> SEffResult:
    """Effective squeezing: drive-time reduction at fixed loop phase.

    For the pumped and the unpumped drive alike, the detuning is the
    co-rotating design value for a single loop of period tau (the solution
    of sqrt(delta^2 - g^2) = 2 pi / tau, with mu = omega1 + delta). The
    loop time t_min is then the true first closure of the full dynamics at
    that detuning, and the drive strength is set so the phase enclosed at
    t_min equals phi_target (the phase is exactly quadratic in f, so one
    unit-drive evaluation determines it). The ratio of the two (f * t_min)
    products is the operational squeezing factor; it approaches the
    algebraic s in the co-rotating limit, and the enhancement 1/s_eff^2
    saturates below 1/s^2 once the counter-rotating frequency pulling
    becomes comparable to delta_p, because the loop closes early and
    encloses less area than the co-rotating design assumes.
    """
    if g < 0.0 or tau <= 0.0 or phi_target <= 0.0:
        raise ConfigError("s_eff requires g >= 0, tau > 0, phi_target > 0")

    def operating_point(g_val: float) -> tuple[float, float, float]:
        delta = math.hypot(2.0 * math.pi / tau, g_val)
        bm = bogoliubov(delta, g_val, theta, omega1 + delta, f=1.0)
        t_loop, phi_unit = loop_phase(bm, 1.0, icfg, FULL)
        if phi_unit <= 0.0:
            raise SolverError("unit-drive loop phase is not positive")
        f_req = math.sqrt(phi_target / phi_unit)
        return delta, f_req, t_loop

    delta_pa, f_pa, t_pa = operating_point(g)
    delta_sdf, f_sdf, t_sdf = operating_point(0.0)
    b_ref = bogoliubov(delta_pa, g, theta, omega1 + delta_pa)
    return SEffResult(
        s_eff=(f_pa * t_pa) / (f_sdf * t_sdf),
        s_bog=b_ref.s,
        delta=delta_pa,
        f=f_pa,
        t_loop=t_pa,
        region=rwa_region(g, delta_pa, omega1 + delta_pa),
        delta_sdf=delta_sdf,
        f_sdf=f_sdf,
        t_loop_sdf=t_sdf,
    )


def rwa_region(g: float, delta: float, mu: float) -> str:
    """Classify how far the co-rotating treatment can be trusted.

    Compares the second-order frequency pulling against the rescaled
    detuning: below a twentieth it is quantitatively reliable, below a half
    it drifts, beyond that the co-rotating picture has broken down. The
    boundaries are closed on the left.
    """
    bm = bogoliubov(delta, g, 0.0, mu)
    if bm.rwa_shift < bm.delta_p / 20.0:
        return VALID
    if bm.rwa_shift < bm.delta_p / 2.0:
        return MARGINAL
    return BROKEN
