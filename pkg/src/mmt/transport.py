"""Curves, Fermi-Walker frame transport, frame curvature and Jacobi fields.

Everything integrates with classical fixed-step RK4 on a shared uniform
proper-time grid: the curve and its frame advance inside one combined step,
and sampled tidal matrices are interpolated linearly when a later
integration needs them between nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateFrameError,
    IntegrationAbortedError,
    InvalidAccelerationError,
    SingularMetricError,
    UnsupportedMetricError,
)
from .geometry import (
    ConstantCurvatureSpec,
    GS_BREAKDOWN_TOL,
    Metric,
    Vielbein,
    christoffel,
    project_curvature,
    riemann,
)
from .grids import Grid, interp_matrix_samples

NORMALIZATION_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-8

AccelField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CurveState:
    """Snapshot of the moving laboratory: position, velocity, transported frame."""

    tau: float
    x: np.ndarray
    v: np.ndarray
    frame: Vielbein


@dataclass(frozen=True)
class CurveSampling:
    """States on a uniform proper-time grid, plus acceleration samples if any."""

    states: List[CurveState]
    step: float
    acceleration: Optional[List[np.ndarray]] = None

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.states])

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class FrameCurvature:
    """Symmetrized tidal matrices K_{0A0C}(tau_i) along a curve.

    ``max_asymmetry`` records how much symmetrization removed; it is pure
    finite-difference noise for smooth metrics.
    """

    taus: np.ndarray
    samples: np.ndarray
    max_asymmetry: float = 0.0

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def at(self, tau: float) -> np.ndarray:
        return interp_matrix_samples(self.taus, self.samples)(tau)


@dataclass(frozen=True)
class CongruenceData:
    """Frame-component congruence inputs for the non-geodesic Jacobi equation.

    M_of_tau gives the spatial velocity gradient (M_{AC} = V_{C;A}),
    a_of_tau the frame acceleration, gradient_a its spatial gradient.
    """

    M_of_tau: Callable[[float], np.ndarray]
    a_of_tau: Callable[[float], np.ndarray]
    gradient_a: Callable[[float], np.ndarray]


def velocity_norm(m: Metric, x: np.ndarray, v: np.ndarray) -> float:
    return float(v @ m.eval(x) @ v)


def normalize_velocity(m: Metric, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Scale v so g(v, v) = -1; rejects spacelike or null directions."""
    norm = velocity_norm(m, x, v)
    if norm >= 0:
        raise ValueError(f"velocity is not timelike: g(v, v) = {norm:.6g}")
    return v / math.sqrt(-norm)


def adapted_frame(m: Metric, x: np.ndarray, v: np.ndarray) -> Vielbein:
    """Orthonormal frame whose timelike column is the given unit velocity.

    Remaining columns come from Gram-Schmidt over the coordinate basis,
    skipping directions the earlier columns already exhaust. Requires a
    Lorentzian signature (-1, +1, ..., +1).
    """
    if m.signature[0] != -1 or any(s != 1 for s in m.signature[1:]):
        raise UnsupportedMetricError(
            f"curve transport needs signature (-1, +1, ...), got {m.signature}"
        )
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    g = m.eval(x)
    norm = float(v @ g @ v)
    if abs(norm + 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"expected unit timelike velocity, g(v, v) = {norm:.6g}")
    cols = [v.copy()]
    signs = [-1.0]
    for k in range(m.dim):
        if len(cols) == m.dim:
            break
        u = np.zeros(m.dim)
        u[k] = 1.0
        for s_b, e_b in zip(signs, cols):
            u -= s_b * float(e_b @ g @ u) * e_b
        norm2 = float(u @ g @ u)
        if norm2 < GS_BREAKDOWN_TOL:
            if norm2 < -GS_BREAKDOWN_TOL:
                raise DegenerateFrameError(
                    f"{m.label}: spacelike complement has negative norm {norm2:.3e}"
                )
            continue  # coordinate direction already spanned; try the next one
        cols.append(u / math.sqrt(norm2))
        signs.append(1.0)
    if len(cols) != m.dim:
        raise DegenerateFrameError(f"{m.label}: could not complete frame at {x}")
    return Vielbein(E=np.column_stack(cols), signature=m.signature)


def _curve_rhs(m: Metric, x: np.ndarray, v: np.ndarray, E: np.ndarray,
               a_field: Optional[AccelField]):
    gam = christoffel(m, x)
    gam_v = np.einsum("abc,b->ac", gam, v)
    vdot = -gam_v @ v
    Edot = -gam_v @ E
    if a_field is not None:
        a = np.asarray(a_field(x, v), dtype=float)
        g = m.eval(x)
        vdot = vdot + a
        # Fermi-Walker terms: X -> g(X, a) v - g(X, v) a per frame column
        ga = E.T @ (g @ a)
        gv = E.T @ (g @ v)
        Edot = Edot + np.outer(v, ga) - np.outer(a, gv)
    return v, vdot, Edot


def _rk4_curve_step(m: Metric, x, v, E, a_field: Optional[AccelField], h: float):
    k1 = _curve_rhs(m, x, v, E, a_field)
    k2 = _curve_rhs(m, x + 0.5 * h * k1[0], v + 0.5 * h * k1[1], E + 0.5 * h * k1[2], a_field)
    k3 = _curve_rhs(m, x + 0.5 * h * k2[0], v + 0.5 * h * k2[1], E + 0.5 * h * k2[2], a_field)
    k4 = _curve_rhs(m, x + h * k3[0], v + h * k3[1], E + h * k3[2], a_field)
    x1 = x + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v1 = v + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    E1 = E + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    return x1, v1, E1


def _check_acceleration(m: Metric, x, v, a) -> None:
    g = m.eval(x)
    dot = float(a @ g @ v)
    scale = max(1.0, math.sqrt(abs(float(a @ g @ a))))
    if abs(dot) > ORTHOGONALITY_TOL * scale:
        raise InvalidAccelerationError(
            f"acceleration not orthogonal to velocity: g(a, v) = {dot:.3e}"
        )


def _integrate_curve(m: Metric, x0, v0, h: float, steps: int,
                     a_field: Optional[AccelField]) -> CurveSampling:
    x = np.asarray(x0, dtype=float)
    v = np.asarray(v0, dtype=float)
    norm = velocity_norm(m, x, v)
    if abs(norm + 1.0) > NORMALIZATION_TOL:
        raise ValueError(
            f"initial velocity must satisfy g(v, v) = -1 within {NORMALIZATION_TOL}, "
            f"got {norm:.6g}; use normalize_velocity"
        )
    frame = adapted_frame(m, x, v)
    E = frame.E
    states = [CurveState(tau=0.0, x=x.copy(), v=v.copy(), frame=frame)]
    accels = None
    if a_field is not None:
        a0 = np.asarray(a_field(x, v), dtype=float)
        _check_acceleration(m, x, v, a0)
        accels = [a0]
    for i in range(steps):
        try:
            x, v, E = _rk4_curve_step(m, x, v, E, a_field, h)
        except (SingularMetricError, FloatingPointError) as exc:
            raise IntegrationAbortedError(
                f"{m.label}: integration aborted at step {i}: {exc}",
                last_state=states[-1], tau=states[-1].tau,
            ) from exc
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.all(np.isfinite(E))):
            raise IntegrationAbortedError(
                f"{m.label}: non-finite state at step {i + 1}",
                last_state=states[-1], tau=states[-1].tau,
            )
        tau = (i + 1) * h
        states.append(CurveState(
            tau=tau, x=x.copy(), v=v.copy(),
            frame=Vielbein(E=E.copy(), signature=m.signature),
        ))
        if a_field is not None:
            a = np.asarray(a_field(x, v), dtype=float)
            _check_acceleration(m, x, v, a)
            accels.append(a)
    return CurveSampling(states=states, step=h, acceleration=accels)


def integrate_geodesic(m: Metric, x0, v0, h: float, steps: int) -> CurveSampling:
    """Free-fall curve with parallel-transported frame."""
    return _integrate_curve(m, x0, v0, h, steps, a_field=None)


def integrate_accelerated_curve(m: Metric, x0, v0, a_field: AccelField,
                                h: float, steps: int) -> CurveSampling:
    """Accelerated worldline with Fermi-Walker transported frame.

    The acceleration field must stay orthogonal to the velocity, otherwise
    g(v, v) = -1 cannot be conserved and InvalidAccelerationError is raised.
    """
    return _integrate_curve(m, x0, v0, h, steps, a_field=a_field)


def fermi_walker_step(m: Metric, state: CurveState, accel, h: float) -> Vielbein:
    """Advance the frame one combined RK4 step along the worldline.

    ``accel`` is the coordinate acceleration at the current state (zero for
    parallel transport); a constant-acceleration field is assumed across the
    single step.
    """
    a = None if accel is None else np.asarray(accel, dtype=float)
    a_field = None if a is None or not np.any(a) else (lambda x, v: a)
    _, _, E1 = _rk4_curve_step(m, state.x, state.v, state.frame.E, a_field, h)
    if not np.all(np.isfinite(E1)):
        raise DegenerateFrameError("frame became non-finite during transport step")
    return Vielbein(E=E1, signature=m.signature)


def sample_frame_curvature(m: Metric, curve: CurveSampling) -> FrameCurvature:
    """Project Riemann onto the transported frame at every curve sample.

    Each tidal matrix is symmetrized; the discarded asymmetry (pure
    finite-difference noise) is reported as a diagnostic.
    """
    n = m.dim - 1
    samples = np.empty((len(curve), n, n))
    worst = 0.0
    for i, state in enumerate(curve.states):
        r = riemann(m, state.x)
        frame = project_curvature(r, m, state.frame)
        tidal = frame[0, 1:, 0, 1:]
        asym = float(np.max(np.abs(tidal - tidal.T)))
        worst = max(worst, asym)
        samples[i] = 0.5 * (tidal + tidal.T)
    samples.flags.writeable = False
    return FrameCurvature(taus=curve.taus, samples=samples, max_asymmetry=worst)


def _integrate_second_order(k_of_tau, taus: np.ndarray, z0, zdot0):
    """RK4 on z'' + K(tau) z = 0 as a first-order system on the given grid."""
    z = np.asarray(z0, dtype=float).copy()
    w = np.asarray(zdot0, dtype=float).copy()
    h = taus[1] - taus[0] if len(taus) > 1 else 0.0
    zs = np.empty((len(taus), len(z)))
    ws = np.empty_like(zs)
    zs[0], ws[0] = z, w

    def rhs(tau, z, w):
        return w, -(k_of_tau(tau) @ z)

    for i in range(len(taus) - 1):
        t = taus[i]
        k1 = rhs(t, z, w)
        k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1[0], w + 0.5 * h * k1[1])
        k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2[0], w + 0.5 * h * k2[1])
        k4 = rhs(t + h, z + h * k3[0], w + h * k3[1])
        z = z + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w = w + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        zs[i + 1], ws[i + 1] = z, w
    return zs, ws


def integrate_jacobi_geodesic(fc: FrameCurvature, z0, zdot0):
    """Deviation-vector evolution z'' + K(tau) z = 0 on the curvature grid.

    Returns (taus, Z, Zdot) with rows per grid node; K between samples by
    linear interpolation.
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (fc.n,) or np.asarray(zdot0).shape != (fc.n,):
        raise ValueError(
            f"initial data must have length n={fc.n}, got {z0.shape}"
        )
    k_at = interp_matrix_samples(fc.taus, fc.samples)
    zs, ws = _integrate_second_order(k_at, fc.taus, z0, zdot0)
    return fc.taus.copy(), zs, ws


def integrate_jacobi_nongeodesic(fc: FrameCurvature, cong: CongruenceData, z0, zdot0):
    """Non-geodesic deviation: z'' + (K - grad_a - a a^t) z = 0.

    Spatial frame indices are raised with the flat spatial metric (+1 each),
    so no sign flips enter the correction terms.
    """
    if cong is None:
        raise ValueError("congruence data required; use integrate_jacobi_geodesic")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (fc.n,):
        raise ValueError(f"initial data must have length n={fc.n}")
    k_at = interp_matrix_samples(fc.taus, fc.samples)

    def effective(tau):
        a = np.asarray(cong.a_of_tau(tau), dtype=float)
        return k_at(tau) - np.asarray(cong.gradient_a(tau), dtype=float) - np.outer(a, a)

    zs, ws = _integrate_second_order(effective, fc.taus, z0, zdot0)
    return fc.taus.copy(), zs, ws


# --- built-in congruences and acceleration fields --------------------------


def rindler_acceleration(g: float) -> AccelField:
    """Constant proper acceleration g in the t-x plane of flat spacetime."""

    def a_field(x, v):
        a = np.zeros(len(x))
        a[0] = g * v[1]
        a[1] = g * v[0]
        return a

    return a_field


def rindler_congruence(n: int, g: float) -> CongruenceData:
    """Uniformly accelerated flat-space congruence, evaluated on the worldline
    of the observer with proper acceleration g (coordinate radius 1/g).

    The congruence is rigid: the spatial velocity gradient vanishes, the
    frame acceleration is constant, and its gradient is -g^2 along the
    boost direction.
    """
    M = np.zeros((n, n))
    a = np.zeros(n)
    a[0] = g
    grad = np.zeros((n, n))
    grad[0, 0] = -g * g
    return CongruenceData(
        M_of_tau=lambda tau: M,
        a_of_tau=lambda tau: a,
        gradient_a=lambda tau: grad,
    )


def schwarzschild_static_acceleration(mass: float) -> AccelField:
    """Coordinate acceleration holding an observer at fixed Schwarzschild radius."""

    def a_field(x, v):
        a = np.zeros(4)
        a[1] = mass / (x[1] * x[1])
        return a

    return a_field


def schwarzschild_static_congruence(mass: float, r: float) -> CongruenceData:
    """Static-observer congruence data at radius r in the static frame.

    Derived from the static tetrad: the congruence is rigid (M = 0); the
    acceleration points radially with magnitude m / (r^2 sqrt(f)); its
    spatial gradient is diagonal. Combined with the static tidal matrix
    these make the non-geodesic deviation coefficients cancel exactly.
    """
    f = 1.0 - 2.0 * mass / r
    if f <= 0:
        raise ValueError(f"static observers need r > 2m, got r={r}, m={mass}")
    M = np.zeros((3, 3))
    a = np.array([mass / (r * r * math.sqrt(f)), 0.0, 0.0])
    grad = np.diag([
        -2.0 * mass / r ** 3 - mass ** 2 / (r ** 4 * f),
        mass / r ** 3,
        mass / r ** 3,
    ])
    return CongruenceData(
        M_of_tau=lambda tau: M,
        a_of_tau=lambda tau: a,
        gradient_a=lambda tau: grad,
    )


def constant_curvature_tidal_samples(spec: ConstantCurvatureSpec, grid: Grid) -> FrameCurvature:
    """Analytic frame curvature of a maximally symmetric space on a grid."""
    block = np.diag(np.array(spec.K_values, dtype=float))
    samples = np.repeat(block[None, :, :], grid.steps + 1, axis=0)
    samples.flags.writeable = False
    return FrameCurvature(taus=grid.taus, samples=samples, max_asymmetry=0.0)
