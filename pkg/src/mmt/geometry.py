"""Metrics, Christoffel symbols, Riemann curvature and orthonormal frames.

Curvature conventions, fixed once for the whole package:

* ``riemann`` returns R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc}
  + Gamma^a_{ec} Gamma^e_{bd} - Gamma^a_{ed} Gamma^e_{bc}; the first index is
  lowered with the metric where a fully covariant tensor is needed.
* With this convention the unit 2-sphere has R_{tp tp} = sin(theta)^2, and a
  constant-curvature space of parameter K satisfies
  R_{abcd} = K (G_{ad} G_{bc} - G_{ac} G_{bd}).
* Frames are columns of E with E^t G E = eta = diag(signature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateFrameError, SingularMatrixError, SingularMetricError, UnsupportedMetricError
from .linalg import solve_linear

FD_REL_STEP = 1e-5
# Step for differentiating a Christoffel field that is itself finite-differenced;
# larger than FD_REL_STEP to keep the inner FD noise from dominating.
FD_OUTER_REL_STEP = 1e-3
FRAME_TOL = 1e-10
GS_BREAKDOWN_TOL = 1e-12


@dataclass(frozen=True)
class Metric:
    """A chart: dimension, signature and a pointwise metric evaluator.

    ``christoffel`` and ``frame_field`` are optional analytic shortcuts;
    everything works (more slowly and noisily) from ``eval`` alone.
    """

    dim: int
    signature: tuple
    eval: Callable[[np.ndarray], np.ndarray]
    christoffel: Optional[Callable[[np.ndarray], np.ndarray]] = None
    frame_field: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "metric"

    def __post_init__(self):
        if len(self.signature) != self.dim:
            raise ValueError(
                f"signature length {len(self.signature)} != dim {self.dim}"
            )
        if any(s not in (-1, 1) for s in self.signature):
            raise ValueError(f"signature entries must be +-1, got {self.signature}")

    @property
    def eta(self) -> np.ndarray:
        return np.diag(np.array(self.signature, dtype=float))


@dataclass(frozen=True)
class Vielbein:
    """Orthonormal frame at a point; column A of E is the frame vector E_(A)."""

    E: np.ndarray
    signature: tuple

    @property
    def eta(self) -> np.ndarray:
        return np.diag(np.array(self.signature, dtype=float))


@dataclass(frozen=True)
class RiemannAtPoint:
    """Rank-4 curvature R^a_{bcd} (first index contravariant) at one point."""

    components: np.ndarray
    point: np.ndarray


@dataclass(frozen=True)
class ConstantCurvatureSpec:
    """Per-direction curvature constants K_l for a maximally symmetric target."""

    K_values: tuple

    def __post_init__(self):
        if len(self.K_values) == 0:
            raise ValueError("need at least one curvature constant")
        if not all(math.isfinite(k) for k in self.K_values):
            raise ValueError("curvature constants must be finite")

    @classmethod
    def uniform(cls, K: float, n: int) -> "ConstantCurvatureSpec":
        return cls(tuple(float(K) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.K_values)


def _fd_step(x: np.ndarray, rel: float) -> float:
    return rel * max(1.0, float(np.max(np.abs(x))))


def metric_inverse(m: Metric, x: np.ndarray) -> np.ndarray:
    g = m.eval(x)
    try:
        return solve_linear(g, np.eye(m.dim))
    except SingularMatrixError as exc:
        raise SingularMetricError(f"{m.label} singular at {x}: {exc}") from exc


def christoffel_fd(m: Metric, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Central-difference Christoffel symbols Gamma^a_{bc} from the metric alone."""
    x = np.asarray(x, dtype=float)
    h = step if step is not None else _fd_step(x, FD_REL_STEP)
    d = m.dim
    ginv = metric_inverse(m, x)
    dg = np.empty((d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dg[k] = (m.eval(x + e) - m.eval(x - e)) / (2.0 * h)
    # bracket[s, b, c] = d_b g_sc + d_c g_sb - d_s g_bc
    bracket = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    return 0.5 * np.einsum("as,sbc->abc", ginv, bracket)


def christoffel(m: Metric, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Christoffel symbols; analytic when the metric ships them, else central FD."""
    x = np.asarray(x, dtype=float)
    if m.christoffel is not None:
        return m.christoffel(x)
    return christoffel_fd(m, x, step)


def riemann(m: Metric, x: np.ndarray, step: Optional[float] = None) -> RiemannAtPoint:
    """Curvature R^a_{bcd} by central differences of the Christoffel field."""
    x = np.asarray(x, dtype=float)
    d = m.dim
    rel = FD_REL_STEP if m.christoffel is not None else FD_OUTER_REL_STEP
    h = step if step is not None else _fd_step(x, rel)
    gamma = christoffel(m, x)
    dgamma = np.empty((d, d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dgamma[k] = (christoffel(m, x + e) - christoffel(m, x - e)) / (2.0 * h)
    # R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc} + G G - G G
    term1 = dgamma.transpose(1, 2, 0, 3)
    term2 = dgamma.transpose(1, 2, 3, 0)
    term3 = np.einsum("aec,ebd->abcd", gamma, gamma)
    term4 = np.einsum("aed,ebc->abcd", gamma, gamma)
    comp = term1 - term2 + term3 - term4
    return RiemannAtPoint(components=comp, point=x.copy())


def lower_first_index(r: RiemannAtPoint, m: Metric) -> np.ndarray:
    """Fully covariant curvature R_{abcd} = g_{ae} R^e_{bcd}."""
    g = m.eval(r.point)
    return np.einsum("ae,ebcd->abcd", g, r.components)


def build_vielbein(m: Metric, x: np.ndarray) -> Vielbein:
    """Gram-Schmidt the coordinate basis against G, timelike direction first.

    Column A is normalized so g(E_A, E_A) = signature[A]; a norm of the wrong
    sign or magnitude below the breakdown threshold raises DegenerateFrameError.
    """
    x = np.asarray(x, dtype=float)
    g = m.eval(x)
    return _gram_schmidt(g, np.eye(m.dim), m.signature, m.label)


def _gram_schmidt(g: np.ndarray, seeds: np.ndarray, signature: Sequence[int],
                  label: str) -> Vielbein:
    d = g.shape[0]
    cols = []
    for a in range(d):
        u = seeds[:, a].copy()
        for s_b, e_b in zip(signature, cols):
            u -= s_b * float(e_b @ g @ u) * e_b
        norm2 = float(u @ g @ u)
        if abs(norm2) < GS_BREAKDOWN_TOL or math.copysign(1.0, norm2) != signature[a]:
            raise DegenerateFrameError(
                f"{label}: Gram-Schmidt breakdown at column {a} "
                f"(norm^2 = {norm2:.3e}, expected sign {signature[a]:+d})"
            )
        cols.append(u / math.sqrt(abs(norm2)))
    E = np.column_stack(cols)
    eta = np.diag(np.array(signature, dtype=float))
    defect = float(np.max(np.abs(E.T @ g @ E - eta)))
    if defect > FRAME_TOL:
        raise DegenerateFrameError(f"{label}: frame defect {defect:.3e} exceeds {FRAME_TOL}")
    return Vielbein(E=E, signature=tuple(signature))


def project_curvature(r: RiemannAtPoint, m: Metric, e: Vielbein) -> np.ndarray:
    """Frame components: lower the first index with G, contract with frame columns."""
    low = lower_first_index(r, m)
    E = e.E
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", low, E, E, E, E)


def ricci_rotation_curvature(m: Metric, x: np.ndarray,
                             step: Optional[float] = None) -> np.ndarray:
    """Frame curvature assembled from rotation coefficients of the frame field.

    Cross-check path only: needs an analytic frame field (flat,
    constant-curvature, Schwarzschild built-ins carry one). The rotation
    coefficients are gamma_{ABC} = g(E_A, nabla_{E_C} E_B), differentiated
    along frame directions by central differences.
    """
    if m.frame_field is None:
        raise UnsupportedMetricError(
            f"{m.label} has no analytic frame field; use project_curvature instead"
        )
    x = np.asarray(x, dtype=float)
    d = m.dim
    h = step if step is not None else _fd_step(x, FD_OUTER_REL_STEP)
    eta_diag = np.array(m.signature, dtype=float)

    def gamma_at(y: np.ndarray) -> np.ndarray:
        E = m.frame_field(y)
        g = m.eval(y)
        gam = christoffel(m, y)
        dE = np.empty((d, d, d))
        for k in range(d):
            ek = np.zeros(d)
            ek[k] = h
            dE[k] = (m.frame_field(y + ek) - m.frame_field(y - ek)) / (2.0 * h)
        # cov[l, B, C] = (nabla_{E_C} E_B)^l
        cov = np.einsum("pc,plb->lbc", E, dE) + np.einsum("lpo,pc,ob->lbc", gam, E, E)
        return np.einsum("lm,ma,lbc->abc", g, E, cov)

    gamma0 = gamma_at(x)
    dgam = np.empty((d, d, d, d))
    for k in range(d):
        ek = np.zeros(d)
        ek[k] = h
        dgam[k] = (gamma_at(x + ek) - gamma_at(x - ek)) / (2.0 * h)
    E0 = m.frame_field(x)
    # gamma_{ABC,D}: coordinate gradient contracted with frame column D
    gamma_dir = np.einsum("pabc,pd->abcd", dgam, E0)

    first = -gamma_dir + gamma_dir.transpose(0, 1, 3, 2)
    inv = eta_diag  # eta is diagonal +-1, so eta^{MN} contraction is a weighted sum
    comm = np.einsum("n,ban,cnd->abcd", inv, gamma0, gamma0) \
        - np.einsum("n,ban,dnc->abcd", inv, gamma0, gamma0)
    quad = np.einsum("n,nac,bnd->abcd", inv, gamma0, gamma0) \
        - np.einsum("n,nad,bnc->abcd", inv, gamma0, gamma0)
    return first + comm + quad


def constant_curvature_frame_block(spec: ConstantCurvatureSpec) -> np.ndarray:
    """Tidal matrix of a maximally symmetric space in an orthonormal frame."""
    return np.diag(np.array(spec.K_values, dtype=float))


# --- built-in metric catalog ---------------------------------------------


def minkowski_metric(dim: int = 4) -> Metric:
    signature = (-1,) + (1,) * (dim - 1)
    eta = np.diag(np.array(signature, dtype=float))

    return Metric(
        dim=dim,
        signature=signature,
        eval=lambda x: eta.copy(),
        christoffel=lambda x: np.zeros((dim, dim, dim)),
        frame_field=lambda x: np.eye(dim),
        label=f"minkowski-{dim}d",
    )


def schwarzschild_metric(mass: float = 1.0) -> Metric:
    """Static chart (t, r, theta, phi); valid outside the horizon r > 2m."""

    def g_at(x):
        r, th = x[1], x[2]
        f = 1.0 - 2.0 * mass / r
        return np.diag([-f, 1.0 / f, r * r, r * r * math.sin(th) ** 2])

    def gamma_at(x):
        r, th = x[1], x[2]
        f = 1.0 - 2.0 * mass / r
        sin_th, cos_th = math.sin(th), math.cos(th)
        gam = np.zeros((4, 4, 4))
        gam[0, 0, 1] = gam[0, 1, 0] = mass / (r * r * f)
        gam[1, 0, 0] = mass * f / (r * r)
        gam[1, 1, 1] = -mass / (r * r * f)
        gam[1, 2, 2] = -r * f
        gam[1, 3, 3] = -r * f * sin_th ** 2
        gam[2, 1, 2] = gam[2, 2, 1] = 1.0 / r
        gam[2, 3, 3] = -sin_th * cos_th
        gam[3, 1, 3] = gam[3, 3, 1] = 1.0 / r
        gam[3, 2, 3] = gam[3, 3, 2] = cos_th / sin_th
        return gam

    def frame_at(x):
        r, th = x[1], x[2]
        f = 1.0 - 2.0 * mass / r
        return np.diag([1.0 / math.sqrt(f), math.sqrt(f), 1.0 / r,
                        1.0 / (r * math.sin(th))])

    return Metric(
        dim=4,
        signature=(-1, 1, 1, 1),
        eval=g_at,
        christoffel=gamma_at,
        frame_field=frame_at,
        label=f"schwarzschild-m{mass:g}",
    )


def constant_curvature_metric(K: float, dim: int = 4) -> Metric:
    """Conformally flat chart of a maximally symmetric spacetime.

    G = eta / (1 - (K/4) sigma)^2 with sigma = eta_{ab} x^a x^b, so the
    covariant curvature is K (G_{ad} G_{bc} - G_{ac} G_{bd}) and any
    orthonormal-frame tidal matrix equals K times the identity. Chart is
    valid where 1 - (K/4) sigma > 0.
    """
    signature = (-1,) + (1,) * (dim - 1)
    eta_diag = np.array(signature, dtype=float)
    eta = np.diag(eta_diag)

    def omega(x):
        sigma = float(eta_diag @ (x * x))
        denom = 1.0 - 0.25 * K * sigma
        if denom <= 0:
            raise SingularMetricError(
                f"constant-curvature chart breaks down at {x} (denominator {denom:.3e})"
            )
        return 1.0 / denom

    def g_at(x):
        return omega(x) ** 2 * eta

    def gamma_at(x):
        # conformal metric: Gamma^a_{bc} = delta^a_b d_c phi + delta^a_c d_b phi
        #                                  - eta_{bc} eta^{ad} d_d phi, phi = log omega
        w = omega(x)
        dphi = 0.5 * K * w * (eta_diag * x)
        gam = np.zeros((dim, dim, dim))
        for a in range(dim):
            gam[a, a, :] += dphi
            gam[a, :, a] += dphi
        gam -= np.einsum("bc,a->abc", eta, eta_diag * dphi)
        return gam

    def frame_at(x):
        return np.eye(dim) / omega(x)

    return Metric(
        dim=dim,
        signature=signature,
        eval=g_at,
        christoffel=gamma_at,
        frame_field=frame_at,
        label=f"constant-curvature-K{K:g}-{dim}d",
    )


def diagonal_metric(entries: Sequence[Callable[[np.ndarray], float]],
                    signature: Sequence[int],
                    label: str = "diagonal") -> Metric:
    """Diagonal metric from per-coordinate entry functions; derivatives by FD."""
    entries = tuple(entries)
    dim = len(entries)

    def g_at(x):
        return np.diag([float(f(x)) for f in entries])

    return Metric(
        dim=dim,
        signature=tuple(signature),
        eval=g_at,
        label=label,
    )


def two_sphere_metric(radius: float = 1.0) -> Metric:
    """Round sphere in (theta, phi); exercises the pure finite-difference path."""
    return diagonal_metric(
        (lambda x: radius ** 2, lambda x: (radius * math.sin(x[0])) ** 2),
        signature=(1, 1),
        label=f"two-sphere-r{radius:g}",
    )
