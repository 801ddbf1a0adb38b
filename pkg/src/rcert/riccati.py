"""Logarithmic-derivative transform and its integral-identity oracles.

Along a nonvanishing solution segment the ratio ``y = p0 * phi' / phi`` obeys
a scalar quadratic (Riccati-type) equation, and the solution admits exact
exponential-integral representations in terms of y.  Evaluating how well a
computed trajectory satisfies those representations gives oracles that detect
integration or bookkeeping errors without re-solving anything: the identities
hold exactly for true solutions, so the normalized residuals must shrink
linearly with the integrator tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .dynamics import FINITE_ESCAPE, IntegrationOptions, Trajectory, solve_scalar
from .errors import DomainError
from .fields import BoundTriple
from .quadrature import CumulativeIntegral

__all__ = [
    "RiccatiPath",
    "transform",
    "auto_segments",
    "representation_residual",
    "cauchy_residual",
    "difference_residual",
    "comparison_riccati_exists",
    "ComparisonResult",
    "path_min_ratio",
    "ratio_dominance_margin",
]


@dataclass(frozen=True)
class RiccatiPath:
    """The ratio y = psi / phi along a segment [a, b] where phi never vanishes."""

    traj: Trajectory
    a: float
    b: float
    y: Callable[[float], float]

    @property
    def mesh(self) -> list[float]:
        inside = [float(t) for t in self.traj.ts if self.a < t < self.b]
        if len(inside) > 160:
            stride = max(1, len(inside) // 129)
            inside = inside[::stride]
        return [self.a] + inside + [self.b]


def transform(traj: Trajectory, segment: tuple[float, float]) -> RiccatiPath:
    """Build the ratio path on ``segment``; phi must stay away from zero there.

    Raises :class:`DomainError` when a recorded zero crossing lies inside the
    segment or |phi| dips below the trajectory's zero tolerance on it.
    """
    a, b = segment
    if not (traj.t_start <= a < b <= traj.t_end):
        raise DomainError(f"segment {segment!r} outside the trajectory span")
    for z in traj.zeros:
        if a <= z <= b:
            raise DomainError(f"phi crosses zero at t={z!r} inside the segment")
    ztol = traj.opts.zero_tol
    for t in [a + (b - a) * k / 32 for k in range(33)]:
        if abs(traj.phi_at(t)) <= ztol:
            raise DomainError(f"|phi| is not bounded away from zero near t={t!r}")

    def y(t: float) -> float:
        phi, psi = traj.state_at(t)
        return psi / phi

    return RiccatiPath(traj=traj, a=a, b=b, y=y)


def auto_segments(traj: Trajectory) -> list[tuple[float, float]]:
    """Maximal inter-zero intervals, shrunk by one mesh cell at each end.

    The ratio is singular at zeros of phi, so each natural segment backs off
    one accepted step from the surrounding zero crossings.
    """
    cuts = [traj.t_start] + list(traj.zeros) + [traj.t_end]
    ts = traj.ts
    segments = []
    for lo, hi in zip(cuts, cuts[1:]):
        left = ts.searchsorted(lo, side="right")
        right = ts.searchsorted(hi, side="left") - 1
        if right - left < 2:
            continue
        a = float(ts[left]) if lo != traj.t_start else float(lo)
        b = float(ts[right]) if hi != traj.t_end else float(hi)
        if a < b:
            segments.append((a, b))
    return segments


def _sup_abs(fn: Callable[[float], float], mesh: list[float]) -> float:
    return max(abs(fn(t)) for t in mesh)


def representation_residual(path: RiccatiPath) -> float:
    """Max deviation of phi from phi(a) * exp(integral of y / p0), over max |phi|."""
    traj = path.traj
    eq = traj.eq

    def integrand(tau: float) -> float:
        return path.y(tau) / eq.p0(tau, traj.phi_at(tau))

    acc = CumulativeIntegral(integrand, path.a, abs_rate=1e-13, rel_tol=1e-11)
    phi_a = traj.phi_at(path.a)
    mesh = path.mesh
    worst = 0.0
    scale = max(abs(traj.phi_at(t)) for t in mesh)
    for t in mesh:
        recon = phi_a * math.exp(acc(t))
        worst = max(worst, abs(traj.phi_at(t) - recon))
    return worst / max(scale, 1e-300)


def cauchy_residual(path: RiccatiPath) -> float:
    """Max deviation of y from its exponential-weighted self-representation.

    The kernel is (y + q0) / p0 along the path; the representation is exact
    for true solutions, so the normalized residual measures solver error.
    """
    traj = path.traj
    eq = traj.eq

    def kernel(s: float) -> float:
        phi = traj.phi_at(s)
        return (path.y(s) + eq.q0(s, phi)) / eq.p0(s, phi)

    K = CumulativeIntegral(kernel, path.a, abs_rate=1e-13, rel_tol=1e-11)

    def weighted_r(s: float) -> float:
        return math.exp(K(s)) * eq.r0(s, traj.phi_at(s))

    W = CumulativeIntegral(weighted_r, path.a, abs_rate=1e-13, rel_tol=1e-11)
    y_a = path.y(path.a)

    mesh = path.mesh
    worst = 0.0
    for t in mesh:
        expk = math.exp(-K(t))
        rhs = y_a * expk - expk * W(t)
        worst = max(worst, abs(path.y(t) - rhs))
    return worst / max(_sup_abs(path.y, mesh), 1.0)


def difference_residual(path0: RiccatiPath, path1: RiccatiPath, j: int) -> float:
    """Max deviation of y1 - y0 from its cross-equation transfer identity.

    For ``j`` in {0, 1} the identity propagates the initial gap with the
    kernel (y0 + y1 + q_{1-j}) / p_{1-j} evaluated along the (1-j)-th path and
    collects the coefficient mismatches against y_j.  Exact for true solution
    pairs; both j choices must agree to quadrature accuracy.
    """
    if j not in (0, 1):
        raise DomainError("j must be 0 or 1")
    a = max(path0.a, path1.a)
    b = min(path0.b, path1.b)
    if not a < b:
        raise DomainError("paths do not share a segment")

    traj0, traj1 = path0.traj, path1.traj
    eq0, eq1 = traj0.eq, traj1.eq
    other = (traj1, eq1) if j == 0 else (traj0, eq0)
    traj_k, eq_k = other
    yj = path0.y if j == 0 else path1.y

    def kernel(s: float) -> float:
        phi_k = traj_k.phi_at(s)
        return (path0.y(s) + path1.y(s) + eq_k.q0(s, phi_k)) / eq_k.p0(s, phi_k)

    K = CumulativeIntegral(kernel, a, abs_rate=1e-13, rel_tol=1e-11)

    def bracket(tau: float) -> float:
        phi0 = traj0.phi_at(tau)
        phi1 = traj1.phi_at(tau)
        p0v = eq0.p0(tau, phi0)
        p1v = eq1.p0(tau, phi1)
        yv = yj(tau)
        return (
            (1.0 / p1v - 1.0 / p0v) * yv * yv
            + (eq1.q0(tau, phi1) / p1v - eq0.q0(tau, phi0) / p0v) * yv
            + eq1.r0(tau, phi1)
            - eq0.r0(tau, phi0)
        )

    W = CumulativeIntegral(lambda s: math.exp(K(s)) * bracket(s), a, abs_rate=1e-13, rel_tol=1e-11)
    gap_a = path1.y(a) - path0.y(a)

    mesh = [a + (b - a) * k / 64 for k in range(65)]
    worst = 0.0
    sup_gap = 0.0
    for t in mesh:
        expk = math.exp(-K(t))
        rhs = gap_a * expk - expk * W(t)
        gap = path1.y(t) - path0.y(t)
        sup_gap = max(sup_gap, abs(gap))
        worst = max(worst, abs(gap - rhs))
    return worst / max(sup_gap, 1.0)


@dataclass(frozen=True)
class ComparisonResult:
    exists_on_span: bool
    escape_time: float | None = None
    terminal_kind: str = ""


def comparison_riccati_exists(
    b: BoundTriple,
    y_init: float,
    span: tuple[float, float],
    opts: IntegrationOptions | None = None,
) -> ComparisonResult:
    """Integrate the scalar comparison equation y' = -y^2/P - (Q/P) y - R.

    Reports whether the solution stays finite on the span; the failure mode
    is downward blow-up in finite time.  The default escape threshold is
    lower than the trajectory default because the comparison variable blows
    down at a known hyperbolic rate, which drives the step size to its floor
    while |y| is still moderate.
    """
    if b.R is None:
        raise DomainError("the comparison equation needs the R component")
    t1, t2 = span
    if not t1 < t2:
        raise DomainError("empty span")
    P, Q, R = b.P, b.Q, b.R

    def rhs(t: float, y: float) -> float:
        p = P(t)
        if p <= 0.0:
            raise DomainError(f"P({t!r}) = {p!r} <= 0")
        return -y * y / p - Q(t) / p * y - R(t)

    if opts is None:
        opts = IntegrationOptions(horizon=t2, escape_threshold=1e6)
    elif opts.horizon != t2:
        opts = replace(opts, horizon=t2)
    raw = solve_scalar(rhs, t1, y_init, opts)
    if raw.terminal.kind == FINITE_ESCAPE:
        return ComparisonResult(False, escape_time=raw.terminal.time, terminal_kind=raw.terminal.kind)
    return ComparisonResult(raw.terminal.kind == "reached_horizon", terminal_kind=raw.terminal.kind)


def path_min_ratio(path: RiccatiPath) -> float:
    """Minimum of y over the path mesh.

    Used as a trajectory assertion: with a nonnegative starting ratio and
    r0 <= 0 sampled along the path, the ratio must stay above -tol.
    """
    return min(path.y(t) for t in path.mesh)


def ratio_dominance_margin(path0: RiccatiPath, path1: RiccatiPath) -> float:
    """Minimum of y1 - y0 over the common mesh (comparison-order margin)."""
    a = max(path0.a, path1.a)
    b = min(path0.b, path1.b)
    if not a < b:
        raise DomainError("paths do not share a segment")
    mesh = [a + (b - a) * k / 128 for k in range(129)]
    return min(path1.y(t) - path0.y(t) for t in mesh)
