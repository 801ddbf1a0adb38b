"""Adaptive integration of the first-order system with events and escape detection.

The second-order equation is integrated as the system

    phi' = psi / p0(t, phi),
    psi' = -r0(t, phi) * phi - q0(t, phi) / p0(t, phi) * psi,

so ``psi`` is the momentum-like variable p0 * phi' throughout.  The stepper is
an embedded Dormand-Prince 5(4) pair with a fourth-degree continuous extension
and a proportional-integral controller working in error-per-unit-step form:
the accepted local error is proportional to the step length, which makes the
accumulated error (and hence every residual oracle built on trajectories)
scale linearly with the requested tolerance.

Finite escape is only declared when two independent signals agree: the state
norm |phi| + |psi| has passed ``escape_threshold`` and the step size has
collapsed below ``min_step`` with the local error estimate still saturated.
A pure threshold would misfire on large-but-global solutions; a pure collapse
would misfire on singular coefficients.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FieldEvaluationError, RcertError
from .fields import EquationSpec, InitialData
from .quadrature import CumulativeIntegral

__all__ = [
    "IntegrationOptions",
    "TerminalStatus",
    "Trajectory",
    "integrate",
    "solve_scalar",
    "refine_check",
    "RefinementReport",
    "export_trajectory_csv",
    "flux_residual",
    "volterra_residual",
    "REACHED_HORIZON",
    "FINITE_ESCAPE",
    "STEP_COLLAPSE",
]

REACHED_HORIZON = "reached_horizon"
FINITE_ESCAPE = "finite_escape"
STEP_COLLAPSE = "step_collapse"

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# Coefficients of the quartic continuous extension.
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_SAFETY = 0.9
_KI = 0.175
_KP = 0.08
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class IntegrationOptions:
    """Tolerances and guards for :func:`integrate`.

    ``rel_tol``/``abs_tol`` target the accumulated error over the whole run
    (error-per-unit-step control).  ``escape_threshold`` and ``min_step``
    together drive finite-escape detection; ``zero_tol`` bounds |phi| at
    recorded zero crossings.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    horizon: float = 50.0
    escape_threshold: float = 1e8
    min_step: float = 1e-12
    max_zeros: int = 10000
    zero_tol: float = 1e-9
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")

    def tightened(self, factor: float) -> "IntegrationOptions":
        return IntegrationOptions(
            rel_tol=self.rel_tol / factor,
            abs_tol=self.abs_tol / factor,
            horizon=self.horizon,
            escape_threshold=self.escape_threshold,
            min_step=self.min_step,
            max_zeros=self.max_zeros,
            zero_tol=self.zero_tol,
            max_steps=self.max_steps,
        )


@dataclass(frozen=True)
class TerminalStatus:
    """How an integration ended.

    ``bracket`` is only set for finite escapes: the true escape time lies in
    (time, time + bracket) up to the resolution of the collapsed step.
    """

    kind: str
    time: float
    reason: str = ""
    bracket: float | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "time": self.time}
        if self.reason:
            d["reason"] = self.reason
        if self.bracket is not None:
            d["bracket"] = self.bracket
        return d


class _DenseSegment:
    """Quartic interpolant on one accepted step."""

    __slots__ = ("t", "h", "r1", "r2", "r3", "r4", "r5")

    def __init__(self, t, h, y, ynew, k1, k7, ks):
        self.t = t
        self.h = h
        n = len(y)
        ydiff = tuple(ynew[i] - y[i] for i in range(n))
        bspl = tuple(h * k1[i] - ydiff[i] for i in range(n))
        self.r1 = tuple(y)
        self.r2 = ydiff
        self.r3 = bspl
        self.r4 = tuple(ydiff[i] - h * k7[i] - bspl[i] for i in range(n))
        self.r5 = tuple(h * sum(_D[j] * ks[j][i] for j in range(7)) for i in range(n))

    def eval(self, t: float) -> tuple[float, ...]:
        th = (t - self.t) / self.h
        th1 = 1.0 - th
        return tuple(
            self.r1[i] + th * (self.r2[i] + th1 * (self.r3[i] + th * (self.r4[i] + th1 * self.r5[i])))
            for i in range(len(self.r1))
        )


class _RawSolution:
    """Node values plus dense segments, shared by the system and scalar solvers."""

    def __init__(self, ts, ys, fs, segments, terminal, zeros, tangential, zeros_truncated):
        self.ts = ts
        self.ys = ys
        self.fs = fs
        self.segments = segments
        self.terminal = terminal
        self.zeros = zeros
        self.tangential = tangential
        self.zeros_truncated = zeros_truncated

    def eval(self, t: float) -> tuple[float, ...]:
        ts = self.ts
        if not (ts[0] <= t <= ts[-1]):
            raise DomainError(f"t={t!r} outside the computed span [{ts[0]!r}, {ts[-1]!r}]")
        if t == ts[0]:
            return tuple(self.ys[0])
        idx = bisect_right(ts, t) - 1
        idx = min(idx, len(self.segments) - 1)
        return self.segments[idx].eval(t)


def _norm(values: Sequence[float], scales: Sequence[float]) -> float:
    acc = 0.0
    for v, s in zip(values, scales):
        r = v / s
        acc += r * r
    return math.sqrt(acc / len(values))


def _solve(
    f: Callable[[float, tuple[float, ...]], tuple[float, ...]],
    t0: float,
    y0: tuple[float, ...],
    opts: IntegrationOptions,
    *,
    track_zeros: bool = False,
) -> _RawSolution:
    horizon = opts.horizon
    if horizon <= t0:
        raise DomainError("horizon must exceed the start time")
    span = horizon - t0
    n = len(y0)
    rtol, atol = opts.rel_tol, opts.abs_tol
    tol_rate = 1.0 / span  # accepted scaled error per unit step

    def floor_at(t: float) -> float:
        return max(opts.min_step, 32.0 * _EPS * max(1.0, abs(t)))

    t = t0
    y = tuple(float(v) for v in y0)
    k1 = tuple(f(t, y))
    if any(not math.isfinite(v) for v in k1):
        raise FieldEvaluationError("rhs", t, y[0], float("nan"))

    ts = [t]
    ys = [y]
    fs = [k1]
    segments: list[_DenseSegment] = []
    zeros: list[float] = []
    tangential = False
    zeros_truncated = False

    # Initial step length, then the controller takes over.
    sc = [atol + rtol * abs(v) for v in y]
    d0 = _norm(y, sc)
    d1 = _norm(k1, sc)
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, span)
    y_pr = tuple(y[i] + h * k1[i] for i in range(n))
    try:
        f_pr = f(t + h, y_pr)
        d2 = _norm([f_pr[i] - k1[i] for i in range(n)], sc) / h
        if max(d1, d2) > 1e-15:
            h = min(100.0 * h, (0.01 / max(d1, d2)) ** 0.2, span)
    except (FieldEvaluationError, OverflowError):
        pass
    h = max(h, floor_at(t))

    ratio_prev = 1.0
    rejected = False
    s_last = 0.0 if y[0] == 0.0 else math.copysign(1.0, y[0])
    t_sign = t  # time of the last node with a definite sign of component 0
    pending_zero: float | None = None

    def norm1(state: tuple[float, ...]) -> float:
        return sum(abs(v) for v in state)

    def escape_or_collapse(reason: str, h_attempt: float) -> TerminalStatus:
        if norm1(y) > opts.escape_threshold:
            return TerminalStatus(FINITE_ESCAPE, t, reason=reason, bracket=max(h_attempt, floor_at(t)))
        return TerminalStatus(STEP_COLLAPSE, t, reason=reason)

    terminal: TerminalStatus | None = None
    steps = 0
    while terminal is None:
        steps += 1
        if steps > opts.max_steps:
            raise RcertError(f"step budget of {opts.max_steps} exceeded at t={t!r}")
        remaining = horizon - t
        if remaining <= floor_at(t):
            terminal = TerminalStatus(REACHED_HORIZON, horizon)
            break
        h = min(h, remaining)
        if h < floor_at(t) or t + h == t:
            terminal = escape_or_collapse("step size collapsed", h)
            break

        # Stage sweep; a non-finite stage rejects the step outright.
        ks = [k1]
        bad = False
        try:
            for s in range(6):
                ti = t + _C[s + 1] * h
                row = _A[s]
                yi = tuple(y[i] + h * sum(row[j] * ks[j][i] for j in range(len(row))) for i in range(n))
                ki = f(ti, yi)
                if any(not math.isfinite(v) for v in ki):
                    bad = True
                    break
                ks.append(tuple(ki))
        except (FieldEvaluationError, OverflowError):
            bad = True
        if not bad:
            ynew = tuple(y[i] + h * sum(_A[5][j] * ks[j][i] for j in range(6)) for i in range(n))
            if any(not math.isfinite(v) for v in ynew):
                bad = True
        if bad:
            h *= 0.25
            rejected = True
            if h < floor_at(t):
                terminal = escape_or_collapse("non-finite evaluation", h)
                break
            continue

        k7 = ks[6]  # stage 7 shares the time t+h with the propagated solution
        err = tuple(h * sum(_E[j] * ks[j][i] for j in range(7)) for i in range(n))
        scales = [atol + rtol * max(abs(y[i]), abs(ynew[i])) for i in range(n)]
        err_norm = _norm(err, scales)
        ratio = err_norm / (tol_rate * h) if h > 0 else math.inf
        if not math.isfinite(ratio):
            ratio = math.inf

        if ratio <= 1.0:
            ratio_c = max(ratio, 1e-10)
            fac = _SAFETY * ratio_c ** (-_KI) * max(ratio_prev, 1e-10) ** _KP
            fac = min(5.0, max(0.2, fac))
            if rejected:
                fac = min(1.0, fac)
            segments.append(_DenseSegment(t, h, y, ynew, ks[0], k7, ks))
            t, y, k1 = t + h, ynew, tuple(k7)
            ts.append(t)
            ys.append(y)
            fs.append(k1)
            ratio_prev = ratio_c
            rejected = False
            h = h * fac

            # --- event bookkeeping on the accepted node -------------------
            if track_zeros:
                phi = y[0]
                s_new = 0.0 if phi == 0.0 else math.copysign(1.0, phi)
                if abs(phi) <= opts.zero_tol and abs(fs[-1][0]) <= opts.zero_tol:
                    tangential = True
                if s_new == 0.0:
                    pending_zero = t
                elif s_last != 0.0 and s_new != s_last:
                    if pending_zero is not None:
                        zeros.append(pending_zero)
                    else:
                        zeros.append(_locate_zero(segments, t_sign, t, opts.zero_tol))
                    pending_zero = None
                    s_last, t_sign = s_new, t
                    if len(zeros) >= opts.max_zeros:
                        zeros_truncated = True
                        terminal = TerminalStatus(REACHED_HORIZON, t, reason="zero cap reached")
                        break
                else:
                    if s_new == s_last and pending_zero is not None:
                        tangential = True
                        pending_zero = None
                    s_last, t_sign = s_new, t
        else:
            rejected = True
            fac = max(0.1, min(0.5, _SAFETY * ratio ** -0.25))
            h_new = h * fac
            if h_new < floor_at(t):
                terminal = escape_or_collapse("local error saturated", h_new)
                break
            h = h_new

    return _RawSolution(ts, ys, fs, segments, terminal, zeros, tangential, zeros_truncated)


def _locate_zero(segments, t_lo: float, t_hi: float, zero_tol: float) -> float:
    """Bisect the dense output for the sign change bracketed by [t_lo, t_hi]."""

    def phi(t: float) -> float:
        idx = min(bisect_right([s.t for s in segments], t) - 1, len(segments) - 1)
        idx = max(idx, 0)
        return segments[idx].eval(t)[0]

    f_lo = phi(t_lo)
    lo, hi = t_lo, t_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = phi(mid)
        if abs(fm) <= zero_tol or (hi - lo) <= 8.0 * _EPS * max(1.0, abs(mid)):
            return mid
        if (fm > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class Trajectory:
    """Dense numerical solution of the first-order system.

    ``ts``/``phis``/``psis`` are node values of the accepted mesh; ``dphis``
    holds phi' at the nodes.  ``zeros`` are strictly sign-change-bracketed
    zero crossings of phi.  Immutable by convention once returned.
    """

    eq: EquationSpec
    ic: InitialData
    opts: IntegrationOptions
    ts: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)
    psis: np.ndarray = field(repr=False)
    dphis: np.ndarray = field(repr=False)
    zeros: list[float]
    terminal: TerminalStatus
    tangential: bool
    zeros_truncated: bool
    _raw: _RawSolution = field(repr=False)

    @property
    def t_start(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def state_at(self, t: float) -> tuple[float, float]:
        return self._raw.eval(t)[:2]

    def phi_at(self, t: float) -> float:
        return self._raw.eval(t)[0]

    def psi_at(self, t: float) -> float:
        return self._raw.eval(t)[1]

    def dphi_at(self, t: float) -> float:
        phi, psi = self.state_at(t)
        return psi / self.eq.p0(t, phi)

    def y_at(self, t: float) -> float:
        """Logarithmic-derivative ratio psi / phi (defined away from zeros)."""
        phi, psi = self.state_at(t)
        return psi / phi


def integrate(eq: EquationSpec, ic: InitialData, opts: IntegrationOptions = IntegrationOptions()) -> Trajectory:
    """Integrate the system from ``ic`` until the horizon, escape, or collapse.

    ``ic.phi1`` is the derivative phi'(t1); the momentum variable starts at
    psi(t1) = p0(t1, phi0) * phi1.  Raises :class:`DomainError` if p0 fails to
    stay positive along the computed path.
    """
    if ic.t1 < eq.t0:
        raise DomainError("initial time precedes the equation's start time")
    p_init = eq.p0(ic.t1, ic.phi0)
    if p_init <= 0.0:
        raise DomainError(f"p0 is not positive at the initial point: {p_init!r}")

    p0, q0, r0 = eq.p0, eq.q0, eq.r0

    def f(t: float, y: tuple[float, ...]) -> tuple[float, float]:
        phi, psi = y
        p = p0(t, phi)
        if p <= 0.0:
            raise DomainError(f"p0 is not positive at (t={t!r}, w={phi!r}): {p!r}")
        return psi / p, -r0(t, phi) * phi - q0(t, phi) / p * psi

    raw = _solve(f, ic.t1, (ic.phi0, p_init * ic.phi1), opts, track_zeros=True)
    ts = np.array(raw.ts)
    ys = np.array(raw.ys)
    fs = np.array(raw.fs)
    return Trajectory(
        eq=eq,
        ic=ic,
        opts=opts,
        ts=ts,
        phis=ys[:, 0],
        psis=ys[:, 1],
        dphis=fs[:, 0],
        zeros=list(raw.zeros),
        terminal=raw.terminal,
        tangential=raw.tangential,
        zeros_truncated=raw.zeros_truncated,
        _raw=raw,
    )


def solve_scalar(
    rhs: Callable[[float, float], float],
    t0: float,
    y0: float,
    opts: IntegrationOptions,
) -> _RawSolution:
    """Integrate a scalar ODE with the same stepper and escape detection."""

    def f(t: float, y: tuple[float, ...]) -> tuple[float]:
        return (rhs(t, y[0]),)

    return _solve(f, t0, (y0,), opts, track_zeros=False)


@dataclass(frozen=True)
class RefinementReport:
    max_discrepancy: float
    t_common_end: float
    n_samples: int
    tolerances: tuple[float, float]
    terminals: tuple[str, str]


def refine_check(eq: EquationSpec, ic: InitialData, opts: IntegrationOptions = IntegrationOptions()) -> RefinementReport:
    """Integrate at the given tolerance and at a tenth of it; compare densely."""
    coarse = integrate(eq, ic, opts)
    fine = integrate(eq, ic, opts.tightened(10.0))
    t_end = min(coarse.t_end, fine.t_end)
    n = 201
    worst = 0.0
    for i in range(n):
        t = ic.t1 + (t_end - ic.t1) * i / (n - 1)
        worst = max(worst, abs(coarse.phi_at(t) - fine.phi_at(t)))
    return RefinementReport(
        max_discrepancy=worst,
        t_common_end=t_end,
        n_samples=n,
        tolerances=(opts.rel_tol, opts.rel_tol / 10.0),
        terminals=(coarse.terminal.kind, fine.terminal.kind),
    )


def export_trajectory_csv(traj: Trajectory, csv_path, sidecar_path=None) -> None:
    """Write node samples as CSV plus a JSON sidecar with the terminal status.

    Columns are t, phi, psi, y with y left empty where |phi| <= zero_tol.
    """
    from .serialize import canonical_json, format_float

    lines = ["t,phi,psi,y"]
    ztol = traj.opts.zero_tol
    for t, phi, psi in zip(traj.ts, traj.phis, traj.psis):
        y = "" if abs(phi) <= ztol else format_float(psi / phi)
        lines.append(f"{format_float(float(t))},{format_float(float(phi))},{format_float(float(psi))},{y}")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    side = {
        "terminal": traj.terminal.to_dict(),
        "zeros": [float(z) for z in traj.zeros],
        "tangential": traj.tangential,
        "zeros_truncated": traj.zeros_truncated,
    }
    if sidecar_path is None:
        sidecar_path = str(csv_path) + ".meta.json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(side) + "\n")


def _mesh(traj: Trajectory, a: float, b: float, cap: int = 129) -> list[float]:
    inside = [float(t) for t in traj.ts if a < t < b]
    if len(inside) > cap:
        stride = max(1, len(inside) // cap)
        inside = inside[::stride]
    return [a] + inside + [b]


def flux_residual(traj: Trajectory, a: float | None = None, b: float | None = None) -> float:
    """Deviation of psi from its exponential-weighted integral representation.

    Normalized by max(|psi|, 1) over the window; small values certify that the
    computed momentum actually satisfies the first-order balance the equation
    implies.
    """
    a = traj.t_start if a is None else a
    b = traj.t_end if b is None else b
    eq = traj.eq

    def qp(tau: float) -> float:
        phi = traj.phi_at(tau)
        return eq.q0(tau, phi) / eq.p0(tau, phi)

    K = CumulativeIntegral(qp, a, abs_rate=1e-13, rel_tol=1e-11)

    def weighted_r(s: float) -> float:
        phi = traj.phi_at(s)
        return math.exp(K(s)) * eq.r0(s, phi) * phi

    W = CumulativeIntegral(weighted_r, a, abs_rate=1e-13, rel_tol=1e-11)
    psi_a = traj.psi_at(a)

    worst = 0.0
    scale = 1.0
    for t in _mesh(traj, a, b):
        expk = math.exp(-K(t))
        rhs = psi_a * expk - expk * W(t)
        psi = traj.psi_at(t)
        scale = max(scale, abs(psi))
        worst = max(worst, abs(psi - rhs))
    return worst / scale


def volterra_residual(traj: Trajectory, a: float | None = None, b: float | None = None) -> float:
    """Deviation of phi from its double-integral representation, scaled by max |phi|."""
    a = traj.t_start if a is None else a
    b = traj.t_end if b is None else b
    eq = traj.eq

    def qp(tau: float) -> float:
        phi = traj.phi_at(tau)
        return eq.q0(tau, phi) / eq.p0(tau, phi)

    K = CumulativeIntegral(qp, a, abs_rate=1e-13, rel_tol=1e-11)

    def weighted_r(s: float) -> float:
        phi = traj.phi_at(s)
        return math.exp(K(s)) * eq.r0(s, phi) * phi

    W = CumulativeIntegral(weighted_r, a, abs_rate=1e-13, rel_tol=1e-11)

    def lead(tau: float) -> float:
        return math.exp(-K(tau)) / eq.p0(tau, traj.phi_at(tau))

    def tail(tau: float) -> float:
        return math.exp(-K(tau)) * W(tau) / eq.p0(tau, traj.phi_at(tau))

    T1 = CumulativeIntegral(lead, a, abs_rate=1e-13, rel_tol=1e-11)
    T2 = CumulativeIntegral(tail, a, abs_rate=1e-13, rel_tol=1e-11)
    phi_a = traj.phi_at(a)
    psi_a = traj.psi_at(a)

    worst = 0.0
    scale = 1.0
    for t in _mesh(traj, a, b):
        rhs = phi_a + psi_a * T1(t) - T2(t)
        phi = traj.phi_at(t)
        scale = max(scale, abs(phi))
        worst = max(worst, abs(phi - rhs))
    return worst / scale
