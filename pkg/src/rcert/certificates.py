"""Hypothesis checkers that produce machine-readable certificates.

Each checker samples the hypotheses of one solvability or oscillation
criterion on a finite (t, w) grid and emits a :class:`Certificate`:

* ``Verified``   -- every sampled inequality holds; the certificate carries
  the guaranteed conclusion and, where applicable, the growth envelope.
* ``Falsified``  -- some hypothesis fails; the certificate carries the first
  concrete witness point in scan order.
* ``Inconclusive`` -- a precondition fails or an envelope overflows; neither
  conclusion is claimed.

Grid falsification, not proof: the "for all w" hypotheses of the underlying
criteria are only checked on the recorded rectangle and grid, and every
certificate embeds the w-range that was actually sampled so downstream
claims stay scoped.  Components that no finite computation can decide
(oscillation of a comparison family, divergence of improper integrals) are
decided heuristically and flagged as such inside the certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

from .dynamics import IntegrationOptions, integrate
from .errors import DomainError, RangeOverflowError
from .fields import (
    BoundTriple,
    EquationSpec,
    GridSpec,
    InitialData,
    Rectangle,
    ScalarField,
)
from .quadrature import (
    CONVERGING,
    DIVERGING,
    CumulativeIntegral,
    FBound,
    GBound,
    HorizonSpec,
    TimeFunction,
    divergence_probe,
    weighted_tail_integrand,
)

__all__ = [
    "VERIFIED",
    "FALSIFIED",
    "INCONCLUSIVE",
    "GLOBAL_MONOTONE",
    "SINGULAR_SECOND_KIND_IF_NONEXTENDABLE",
    "OSC_OR_SINGULAR_FIRST_KIND",
    "GLOBAL_FOR_ALL_IC",
    "Witness",
    "Certificate",
    "ComparisonFamily",
    "check_t3_1",
    "check_t3_2",
    "check_t3_3",
    "check_t3_4",
    "check_t3_5",
    "check_t3_6",
]

VERIFIED = "Verified"
FALSIFIED = "Falsified"
INCONCLUSIVE = "Inconclusive"

GLOBAL_MONOTONE = "GLOBAL_MONOTONE"
SINGULAR_SECOND_KIND_IF_NONEXTENDABLE = "SINGULAR_SECOND_KIND_IF_NONEXTENDABLE"
OSC_OR_SINGULAR_FIRST_KIND = "OSC_OR_SINGULAR_FIRST_KIND"
GLOBAL_FOR_ALL_IC = "GLOBAL_FOR_ALL_IC"

#: A comparison family maps a band parameter eps to time-only coefficients
#: (p_eps, q_eps, r_eps) of a linear comparison equation.
ComparisonFamily = Callable[[float], tuple[TimeFunction, TimeFunction, TimeFunction]]


@dataclass(frozen=True)
class Witness:
    """A concrete grid point at which a hypothesis inequality fails."""

    hypothesis: str
    t: float
    w: float | None
    detail: str

    def to_dict(self) -> dict:
        return {"hypothesis": self.hypothesis, "t": self.t, "w": self.w, "detail": self.detail}


@dataclass
class Certificate:
    theorem: str
    status: str
    hypotheses: tuple[str, ...]
    region: dict
    conclusion: str | None = None
    epsilon: float | None = None
    witness: Witness | None = None
    reason: str | None = None
    bound: Callable[[float], float] | None = None
    bound_samples: list[tuple[float, float]] | None = None
    uniform_bound: float | None = None
    heuristic_flags: tuple[str, ...] = ()
    details: dict = dc_field(default_factory=dict)
    parts: list["Certificate"] = dc_field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_dict(self) -> dict:
        doc = {
            "theorem": self.theorem,
            "status": self.status,
            "conclusion": self.conclusion,
            "hypotheses": list(self.hypotheses),
            "region": self.region,
            "epsilon": self.epsilon,
            "witness": self.witness.to_dict() if self.witness else None,
            "reason": self.reason,
            "bound_samples": [[t, v] for t, v in self.bound_samples] if self.bound_samples else None,
            "uniform_bound": self.uniform_bound,
            "heuristic_flags": list(self.heuristic_flags),
            "details": self.details,
        }
        if self.parts:
            doc["parts"] = [p.to_dict() for p in self.parts]
        return doc


def _region_record(ts, w_lo, w_hi, grid: GridSpec, sampled: tuple[float, float] | None) -> dict:
    # Envelope-driven checks pass +-inf caps; the JSON record then carries
    # only the w-range that was actually sampled.
    finite_w = w_lo is not None and math.isfinite(w_lo) and math.isfinite(w_hi)
    rec = {
        "t": [ts[0], ts[-1]],
        "w": [w_lo, w_hi] if finite_w else None,
        "nt": grid.nt,
        "nw": grid.nw,
    }
    if sampled is not None:
        rec["w_sampled"] = [sampled[0], sampled[1]]
    return rec


def _default_region(eq: EquationSpec, span: float = 50.0) -> Rectangle:
    return Rectangle(eq.t0, eq.t0 + span, -math.inf, math.inf)


def _ratio_precondition(ic: InitialData) -> str | None:
    if ic.phi0 == 0.0:
        return "phi0 must be nonzero"
    if ic.phi1 / ic.phi0 < 0.0:
        return "phi1/phi0 must be nonnegative"
    return None


def check_t3_1(
    eq: EquationSpec,
    ic: InitialData,
    b: BoundTriple,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(),
    epsilon: float | None = None,
    *,
    quad_abs_tol: float = 1e-10,
    quad_rel_tol: float = 1e-8,
) -> Certificate:
    """Monotone global-existence certificate with the F growth envelope.

    Verifies, for every grid time t and every sampled w with
    |w| <= F(t) + epsilon, that p0 >= P, q0/p0 >= Q and R <= r0 <= 0.  On
    success the solution through ``ic`` is certified global with |phi|
    positive, nondecreasing and bounded by the envelope; if phi'(t1) != 0
    the derivative never vanishes either.
    """
    hypotheses = ("p0 >= P", "q0/p0 >= Q", "R <= r0 <= 0")
    theorem = "T3_1"
    if region is None:
        region = _default_region(eq)
    pre = _ratio_precondition(ic)
    if pre is not None:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [ic.t1, region.t_max], "w": None, "nt": grid.nt, "nw": grid.nw},
            reason=f"precondition: {pre}",
        )
    eps = 1e-3 * abs(ic.phi0) if epsilon is None else epsilon
    c1 = ic.phi0
    c2 = eq.p0(ic.t1, ic.phi0) * ic.phi1 / ic.phi0
    ts = grid.t_axis(ic.t1, region.t_max)

    envelope = FBound(b, ic.t1, c1, c2, abs_tol=quad_abs_tol, rel_tol=quad_rel_tol)
    try:
        bound_vals = [envelope(t) for t in ts]
    except RangeOverflowError as exc:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [ts[0], ts[-1]], "w": None, "nt": grid.nt, "nw": grid.nw},
            epsilon=eps,
            reason=f"range: {exc}",
        )

    w_seen = [math.inf, -math.inf]
    witness = _sweep_sandwich(eq, b, ts, [v + eps for v in bound_vals], region, grid, w_seen)
    sampled = (w_seen[0], w_seen[1]) if w_seen[0] <= w_seen[1] else None
    rec = _region_record(ts, region.w_min, region.w_max, grid, sampled)
    if witness is not None:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, epsilon=eps, witness=witness)
    details = {"c1": c1, "c2": c2}
    if ic.phi1 != 0.0:
        details["derivative_nonvanishing"] = True
    return Certificate(
        theorem,
        VERIFIED,
        hypotheses,
        rec,
        conclusion=GLOBAL_MONOTONE,
        epsilon=eps,
        bound=envelope,
        bound_samples=list(zip(ts, bound_vals)),
        details=details,
    )


def _sweep_sandwich(eq, b, ts, w_caps, region, grid, w_seen) -> Witness | None:
    """Shared (t, w) sweep for the three sandwich inequalities of the F check."""
    for t, cap in zip(ts, w_caps):
        Pv = b.P(t)
        Qv = b.Q(t)
        Rv = b.R(t)
        w_lo = max(region.w_min, -cap)
        w_hi = min(region.w_max, cap)
        if w_lo > w_hi:
            continue
        for w in grid.w_axis(w_lo, w_hi):
            w_seen[0] = min(w_seen[0], w)
            w_seen[1] = max(w_seen[1], w)
            p = eq.p0(t, w)
            if p < Pv:
                return Witness("p0 >= P", t, w, f"p0={p!r} < P={Pv!r}")
            q = eq.q0(t, w)
            if q / p < Qv:
                return Witness("q0/p0 >= Q", t, w, f"q0/p0={q / p!r} < Q={Qv!r}")
            r = eq.r0(t, w)
            if r > 0.0:
                return Witness("R <= r0 <= 0", t, w, f"r0={r!r} > 0")
            if r < Rv:
                return Witness("R <= r0 <= 0", t, w, f"r0={r!r} < R={Rv!r}")
    return None


def check_t3_2(
    eq: EquationSpec,
    ic: InitialData,
    b: BoundTriple,
    qtilde: TimeFunction,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(),
    epsilon: float | None = None,
    *,
    quad_abs_tol: float = 1e-10,
    quad_rel_tol: float = 1e-8,
) -> Certificate:
    """Global-existence certificate driven by the G envelope.

    The cross term |p0 * r0 / q0| must be dominated by ``qtilde``; the
    envelope feeds the running maximum of ``qtilde`` into the exponent.
    Division by a vanishing q0 at a point with nonzero r0 is reported as
    Inconclusive rather than guessed around.
    """
    hypotheses = ("p0 >= P", "q0 >= Q >= 0", "r0 <= 0", "|p0*r0/q0| <= Qtilde")
    theorem = "T3_2"
    if region is None:
        region = _default_region(eq)
    pre = _ratio_precondition(ic)
    if pre is not None:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [ic.t1, region.t_max], "w": None, "nt": grid.nt, "nw": grid.nw},
            reason=f"precondition: {pre}",
        )
    eps = 1e-3 * abs(ic.phi0) if epsilon is None else epsilon
    c1 = ic.phi0
    c2 = eq.p0(ic.t1, ic.phi0) * ic.phi1 / ic.phi0
    ts = grid.t_axis(ic.t1, region.t_max)

    # Running maximum of qtilde, sampled on a refinement of the time grid.
    fine = GridSpec(nt=4 * (grid.nt - 1) + 1, nw=2).t_axis(ic.t1, region.t_max)
    cummax: list[float] = []
    acc = -math.inf
    for t in fine:
        acc = max(acc, qtilde(t))
        cummax.append(acc)

    def running_max(tau: float) -> float:
        from bisect import bisect_right

        idx = max(0, min(len(fine) - 1, bisect_right(fine, tau) - 1))
        return max(cummax[idx], qtilde(tau))

    envelope = GBound(b, running_max, ic.t1, c1, c2, abs_tol=quad_abs_tol, rel_tol=quad_rel_tol)
    try:
        bound_vals = [envelope(t) for t in ts]
    except RangeOverflowError as exc:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [ts[0], ts[-1]], "w": None, "nt": grid.nt, "nw": grid.nw},
            epsilon=eps,
            reason=f"range: {exc}",
        )

    w_seen = [math.inf, -math.inf]
    witness = None
    reason = None
    for t, cap in zip(ts, [v + eps for v in bound_vals]):
        Pv = b.P(t)
        Qv = b.Q(t)
        Qt = qtilde(t)
        if Qv < 0.0:
            witness = Witness("q0 >= Q >= 0", t, None, f"Q={Qv!r} < 0")
            break
        w_lo = max(region.w_min, -cap)
        w_hi = min(region.w_max, cap)
        if w_lo > w_hi:
            continue
        for w in grid.w_axis(w_lo, w_hi):
            w_seen[0] = min(w_seen[0], w)
            w_seen[1] = max(w_seen[1], w)
            p = eq.p0(t, w)
            if p < Pv:
                witness = Witness("p0 >= P", t, w, f"p0={p!r} < P={Pv!r}")
                break
            q = eq.q0(t, w)
            if q < Qv:
                witness = Witness("q0 >= Q >= 0", t, w, f"q0={q!r} < Q={Qv!r}")
                break
            r = eq.r0(t, w)
            if r > 0.0:
                witness = Witness("r0 <= 0", t, w, f"r0={r!r} > 0")
                break
            if q == 0.0:
                if r != 0.0:
                    reason = f"ratio undefined: q0 = 0 with r0 = {r!r} at (t={t!r}, w={w!r})"
                    break
                ratio = 0.0
            else:
                ratio = abs(p * r / q)
            if ratio > Qt:
                witness = Witness("|p0*r0/q0| <= Qtilde", t, w, f"|p0*r0/q0|={ratio!r} > Qtilde={Qt!r}")
                break
        if witness is not None or reason is not None:
            break

    sampled = (w_seen[0], w_seen[1]) if w_seen[0] <= w_seen[1] else None
    rec = _region_record(ts, region.w_min, region.w_max, grid, sampled)
    if reason is not None:
        return Certificate(theorem, INCONCLUSIVE, hypotheses, rec, epsilon=eps, reason=reason)
    if witness is not None:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, epsilon=eps, witness=witness)
    details = {"c1": c1, "c2": c2}
    if ic.phi1 != 0.0:
        details["derivative_nonvanishing"] = True
    return Certificate(
        theorem,
        VERIFIED,
        hypotheses,
        rec,
        conclusion=GLOBAL_MONOTONE,
        epsilon=eps,
        bound=envelope,
        bound_samples=list(zip(ts, bound_vals)),
        details=details,
    )


def check_t3_3(
    eq0: EquationSpec,
    eq1: EquationSpec,
    majorant,
    ic0: InitialData,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(nt=65, nw=65),
    *,
    p_match_rtol: float = 1e-12,
) -> Certificate:
    """Comparison certificate against a nonvanishing majorant trajectory.

    ``majorant`` solves ``eq1`` on its span.  The initial orderings are
    numerical preconditions; the coefficient orderings over matched pairs
    |w| <= |w1| are sampled with symmetric w grids and prefix extrema.
    """
    hypotheses = (
        "initial ordering of values and derivatives",
        "initial ratio ordering",
        "p0 == p1, even-monotone in w",
        "r1(w1) <= r0(w) <= 0 for |w| <= |w1|",
        "q0/p0(w) <= q1/p1(w1) for |w| <= |w1|",
    )
    theorem = "T3_3"
    if region is None:
        region = Rectangle(eq0.t0, majorant.t_end, -1.0, 1.0)
    if majorant.zeros or majorant.tangential:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [region.t_min, region.t_max], "w": None, "nt": grid.nt, "nw": grid.nw},
            reason="majorant has a zero on its span",
        )
    t_base = majorant.t_start
    if abs(ic0.t1 - t_base) > 1e-12 * max(1.0, abs(t_base)):
        raise DomainError("comparison initial data must start where the majorant starts")

    phi1_0 = float(majorant.phis[0])
    dphi1_0 = float(majorant.dphis[0])
    positive_branch = phi1_0 >= ic0.phi0 > 0.0 and dphi1_0 > ic0.phi1 >= 0.0
    negative_branch = phi1_0 <= ic0.phi0 < 0.0 and dphi1_0 < ic0.phi1 <= 0.0
    if not (positive_branch or negative_branch):
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [region.t_min, region.t_max], "w": None, "nt": grid.nt, "nw": grid.nw},
            reason="precondition: initial ordering of values/derivatives fails",
        )
    y0 = eq0.p0(ic0.t1, ic0.phi0) * ic0.phi1 / ic0.phi0
    y1 = eq1.p0(t_base, phi1_0) * dphi1_0 / phi1_0
    if not y0 < y1:
        return Certificate(
            theorem,
            INCONCLUSIVE,
            hypotheses,
            {"t": [region.t_min, region.t_max], "w": None, "nt": grid.nt, "nw": grid.nw},
            reason=f"precondition: initial ratio ordering fails (y0={y0!r} >= y1={y1!r})",
        )

    W = max(abs(region.w_min), abs(region.w_max))
    nw = grid.nw if grid.nw % 2 == 1 else grid.nw + 1
    half = (nw - 1) // 2
    ws = [-W + 2.0 * W * i / (nw - 1) for i in range(nw)]
    ws[half] = 0.0
    ts = grid.t_axis(region.t_min, region.t_max)

    witness = None
    for t in ts:
        p0row = [eq0.p0(t, w) for w in ws]
        p1row = [eq1.p0(t, w) for w in ws]
        for w, a, c in zip(ws, p0row, p1row):
            if abs(a - c) > p_match_rtol * max(1.0, abs(a), abs(c)):
                witness = Witness("p0 == p1, even-monotone in w", t, w, f"p0={a!r} != p1={c!r}")
                break
        if witness:
            break
        for i in range(half, nw - 1):
            if p0row[i] > p0row[i + 1]:
                witness = Witness(
                    "p0 == p1, even-monotone in w", t, ws[i + 1], "p0 decreases on the nonnegative side"
                )
                break
        if witness:
            break
        for i in range(0, half):
            if p0row[i] < p0row[i + 1]:
                witness = Witness(
                    "p0 == p1, even-monotone in w", t, ws[i + 1], "p0 increases on the nonpositive side"
                )
                break
        if witness:
            break

        r0row = [eq0.r0(t, w) for w in ws]
        q0row = [eq0.q0(t, w) / p0row[i] for i, w in enumerate(ws)]
        band_min_r = r0row[half]
        band_max_q = q0row[half]
        for k in range(0, half + 1):
            iL, iR = half - k, half + k
            band_min_r = min(band_min_r, r0row[iL], r0row[iR])
            band_max_q = max(band_max_q, q0row[iL], q0row[iR])
            for idx in ([iR] if k == 0 else [iL, iR]):
                w1 = ws[idx]
                if r0row[idx] > 0.0:
                    witness = Witness("r1(w1) <= r0(w) <= 0 for |w| <= |w1|", t, w1, f"r0={r0row[idx]!r} > 0")
                    break
                r1v = eq1.r0(t, w1)
                if r1v > band_min_r:
                    witness = Witness(
                        "r1(w1) <= r0(w) <= 0 for |w| <= |w1|",
                        t,
                        w1,
                        f"r1(w1)={r1v!r} > min r0 over band = {band_min_r!r}",
                    )
                    break
                q1v = eq1.q0(t, w1) / eq1.p0(t, w1)
                if band_max_q > q1v:
                    witness = Witness(
                        "q0/p0(w) <= q1/p1(w1) for |w| <= |w1|",
                        t,
                        w1,
                        f"max q0/p0 over band = {band_max_q!r} > q1/p1(w1)={q1v!r}",
                    )
                    break
            if witness:
                break
        if witness:
            break

    rec = {
        "t": [ts[0], ts[-1]],
        "w": [-W, W],
        "nt": grid.nt,
        "nw": nw,
        "w_sampled": [-W, W],
    }
    if witness is not None:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, witness=witness)
    return Certificate(
        theorem,
        VERIFIED,
        hypotheses,
        rec,
        conclusion=GLOBAL_MONOTONE,
        details={"y0": y0, "y1": y1, "majorant_span": [majorant.t_start, majorant.t_end]},
    )


def check_t3_4(
    eq: EquationSpec,
    b: BoundTriple,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(),
) -> Certificate:
    """Conditional classification certificate for nonnegative restoring fields.

    Verified means: any solution that fails to extend to the horizon of its
    maximal interval (finite escape) must change sign infinitely often as it
    approaches the escape time.  The conclusion applies only to trajectories
    whose integration actually ends in finite escape.
    """
    hypotheses = ("p0 >= P", "q0/p0 >= Q", "r0 >= 0")
    theorem = "T3_4"
    if region is None:
        region = Rectangle(eq.t0, eq.t0 + 50.0, -10.0, 10.0)
    ts = grid.t_axis(region.t_min, region.t_max)
    ws = grid.w_axis(region.w_min, region.w_max)
    witness = None
    for t in ts:
        Pv = b.P(t)
        Qv = b.Q(t)
        for w in ws:
            p = eq.p0(t, w)
            if p < Pv:
                witness = Witness("p0 >= P", t, w, f"p0={p!r} < P={Pv!r}")
                break
            if eq.q0(t, w) / p < Qv:
                witness = Witness("q0/p0 >= Q", t, w, f"q0/p0={eq.q0(t, w) / p!r} < Q={Qv!r}")
                break
            r = eq.r0(t, w)
            if r < 0.0:
                witness = Witness("r0 >= 0", t, w, f"r0={r!r} < 0")
                break
        if witness:
            break
    rec = _region_record(ts, region.w_min, region.w_max, grid, (ws[0], ws[-1]))
    if witness is not None:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, witness=witness)
    return Certificate(theorem, VERIFIED, hypotheses, rec, conclusion=SINGULAR_SECOND_KIND_IF_NONEXTENDABLE)


def check_t3_5(
    eq: EquationSpec,
    b: BoundTriple,
    family: ComparisonFamily,
    N: float,
    eps0: float,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(nt=65, nw=65),
    horizons: HorizonSpec = HorizonSpec(),
    *,
    eps_samples: Sequence[float] | None = None,
    eps_tail_samples: Sequence[float] | None = None,
    osc_horizon: float = 50.0,
    osc_min_zeros: int = 5,
    osc_opts: IntegrationOptions | None = None,
) -> Certificate:
    """Oscillation-or-first-kind certificate via a comparison family.

    Three ingredient groups: (a) coefficient orderings against the family on
    the outer band |w| >= eps for finitely many eps in (0, eps0]; (b) zero
    counting of the comparison equations over a finite horizon as the
    oscillation check; (c) divergence probes for the reciprocal-weight tail
    and the double-integral tail.  (b) and (c) are heuristics and are flagged
    in the certificate; the sampled eps values are recorded because no finite
    reduction of the "for every eps" hypothesis exists.
    """
    hypotheses = (
        "r0 >= 0",
        "band ordering vs family for |w| >= eps",
        "comparison equations oscillate (zero count)",
        "p0 <= P, q0/p0 <= Q for |w| <= N with diverging reciprocal tail",
        "band ordering vs family on N <= |w| <= eps with diverging double tail",
    )
    theorem = "T3_5"
    if region is None:
        region = Rectangle(eq.t0, eq.t0 + 20.0, -8.0, 8.0)
    if eps0 <= 0 or N <= 0:
        raise DomainError("check_t3_5 needs eps0 > 0 and N > 0")
    eps_list = list(eps_samples) if eps_samples is not None else [eps0 * 0.5 ** k for k in range(5)]
    eps_tail = list(eps_tail_samples) if eps_tail_samples is not None else [N, 2.0 * N, 4.0 * N]
    ts = grid.t_axis(region.t_min, region.t_max)
    ws = grid.w_axis(region.w_min, region.w_max)
    rec = _region_record(ts, region.w_min, region.w_max, grid, (ws[0], ws[-1]))
    details: dict = {"eps_samples": eps_list, "eps_tail_samples": eps_tail, "N": N, "eps0": eps0}
    flags = ("comparison_oscillation_zero_count", "tail_divergence_probe")

    def falsified(witness: Witness) -> Certificate:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, witness=witness, heuristic_flags=flags, details=details)

    # r0 >= 0 everywhere on the sampled rectangle.
    for t in ts:
        for w in ws:
            r = eq.r0(t, w)
            if r < 0.0:
                return falsified(Witness("r0 >= 0", t, w, f"r0={r!r} < 0"))

    # Outer-band coefficient orderings against the family.
    for eps in eps_list:
        if not 0.0 < eps <= eps0:
            raise DomainError(f"eps sample {eps!r} outside (0, eps0]")
        p_e, q_e, r_e = family(eps)
        for t in ts:
            pe, qe, re = p_e(t), q_e(t), r_e(t)
            for w in ws:
                if abs(w) < eps:
                    continue
                p = eq.p0(t, w)
                if p > pe:
                    return falsified(
                        Witness("band ordering vs family for |w| >= eps", t, w, f"p0={p!r} > p_eps={pe!r} (eps={eps!r})")
                    )
                if eq.q0(t, w) / p < qe / pe:
                    return falsified(
                        Witness(
                            "band ordering vs family for |w| >= eps",
                            t,
                            w,
                            f"q0/p0={eq.q0(t, w) / p!r} < q_eps/p_eps={qe / pe!r} (eps={eps!r})",
                        )
                    )
                if eq.r0(t, w) < re:
                    return falsified(
                        Witness("band ordering vs family for |w| >= eps", t, w, f"r0={eq.r0(t, w)!r} < r_eps={re!r} (eps={eps!r})")
                    )

    # Bounded band: coefficient caps and the reciprocal-weight tail.
    for t in ts:
        Pv = b.P(t)
        Qv = b.Q(t)
        for w in ws:
            if abs(w) > N:
                continue
            p = eq.p0(t, w)
            if p > Pv:
                return falsified(Witness("p0 <= P, q0/p0 <= Q for |w| <= N with diverging reciprocal tail", t, w, f"p0={p!r} > P={Pv!r}"))
            if eq.q0(t, w) / p > Qv:
                return falsified(
                    Witness(
                        "p0 <= P, q0/p0 <= Q for |w| <= N with diverging reciprocal tail",
                        t,
                        w,
                        f"q0/p0={eq.q0(t, w) / p!r} > Q={Qv!r}",
                    )
                )
    VQ = CumulativeIntegral(b.Q, eq.t0, abs_rate=1e-13, rel_tol=1e-11)

    def reciprocal_tail(tau: float) -> float:
        p = b.P(tau)
        if p <= 0.0:
            raise DomainError(f"P({tau!r}) = {p!r} <= 0")
        return math.exp(-VQ(tau)) / p

    verdict1 = divergence_probe(reciprocal_tail, eq.t0, horizons)
    details["reciprocal_tail_status"] = verdict1.status
    if verdict1.status == CONVERGING:
        return falsified(
            Witness(
                "p0 <= P, q0/p0 <= Q for |w| <= N with diverging reciprocal tail",
                eq.t0,
                None,
                "reciprocal-weight tail probe converged",
            )
        )
    if verdict1.status != DIVERGING:
        return Certificate(
            theorem, INCONCLUSIVE, hypotheses, rec, reason="reciprocal tail probe inconclusive", heuristic_flags=flags, details=details
        )

    # Outer annulus: orderings against the family plus the double-integral tail.
    tail_status = {}
    for eps in eps_tail:
        if eps < N:
            raise DomainError(f"tail eps sample {eps!r} below N")
        p_e, q_e, r_e = family(eps)
        for t in ts:
            pe, qe = p_e(t), q_e(t)
            re = r_e(t)
            for w in ws:
                if not (N <= abs(w) <= eps):
                    continue
                p = eq.p0(t, w)
                if p > pe:
                    return falsified(
                        Witness("band ordering vs family on N <= |w| <= eps with diverging double tail", t, w, f"p0={p!r} > p_eps={pe!r} (eps={eps!r})")
                    )
                if eq.q0(t, w) / p > qe:
                    return falsified(
                        Witness(
                            "band ordering vs family on N <= |w| <= eps with diverging double tail",
                            t,
                            w,
                            f"q0/p0={eq.q0(t, w) / p!r} > q_eps={qe!r} (eps={eps!r})",
                        )
                    )
                if eq.r0(t, w) < re:
                    return falsified(
                        Witness("band ordering vs family on N <= |w| <= eps with diverging double tail", t, w, f"r0={eq.r0(t, w)!r} < r_eps={re!r} (eps={eps!r})")
                    )
        integrand = weighted_tail_integrand(b.P, q_e, r_e, eq.t0)
        verdict2 = divergence_probe(integrand, eq.t0, horizons)
        tail_status[repr(eps)] = verdict2.status
        if verdict2.status == CONVERGING:
            details["double_tail_status"] = tail_status
            return falsified(
                Witness(
                    "band ordering vs family on N <= |w| <= eps with diverging double tail",
                    eq.t0,
                    None,
                    f"double-integral tail probe converged at eps={eps!r}",
                )
            )
        if verdict2.status != DIVERGING:
            details["double_tail_status"] = tail_status
            return Certificate(
                theorem, INCONCLUSIVE, hypotheses, rec, reason=f"double tail probe inconclusive at eps={eps!r}", heuristic_flags=flags, details=details
            )
    details["double_tail_status"] = tail_status

    # Oscillation of each sampled comparison equation, by zero counting.
    zero_counts = {}
    for eps in eps_list:
        p_e, q_e, r_e = family(eps)
        count = _comparison_zero_count(eq.t0, p_e, q_e, r_e, osc_horizon, osc_opts)
        zero_counts[repr(eps)] = count
        if count < osc_min_zeros:
            details["comparison_zero_counts"] = zero_counts
            return falsified(
                Witness(
                    "comparison equations oscillate (zero count)",
                    eq.t0,
                    None,
                    f"comparison equation at eps={eps!r} produced {count} zero(s) < {osc_min_zeros} on horizon {osc_horizon!r}",
                )
            )
    details["comparison_zero_counts"] = zero_counts

    return Certificate(
        theorem,
        VERIFIED,
        hypotheses,
        rec,
        conclusion=OSC_OR_SINGULAR_FIRST_KIND,
        heuristic_flags=flags,
        details=details,
    )


def _comparison_zero_count(
    t0: float,
    p_e: TimeFunction,
    q_e: TimeFunction,
    r_e: TimeFunction,
    osc_horizon: float,
    osc_opts: IntegrationOptions | None,
) -> int:
    eq = EquationSpec(
        p0=ScalarField(lambda t, w: p_e(t), tags=frozenset({"positive"}), name="p_eps"),
        q0=ScalarField(lambda t, w: q_e(t), name="q_eps"),
        r0=ScalarField(lambda t, w: r_e(t), name="r_eps"),
        t0=t0,
    )
    if osc_opts is None:
        osc_opts = IntegrationOptions(rel_tol=1e-6, abs_tol=1e-9, horizon=t0 + osc_horizon, escape_threshold=1e30)
    traj = integrate(eq, InitialData(t1=t0, phi0=1.0, phi1=0.0), osc_opts)
    return len(traj.zeros)


def check_t3_6(
    eq: EquationSpec,
    region: Rectangle | None = None,
    grid: GridSpec = GridSpec(),
) -> Certificate:
    """Global-existence-for-all-data certificate from even monotone structure.

    Samples r0 >= 0 and the even monotonicity in w of p0, q0/p0 and -r0.
    Verified certifies global extension of the solution for every initial
    pair on the sampled region.
    """
    hypotheses = ("r0 >= 0", "p0, q0/p0, -r0 even-monotone in w")
    theorem = "T3_6"
    if region is None:
        region = Rectangle(eq.t0, eq.t0 + 50.0, -10.0, 10.0)
    ts = grid.t_axis(region.t_min, region.t_max)
    ws = grid.w_axis(region.w_min, region.w_max)
    witness = None
    for t in ts:
        rows = {
            "p0": [eq.p0(t, w) for w in ws],
            "q0/p0": [eq.q0(t, w) / eq.p0(t, w) for w in ws],
            "-r0": [-eq.r0(t, w) for w in ws],
        }
        for w, r in zip(ws, rows["-r0"]):
            if -r < 0.0:
                witness = Witness("r0 >= 0", t, w, f"r0={-r!r} < 0")
                break
        if witness:
            break
        for label, row in rows.items():
            for i in range(len(ws) - 1):
                a, bw = ws[i], ws[i + 1]
                if bw <= 0.0 and row[i] < row[i + 1]:
                    witness = Witness(
                        "p0, q0/p0, -r0 even-monotone in w", t, bw, f"{label} increases on the nonpositive side"
                    )
                    break
                if a >= 0.0 and row[i] > row[i + 1]:
                    witness = Witness(
                        "p0, q0/p0, -r0 even-monotone in w", t, bw, f"{label} decreases on the nonnegative side"
                    )
                    break
            if witness:
                break
        if witness:
            break
    rec = _region_record(ts, region.w_min, region.w_max, grid, (ws[0], ws[-1]))
    if witness is not None:
        return Certificate(theorem, FALSIFIED, hypotheses, rec, witness=witness)
    return Certificate(theorem, VERIFIED, hypotheses, rec, conclusion=GLOBAL_FOR_ALL_IC)
