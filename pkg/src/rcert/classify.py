"""Trajectory taxonomy: monotone-global, oscillatory, and singular classes.

"Infinitely many sign changes" cannot be observed in finite arithmetic, so
the singular second-kind label uses a falsifiable surrogate: finite escape
together with zero gaps that shrink geometrically toward the escape time.
Likewise the first-kind label can only ever be a *candidate*: under the
uniqueness conditions of the underlying theory the class is provably empty
(the trivial solution is the unique one through a tangential zero), so a
dead-banded trajectory signals either lost uniqueness or plain numerical
flatlining, never a confirmed first-kind solution.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .dynamics import (
    FINITE_ESCAPE,
    STEP_COLLAPSE,
    IntegrationOptions,
    Trajectory,
    integrate,
)
from .fields import EquationSpec, InitialData
from .serialize import format_float

__all__ = [
    "GLOBAL_MONOTONE_NONVANISHING",
    "OSCILLATORY",
    "SINGULAR_SECOND_KIND",
    "SINGULAR_FIRST_KIND_CANDIDATE",
    "GLOBAL_NON_OSCILLATORY",
    "UNDETERMINED",
    "ClassifyPolicy",
    "Classification",
    "classify",
    "sweep",
    "SweepCell",
    "export_raster_csv",
]

GLOBAL_MONOTONE_NONVANISHING = "GlobalMonotoneNonvanishing"
OSCILLATORY = "Oscillatory"
SINGULAR_SECOND_KIND = "SingularOscillatorySecondKind"
SINGULAR_FIRST_KIND_CANDIDATE = "SingularOscillatoryFirstKindCandidate"
GLOBAL_NON_OSCILLATORY = "GlobalNonOscillatory"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ClassifyPolicy:
    """Thresholds mapping finite evidence to the taxonomy labels.

    ``gap_ratio``/``gap_count`` define the geometric zero-gap accumulation
    taken as the finite surrogate of infinitely many sign changes before an
    escape time.  The dead band is ``dead_band_factor * zero_tol`` sustained
    over the final ``dead_band_span`` fraction of the horizon.
    """

    min_zeros: int = 5
    window: float = 0.25
    gap_ratio: float = 0.9
    gap_count: int = 4
    monotone_tol: float = 1e-6
    dead_band_factor: float = 10.0
    dead_band_span: float = 0.05

    def __post_init__(self):
        if self.gap_count < 2:
            raise ValueError("gap accumulation needs at least two gaps to compare")


@dataclass(frozen=True)
class Classification:
    kind: str
    zero_count: int
    terminal: str
    monotone: bool
    zero_gap_ratios: tuple[float, ...] = ()
    escape_time: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "zero_count": self.zero_count,
            "terminal": self.terminal,
            "monotone": self.monotone,
            "zero_gap_ratios": list(self.zero_gap_ratios),
            "escape_time": self.escape_time,
            "detail": self.detail,
        }


def _is_nondecreasing_abs(traj: Trajectory, tol: float) -> bool:
    prev = abs(float(traj.phis[0]))
    scale = max(1.0, float(max(abs(traj.phis.min()), abs(traj.phis.max()))))
    for v in traj.phis[1:]:
        cur = abs(float(v))
        if cur < prev - tol * scale:
            return False
        prev = max(prev, cur)
    return True


def _gap_ratios(zeros: list[float], count: int) -> tuple[float, ...]:
    if len(zeros) < count + 1:
        return ()
    gaps = [b - a for a, b in zip(zeros, zeros[1:])][-count:]
    return tuple(g2 / g1 for g1, g2 in zip(gaps, gaps[1:]) if g1 > 0)


def _dead_band_entry(traj: Trajectory, policy: ClassifyPolicy) -> float | None:
    band = policy.dead_band_factor * traj.opts.zero_tol
    ts = traj.ts
    entry = None
    for t, phi, dphi in zip(ts, traj.phis, traj.dphis):
        if abs(phi) <= band and abs(dphi) <= band:
            if entry is None:
                entry = float(t)
        else:
            entry = None
    if entry is None:
        return None
    span = traj.t_end - traj.t_start
    if span <= 0 or (traj.t_end - entry) < policy.dead_band_span * span:
        return None
    return entry


def classify(traj: Trajectory, policy: ClassifyPolicy = ClassifyPolicy()) -> Classification:
    """Deterministically map a finished trajectory to a taxonomy label.

    Ambiguity (step collapse, tangential zeros, escape without zero-gap
    accumulation) maps to ``Undetermined`` rather than to a guess.
    """
    zeros = traj.zeros
    terminal = traj.terminal.kind
    monotone = _is_nondecreasing_abs(traj, policy.monotone_tol)

    if terminal == STEP_COLLAPSE or traj.tangential:
        return Classification(
            UNDETERMINED,
            len(zeros),
            terminal,
            monotone,
            detail="step collapse or tangential zero",
        )

    if terminal == FINITE_ESCAPE:
        ratios = _gap_ratios(zeros, policy.gap_count)
        accumulating = (
            len(zeros) >= policy.gap_count + 1
            and len(ratios) == policy.gap_count - 1
            and all(r <= policy.gap_ratio for r in ratios)
        )
        if accumulating:
            return Classification(
                SINGULAR_SECOND_KIND,
                len(zeros),
                terminal,
                monotone,
                zero_gap_ratios=ratios,
                escape_time=traj.terminal.time,
                detail="zero gaps contract geometrically toward the escape time",
            )
        return Classification(
            UNDETERMINED,
            len(zeros),
            terminal,
            monotone,
            zero_gap_ratios=ratios,
            escape_time=traj.terminal.time,
            detail="finite escape without accumulating sign changes",
        )

    # Reached the horizon.
    entry = _dead_band_entry(traj, policy)
    if entry is not None:
        return Classification(
            SINGULAR_FIRST_KIND_CANDIDATE,
            len(zeros),
            terminal,
            monotone,
            detail=f"phi and phi' inside the dead band from t={entry!r}; candidate only",
        )
    span = traj.t_end - traj.t_start
    if len(zeros) >= policy.min_zeros and zeros and zeros[-1] >= traj.t_end - policy.window * span:
        return Classification(OSCILLATORY, len(zeros), terminal, monotone)
    if not zeros and monotone and float(max(abs(traj.phis.min()), abs(traj.phis.max()))) > traj.opts.zero_tol:
        return Classification(GLOBAL_MONOTONE_NONVANISHING, len(zeros), terminal, monotone)
    return Classification(GLOBAL_NON_OSCILLATORY, len(zeros), terminal, monotone)


@dataclass(frozen=True)
class SweepCell:
    phi0: float
    phi1: float
    kind: str
    zero_count: int
    escape_time: float | None
    error: str = ""


def _threads() -> int:
    raw = os.environ.get("RCERT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sweep(
    eq: EquationSpec,
    ic_rectangle: tuple[tuple[float, float], tuple[float, float]],
    resolution: tuple[int, int],
    opts: IntegrationOptions = IntegrationOptions(),
    policy: ClassifyPolicy = ClassifyPolicy(),
    t1: float | None = None,
) -> list[SweepCell]:
    """Classify the trajectory for every initial pair on a raster.

    Per-cell failures are recorded as ``Undetermined`` cells with the error
    message, never aborting the sweep.  Cells are integrated independently;
    RCERT_THREADS caps the worker pool, and the raster is assembled in raster
    order after all cells finish, so the output is deterministic.
    """
    (p_lo, p_hi), (d_lo, d_hi) = ic_rectangle
    n_phi, n_dphi = resolution
    if n_phi < 2 or n_dphi < 2:
        raise ValueError("sweep needs at least a 2x2 raster")
    start = eq.t0 if t1 is None else t1

    cells_ic = [
        (
            p_lo + (p_hi - p_lo) * i / (n_phi - 1),
            d_lo + (d_hi - d_lo) * j / (n_dphi - 1),
        )
        for i in range(n_phi)
        for j in range(n_dphi)
    ]

    def run(cell: tuple[float, float]) -> SweepCell:
        phi0, phi1 = cell
        try:
            traj = integrate(eq, InitialData(t1=start, phi0=phi0, phi1=phi1), opts)
            c = classify(traj, policy)
            return SweepCell(phi0, phi1, c.kind, c.zero_count, c.escape_time)
        except Exception as exc:  # per-cell errors become Undetermined cells
            return SweepCell(phi0, phi1, UNDETERMINED, 0, None, error=str(exc))

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, cells_ic))
    return [run(c) for c in cells_ic]


def export_raster_csv(cells: list[SweepCell], path) -> None:
    lines = ["ic_phi,ic_dphi,kind,zero_count,escape_time"]
    for c in cells:
        esc = "" if c.escape_time is None else format_float(c.escape_time)
        lines.append(f"{format_float(c.phi0)},{format_float(c.phi1)},{c.kind},{c.zero_count},{esc}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
