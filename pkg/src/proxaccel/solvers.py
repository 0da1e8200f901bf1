"""Solver loop implementations on top of the proximal gradient primitive.

Five runners share one problem interface and one report format:

``run_pgd``
    Plain proximal gradient iteration.
``run_nesterov``
    Momentum-extrapolated proximal gradient with the classic weight
    recurrence ``a <- (1 + sqrt(1 + 4 a^2)) / 2``.
``run_nesterov_restart``
    Same, with the momentum cleared whenever an adaptive criterion detects
    that extrapolation has overshot (objective increase, or a positive
    inner product between the extrapolation and the last move).
``run_aa_restart``
    Anderson mixing of fixed-point residuals over a sliding window of
    secant pairs, restarted on a fixed cycle.
``run_daarem``
    The Anderson scheme made robust: ridge damping of the mixing
    coefficients with a level chosen by a norm-matching equation, a
    per-iteration acceptance test with a configurable monitor, and
    cycle-level fallback bookkeeping.
``run_nidaarem``
    Two phases: momentum iteration until it loses monotonicity (or hits a
    cap), then the damped Anderson scheme seeded with the best momentum
    iterate.

Step accounting: ``RunReport.pg_steps`` counts every proximal gradient
application, including residual evaluations used only for monitoring or for
the stopping test.  The residual check that detects convergence at the top
of a window-solver iteration belongs to no trace row but is counted.
Objective evaluations are free of proximal work and are cached per iterate,
never computed twice at the same point.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .core import StepConfig, objective, pg_step, residual
from .linalg import WindowSVD

__all__ = [
    "TraceRecord",
    "RunReport",
    "DaaremConfig",
    "DaaremState",
    "NesterovState",
    "DifferenceWindow",
    "run_pgd",
    "run_nesterov",
    "run_nesterov_restart",
    "run_aa_restart",
    "run_daarem",
    "run_nidaarem",
    "accept_objective",
    "accept_residual",
    "cycle_accept",
    "eps_schedule_step",
    "active_rows",
    "anderson_proposal",
]

STEP_KINDS = ("pg", "nesterov", "aa_accepted", "aa_rejected", "switch")


@dataclass
class TraceRecord:
    """One outer iteration: the objective of the iterate it produced, the
    residual norm its stopping test examined, the cumulative proximal
    gradient count, and the kind of step taken."""

    iteration: int
    objective: float
    resid_norm: float
    pg_steps: int
    step_kind: str


@dataclass
class RunReport:
    """Outcome of one solver run.

    ``restarts`` lists iterations where a momentum reset fired and
    ``switch_iteration`` marks the phase change of the two-phase solver;
    both are empty/None when not applicable.
    """

    method: str
    converged: bool
    iterations: int
    pg_steps: int
    final_x: np.ndarray
    final_objective: float
    final_resid_norm: float
    wall_time: float
    trace: list
    restarts: list = field(default_factory=list)
    switch_iteration: int | None = None


@dataclass
class NesterovState:
    """Momentum iteration state: weight ``a_k``, extrapolated point ``y``,
    current iterate ``x`` and its predecessor."""

    weight: float
    y: np.ndarray
    x: np.ndarray
    x_prev: np.ndarray


@dataclass
class DaaremConfig:
    """Tuning knobs of the damped Anderson scheme.

    Parameters
    ----------
    window : int
        Maximum number of secant pairs kept per cycle; the scheme restarts
        its window every ``window`` iterations.
    damping_base, damping_offset : float
        The damping budget of iteration ``k`` is
        ``delta_k = 1 / (1 + damping_base ** (damping_offset - s_k))`` where
        the relaxation counter ``s_k`` rises by one per accepted proposal
        and falls on rejections, ill-conditioning, and failed cycles.  With
        the defaults, damping starts heavy and relaxes geometrically toward
        none as proposals keep being accepted.
    max_setback : int
        Floor on the relaxation counter: ``s_k >= -max_setback``.
    cond_limit : float
        Window condition number above which the relaxation counter is
        knocked down by one before solving.
    accept_slack : float
        Slack of the objective acceptance test
        ``phi(proposal) <= phi(current) + slack``.
    monitor : str
        ``"fixed"`` uses ``accept_slack`` every iteration, ``"alternating"``
        alternates the slack between ``accept_slack`` and 0 across cycles,
        ``"residual"`` accepts on a residual-decrease test instead (costing
        one extra proximal gradient application per proposal).
    resid_decay, resid_scale, resid_power : float
        Residual-monitor shape: a proposal is accepted when its residual
        norm is at most ``min(current + r0 * resid_decay ** k,
        resid_scale * r0 * (1 + n_accepted) ** -(1 + resid_power))`` with
        ``r0`` the starting residual norm; ``resid_decay`` alternates with 0
        across cycles like the objective slack.
    cycle_slack : float
        Slack of the end-of-cycle test ``phi(new) <= phi(best) + slack``.
    subset : bool
        Solve the window least squares on the rows carrying residual mass
        (threshold ``subset_scale`` times the mean absolute row sum).  The
        proposal still updates every coordinate; dropping exactly-zero rows
        leaves the solve unchanged, so this only alters results when
        near-zero rows exist.
    subset_scale : float
        Row-sum threshold scale for ``subset=True``.
    """

    window: int = 10
    damping_base: float = 1.2
    damping_offset: float = 25.0
    max_setback: int = 50
    cond_limit: float = 1e8
    accept_slack: float = 1.0
    monitor: str = "alternating"
    resid_decay: float = 0.95
    resid_scale: float = 1.0
    resid_power: float = 0.1
    cycle_slack: float = 0.0
    subset: bool = False
    subset_scale: float = 1e-3

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be at least 1, got {self.window}")
        if self.damping_base <= 1.0:
            raise ValueError(f"damping_base must exceed 1, got {self.damping_base}")
        if self.max_setback < 0:
            raise ValueError(f"max_setback must be nonnegative, got {self.max_setback}")
        if self.cond_limit <= 1.0:
            raise ValueError(f"cond_limit must exceed 1, got {self.cond_limit}")
        if self.monitor not in ("fixed", "alternating", "residual"):
            raise ValueError(f"unknown monitor {self.monitor!r}")
        if not 0.0 < self.resid_decay < 1.0:
            raise ValueError(f"resid_decay must be in (0, 1), got {self.resid_decay}")
        if self.accept_slack < 0 or self.cycle_slack < 0:
            raise ValueError("slacks must be nonnegative")
        if self.subset_scale < 0:
            raise ValueError(f"subset_scale must be nonnegative, got {self.subset_scale}")


@dataclass
class DaaremState:
    """Introspection snapshot passed to callbacks once per iteration."""

    iteration: int
    cycle_pos: int
    relax: int
    best_objective: float
    eps_k: float
    rho_k: float
    n_accepted: int
    pg_steps: int
    window_order: int
    active_count: int
    dim: int
    step_kind: str
    resid_norm: float
    x: np.ndarray


class DifferenceWindow:
    """Sliding window of secant pairs (iterate and residual differences),
    oldest column first."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity}")
        self.capacity = int(capacity)
        self._dx = []
        self._df = []

    def __len__(self):
        return len(self._dx)

    def push(self, dx, df):
        self._dx.append(np.asarray(dx, dtype=np.float64))
        self._df.append(np.asarray(df, dtype=np.float64))
        if len(self._dx) > self.capacity:
            del self._dx[0]
            del self._df[0]

    def clear(self):
        self._dx.clear()
        self._df.clear()

    def matrices(self):
        """Stack the pairs into ``(p, m)`` arrays ``(X, F)``."""
        return np.column_stack(self._dx), np.column_stack(self._df)


def accept_objective(obj_proposal, obj_current, slack):
    """Objective acceptance test: proposal kept when its objective does not
    exceed the current one by more than ``slack``."""
    return bool(obj_proposal <= obj_current + slack)


def eps_schedule_step(eps_prev, k, window, eps):
    """Alternating slack schedule: unchanged off cycle boundaries, flipped
    between ``eps`` and 0 whenever ``k`` is a multiple of ``window``."""
    if k % window != 0:
        return eps_prev
    return 0.0 if eps_prev != 0.0 else eps


def accept_residual(resid_proposal, resid_current, resid_start, decay_k, k,
                    scale, power, n_accepted):
    """Residual acceptance test.

    Accepts when the proposal residual norm is at most the minimum of a
    near-monotone bound ``resid_current + resid_start * decay_k ** k`` and a
    forced-decay envelope
    ``scale * resid_start * (1 + n_accepted) ** -(1 + power)``.
    """
    near_monotone = resid_current + resid_start * decay_k ** k
    envelope = scale * resid_start * (1.0 + n_accepted) ** -(1.0 + power)
    return bool(resid_proposal <= min(near_monotone, envelope))


def cycle_accept(obj_new, obj_best, slack):
    """End-of-cycle test: the cycle counts as productive when the new
    objective does not exceed the best recorded one by more than ``slack``."""
    return bool(obj_new <= obj_best + slack)


def active_rows(F, scale):
    """Indices of window rows carrying residual mass.

    A row stays active when its absolute sum exceeds ``scale`` times the
    mean absolute row sum.  With ``scale = 0`` only exactly-zero rows are
    dropped, which provably leaves the least-squares solution unchanged.
    Never empty: if every row falls at or below the threshold, all rows are
    returned.
    """
    if scale < 0:
        raise ValueError(f"scale must be nonnegative, got {scale}")
    sums = np.sum(np.abs(F), axis=1)
    act = np.flatnonzero(sums > scale * float(sums.mean()))
    if act.size == 0:
        return np.arange(F.shape[0])
    return act


def anderson_proposal(x, f, X, F, gamma):
    """Assemble the mixed update ``x + f - (X + F) @ gamma``.

    With ``gamma = 0`` this reduces exactly to the plain proximal gradient
    step ``x + f``.
    """
    return x + f - (X + F) @ gamma


def _start(problem, x0):
    x0 = np.array(x0, dtype=np.float64).ravel()
    if x0.shape[0] != problem.dim:
        raise ValueError(f"x0 length {x0.shape[0]} does not match problem dim {problem.dim}")
    return x0


def _report(method, converged, pg, x, obj, resid_norm, t0, trace, restarts=None,
            switch_iteration=None):
    return RunReport(
        method=method,
        converged=converged,
        iterations=len(trace),
        pg_steps=pg,
        final_x=x,
        final_objective=obj,
        final_resid_norm=resid_norm,
        wall_time=time.perf_counter() - t0,
        trace=trace,
        restarts=restarts if restarts is not None else [],
        switch_iteration=switch_iteration,
    )


def run_pgd(problem, x0, config=None):
    """Plain proximal gradient iteration.

    One proximal gradient application per iteration; the residual
    ``x_new - x`` doubles as the stopping quantity at no extra cost.
    """
    cfg = config or StepConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x = _start(problem, x0)
    trace = []
    pg = 0
    conv = False
    obj = float("nan")
    rn = float("inf")
    for k in range(1, cfg.max_iter + 1):
        x_new = pg_step(problem, x, t)
        pg += 1
        rn = float(np.linalg.norm(x_new - x))
        x = x_new
        obj = objective(problem, x)
        trace.append(TraceRecord(k, obj, rn, pg, "pg"))
        if rn <= cfg.eps_stop:
            conv = True
            break
    return _report("pgd", conv, pg, x, obj, rn, t0, trace)


def _momentum_loop(problem, x0, cfg, t, trace, pg, t0, method, criterion,
                   switch_cap=None):
    """Shared momentum iteration.

    ``criterion`` is None (plain run), "objective", or "gradient".  Without
    ``switch_cap`` a criterion hit clears the momentum and the run carries
    on; with it, the loop exits on the first hit (or at iteration
    ``switch_cap``), returning the phase-change state instead of a report.
    Stopping uses the free residual at the extrapolated point.
    """
    x_prev = x0.copy()
    y = x0.copy()
    a = 1.0
    obj_prev = objective(problem, x0)
    restarts = []
    conv = False
    x = x0
    obj = obj_prev
    rn = float("inf")
    k = 0
    while len(trace) < cfg.max_iter:
        k += 1
        x = pg_step(problem, y, t)
        pg += 1
        rn = float(np.linalg.norm(x - y))
        obj = objective(problem, x)
        if criterion == "objective":
            fire = obj > obj_prev
        elif criterion == "gradient":
            fire = float((y - x) @ (x - x_prev)) > 0.0
        else:
            fire = False
        done = rn <= cfg.eps_stop
        switching = switch_cap is not None and not done and (fire or k >= switch_cap)
        trace.append(TraceRecord(k, obj, rn, pg, "switch" if switching else "nesterov"))
        if done:
            conv = True
            break
        if switching:
            return None, x, obj, rn, pg, k, True
        if fire and switch_cap is None:
            restarts.append(k)
            a_next = 1.0
            y = x.copy()
        else:
            a_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * a * a))
            y = x + ((a - 1.0) / a_next) * (x - x_prev)
        x_prev = x
        a = a_next
        obj_prev = obj
    report = _report(method, conv, pg, x, obj, rn, t0, trace, restarts)
    return report, x, obj, rn, pg, k, False


def run_nesterov(problem, x0, config=None):
    """Momentum-extrapolated proximal gradient iteration.

    Exactly one proximal gradient application per iteration; no objective
    monitoring influences the iteration (objectives are recorded for the
    trace only).
    """
    cfg = config or StepConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x0 = _start(problem, x0)
    report, *_ = _momentum_loop(problem, x0, cfg, t, [], 0, t0, "nesterov", None)
    return report


def run_nesterov_restart(problem, x0, config=None, criterion="objective"):
    """Momentum iteration with adaptive restarts.

    ``criterion="objective"`` (alias ``"monotonicity"``) clears the momentum
    whenever the objective strictly increases (ties do not fire);
    ``criterion="gradient"`` fires on ``(y - x_new) . (x_new - x_prev) > 0``
    and needs no objective values.  Restart iterations are listed in
    ``RunReport.restarts``.
    """
    if criterion == "monotonicity":
        criterion = "objective"
    if criterion not in ("objective", "gradient"):
        raise ValueError(f"unknown restart criterion {criterion!r}")
    cfg = config or StepConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x0 = _start(problem, x0)
    report, *_ = _momentum_loop(problem, x0, cfg, t, [], 0, t0, "nesterov_restart", criterion)
    return report


def run_aa_restart(problem, x0, config=None, window=10):
    """Anderson mixing of fixed-point residuals with systematic restarts.

    A cycle lasts ``window`` iterations; a cycle end resets the mixing order
    to one, with the newest secant pair spanning the boundary.  Mixing
    coefficients solve the window least squares exactly, with a tiny ridge
    retry when the window is numerically rank deficient.  Every proposal is
    kept (no acceptance test), which is fast when it works and is the
    reason the damped variant exists.
    """
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    cfg = config or StepConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x = _start(problem, x0)

    f = residual(problem, x, t)
    pg = 1
    rn = float(np.linalg.norm(f))
    prev_x, prev_f = x, f
    x = x + f
    obj = objective(problem, x)
    trace = [TraceRecord(0, obj, rn, pg, "pg")]
    if rn <= cfg.eps_stop:
        return _report("aa_restart", True, pg, x, obj, rn, t0, trace)

    # A restart resets the window order to 1, not to empty: the newest
    # secant pair spans the cycle boundary, so every iteration mixes at
    # least one pair.
    win = DifferenceWindow(window)
    conv = False
    k = 0
    while len(trace) < cfg.max_iter:
        k += 1
        f = residual(problem, x, t)
        pg += 1
        rn = float(np.linalg.norm(f))
        if rn <= cfg.eps_stop:
            conv = True
            break
        win.push(x - prev_x, f - prev_f)
        X, F = win.matrices()
        svd = WindowSVD(F, f)
        try:
            gamma = svd.exact_gamma()
        except np.linalg.LinAlgError:
            if float(svd.d[0]) == 0.0:
                gamma = np.zeros(len(win))
            else:
                gamma = svd.gamma(1e-10 * float(svd.d[0]) ** 2)
        x_new = anderson_proposal(x, f, X, F, gamma)
        obj = objective(problem, x_new)
        trace.append(TraceRecord(k, obj, rn, pg, "aa_accepted"))
        if k % window == 0:
            win.clear()
        prev_x, prev_f = x, f
        x = x_new
    return _report("aa_restart", conv, pg, x, obj, rn, t0, trace)


def _daarem_loop(problem, x0, cfg, dcfg, t, trace, pg, t0, iter_offset, callback,
                 method, switch_iteration=None):
    """Damped Anderson core, shared by the standalone and two-phase runners.

    Appends to ``trace`` starting at ``iter_offset`` and uses the remaining
    ``cfg.max_iter`` budget.  Cycle arithmetic runs on the internal
    iteration counter ``k`` (1-based after the initial proximal gradient
    step), independent of trace numbering.
    """
    m = dcfg.window
    x = x0

    f = residual(problem, x, t)
    pg += 1
    rn = float(np.linalg.norm(f))
    resid_start = rn
    prev_x, prev_f = x, f
    x = x + f
    obj = objective(problem, x)
    trace.append(TraceRecord(iter_offset, obj, rn, pg, "pg"))
    if rn <= cfg.eps_stop:
        return _report(method, True, pg, x, obj, rn, t0, trace,
                       switch_iteration=switch_iteration)

    best = obj
    win = DifferenceWindow(m)
    cycle_pos = 1
    relax = 0
    n_accepted = 0
    eps_k = dcfg.accept_slack
    rho_k = dcfg.resid_decay
    subset_scale = dcfg.subset_scale if dcfg.subset else 0.0
    conv = False
    k = 0
    while len(trace) < cfg.max_iter:
        k += 1
        f = residual(problem, x, t)
        pg += 1
        rn = float(np.linalg.norm(f))
        if rn <= cfg.eps_stop:
            conv = True
            break
        if dcfg.monitor == "alternating":
            eps_k = eps_schedule_step(eps_k, k, m, dcfg.accept_slack)
        elif dcfg.monitor == "residual" and k % m == 0:
            rho_k = 0.0 if rho_k != 0.0 else dcfg.resid_decay
        # the newest secant pair always enters, even across a cycle restart
        win.push(x - prev_x, f - prev_f)
        order = len(win)
        X, F = win.matrices()
        act = active_rows(F, subset_scale)
        active_count = int(act.size)
        svd = WindowSVD(F[act], f[act])
        if svd.condition_number > dcfg.cond_limit:
            relax = max(relax - 1, -dcfg.max_setback)
        delta = 1.0 / (1.0 + dcfg.damping_base ** (dcfg.damping_offset - relax))
        _, gamma = svd.damped_gamma(delta)
        y = anderson_proposal(x, f, X, F, gamma)
        if dcfg.monitor == "residual":
            ry = residual(problem, y, t)
            pg += 1
            ok = accept_residual(float(np.linalg.norm(ry)), rn, resid_start,
                                 rho_k, k, dcfg.resid_scale, dcfg.resid_power,
                                 n_accepted)
            if ok:
                x_new = y
                obj_new = objective(problem, x_new)
            else:
                x_new = x + f
                obj_new = objective(problem, x_new)
        else:
            obj_y = objective(problem, y)
            ok = accept_objective(obj_y, obj, eps_k)
            if ok:
                x_new = y
                obj_new = obj_y
            else:
                x_new = x + f
                obj_new = objective(problem, x_new)
        if ok:
            kind = "aa_accepted"
            relax += 1
            n_accepted += 1
        else:
            kind = "aa_rejected"
        reporting_pos = cycle_pos
        if k % m == 0:
            if not cycle_accept(obj_new, best, dcfg.cycle_slack):
                relax = max(relax - m, -dcfg.max_setback)
            cycle_pos = 1
            best = obj_new
            win.clear()
        else:
            cycle_pos += 1
        trace.append(TraceRecord(iter_offset + k, obj_new, rn, pg, kind))
        if callback is not None:
            callback(DaaremState(
                iteration=k, cycle_pos=reporting_pos, relax=relax,
                best_objective=best, eps_k=eps_k, rho_k=rho_k,
                n_accepted=n_accepted, pg_steps=pg, window_order=order,
                active_count=active_count, dim=problem.dim, step_kind=kind,
                resid_norm=rn, x=x_new,
            ))
        prev_x, prev_f = x, f
        x = x_new
        obj = obj_new
    return _report(method, conv, pg, x, obj, rn, t0, trace,
                   switch_iteration=switch_iteration)


def run_daarem(problem, x0, config=None, daarem=None, callback=None):
    """Damped Anderson acceleration of the proximal gradient fixed point.

    Each iteration solves the secant-window least squares under a damping
    budget that loosens as proposals keep being accepted and tightens on
    rejections, ill-conditioned windows, and unproductive cycles; rejected
    proposals fall back to the plain proximal gradient step.  See
    :class:`DaaremConfig` for the monitor variants.  ``callback`` receives a
    :class:`DaaremState` once per iteration.
    """
    cfg = config or StepConfig()
    dcfg = daarem or DaaremConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x0 = _start(problem, x0)
    return _daarem_loop(problem, x0, cfg, dcfg, t, [], 0, t0, 0, callback, "daarem")


def run_nidaarem(problem, x0, config=None, daarem=None, switch="objective",
                 switch_cap=1000, callback=None):
    """Momentum phase followed by damped Anderson acceleration.

    Runs the momentum iteration until the switch criterion fires
    (``"objective"``, alias ``"monotonicity"``: first strict objective
    increase; ``"gradient"``: first positive extrapolation inner product) or
    ``switch_cap`` iterations have passed, then seeds the damped Anderson
    scheme with the current iterate.  The switch iteration is marked in the
    trace and in ``RunReport.switch_iteration``.
    """
    if switch == "monotonicity":
        switch = "objective"
    if switch not in ("objective", "gradient"):
        raise ValueError(f"unknown switch criterion {switch!r}")
    if switch_cap < 1:
        raise ValueError(f"switch_cap must be at least 1, got {switch_cap}")
    cfg = config or StepConfig()
    dcfg = daarem or DaaremConfig()
    t = cfg.resolve_step(problem)
    t0 = time.perf_counter()
    x0 = _start(problem, x0)
    trace = []
    report, x, obj, rn, pg, k, switched = _momentum_loop(
        problem, x0, cfg, t, trace, 0, t0, "nidaarem", switch, switch_cap=switch_cap)
    if not switched:
        return report
    if len(trace) >= cfg.max_iter:
        return _report("nidaarem", False, pg, x, obj, rn, t0, trace,
                       switch_iteration=k)
    return _daarem_loop(problem, x, cfg, dcfg, t, trace, pg, t0, k + 1, callback,
                        "nidaarem", switch_iteration=k)
