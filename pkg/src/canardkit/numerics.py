"""Numerical substrate: fixed-step RK4 with section crossings, root finding,
the principal branch of the Lambert W function and adaptive quadrature.

Vector fields used by :func:`integrate` follow the in-place convention
``rhs(t, u, p, du)`` and are compiled with numba; ``p`` is a flat float64
parameter vector and ``du`` receives the derivative.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from numba import njit

from .errors import (BracketError, DivergenceError, DomainError,
                     IntegrationError)

#: Step sizes used by the figure-reproduction recipes.
STEP_PRESETS = {"default": 1e-4, "figure": 1e-5, "fine": 1e-6}

_DIRECTIONS = {"increasing": 1, "decreasing": -1, "either": 0}


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings of a fixed-step march.

    Parameters
    ----------
    step : float
        Time step ``h``.
    max_time : float
        Length of the integration interval.
    record_stride : int
        Keep every ``record_stride``-th step in the trajectory.
    method : str
        Only ``"RK4"`` is available.
    blowup : float
        Max-norm bound above which the run is declared divergent.
    t0 : float
        Initial time.
    """

    step: float = STEP_PRESETS["default"]
    max_time: float = 10.0
    record_stride: int = 1
    method: str = "RK4"
    blowup: float = 1e8
    t0: float = 0.0

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.max_time > 0.0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if self.max_time / self.step >= 2.0**63:
            raise ValueError("max_time / step does not fit in a 64-bit count")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if self.method != "RK4":
            raise ValueError(f"unsupported method {self.method!r}")
        if not self.blowup > 0.0:
            raise ValueError("blowup bound must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.max_time / self.step))

    def as_dict(self) -> dict:
        return {"step": self.step, "max_time": self.max_time,
                "record_stride": int(self.record_stride), "method": self.method,
                "blowup": self.blowup, "t0": self.t0}


@dataclass(frozen=True)
class Section:
    """Hyperplane ``u[normal_axis] == level`` crossed in a given direction.

    ``bounds`` maps other coordinate indices to closed ``(lower, upper)``
    intervals; a crossing outside the box is ignored. ``terminal > 0`` stops
    the march once this many crossings have been recorded.
    """

    normal_axis: int
    level: float
    direction: str = "either"
    bounds: Optional[dict] = None
    terminal: int = 0
    name: str = ""

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {sorted(_DIRECTIONS)}")
        if self.normal_axis < 0:
            raise ValueError("normal_axis must be non-negative")
        for axis, (lo, hi) in (self.bounds or {}).items():
            if not lo < hi:
                raise ValueError(f"empty bound on coordinate {axis}: {lo} >= {hi}")

    @property
    def tolerance(self) -> float:
        return 1e-12 * abs(self.level) + 1e-14

    def contains(self, state, slack: float = 0.0) -> bool:
        """True when ``state`` lies on the section and inside its bounds."""
        state = np.asarray(state, dtype=float)
        if abs(state[self.normal_axis] - self.level) > self.tolerance + slack:
            return False
        for axis, (lo, hi) in (self.bounds or {}).items():
            if not lo <= state[axis] <= hi:
                return False
        return True


@dataclass
class CrossingEvent:
    time: float
    state: np.ndarray
    section: Section
    section_index: int = 0


@dataclass
class Trajectory:
    """Time-ordered samples of a run plus its metadata."""

    t: np.ndarray
    states: np.ndarray
    coords: tuple = ()
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def __getitem__(self, name):
        return self.states[:, self.coords.index(name)]

    @property
    def final_state(self):
        return self.states[-1]

    def until(self, t_end):
        """Samples with ``t <= t_end``."""
        m = self.t <= t_end
        return Trajectory(self.t[m], self.states[m], self.coords, dict(self.meta))

    def mapped(self, fn, coords):
        """Apply a state transformation ``fn(states) -> states`` row-wise."""
        return Trajectory(self.t, np.asarray(fn(self.states)), tuple(coords),
                          dict(self.meta))


def rk4_step(field, t, state, h, params=None):
    """One classical fourth-order Runge-Kutta step.

    ``field`` is a :class:`~canardkit.models.System`, an in-place
    ``rhs(t, u, p, du)`` together with ``params``, or a plain
    ``f(t, u) -> du`` when ``params`` is None.
    """
    if not h > 0.0:
        raise ValueError("h must be positive")
    u = np.array(state, dtype=float)
    if hasattr(field, "rhs"):
        field, params = field.rhs, np.asarray(field.param_vector, dtype=float)

    if params is None:
        def f(tt, uu):
            return np.asarray(field(tt, uu), dtype=float)
    else:
        p = np.asarray(params, dtype=float)

        def f(tt, uu):
            du = np.empty_like(uu)
            field(tt, uu, p, du)
            return du

    k1 = f(t, u)
    k2 = f(t + 0.5 * h, u + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, u + 0.5 * h * k2)
    k4 = f(t + h, u + h * k3)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise IntegrationError(f"non-finite field value near state {u}",
                                   time=t, state=u)
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Status codes of the compiled march.
_OK, _STOPPED, _DIVERGED, _NONFINITE = 0, 1, 2, 3


@njit(cache=True, nogil=True, error_model="numpy")
def _march(rhs, p, t0, u0, h, n_steps, stride, blowup,
           sec_axis, sec_level, sec_dir, sec_lo, sec_hi, sec_terminal, sec_tol):
    d = u0.size
    ns = sec_axis.size
    n_rec = n_steps // stride + 2
    ts = np.empty(n_rec)
    us = np.empty((n_rec, d))
    cap = 64
    ev_t = np.empty(cap)
    ev_u = np.empty((cap, d))
    ev_s = np.empty(cap, np.int64)
    n_ev = 0
    counts = np.zeros(ns, np.int64)

    u = u0.copy()
    un = np.empty(d)
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    w = np.empty(d)
    xc = np.empty(d)
    hh = 0.5 * h
    h6 = h / 6.0

    ts[0] = t0
    us[0, :] = u
    j = 1
    c = 0
    status = 0
    i_done = 0
    for i in range(1, n_steps + 1):
        t = t0 + (i - 1) * h
        rhs(t, u, p, k1)
        for q in range(d):
            w[q] = u[q] + hh * k1[q]
        rhs(t + hh, w, p, k2)
        for q in range(d):
            w[q] = u[q] + hh * k2[q]
        rhs(t + hh, w, p, k3)
        for q in range(d):
            w[q] = u[q] + h * k3[q]
        rhs(t + h, w, p, k4)
        norm = 0.0
        finite = True
        for q in range(d):
            un[q] = u[q] + h6 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
            if not np.isfinite(un[q]):
                finite = False
            elif abs(un[q]) > norm:
                norm = abs(un[q])
        if not finite:
            status = 3
            break
        if norm > blowup:
            status = 2
            break

        stop = False
        for s in range(ns):
            a = sec_axis[s]
            g0 = u[a] - sec_level[s]
            g1 = un[a] - sec_level[s]
            hit = False
            if sec_dir[s] >= 0 and g0 <= 0.0 and g1 > 0.0:
                hit = True
            if sec_dir[s] <= 0 and g0 >= 0.0 and g1 < 0.0:
                hit = True
            if not hit:
                continue
            theta = g0 / (g0 - g1)
            r = g0 + theta * (g1 - g0)
            if abs(r) > sec_tol[s]:
                lo = 0.0
                hi = 1.0
                for _ in range(200):
                    r = g0 + theta * (g1 - g0)
                    if abs(r) <= sec_tol[s]:
                        break
                    if (r < 0.0) == (g0 < 0.0):
                        lo = theta
                    else:
                        hi = theta
                    theta = 0.5 * (lo + hi)
            inside = True
            for q in range(d):
                xc[q] = u[q] + theta * (un[q] - u[q])
                if q != a and (xc[q] < sec_lo[s, q] or xc[q] > sec_hi[s, q]):
                    inside = False
            if not inside:
                continue
            if n_ev == cap:
                cap *= 2
                nt = np.empty(cap)
                nu = np.empty((cap, d))
                nsx = np.empty(cap, np.int64)
                nt[:n_ev] = ev_t[:n_ev]
                nu[:n_ev, :] = ev_u[:n_ev, :]
                nsx[:n_ev] = ev_s[:n_ev]
                ev_t = nt
                ev_u = nu
                ev_s = nsx
            ev_t[n_ev] = t + theta * h
            ev_u[n_ev, :] = xc
            ev_s[n_ev] = s
            n_ev += 1
            counts[s] += 1
            if sec_terminal[s] > 0 and counts[s] >= sec_terminal[s]:
                stop = True

        for q in range(d):
            u[q] = un[q]
        i_done = i
        c += 1
        if c == stride:
            c = 0
            ts[j] = t0 + i * h
            us[j, :] = u
            j += 1
        if stop:
            status = 1
            break

    t_last = t0 + i_done * h
    if ts[j - 1] != t_last:
        ts[j] = t_last
        us[j, :] = u
        j += 1
    return ts[:j], us[:j], ev_t[:n_ev], ev_u[:n_ev], ev_s[:n_ev], status, t_last


def _as_compiled(fn):
    if isinstance(fn, numba.core.registry.CPUDispatcher):
        return fn
    return njit(fn)


def _section_arrays(sections, dim):
    ns = len(sections)
    axis = np.zeros(ns, np.int64)
    level = np.zeros(ns)
    direction = np.zeros(ns, np.int64)
    lo = np.full((ns, dim), -np.inf)
    hi = np.full((ns, dim), np.inf)
    terminal = np.zeros(ns, np.int64)
    tol = np.zeros(ns)
    for s, sec in enumerate(sections):
        if sec.normal_axis >= dim:
            raise ValueError(f"section axis {sec.normal_axis} >= dimension {dim}")
        axis[s] = sec.normal_axis
        level[s] = sec.level
        direction[s] = _DIRECTIONS[sec.direction]
        for q, (a, b) in (sec.bounds or {}).items():
            if q >= dim:
                raise ValueError(f"bound on coordinate {q} >= dimension {dim}")
            lo[s, q], hi[s, q] = a, b
        terminal[s] = sec.terminal
        tol[s] = sec.tolerance
    return axis, level, direction, lo, hi, terminal, tol


def integrate(field, state0, config: IntegratorConfig, sections: Sequence[Section] = (),
              params=None, coords=None):
    """Fixed-step RK4 march with section-crossing detection.

    Parameters
    ----------
    field : System or compiled rhs
        A :class:`canardkit.models.System`, or an in-place
        ``rhs(t, u, p, du)`` (compiled on the fly if it is plain Python).
    state0 : array_like
        Initial state.
    config : IntegratorConfig
    sections : sequence of Section
        Crossings are located on the linear interpolant between the two
        bracketing steps.
    params : array_like, optional
        Parameter vector when ``field`` is a bare rhs.

    Returns
    -------
    (Trajectory, list of CrossingEvent)

    Raises
    ------
    DivergenceError
        The max-norm exceeded ``config.blowup``. The partial trajectory is
        attached as ``exc.trajectory``.
    IntegrationError
        The field returned a non-finite value.
    """
    meta = {"step": config.step, "method": config.method,
            "record_stride": int(config.record_stride)}
    if hasattr(field, "rhs"):
        rhs = field.rhs
        p = np.asarray(field.param_vector, dtype=np.float64)
        coords = coords or tuple(field.coords)
        meta.update(system=field.name, params=field.param_dict())
    else:
        rhs = _as_compiled(field)
        p = np.zeros(0) if params is None else np.asarray(params, dtype=np.float64)
        meta["params"] = p.tolist()
    u0 = np.array(state0, dtype=np.float64).ravel()
    if not np.all(np.isfinite(u0)):
        raise IntegrationError("non-finite initial state", time=config.t0, state=u0)
    coords = tuple(coords) if coords else tuple(f"u{q}" for q in range(u0.size))
    arrays = _section_arrays(list(sections), u0.size)
    ts, us, ev_t, ev_u, ev_s, status, t_last = _march(
        rhs, p, float(config.t0), u0, float(config.step), config.n_steps,
        int(config.record_stride), float(config.blowup), *arrays)
    traj = Trajectory(ts, us, coords, meta)
    events = [CrossingEvent(float(ev_t[e]), ev_u[e].copy(), sections[int(ev_s[e])], int(ev_s[e]))
              for e in range(len(ev_t))]
    traj.meta["stopped_by_event"] = status == _STOPPED
    if status == _DIVERGED:
        exc = DivergenceError(
            f"state max-norm exceeded {config.blowup:g} after t={t_last:.17g}",
            last_time=t_last, state=us[-1].copy())
        exc.trajectory, exc.events = traj, events
        raise exc
    if status == _NONFINITE:
        exc = IntegrationError(f"non-finite field value near state {us[-1]}",
                               time=t_last, state=us[-1].copy())
        exc.trajectory, exc.events = traj, events
        raise exc
    return traj, events


def integrate_stiff(f: Callable, state0, t_span, t_eval=None, jac=None,
                    rtol=1e-9, atol=1e-14, coords=None):
    """Implicit Radau integration (scipy) for stiff exterior runs.

    Fixed-step RK4 cannot follow orbits whose fast relaxation rate grows
    without bound; this route is used only for those.
    """
    from scipy.integrate import solve_ivp

    sol = solve_ivp(f, t_span, np.asarray(state0, dtype=float), method="Radau",
                    t_eval=t_eval, jac=jac, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"stiff solver failed: {sol.message}",
                               time=float(sol.t[-1]), state=sol.y[:, -1])
    coords = tuple(coords) if coords else tuple(f"u{q}" for q in range(len(state0)))
    return Trajectory(sol.t, sol.y.T.copy(), coords,
                      {"method": "Radau", "rtol": rtol, "atol": atol})


def find_root(g: Callable[[float], float], bracket, tol: float = 1e-12,
              dg: Optional[Callable[[float], float]] = None, maxiter: int = 200) -> float:
    """Safeguarded Newton iteration inside a sign-changing bracket.

    Newton steps use ``dg`` when given and the secant slope of the two most
    recent iterates otherwise. A step that leaves the bracket, or follows an
    iteration that failed to halve it, is replaced by bisection. Returns once
    ``|g(r)| <= tol`` or the bracket is narrower than ``tol``.
    """
    lo, hi = sorted((float(bracket[0]), float(bracket[1])))
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if not glo * ghi < 0.0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: g={glo:g}, {ghi:g}")
    x_prev, g_prev = lo, glo
    x, gx = hi, ghi
    bisect = False
    for _ in range(maxiter):
        if abs(gx) <= tol or hi - lo <= tol:
            return x
        cand = math.nan
        if not bisect:
            slope = dg(x) if dg is not None else (gx - g_prev) / (x - x_prev)
            if slope != 0.0 and math.isfinite(slope):
                cand = x - gx / slope
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        width = hi - lo
        x_prev, g_prev = x, gx
        x, gx = cand, g(cand)
        if (gx < 0.0) == (glo < 0.0):
            lo, glo = x, gx
        else:
            hi, ghi = x, gx
        bisect = hi - lo > 0.5 * width
    return x


# 1/e split into a double and its rounding remainder.
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17


def lambert_w0(x: float) -> float:
    """Principal branch ``W0`` of the inverse of ``w -> w e^w``.

    Halley iteration started from the branch-point series
    ``-1 + p - p^2/3 + 11 p^3/72`` with ``p = sqrt(2 (e x + 1))`` for
    ``x < -0.25``, the Winitzki approximation on ``[-0.25, 3)``, and the
    asymptotic ``L1 - L2 + L2/L1`` (``L1 = ln x``, ``L2 = ln L1``) above.

    Raises
    ------
    DomainError
        If ``x < -1/e``.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    q = (x + _INV_E_HI) + _INV_E_LO
    if q < 0.0:
        # Allow a few ulps of rounding below the branch point.
        if q > -4.0 * 2.220446049250313e-16 * _INV_E_HI:
            return -1.0
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if q == 0.0 or x == -_INV_E_HI:
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x > 1e200:
        # Newton on w + ln w = ln x avoids overflow of exp(w).
        lx = math.log(x)
        w = lx - math.log(lx)
        for _ in range(100):
            dw = (w + math.log(w) - lx) / (1.0 + 1.0 / w)
            w -= dw
            if abs(dw) <= 1e-16 * abs(w):
                break
        return w

    if x < -0.25:
        p = math.sqrt(2.0 * math.e * q)
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif x < 3.0:
        l1 = math.log1p(x)
        w = l1 * (1.0 - math.log1p(l1) / (2.0 + l1))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0 or f == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 48, rtol: float = 1e-15) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    A panel is accepted when its error estimate is within its share of
    ``tol`` or within ``rtol`` of its own value, so integrands far above
    unit size do not exhaust ``max_depth`` on an unreachable absolute
    target.
    """
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s0, tol0, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - s0
        if depth >= max_depth or abs(delta) <= 15.0 * max(tol0, rtol * abs(left + right)):
            total += left + right + delta / 15.0
        else:
            stack.append((m0, b0, fm0, frm, fb0, right, 0.5 * tol0, depth + 1))
            stack.append((a0, m0, fa0, flm, fm0, left, 0.5 * tol0, depth + 1))
    return total
