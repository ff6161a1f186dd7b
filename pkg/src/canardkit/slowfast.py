"""Fast-subsystem geometry: critical sets, equilibrium types, bifurcations,
delay measurement and numerical transition maps.

All analysis works in physical coordinates. Systems integrated in strip
or compact coordinates should be mapped back with ``System.physical``
before their trajectories are handed to :func:`measure_delays`.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import models
from .errors import (AssumptionError, ConfigError, DivergenceError,
                     EntryNotInSectionError, IntegrationError, NoExitError,
                     NotAnEquilibriumError)
from .numerics import IntegratorConfig, Section, Trajectory, find_root, integrate

CLASSIFICATIONS = ("attracting-node", "saddle", "repelling-focus",
                   "attracting-focus", "repelling-node", "nonhyperbolic")
UNSTABLE = frozenset({"saddle", "repelling-focus", "repelling-node"})

RESIDUAL_TOL = 1e-10
HYPERBOLIC_TOL = 1e-9
FD_STEP = 1e-6


# -------------------------------------------------------------- types

@dataclass(frozen=True)
class BranchPoint:
    state: np.ndarray
    slow: float
    classification: str
    eigenvalues: tuple = ()


@dataclass
class CriticalBranch:
    """Sampled curve of fast equilibria parametrised by the slow value.

    ``state`` vectors are full states in ``coords`` order. ``line`` is set
    for straight branches as ``(point, direction)`` in those coordinates.
    """

    label: str
    coords: tuple
    points: list
    line: Optional[tuple] = None

    def __len__(self):
        return len(self.points)

    @property
    def states(self):
        return np.array([pt.state for pt in self.points])

    @property
    def slow_values(self):
        return np.array([pt.slow for pt in self.points])

    @property
    def classifications(self):
        return [pt.classification for pt in self.points]

    def unstable_runs(self):
        """Polylines of consecutive unstable points.

        Nonhyperbolic points adjacent to a run are included so that the run
        ends exactly at the bifurcation value when it was sampled.
        """
        cl = self.classifications
        runs, cur = [], []
        for i, c in enumerate(cl):
            if c in UNSTABLE:
                if not cur and i > 0 and cl[i - 1] == "nonhyperbolic":
                    cur.append(i - 1)
                cur.append(i)
            elif cur:
                if c == "nonhyperbolic":
                    cur.append(i)
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        states = self.states
        return [states[r] for r in runs]


@dataclass(frozen=True)
class BifurcationPoint:
    kind: str
    slow_value: float
    fast_state: tuple
    residual: float = 0.0

    def as_dict(self):
        return {"kind": self.kind, "slow_value": self.slow_value,
                "fast_state": list(self.fast_state), "residual": self.residual}


@dataclass(frozen=True)
class DelayRecord:
    passage_index: int
    entry_time: float
    exit_time: float
    branch: str
    distance_threshold: float
    complete: bool = True

    @property
    def duration(self):
        return self.exit_time - self.entry_time

    def as_dict(self):
        return {"passage_index": self.passage_index, "entry_time": self.entry_time,
                "exit_time": self.exit_time, "duration": self.duration,
                "branch": self.branch, "delta": self.distance_threshold,
                "complete": self.complete}


@dataclass(frozen=True)
class TransitionRecord:
    """Passage through a section-bounded box, with the method that produced it."""

    entry: tuple
    exit: tuple
    time: float
    source: str
    meta: dict = field(default_factory=dict)

    def as_dict(self):
        return {"entry": list(self.entry), "exit": list(self.exit), "time": self.time,
                "source": self.source, **self.meta}


# ---------------------------------------------------- classification

def _raw(system):
    """Raw-coordinate version of a registered system."""
    if system.to_physical is None:
        return system
    return models.make_system(system.name, system.params)


def _fast_jacobian(system, state):
    fast = list(system.fast)
    J = system.jac(state)
    if J is not None:
        return np.asarray(J)[np.ix_(fast, fast)]
    n = len(fast)
    Jf = np.empty((n, n))
    for j, q in enumerate(fast):
        up, dn = state.copy(), state.copy()
        up[q] += FD_STEP
        dn[q] -= FD_STEP
        Jf[:, j] = (system.field(up)[fast] - system.field(dn)[fast]) / (2.0 * FD_STEP)
    return Jf


def classify_eigenvalues(eig):
    eig = np.atleast_1d(eig)
    re = eig.real
    if np.any(np.abs(re) < HYPERBOLIC_TOL):
        return "nonhyperbolic"
    if eig.size == 2 and abs(eig[0].imag) > 0.0:
        return "repelling-focus" if re[0] > 0 else "attracting-focus"
    if np.all(re < 0):
        return "attracting-node"
    if np.all(re > 0):
        return "repelling-node"
    return "saddle"


def _full_state(system, fast_state, slow_value):
    state = np.zeros(system.dim)
    state[list(system.fast)] = np.atleast_1d(np.asarray(fast_state, dtype=float))
    state[list(system.slow)] = slow_value
    return state


def fast_eigenvalues(system, fast_state, slow_value):
    system = _raw(system)
    state = _full_state(system, fast_state, slow_value)
    res = float(np.max(np.abs(system.field(state)[list(system.fast)])))
    if not res < RESIDUAL_TOL:
        raise NotAnEquilibriumError(
            f"fast field residual {res:.3g} at {state} exceeds {RESIDUAL_TOL:g}")
    J = _fast_jacobian(system, state)
    eig = np.linalg.eigvals(J)
    if eig.size == 2 and abs(eig[0].imag) > 0:
        disc = (J[0, 0] - J[1, 1]) ** 2 + 4.0 * J[0, 1] * J[1, 0]
        if disc >= 0:
            eig = eig.real
    return eig


def classify_fast_equilibrium(system, fast_state, slow_value):
    """Type of a fast equilibrium with the slow variable frozen.

    Eigenvalues come from the registered analytic Jacobian, or centred
    differences with step ``1e-6``. A pair is a focus when the discriminant
    of the 2x2 block is negative.

    Raises
    ------
    NotAnEquilibriumError
        If the fast field does not vanish to ``1e-10``.
    """
    return classify_eigenvalues(fast_eigenvalues(system, fast_state, slow_value))


def _point(system, state):
    fast = state[list(system.fast)]
    slow = float(state[system.slow[0]])
    eig = fast_eigenvalues(system, fast, slow)
    return BranchPoint(state, slow, classify_eigenvalues(eig), tuple(complex(e) for e in eig))


# ---------------------------------------------------- critical sets

def _line_branch(system, label, states, point, direction):
    pts = [_point(system, s) for s in states]
    return CriticalBranch(label, tuple(system.coords), pts,
                          (np.asarray(point, float), np.asarray(direction, float)))


def _slow_grid(lo, hi, resolution, extra=()):
    grid = np.linspace(lo, hi, int(resolution))
    extra = [e for e in extra if lo <= e <= hi]
    return np.unique(np.concatenate([grid, extra]))


def critical_set(system, slow_range=None, resolution=201):
    """Sampled and classified branches of the critical set.

    Double transcritical systems: the three lines ``x = -1``, ``x = 1``,
    ``y = x``. Dynamical transcritical: ``x = 0`` and ``y = x``. Food chain:
    the line ``Delta = {(1, 0, z)}`` and the fold curve split at its
    bifurcation points into ``L_S`` (saddles), ``L_+`` (repelling foci) and
    ``L_-`` (attracting foci).
    """
    system = _raw(system)
    name = system.name
    if name in ("dtc", "dtcbb"):
        if slow_range is None:
            slow_range = (-system.params.b, system.params.a) if name == "dtcbb" else (-3.0, 3.0)
        ys = _slow_grid(*slow_range, resolution, (-1.0, 1.0))
        branches = []
        for label, xv in (("x=-1", -1.0), ("x=+1", 1.0)):
            branches.append(_line_branch(system, label, [np.array([xv, y]) for y in ys],
                                         (xv, 0.0), (0.0, 1.0)))
        branches.append(_line_branch(system, "y=x", [np.array([y, y]) for y in ys],
                                     (0.0, 0.0), (1.0, 1.0)))
        return branches
    if name == "transcritical1d":
        slow_range = slow_range or (-3.0, 3.0)
        ys = _slow_grid(*slow_range, resolution, (0.0,))
        return [
            _line_branch(system, "x=0", [np.array([0.0, y]) for y in ys], (0.0, 0.0), (0.0, 1.0)),
            _line_branch(system, "y=x", [np.array([y, y]) for y in ys], (0.0, 0.0), (1.0, 1.0)),
        ]
    if name == "tritrophic":
        return _tritrophic_critical_set(system, slow_range, resolution)
    raise ConfigError(f"no registered critical set for system {name!r}")


def _tritrophic_critical_set(system, slow_range, resolution):
    p = system.params
    bif = {b.kind: b for b in find_bifurcations_tritrophic(p)}
    zT = bif["saddle-node-transcritical"].slow_value
    zH = bif["hopf"].slow_value
    xP, _ = bif["saddle-node"].fast_state
    zP = bif["saddle-node"].slow_value
    lo, hi = slow_range or (0.0, 1.25 * zP)
    zs = _slow_grid(max(lo, 0.0), hi, resolution, (zT,))
    delta = _line_branch(system, "Delta", [np.array([1.0, 0.0, z]) for z in zs],
                         (1.0, 0.0, 0.0), (0.0, 0.0, 1.0))

    def on_L(x):
        return np.array([x, models.y_L(x, p), models.z_L(x, p)])

    x0 = max(models.x_L_zero(p), 0.0)
    xH = _x_on_left_branch(p, zH, x0, xP)
    n = max(int(resolution), 3)
    pieces = {
        "L_+": np.linspace(x0, xH, n)[:-1],
        "L_-": np.linspace(xH, xP, n)[1:-1],
        "L_S": np.linspace(xP, 1.0, n)[1:-1],
    }
    branches = [delta]
    for label, xs in pieces.items():
        pts = []
        for x in xs:
            s = on_L(x)
            if lo <= s[2] <= hi:
                pts.append(_point(system, s))
        branches.append(CriticalBranch(label, tuple(system.coords), pts))
    return branches


# ---------------------------------------------------- bifurcations

def line_transcritical_points(system):
    """Intersections of the straight critical lines (transcritical points)."""
    system = _raw(system)
    if system.name in ("dtc", "dtcbb"):
        pts = [(-1.0, -1.0), (1.0, 1.0)]
    elif system.name == "transcritical1d":
        pts = [(0.0, 0.0)]
    else:
        raise ConfigError(f"no straight critical lines for system {system.name!r}")
    out = []
    for x, y in pts:
        res = float(np.max(np.abs(system.field(np.array([x, y]))[list(system.fast)])))
        out.append(BifurcationPoint("transcritical", y, (x,), res))
    return out


def dz_L(x, p, h=1e-7):
    """Centred-difference slope of the fold-curve height."""
    return (models.z_L(x + h, p) - models.z_L(x - h, p)) / (2.0 * h)


def _max_real_part(p, x):
    s = np.array([x, models.y_L(x, p), models.z_L(x, p)])
    J = models.jacobian_tritrophic(s, p)[:2, :2]
    return float(np.max(np.linalg.eigvals(J).real))


def _x_on_left_branch(p, z, x_lo, x_P):
    return find_root(lambda x: models.z_L(x, p) - z, (x_lo, x_P), tol=1e-15)


def find_bifurcations_tritrophic(p, n_scan=2000):
    """Fast-subsystem bifurcations of the food chain along the slow variable.

    ``z_T`` by formula, ``x_P`` as the interior root of ``dz_L/dx``
    (centred difference, step ``1e-7``), ``z_P = z_L(x_P)``, and ``z_H``
    where the leading real part of the fast eigenvalues on the left branch
    of the fold curve changes sign (bisection in ``z`` to ``1e-10``).

    Returns
    -------
    list of BifurcationPoint
        Ordered by increasing slow value: transcritical point, Hopf, fold.

    Raises
    ------
    AssumptionError
        If ``G <= 0``, the fold curve has no interior maximum on ``(0, 1)``,
        or no Hopf crossing lies between ``z_T`` and ``z_P``.
    """
    if not p.G > 0:
        raise AssumptionError(
            f"G = a1 - d1(1+b1) must be positive for the transcritical point, got {p.G:g}")
    zT = models.z_T(p)
    xs = np.linspace(1e-6, 1.0 - 1e-6, n_scan)
    d = np.array([dz_L(x, p) for x in xs])
    idx = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0]
    if idx.size == 0:
        raise AssumptionError(
            "the fold-curve height z_L has no interior maximum x_P on (0, 1), "
            "so the fold point P does not exist (d1 too large or b2 too small)")
    i = int(idx[0])
    xP = find_root(lambda x: dz_L(x, p), (xs[i], xs[i + 1]), tol=1e-13)
    zP = models.z_L(xP, p)
    if not zP > zT:
        raise AssumptionError(f"fold value z_P = {zP:g} does not exceed z_T = {zT:g}")

    x0 = max(models.x_L_zero(p), 1e-12)
    z_lo, z_hi = models.z_L(x0, p), zP * (1.0 - 1e-9)
    zs = np.linspace(z_lo, z_hi, 400)
    re = np.array([_max_real_part(p, _x_on_left_branch(p, z, x0, xP)) for z in zs])
    sign = np.nonzero((re[:-1] > 0) & (re[1:] <= 0))[0]
    if sign.size == 0:
        raise AssumptionError("no Hopf crossing on the left branch of the fold curve below z_P")
    a, b = zs[sign[0]], zs[sign[0] + 1]
    while b - a > 1e-10:
        m = 0.5 * (a + b)
        if _max_real_part(p, _x_on_left_branch(p, m, x0, xP)) > 0:
            a = m
        else:
            b = m
    zH = 0.5 * (a + b)
    xH = _x_on_left_branch(p, zH, x0, xP)
    if not zT < zH < zP:
        raise AssumptionError(f"expected z_T < z_H < z_P, got {zT:g}, {zH:g}, {zP:g}")

    def residual(x, z):
        return float(np.max(np.abs(models.vf_tritrophic([x, models.y_L(x, p), z], p)[:2])))

    return [
        BifurcationPoint("saddle-node-transcritical", zT, (1.0, 0.0),
                         float(np.max(np.abs(models.vf_tritrophic([1.0, 0.0, zT], p)[:2])))),
        BifurcationPoint("hopf", float(zH), (float(xH), float(models.y_L(xH, p))), residual(xH, zH)),
        BifurcationPoint("saddle-node", float(zP), (float(xP), float(models.y_L(xP, p))), residual(xP, zP)),
    ]


def tritrophic_fast_equilibria(p, z):
    """Fast equilibria with ``x > 0`` and ``y >= 0`` at frozen ``z``, with types."""
    system = models.tritrophic(p)
    out = [((1.0, 0.0), classify_fast_equilibrium(system, (1.0, 0.0), z))]
    xs = np.linspace(max(models.x_L_zero(p), 1e-9), 1.0, 4001)
    g = np.array([models.z_L(x, p) - z for x in xs])
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        x = find_root(lambda s: models.z_L(s, p) - z, (xs[i], xs[i + 1]), tol=1e-15)
        if 0.0 < x < 1.0:
            y = models.y_L(x, p)
            out.append(((float(x), float(y)), classify_fast_equilibrium(system, (x, y), z)))
    return out


# ---------------------------------------------------- delays

def _polyline_distance(points, poly):
    """Euclidean distance from each row of ``points`` to a polyline."""
    if len(poly) == 1:
        return np.linalg.norm(points - poly[0], axis=1)
    best = np.full(len(points), np.inf)
    for a, b in zip(poly[:-1], poly[1:]):
        ab = b - a
        L2 = float(ab @ ab)
        s = np.clip(((points - a) @ ab) / L2, 0.0, 1.0) if L2 > 0 else np.zeros(len(points))
        d = np.linalg.norm(points - (a + s[:, None] * ab), axis=1)
        np.minimum(best, d, out=best)
    return best


def branch_distance(traj: Trajectory, branch: CriticalBranch, unstable_only=True):
    cols = [traj.coords.index(c) for c in branch.coords]
    pts = traj.states[:, cols]
    runs = branch.unstable_runs() if unstable_only else [branch.states]
    if not runs:
        return np.full(len(pts), np.inf)
    out = np.full(len(pts), np.inf)
    for run in runs:
        if branch.line is not None and len(run) > 1:
            run = run[[0, -1]]
        np.minimum(out, _polyline_distance(pts, run), out=out)
    return out


def _cross_time(t0, t1, d0, d1, level):
    if d1 == d0:
        return t0
    return t0 + (level - d0) / (d1 - d0) * (t1 - t0)


def measure_delays(traj: Trajectory, branch: CriticalBranch, delta: float = 0.05):
    """Maximal intervals during which the orbit stays within ``delta`` of the
    unstable part of ``branch``.

    Interval ends are placed where the sampled distance, interpolated
    linearly, crosses ``delta``. Intervals cut by the ends of the trajectory
    are returned with ``complete=False``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    d = branch_distance(traj, branch)
    t = traj.t
    inside = d < delta
    records = []
    n = len(t)
    i = 0
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        complete = i > 0 and j < n - 1
        t_in = _cross_time(t[i - 1], t[i], d[i - 1], d[i], delta) if i > 0 else t[i]
        t_out = _cross_time(t[j], t[j + 1], d[j], d[j + 1], delta) if j < n - 1 else t[j]
        if t_out > t_in:
            records.append(DelayRecord(len(records), float(t_in), float(t_out),
                                       branch.label, float(delta), complete))
        i = j + 1
    return records


# ---------------------------------------------------- transitions

def numeric_transition_map(system, entry_state, sigma_out: Section,
                           config: IntegratorConfig, sigma_in: Optional[Section] = None):
    """Integrate from an entry point until the first crossing of ``sigma_out``.

    Raises
    ------
    EntryNotInSectionError
        If ``sigma_in`` is given and does not contain ``entry_state``.
    NoExitError
        On divergence, or when ``config.max_time`` elapses first.
    """
    entry = np.asarray(entry_state, dtype=float)
    if sigma_in is not None and not sigma_in.contains(entry):
        raise EntryNotInSectionError(f"entry {entry} is not on the entry section")
    meta = {"step": config.step, "system": system.name}
    if sigma_out.contains(entry):
        return TransitionRecord(tuple(entry), tuple(entry), 0.0, "simulation", meta)
    stop = replace(sigma_out, terminal=1)
    try:
        _, events = integrate(system, entry, config, [stop])
    except DivergenceError as exc:
        raise NoExitError(f"orbit diverged at t={exc.last_time:g} before the exit section") from exc
    except IntegrationError as exc:
        raise NoExitError(f"integration failed before the exit section: {exc}") from exc
    if not events:
        raise NoExitError(f"no exit within t={config.max_time:g}")
    ev = events[0]
    return TransitionRecord(tuple(entry), tuple(ev.state), ev.time - config.t0,
                            "simulation", meta)


def asymptote_distance(traj: Trajectory):
    """``|x(t) - y(t)|`` along a trajectory (``|r|`` in exterior coordinates)."""
    if "r" in traj.coords:
        return np.abs(traj["r"])
    return np.abs(traj["x"] - traj["y"])


def winding_angle(traj: Trajectory, center, axes=(0, 1)):
    """Accumulated angle of the orbit around ``center`` in the plane of ``axes``."""
    c = np.asarray(center, dtype=float)
    u = traj.states[:, axes[0]] - c[0]
    v = traj.states[:, axes[1]] - c[1]
    ang = np.unwrap(np.arctan2(v, u))
    return float(ang[-1] - ang[0]) if len(ang) else 0.0


def count_oscillations(traj: Trajectory, center, axes=(0, 1)):
    """Number of full turns around ``center``: ``floor(|angle| / 2 pi)``."""
    return int(math.floor(abs(winding_angle(traj, center, axes)) / (2.0 * math.pi) + 1e-12))


# ---------------------------------------------------- serialisation

def branches_to_csv(branches, fh=None):
    """CSV with columns ``branch,x,y,z,classification``; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "x", "y", "z", "classification"])
    for br in branches:
        for pt in br.points:
            vals = [f"{v:.17g}" for v in pt.state[:3]] + [""] * (3 - min(3, len(pt.state)))
            w.writerow([br.label, *vals, pt.classification])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def bifurcations_to_json(points, **extra):
    return json.dumps({"bifurcations": [p.as_dict() for p in points], **extra}, indent=2)
