"""Vector fields, closed-form solutions and parameter records.

Every field is available in two forms: a compiled in-place ``rhs(t, u, p, du)``
consumed by :func:`canardkit.numerics.integrate`, and a convenience
``vf_*(state, params) -> ndarray`` for direct evaluation.

Alternative coordinates
-----------------------
The strip ``|x| < 1`` of the double transcritical systems is exactly
conjugate, through ``x = tanh(s)``, to a system in which the invariant lines
``x = +-1`` sit at ``s = +-inf``. Orbits approach those lines to within
``exp(-k/eps)``, far below the double-precision spacing near ``|x| = 1``, so
raw coordinates eventually snap onto the lines. The ``"strip"`` and
``"compact"`` coordinate systems keep that information in ``s`` (and ``q``
for ``y = (a-b)/2 + (a+b)/2 tanh(q)``) without changing the dynamics.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import AssumptionError, BlowUpError, ConfigError, DomainError
from .numerics import Trajectory, adaptive_simpson


def _positive(name, value):
    if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive real, got {value!r}")


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class Transcritical1dParams:
    epsilon: float = 0.1

    def __post_init__(self):
        _positive("epsilon", self.epsilon)

    def vector(self):
        return np.array([self.epsilon])


@dataclass(frozen=True)
class DtcParams:
    epsilon: float = 0.1

    def __post_init__(self):
        _positive("epsilon", self.epsilon)

    def vector(self):
        return np.array([self.epsilon])


@dataclass(frozen=True)
class DtcpParams:
    """Strip system driven by the first Rossler coordinate.

    The Rossler initial data is a free choice; ``(1, 1, 1)`` is the default.
    """

    epsilon: float = 0.5
    alpha: float = 1e-4
    rossler: tuple = (0.1, 0.1, 14.0)
    rossler_init: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        _positive("epsilon", self.epsilon)
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha!r}")
        if len(self.rossler) != 3 or len(self.rossler_init) != 3:
            raise ValueError("rossler and rossler_init need three entries")
        object.__setattr__(self, "rossler", tuple(float(v) for v in self.rossler))
        object.__setattr__(self, "rossler_init", tuple(float(v) for v in self.rossler_init))

    def vector(self):
        return np.array([self.epsilon, self.alpha, *self.rossler])


@dataclass(frozen=True)
class DtcbbParams:
    epsilon: float = 0.5
    a: float = 5.0
    b: float = 2.0

    def __post_init__(self):
        _positive("epsilon", self.epsilon)
        if not (self.a > 1 and self.b > 1):
            raise ValueError(f"a and b must exceed 1, got a={self.a!r}, b={self.b!r}")

    def vector(self):
        return np.array([self.epsilon, self.a, self.b])


@dataclass(frozen=True)
class DtcbnlParams:
    """Local normal form near the saddle; ``delta`` is not a field parameter."""

    b: float = 2.0
    epsilon: float = 0.1

    def __post_init__(self):
        _positive("epsilon", self.epsilon)
        if not self.b > 1:
            raise ValueError(f"b must exceed 1, got {self.b!r}")

    def vector(self):
        return np.array([self.b, self.epsilon])


@dataclass(frozen=True)
class TritrophicParams:
    """Dimensionless prey / predator / superpredator parameters.

    The constructor only checks positivity; :meth:`check_assumptions`
    enforces ``G > 0`` and ``d2 < a2 / b2``.
    """

    a1: float = 0.8
    b1: float = 4.0
    d1: float = 0.1
    a2: float = 42.0
    b2: float = 40.0
    d2: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        for name in ("a1", "b1", "d1", "a2", "b2", "d2", "epsilon"):
            _positive(name, getattr(self, name))

    def vector(self):
        return np.array([self.a1, self.b1, self.d1, self.a2, self.b2, self.d2, self.epsilon])

    @property
    def G(self):
        return self.a1 - self.d1 * (1.0 + self.b1)

    @property
    def G_prime(self):
        return self.G / (1.0 + self.b1)

    def check_assumptions(self):
        if not self.G > 0:
            raise AssumptionError(
                f"G = a1 - d1(1+b1) must be positive, got {self.G:g}")
        if not self.d2 < self.a2 / self.b2:
            raise AssumptionError(
                f"the plane dz/dt = 0 needs d2 < a2/b2, got d2={self.d2:g}")
        return self


@dataclass(frozen=True)
class TritrophicOriginalParams:
    R: float = 1.0
    K: float = 1.0
    A1: float = 1.0
    B1: float = 1.0
    D1: float = 0.1
    E1: float = 1.0
    A2: float = 1.0
    B2: float = 1.0
    D2: float = 0.1
    E2: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        for k, v in asdict(self).items():
            _positive(k, v)


TABLE_PARAMS = TritrophicParams()


# ------------------------------------------------------- compiled fields

@njit(cache=True, error_model="numpy")
def rhs_transcritical1d(t, u, p, du):
    x, y = u[0], u[1]
    du[0] = -y * x + x * x
    du[1] = -p[0]


@njit(cache=True, error_model="numpy")
def rhs_dtc(t, u, p, du):
    x, y = u[0], u[1]
    du[0] = (1.0 - x * x) * (x - y)
    du[1] = p[0] * x


@njit(cache=True, error_model="numpy")
def rhs_dtc_strip(t, u, p, du):
    # x = tanh(s)
    th = np.tanh(u[0])
    du[0] = th - u[1]
    du[1] = p[0] * th


@njit(cache=True, error_model="numpy")
def rhs_dtc_exterior(t, u, p, du):
    # r = x - y
    r, y = u[0], u[1]
    x = r + y
    du[0] = (1.0 - x * x) * r - p[0] * x
    du[1] = p[0] * x


@njit(cache=True, error_model="numpy")
def rhs_dtcp(t, u, p, du):
    eps, alpha, a, b, c = p[0], p[1], p[2], p[3], p[4]
    x, y, n, w, v = u[0], u[1], u[2], u[3], u[4]
    du[0] = ((1.0 - x * x) * (x - y) + alpha * n) / eps
    du[1] = x
    du[2] = -w - v
    du[3] = n + a * w
    du[4] = b + (n - c) * v


@njit(cache=True, error_model="numpy")
def rhs_dtcbb(t, u, p, du):
    eps, a, b = p[0], p[1], p[2]
    x, y = u[0], u[1]
    du[0] = (1.0 - x * x) * (x - y)
    du[1] = eps * x * (y + b) * (a - y)


@njit(cache=True, error_model="numpy")
def rhs_dtcbb_compact(t, u, p, du):
    # x = tanh(s), y = (a-b)/2 + (a+b)/2 tanh(q)
    eps, a, b = p[0], p[1], p[2]
    half_sum = 0.5 * (a + b)
    th = np.tanh(u[0])
    du[0] = th - (0.5 * (a - b) + half_sum * np.tanh(u[1]))
    du[1] = eps * half_sum * th


@njit(cache=True, error_model="numpy")
def rhs_dtcbb_translated(t, u, p, du):
    eps, a, b = p[0], p[1], p[2]
    X, Y = u[0], u[1]
    du[0] = X * (X - Y + b - 1.0) * (2.0 - X)
    du[1] = eps * Y * (X - 1.0) * (a + b - Y)


@njit(cache=True, error_model="numpy")
def rhs_dtcbnl(t, u, p, du):
    b, eps = p[0], p[1]
    X, Y = u[0], u[1]
    du[0] = 2.0 * (b - 1.0) * X - 2.0 * X * Y
    du[1] = -eps * Y


@njit(cache=True, error_model="numpy")
def rhs_tritrophic(t, u, p, du):
    a1, b1, d1, a2, b2, d2, eps = p[0], p[1], p[2], p[3], p[4], p[5], p[6]
    x, y, z = u[0], u[1], u[2]
    r1 = 1.0 / (1.0 + b1 * x)
    r2 = 1.0 / (1.0 + b2 * y)
    du[0] = x * (1.0 - x - a1 * y * r1)
    du[1] = y * (a1 * x * r1 - d1 - a2 * z * r2)
    du[2] = eps * z * (a2 * y * r2 - d2)


@njit(cache=True, error_model="numpy")
def rhs_tritrophic_local(t, u, p, du):
    a1, b1, d1, a2, d2, eps = p[0], p[1], p[2], p[3], p[5], p[6]
    v, w = u[0], u[1]
    du[0] = v * (a1 / (1.0 + b1) - d1) - a2 * v * w
    du[1] = -eps * d2 * w


def _eval(rhs, state, p, t=0.0):
    u = np.asarray(state, dtype=float)
    du = np.empty_like(u)
    rhs(t, u, p, du)
    return du


def vf_transcritical1d(state, p: Transcritical1dParams):
    return _eval(rhs_transcritical1d, state, p.vector())


def vf_dtc(state, p: DtcParams):
    return _eval(rhs_dtc, state, p.vector())


def vf_dtcp(state, p: DtcpParams):
    """Joint five-dimensional field in the order ``(x, y, n, u, v)``."""
    return _eval(rhs_dtcp, state, p.vector())


def vf_dtcbb(state, p: DtcbbParams):
    return _eval(rhs_dtcbb, state, p.vector())


def vf_dtcbb_translated(state, p: DtcbbParams):
    """Field in the saddle coordinates ``X = x + 1``, ``Y = y + b``."""
    return _eval(rhs_dtcbb_translated, state, p.vector())


def vf_dtcbnl(state, p: DtcbnlParams):
    return _eval(rhs_dtcbnl, state, p.vector())


def vf_tritrophic(state, p: TritrophicParams):
    return _eval(rhs_tritrophic, state, p.vector())


def vf_tritrophic_local(state, p: TritrophicParams):
    """Flow on the attracting manifold near the saddle ``(1, 0, 0)``,
    in the coordinates ``(v, w)``."""
    return _eval(rhs_tritrophic_local, state, p.vector())


def dtcbnl_from_tritrophic(p: TritrophicParams):
    """Normal form matching the tritrophic local flow.

    ``w = 2Y/a2`` and the time-scale ``eps*d2`` turn ``vf_tritrophic_local``
    into ``vf_dtcbnl`` with ``2(b-1) = G'``.
    """
    return DtcbnlParams(b=1.0 + 0.5 * p.G_prime, epsilon=p.epsilon * p.d2)


def vf_tritrophic_original(state, p: TritrophicOriginalParams):
    """Dimensional food-chain field ``d(U, V, W)/dT``."""
    U, V, W = (float(s) for s in state)
    f1 = p.A1 * U / (p.B1 + U)
    f2 = p.A2 * V / (p.B2 + V)
    return np.array([
        U * (p.R * (1.0 - U / p.K) - p.A1 * V / (p.B1 + U)),
        V * (p.E1 * f1 - p.D1 - p.A2 * W / (p.B2 + V)),
        p.epsilon * W * (p.E2 * f2 - p.D2),
    ])


# -------------------------------------------------------------- Jacobians

def jacobian_transcritical1d(state, p: Transcritical1dParams):
    x, y = state[0], state[1]
    return np.array([[2.0 * x - y, -x], [0.0, 0.0]])


def jacobian_dtc(state, p: DtcParams):
    x, y = state[0], state[1]
    return np.array([[-2.0 * x * (x - y) + (1.0 - x * x), -(1.0 - x * x)],
                     [p.epsilon, 0.0]])


def jacobian_dtcbb(state, p: DtcbbParams):
    x, y = state[0], state[1]
    e, a, b = p.epsilon, p.a, p.b
    return np.array([
        [-2.0 * x * (x - y) + (1.0 - x * x), -(1.0 - x * x)],
        [e * (y + b) * (a - y), e * x * (a - b - 2.0 * y)],
    ])


def jacobian_tritrophic(state, p: TritrophicParams):
    x, y, z = state[0], state[1], state[2]
    a1, b1, d1, a2, b2, d2, e = (p.a1, p.b1, p.d1, p.a2, p.b2, p.d2, p.epsilon)
    s1 = 1.0 + b1 * x
    s2 = 1.0 + b2 * y
    return np.array([
        [1.0 - 2.0 * x - a1 * y / s1**2, -a1 * x / s1, 0.0],
        [a1 * y / s1**2, a1 * x / s1 - d1 - a2 * z / s2**2, -a2 * y / s2],
        [0.0, e * z * a2 / s2**2, e * (a2 * y / s2 - d2)],
    ])


def jacobian_dtc_exterior(state, p: DtcParams):
    r, y = state[0], state[1]
    x = r + y
    e = p.epsilon
    return np.array([[-2.0 * x * r + (1.0 - x * x) - e, -2.0 * x * r - e],
                     [e, e]])


# ------------------------------------------------------------- systems

@dataclass(frozen=True, eq=False)
class System:
    """A named autonomous vector field with its metadata.

    ``fast`` and ``slow`` index the state coordinates of the two timescales.
    ``to_physical`` maps integration coordinates back to the original
    coordinates ``physical_coords`` when the two differ.
    """

    name: str
    coords: tuple
    rhs: Callable
    params: object
    fast: tuple = ()
    slow: tuple = ()
    jacobian: Optional[Callable] = None
    invariant_sets: tuple = ()
    physical_coords: Optional[tuple] = None
    to_physical: Optional[Callable] = None
    from_physical: Optional[Callable] = None
    phase_space: str = ""

    @property
    def dim(self):
        return len(self.coords)

    @property
    def param_vector(self):
        return self.params.vector()

    def param_dict(self):
        return params_to_flat(self.name, self.params)

    def field(self, state, t=0.0):
        return _eval(self.rhs, state, self.param_vector, t)

    def jac(self, state):
        if self.jacobian is None:
            return None
        return self.jacobian(np.asarray(state, dtype=float), self.params)

    def physical(self, traj: Trajectory) -> Trajectory:
        if self.to_physical is None:
            return traj
        return traj.mapped(self.to_physical, self.physical_coords)

    def initial(self, physical_state):
        """Integration-coordinate state for a point given in physical coordinates."""
        s = np.asarray(physical_state, dtype=float)
        return s if self.from_physical is None else self.from_physical(s[None, :])[0]


def _strip_to_physical(states):
    out = np.array(states, dtype=float)
    out[:, 0] = np.tanh(out[:, 0])
    return out


def _strip_from_physical(states):
    out = np.array(states, dtype=float)
    if np.any(np.abs(out[:, 0]) >= 1.0):
        raise DomainError("strip coordinates need |x| < 1")
    out[:, 0] = np.arctanh(out[:, 0])
    return out


def _exterior_to_physical(states):
    out = np.array(states, dtype=float)
    out[:, 0] = out[:, 0] + out[:, 1]
    return out


def _exterior_from_physical(states):
    out = np.array(states, dtype=float)
    out[:, 0] = out[:, 0] - out[:, 1]
    return out


def _compact_maps(p: DtcbbParams):
    mid, half = 0.5 * (p.a - p.b), 0.5 * (p.a + p.b)

    def to_phys(states):
        out = np.array(states, dtype=float)
        out[:, 0] = np.tanh(out[:, 0])
        out[:, 1] = mid + half * np.tanh(out[:, 1])
        return out

    def from_phys(states):
        out = np.array(states, dtype=float)
        if np.any(np.abs(out[:, 0]) >= 1.0) or np.any(out[:, 1] <= -p.b) or np.any(out[:, 1] >= p.a):
            raise DomainError("compact coordinates need the open rectangle |x|<1, -b<y<a")
        out[:, 0] = np.arctanh(out[:, 0])
        out[:, 1] = np.arctanh((out[:, 1] - mid) / half)
        return out

    return to_phys, from_phys


def transcritical1d(p: Transcritical1dParams = Transcritical1dParams()):
    return System("transcritical1d", ("x", "y"), rhs_transcritical1d, p,
                  fast=(0,), slow=(1,),
                  jacobian=jacobian_transcritical1d,
                  invariant_sets=("x = 0",))


def dtc(p: DtcParams = DtcParams(), coords: str = "raw"):
    """Double transcritical system in ``raw``, ``strip`` or ``exterior`` coordinates.

    ``exterior`` uses ``r = x - y`` and is meant for the stiff solver.
    """
    inv = ("x = -1", "x = 1")
    if coords == "raw":
        return System("dtc", ("x", "y"), rhs_dtc, p, fast=(0,), slow=(1,),
                      jacobian=jacobian_dtc, invariant_sets=inv)
    if coords == "strip":
        return System("dtc", ("s", "y"), rhs_dtc_strip, p, fast=(0,), slow=(1,),
                      invariant_sets=inv, physical_coords=("x", "y"),
                      to_physical=_strip_to_physical, from_physical=_strip_from_physical,
                      phase_space="|x| < 1")
    if coords == "exterior":
        return System("dtc", ("r", "y"), rhs_dtc_exterior, p, fast=(0,), slow=(1,),
                      jacobian=jacobian_dtc_exterior, invariant_sets=inv,
                      physical_coords=("x", "y"),
                      to_physical=_exterior_to_physical, from_physical=_exterior_from_physical)
    raise ConfigError(f"unknown coordinates {coords!r} for dtc")


def dtcp(p: DtcpParams = DtcpParams()):
    return System("dtcp", ("x", "y", "n", "u", "v"), rhs_dtcp, p,
                  fast=(0,), slow=(1,))


def dtcbb(p: DtcbbParams = DtcbbParams(), coords: str = "raw"):
    inv = ("x = -1", "x = 1", f"y = {-p.b:g}", f"y = {p.a:g}")
    space = f"K = [-1, 1] x [{-p.b:g}, {p.a:g}]"
    if coords == "raw":
        return System("dtcbb", ("x", "y"), rhs_dtcbb, p, fast=(0,), slow=(1,),
                      jacobian=jacobian_dtcbb, invariant_sets=inv, phase_space=space)
    if coords == "compact":
        to_phys, from_phys = _compact_maps(p)
        return System("dtcbb", ("s", "q"), rhs_dtcbb_compact, p, fast=(0,), slow=(1,),
                      invariant_sets=inv, physical_coords=("x", "y"),
                      to_physical=to_phys, from_physical=from_phys, phase_space=space)
    raise ConfigError(f"unknown coordinates {coords!r} for dtcbb")


def dtcbb_translated(p: DtcbbParams = DtcbbParams()):
    return System("dtcbb_translated", ("X", "Y"), rhs_dtcbb_translated, p,
                  fast=(0,), slow=(1,), invariant_sets=("X = 0", "Y = 0", "X = 2"))


def dtcbnl(p: DtcbnlParams = DtcbnlParams()):
    return System("dtcbnl", ("X", "Y"), rhs_dtcbnl, p, fast=(0,), slow=(1,),
                  invariant_sets=("X = 0", "Y = 0"))


def tritrophic(p: TritrophicParams = TABLE_PARAMS):
    return System("tritrophic", ("x", "y", "z"), rhs_tritrophic, p,
                  fast=(0, 1), slow=(2,), jacobian=jacobian_tritrophic,
                  invariant_sets=("x = 0", "y = 0", "z = 0", "Delta = {(1, 0, z)}"),
                  phase_space="non-negative octant")


def tritrophic_local(p: TritrophicParams = TABLE_PARAMS):
    return System("tritrophic_local", ("v", "w"), rhs_tritrophic_local, p,
                  fast=(0,), slow=(1,), invariant_sets=("v = 0", "w = 0"))


# -------------------------------------------------------- closed forms

def bernoulli_exact(t, x0, y0, epsilon, tol=1e-12):
    """Closed-form orbit of the dynamical transcritical bifurcation.

    ``x(t) = x0 exp(-Y(t)) / (1 - x0 * int_0^t exp(-Y(u)) du)`` with
    ``Y(t) = y0 t - eps t^2 / 2``; the integral is computed by adaptive
    Simpson quadrature to ``tol``.

    Raises
    ------
    BlowUpError
        When the denominator is below 1e-12, i.e. at or past the blow-up time.
    """
    t = float(t)

    def Y(s):
        return y0 * s - 0.5 * epsilon * s * s

    y = y0 - epsilon * t
    if x0 == 0.0:
        return 0.0, y
    integral = adaptive_simpson(lambda s: math.exp(-Y(s)), 0.0, t, tol=tol)
    den = 1.0 - x0 * integral
    if den < 1e-12:
        raise BlowUpError(f"finite-time blow-up at or before t={t:g} (denominator {den:.3g})")
    return x0 * math.exp(-Y(t)) / den, y


def bernoulli_exact_series(ts, x0, y0, epsilon, tol=1e-12):
    """:func:`bernoulli_exact` on an increasing time grid, sharing the
    quadrature between consecutive samples."""
    ts = np.asarray(ts, dtype=float)

    def Y(s):
        return y0 * s - 0.5 * epsilon * s * s

    xs = np.empty_like(ts)
    integral, prev = 0.0, 0.0
    for i, t in enumerate(ts):
        integral += adaptive_simpson(lambda s: math.exp(-Y(s)), prev, t,
                                     tol=tol / max(len(ts), 1))
        prev = t
        den = 1.0 - x0 * integral
        if den < 1e-12:
            raise BlowUpError(f"finite-time blow-up near t={t:g}")
        xs[i] = x0 * math.exp(-Y(t)) / den
    return xs, y0 - epsilon * ts


def dtcbnl_exact(t, X0, delta, b, epsilon):
    """Exact orbit of the local normal form from ``(X0, delta)``."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    t = np.asarray(t, dtype=float)
    X = X0 * np.exp(2.0 * (b - 1.0) * t + (2.0 * delta / epsilon) * (np.exp(-epsilon * t) - 1.0))
    Y = delta * np.exp(-epsilon * t)
    if X.ndim == 0:
        return float(X), float(Y)
    return X, Y


# ------------------------------------------------ tritrophic geometry

def z_T(p: TritrophicParams):
    """Slow value of the saddle-node transcritical point ``T = (1, 0, z_T)``."""
    return p.G / (p.a2 * (1.0 + p.b1))


def y_L(x, p: TritrophicParams):
    return (1.0 - x) * (1.0 + p.b1 * x) / p.a1


def z_L(x, p: TritrophicParams):
    s = 1.0 + p.b1 * x
    return ((p.a1 * x - p.d1 * s) * (p.a1 + p.b2 * (1.0 - x) * s)
            / (p.a1 * p.a2 * s))


def x_L_zero(p: TritrophicParams):
    """Abscissa where the fold curve meets ``z = 0``."""
    return p.d1 / (p.a1 - p.b1 * p.d1)


def planar_equilibrium(p: TritrophicParams):
    """Interior equilibrium of the prey-predator face ``z = 0``."""
    G = p.G
    return np.array([p.d1 / (G + p.d1), G / (G + p.d1) ** 2, 0.0])


def eigvec_alpha(p: TritrophicParams):
    """Second component of the unstable eigenvector ``(-1, alpha, 0)`` at ``(1, 0, 0)``."""
    return (p.G + 1.0 + p.b1) / p.a1


def beta_z(Z, p: TritrophicParams):
    """First component of the eigenvector ``(beta(Z), 1)`` of the fast saddle."""
    denom = 1.0 + p.b1 + p.G - p.a2 * Z * (1.0 + p.b1)
    if not denom > 1e-14 * (1.0 + p.b1 + p.G):
        raise DomainError(
            f"beta(Z) requires Z < {(1.0 + p.b1 + p.G) / (p.a2 * (1.0 + p.b1)):g}, got {Z!r}")
    return p.a2 * Z * (1.0 + p.b1) / denom


def separatrix_y(p: TritrophicParams):
    """Height of the plane on which ``dz/dt`` vanishes."""
    return p.d2 / (p.a2 - p.b2 * p.d2)


def dtcbb_saddles(p: DtcbbParams):
    """Corner saddles of ``K`` with their invariant manifolds.

    Each manifold is ``(axis, value)``: the line ``state[axis] == value``.
    The unstable manifold of ``(-1, a)`` lies on ``x = -1``.
    """
    a, b = p.a, p.b
    return [
        {"corner": (-1.0, -b), "stable": (0, -1.0), "unstable": (1, -b)},
        {"corner": (1.0, -b), "stable": (1, -b), "unstable": (0, 1.0)},
        {"corner": (1.0, a), "stable": (0, 1.0), "unstable": (1, a)},
        {"corner": (-1.0, a), "stable": (1, a), "unstable": (0, -1.0)},
    ]


# --------------------------------------------------------- rescaling

def rescale_to_dimensionless(p: TritrophicOriginalParams, state):
    """Map ``(U, V, W, T)`` and the dimensional parameters to ``(x, y, z, t)``."""
    U, V, W, T = (float(s) for s in state)
    q = TritrophicParams(
        a1=p.A1 * p.E1 * p.K / (p.R * p.B1),
        b1=p.K / p.B1,
        d1=p.D1 / p.R,
        a2=p.A2 * p.K * p.E1 * p.E2 / (p.R * p.B2),
        b2=p.K * p.E1 / p.B2,
        d2=p.D2 / p.R,
        epsilon=p.epsilon,
    )
    return q, (U / p.K, V / (p.K * p.E1), W / (p.K * p.E1 * p.E2), p.R * T)


def rescale_to_original(p: TritrophicOriginalParams, state):
    """Inverse of :func:`rescale_to_dimensionless` on the state."""
    x, y, z, t = (float(s) for s in state)
    return (x * p.K, y * p.K * p.E1, z * p.K * p.E1 * p.E2, t / p.R)


# ---------------------------------------------------- config schema

_PARAM_TYPES = {
    "transcritical1d": Transcritical1dParams,
    "dtc": DtcParams,
    "dtcp": DtcpParams,
    "dtcbb": DtcbbParams,
    "dtcbb_translated": DtcbbParams,
    "dtcbnl": DtcbnlParams,
    "tritrophic": TritrophicParams,
    "tritrophic_local": TritrophicParams,
}

_FACTORIES = {
    "transcritical1d": transcritical1d,
    "dtc": dtc,
    "dtcp": dtcp,
    "dtcbb": dtcbb,
    "dtcbb_translated": dtcbb_translated,
    "dtcbnl": dtcbnl,
    "tritrophic": tritrophic,
    "tritrophic_local": tritrophic_local,
}

SYSTEM_NAMES = tuple(_FACTORIES)


def params_to_flat(system: str, p) -> dict:
    """Flat key-value form of a parameter record (``rossler.c``-style keys)."""
    flat = {"system": system}
    for k, v in asdict(p).items():
        if k == "rossler":
            flat.update({"rossler.a": v[0], "rossler.b": v[1], "rossler.c": v[2]})
        elif k == "rossler_init":
            flat.update({"rossler.n0": v[0], "rossler.u0": v[1], "rossler.v0": v[2]})
        else:
            flat[k] = v
    return flat


def params_from_flat(flat: dict):
    """Parameter record from a flat mapping; unknown keys are rejected."""
    system = flat.get("system")
    if system not in _PARAM_TYPES:
        raise ConfigError(f"unknown system {system!r}; expected one of {SYSTEM_NAMES}")
    cls = _PARAM_TYPES[system]
    kwargs, rossler, rinit = {}, {}, {}
    names = set(cls.__dataclass_fields__)
    for key, value in flat.items():
        if key == "system":
            continue
        if key in ("rossler.a", "rossler.b", "rossler.c") and system == "dtcp":
            rossler[key[-1]] = float(value)
        elif key in ("rossler.n0", "rossler.u0", "rossler.v0") and system == "dtcp":
            rinit[key[-2]] = float(value)
        elif key in names and key not in ("rossler", "rossler_init"):
            kwargs[key] = float(value)
        else:
            raise ConfigError(f"unknown parameter {key!r} for system {system!r}")
    if system == "dtcp":
        base = DtcpParams()
        ra = dict(zip("abc", base.rossler), **rossler)
        ri = dict(zip("nuv", base.rossler_init), **rinit)
        kwargs["rossler"] = (ra["a"], ra["b"], ra["c"])
        kwargs["rossler_init"] = (ri["n"], ri["u"], ri["v"])
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def make_system(name: str, params=None, coords: str = "raw") -> System:
    """Build a registered system by name."""
    if name not in _FACTORIES:
        raise ConfigError(f"unknown system {name!r}; expected one of {SYSTEM_NAMES}")
    params = params if params is not None else _PARAM_TYPES[name]()
    if name in ("dtc", "dtcbb"):
        return _FACTORIES[name](params, coords=coords)
    if coords != "raw":
        raise ConfigError(f"system {name!r} has only raw coordinates")
    return _FACTORIES[name](params)
