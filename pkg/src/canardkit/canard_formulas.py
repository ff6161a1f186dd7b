"""Closed-form transition times and exit values near a transcritical saddle.

The local normal form ``X' = 2(b-1)X - 2XY``, ``Y' = -eps Y`` has the exact
orbit ``X(t) = X0 exp[2(b-1)t + (2 delta/eps)(exp(-eps t) - 1)]``,
``Y(t) = delta exp(-eps t)``. Entering at ``X0 = C exp(-k/eps)`` on
``Y = delta``, the time ``T`` to reach ``X = eta`` solves

    2(b-1)T + (2 delta/eps) exp(-eps T) = k/eps + ln(eta/C) + 2 delta/eps,

whose physical (larger) root is written with the principal Lambert branch:

    T = W0(z)/eps + R/(2(b-1)),   R = k/eps + ln(eta/C) + 2 delta/eps,
    z = -(delta/(b-1)) exp(-eps R/(2(b-1))).

Using ``W0(z) exp(W0(z)) = z`` the exit value collapses to
``Y(T) = -(b-1) W0(z)``, an order-one quantity however long ``T`` is.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, EntryNotInSectionError
from .numerics import find_root, lambert_w0


@dataclass(frozen=True)
class EntryParams:
    """Entry ``X0 = C exp(-k/eps)`` on the section ``Y = delta``."""

    C: float
    k: float

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise DomainError(f"C must be positive, got {self.C!r}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"k must be positive, got {self.k!r}")

    def x0(self, epsilon):
        return self.C * math.exp(-self.k / epsilon)


@dataclass(frozen=True)
class TransitionSetup:
    """Sections ``Y = delta`` (entry) and ``X = eta`` (exit) of the normal form.

    ``eta`` is meant to be small; this is not enforced.
    """

    b: float
    delta: float
    eta: float
    epsilon: float

    def __post_init__(self):
        if not self.b > 1:
            raise DomainError(f"b must exceed 1, got {self.b!r}")
        if not 0 < self.delta <= self.b - 1:
            raise DomainError(f"need 0 < delta <= b-1 = {self.b - 1:g}, got {self.delta!r}")
        if not self.eta > 0:
            raise DomainError(f"eta must be positive, got {self.eta!r}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")

    def with_epsilon(self, epsilon):
        return TransitionSetup(self.b, self.delta, self.eta, epsilon)


def _check_slow_level(a, b, Ybar):
    if not (a > 1 and b > 1):
        raise DomainError(f"a and b must exceed 1, got a={a!r}, b={b!r}")
    if not b - 1 < Ybar < a + b:
        raise DomainError(f"need b-1 < Ybar < a+b, got Ybar={Ybar!r}")


def entry_params(a, b, Ybar) -> EntryParams:
    """Prefactor and exponent of the entry value, in closed form.

    ``C = (b-1)^(2(b-1)/(a+b)) (a+1)^(2(a+1)/(a+b))`` and
    ``k = 2/(a+b) [(b-1) ln Ybar + (a+1) ln(a+b-Ybar)]``.

    The closed-form ``k`` is negative for admissible ``Ybar`` close to ``a+b``,
    where ``ln(a+b-Ybar)`` dominates; such inputs raise :class:`DomainError`.
    :func:`entry_contraction` gives an exponent that is always positive.
    """
    _check_slow_level(a, b, Ybar)
    s = a + b
    C = (b - 1.0) ** (2.0 * (b - 1.0) / s) * (a + 1.0) ** (2.0 * (a + 1.0) / s)
    k = 2.0 / s * ((b - 1.0) * math.log(Ybar) + (a + 1.0) * math.log(s - Ybar))
    if not k > 0:
        raise DomainError(
            f"the closed-form exponent is not positive at a={a:g}, b={b:g}, Ybar={Ybar:g} (k={k:g})")
    return EntryParams(C, k)


def entry_contraction(a, b, Ybar) -> float:
    """Contraction exponent accumulated along ``X = 0`` from ``Ybar`` to ``b-1``.

    Integrating the linearised fast rate ``2(b-1-Y)`` against the slow flow
    ``Y' = -eps Y (a+b-Y)`` gives ``ln X = -k/eps`` with

        k = 2/(a+b) [(b-1) ln((b-1)/Ybar) + (a+1) ln((a+1)/(a+b-Ybar))].

    The bracket is convex in ``Ybar`` with a double zero at ``b-1``, so
    ``k > 0`` on the whole admissible interval. It equals ``ln C - k`` for
    the closed-form pair.
    """
    _check_slow_level(a, b, Ybar)
    s = a + b
    return 2.0 / s * ((b - 1.0) * math.log((b - 1.0) / Ybar)
                      + (a + 1.0) * math.log((a + 1.0) / (s - Ybar)))


def approach_time_leading(Ybar, a, b, epsilon) -> float:
    """Leading-order slow time from ``Y = Ybar`` down to ``Y = b-1``.

    ``Ybar = b-1`` is accepted and gives zero.
    """
    if Ybar != b - 1.0:
        _check_slow_level(a, b, Ybar)
    elif not (a > 1 and b > 1):
        raise DomainError(f"a and b must exceed 1, got a={a!r}, b={b!r}")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return math.log((a + 1.0) * Ybar / ((b - 1.0) * (a + b - Ybar))) / (epsilon * (a + b))


def _rhs_level(setup: TransitionSetup, entry: EntryParams) -> float:
    """``R = k/eps + ln(eta/C) + 2 delta/eps``; raises if the entry misses the section."""
    eps = setup.epsilon
    gap = entry.k / eps + math.log(setup.eta / entry.C)
    if gap < 0:
        raise EntryNotInSectionError(
            f"entry X0 = C exp(-k/eps) exceeds eta; need eps < {-entry.k / math.log(setup.eta / entry.C):g}")
    return gap + 2.0 * setup.delta / eps


def _lambert_argument(setup, exponent):
    z = -(setup.delta / (setup.b - 1.0)) * math.exp(-exponent / (2.0 * (setup.b - 1.0)))
    if z < -1.0 / math.e - 1e-15:
        raise DomainError(f"Lambert argument {z!r} is below -1/e")
    return max(z, -1.0 / math.e)


def transition_time_exact(setup: TransitionSetup, entry: EntryParams) -> float:
    """Exact passage time from ``(C exp(-k/eps), delta)`` to ``X = eta``.

    Raises
    ------
    EntryNotInSectionError
        When ``C exp(-k/eps) > eta``.
    """
    R = _rhs_level(setup, entry)
    eps = setup.epsilon
    z = _lambert_argument(setup, eps * R)
    return lambert_w0(z) / eps + R / (2.0 * (setup.b - 1.0))


def exit_value_exact(setup: TransitionSetup, entry: EntryParams) -> float:
    """``Y`` on arrival at ``X = eta``: ``delta exp(-W0(z) - eps R/(2(b-1)))``."""
    R = _rhs_level(setup, entry)
    eps = setup.epsilon
    z = _lambert_argument(setup, eps * R)
    return setup.delta * math.exp(-lambert_w0(z) - eps * R / (2.0 * (setup.b - 1.0)))


def _leading_argument(setup, k):
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")
    c = (2.0 * setup.delta + k) / (2.0 * (setup.b - 1.0))
    return _lambert_argument(setup, 2.0 * setup.delta + k), c


def transition_time_leading(setup: TransitionSetup, k: float) -> float:
    """Order ``1/eps`` part of the passage time: ``[W0(z0) + (2 delta + k)/(2(b-1))]/eps``."""
    z0, c = _leading_argument(setup, k)
    return (lambert_w0(z0) + c) / setup.epsilon


def exit_value_leading(setup: TransitionSetup, k: float) -> float:
    """Order-one exit value ``delta exp[-W0(z0) - (2 delta + k)/(2(b-1))]``."""
    z0, c = _leading_argument(setup, k)
    return setup.delta * math.exp(-lambert_w0(z0) - c)


def implicit_transition_residual(T, setup: TransitionSetup, entry: EntryParams) -> float:
    """Left minus right side of the passage-time equation."""
    eps = setup.epsilon
    lhs = 2.0 * (setup.b - 1.0) * T + (2.0 * setup.delta / eps) * math.exp(-eps * T)
    rhs = entry.k / eps + math.log(setup.eta / entry.C) + 2.0 * setup.delta / eps
    return lhs - rhs


def residual_bracket(setup: TransitionSetup, entry: EntryParams):
    """Bracket ``[T_min, T_max]`` on which the residual is increasing and changes sign.

    ``T_min = ln(delta/(b-1))/eps`` is where the derivative
    ``2(b-1) - 2 delta exp(-eps T)`` vanishes (it is ``<= 0``); the upper end
    starts at ``4(k + 2 delta)/(2(b-1) eps)`` and doubles until the residual
    is non-negative.
    """
    eps = setup.epsilon
    _rhs_level(setup, entry)
    t_min = math.log(setup.delta / (setup.b - 1.0)) / eps
    t_max = 4.0 * (entry.k + 2.0 * setup.delta) / (2.0 * (setup.b - 1.0) * eps)
    for _ in range(200):
        if implicit_transition_residual(t_max, setup, entry) >= 0:
            break
        t_max *= 2.0
    return t_min, t_max


def transition_time_root(setup: TransitionSetup, entry: EntryParams, rtol: float = 1e-13) -> float:
    """Passage time as the root of :func:`implicit_transition_residual`.

    Independent of the Lambert function; used to validate the branch choice.
    """
    eps = setup.epsilon
    lo, hi = residual_bracket(setup, entry)

    def g(T):
        return implicit_transition_residual(T, setup, entry)

    def dg(T):
        return 2.0 * (setup.b - 1.0) - 2.0 * setup.delta * math.exp(-eps * T)

    scale = entry.k / eps + 2.0 * setup.delta / eps
    return find_root(g, (lo, hi), tol=rtol * scale, dg=dg)


def exit_value_eta_derivative(setup: TransitionSetup, entry: EntryParams) -> float:
    """``d Y_out / d eta = eps W0 / (2 eta (1 + W0))``; vanishes linearly in ``eps``."""
    R = _rhs_level(setup, entry)
    w = lambert_w0(_lambert_argument(setup, setup.epsilon * R))
    if w == -1.0:
        return math.inf
    return setup.epsilon * w / (2.0 * setup.eta * (1.0 + w))


# ------------------------------------------------------------ tritrophic

def tritrophic_setup(params, delta, eta, eps=None) -> TransitionSetup:
    """Normal-form setup matching the superpredator passage near ``(1, 0, 0)``.

    With ``Y = a2 w / 2`` and the time-scale ``eps d2`` the local flow is the
    normal form with ``2(b-1) = G'`` and entry level ``a2 delta / 2``.
    """
    eps = params.epsilon if eps is None else eps
    return TransitionSetup(b=1.0 + 0.5 * params.G_prime, delta=0.5 * params.a2 * delta,
                           eta=eta, epsilon=eps * params.d2)


def tritrophic_recovery(params, delta, k2, eps=None):
    """Leading-order predator recovery through ``(1, 0, 0)``.

    Entry ``v0 ~ exp(-k2/eps)`` on ``w = delta``. Returns
    ``(T_leading, u_out_factor, w_out_leading)`` where

        T       = [W0(z) + (a2 delta + k2 d2)/G'] / (eps d2)
        u_factor = exp[-W0(z) - (a2 delta + k2 d2)/(d2 G')]
        w_out   = delta exp[-W0(z) - (a2 delta + k2 d2)/G']
        z       = -(a2 delta/G') exp[-(a2 delta + k2 d2)/G'].

    ``u_out ~ u0 * u_factor``. ``G'`` is used in every exponent, and the
    ``w_out`` exponent carries no ``1/d2`` factor, which is what the
    normal-form reduction gives; the two coincide when ``d2 = 1``.

    Raises
    ------
    DomainError
        If ``delta`` is not in ``(0, z_T)`` or ``k2 <= 0``.
    """
    eps = params.epsilon if eps is None else eps
    Gp = params.G_prime
    if not Gp > 0:
        raise DomainError("G' must be positive")
    zT = Gp / params.a2
    if not 0 < delta < zT:
        raise DomainError(f"need 0 < delta < z_T = {zT:g}, got {delta!r}")
    if not (k2 > 0 and eps > 0):
        raise DomainError("k2 and eps must be positive")
    c = (params.a2 * delta + k2 * params.d2) / Gp
    z = -(params.a2 * delta / Gp) * math.exp(-c)
    w = lambert_w0(max(z, -1.0 / math.e))
    T = (w + c) / (eps * params.d2)
    u_factor = math.exp(-w - c / params.d2)
    w_out = delta * math.exp(-w - c)
    return T, u_factor, w_out
