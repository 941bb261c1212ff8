"""
Closed-form results of the untyped, undirected fitness model with uniform
activities: isolation probability, expected N and M, and the (N, M) curve
traced by varying N_P.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from errors import ConsistencyError, DomainError, ParameterError

CF_MAX_ITER = 10000
CF_EPS = 1e-15
TINY = 1e-300


@dataclass(frozen=True)
class TheoryPoint:
    n_p: int
    expected_n: float
    expected_m: float
    q0: float


def beta_function(x, y):
    """Complete beta function B(x, y) through log-gamma."""
    if x <= 0 or y <= 0:
        raise DomainError(f"Beta function needs x, y > 0, got ({x}, {y}).")
    return math.exp(special.betaln(x, y))


def _beta_continued_fraction(x, y, z):
    """Modified Lentz evaluation of the incomplete-beta continued fraction; None if it does not converge."""
    qab = x + y
    qap = x + 1.0
    qam = x - 1.0
    c = 1.0
    d = 1.0 - qab * z / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (y - m) * z / ((qam + m2) * (x + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c

        aa = -(x + m) * (qab + m) * z / ((x + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            return h
    return None


def _regularized_tail(x, y, z):
    """I_z(x, y) by the continued fraction for z below the convergence threshold."""
    log_front = x * math.log(z) + y * math.log1p(-z) - special.betaln(x, y)
    if log_front < -745.0:
        return 0.0
    fraction = _beta_continued_fraction(x, y, z)
    if fraction is None:
        return None
    return math.exp(log_front) * fraction / x


def incomplete_beta(z, x, y):
    """
    Incomplete beta function B_z(x, y) = integral_0^z t^(x-1) (1-t)^(y-1) dt.

    Uses the continued fraction, with the symmetry I_z(x, y) = 1 - I_(1-z)(y, x)
    when z > (x + 1) / (x + y + 2); falls back to adaptive quadrature when the
    fraction does not converge.

    Args:
        z (float): Upper limit, 0 < z <= 1.
        x (float): First shape, > 0.
        y (float): Second shape, > 0.

    Returns:
        float: B_z(x, y).

    Raises:
        DomainError: On arguments outside the domain.
    """
    if not 0 < z <= 1 or x <= 0 or y <= 0:
        raise DomainError(f"incomplete_beta needs 0 < z <= 1 and x, y > 0, got z={z}, x={x}, y={y}.")
    complete = beta_function(x, y)
    if z == 1:
        return complete

    if z < (x + 1.0) / (x + y + 2.0):
        regularized = _regularized_tail(x, y, z)
    else:
        upper = _regularized_tail(y, x, 1.0 - z)
        regularized = None if upper is None else 1.0 - upper

    if regularized is None:
        value, _ = integrate.quad(lambda t: t ** (x - 1.0) * (1.0 - t) ** (y - 1.0), 0.0, z,
                                  epsabs=1e-12, epsrel=1e-12, limit=500)
        return value
    return regularized * complete


def _check_inputs(n_p, alpha):
    if int(n_p) != n_p or n_p < 1:
        raise DomainError(f"n_p must be a positive integer, got {n_p}.")
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}.")


def isolation_probability(n_p, alpha):
    """
    Probability q0 that a bank ends the day without edges.

    q0 = (1/alpha) (alpha+1)^(1/alpha) [B(N_P, 1/alpha) - B_(1 - 1/(alpha+1))(N_P, 1/alpha)]

    Args:
        n_p (int): Potential market size, >= 1.
        alpha (float): Kernel exponent, >= 1.

    Returns:
        float: q0 in [0, 1].
    """
    _check_inputs(n_p, alpha)
    y = 1.0 / alpha
    z = 1.0 - 1.0 / (alpha + 1.0)
    prefactor = y * (alpha + 1.0) ** y
    value = prefactor * (beta_function(n_p, y) - incomplete_beta(z, n_p, y))
    if value < -1e-12 or value > 1.0 + 1e-12:
        raise ConsistencyError(f"Isolation probability {value} outside [0, 1] for n_p={n_p}, alpha={alpha}.")
    return min(max(value, 0.0), 1.0)


def expected_n_m(n_p, alpha):
    """
    Expected active banks and edges of the untyped model.

    N = (1 - q0) N_P and M = N_P (N_P - 1) / (2 (alpha + 1)^2), the second using
    <(a_i a_j)^alpha> = (alpha + 1)^-2 for uniform activities.

    Returns:
        TheoryPoint: The expectation at ``n_p``.
    """
    q0 = isolation_probability(n_p, alpha)
    expected_m = n_p * (n_p - 1) / 2.0 / (alpha + 1.0) ** 2
    return TheoryPoint(n_p=int(n_p), expected_n=(1.0 - q0) * n_p, expected_m=expected_m, q0=q0)


def theoretical_scaling_curve(n_p_grid, alpha):
    """Map expected_n_m over a grid; output ordered by n_p."""
    grid = sorted({int(n) for n in n_p_grid})
    if not grid:
        raise ParameterError("Theory grid is empty.")
    return [expected_n_m(n, alpha) for n in grid]


def curve_slope(points):
    """
    Log-log least-squares slope of expected M against expected N.

    Points with zero N or M are skipped.

    Raises:
        ParameterError: If fewer than two usable points remain.
    """
    usable = [(p.expected_n, p.expected_m) for p in points if p.expected_n > 0 and p.expected_m > 0]
    if len(usable) < 2:
        raise ParameterError("Need at least two points with N, M > 0 to measure a slope.")
    log_n, log_m = np.log(np.array(usable)).T
    slope, _ = np.polyfit(log_n, log_m, 1)
    return float(slope)
