"""Exact finite-n cumulants of the Landauer conductance.

The cumulants satisfy a differential-difference recurrence: for beta=2 it
closes at a single dimension, while for beta in {1,4} the right-hand side
couples dimension n to n +/- i(beta) through "reduced moments" (exponential
Bell transforms of second differences across the dimension lattice).  We
evaluate the lattice at concrete shifted integer dimensions with memoization
rather than doing symbolic rational-function-of-n arithmetic: simpler, exact,
and the asymptotics come from the separate limiting recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ensembles import (
    b_constant,
    transport_coupling_beta1,
    transport_coupling_beta4,
)
from .errors import InvalidOrderError, PoleError, UnsupportedBetaError
from .params import TransportParams
from .rational import rat


def _raw_coupling(beta, alpha, delta, n):
    """b_n as a rational function of n, evaluated at any integer dimension
    (lattice points can sit below the physical range n >= 1)."""
    if beta == 2 or n == 0:
        return rat(0)
    if beta == 1:
        return transport_coupling_beta1(alpha, delta, n)
    return transport_coupling_beta4(alpha, delta, n)


@dataclass(frozen=True)
class CumulantSequence:
    """kappa_1..kappa_L of the conductance, with lattice provenance."""

    params: TransportParams
    values: tuple
    lattice_radius: int
    extended_validity: bool

    def __getitem__(self, order):
        if not 1 <= order <= len(self.values):
            raise InvalidOrderError(f"cumulant order {order} not computed")
        return self.values[order - 1]

    @property
    def max_order(self):
        return len(self.values)


@dataclass(frozen=True)
class ReducedSequence:
    """Second differences r_l across the lattice and their Bell transform mu_l."""

    r_values: tuple
    mu_values: tuple  # mu_0..mu_L with mu_0 = 1


def conductance_initial(p: TransportParams):
    """The closed-form first three cumulants (kappa_1, kappa_2, kappa_3)."""
    k = _initial_three(p.beta, p.alpha, p.delta, p.n)
    return k[0], k[1], k[2]


def _initial_three(beta, alpha, delta, n):
    a, d = rat(alpha), rat(delta)
    s = a + d / 2

    den1 = s + 2 + beta * (n - 1)
    if den1 == 0:
        raise PoleError("kappa_1 denominator vanishes")
    k1 = n * (a + 1 + rat(beta * (n - 1), 2)) / den1

    if n == 1:
        # The trailing factors of kappa_2 coincide at n=1 and cancel, as do
        # the (s + 2 - beta) factor of kappa_3's numerator and the
        # (s + 2 + beta(n-2)) factor of its denominator; cancelling keeps the
        # formulas finite where the raw ratio would read 0/0.
        den2 = (s + 2) ** 2 * (s + 3)
        if den2 == 0:
            raise PoleError("kappa_2 denominator vanishes")
        k2 = rat(1, 4) * (2 * a + 2) * (d + 2) / den2
        den3 = (s + 2) * (s + 4)
        if den3 == 0:
            raise PoleError("kappa_3 denominator vanishes")
        k3 = 2 * k2 * (d / 2 - a) / den3
        return (k1, k2, k3)

    den2a = (s + 2 + beta * (n - 1)) ** 2 * (s + 3 + beta * (n - 1))
    den2b = 2 * a + d + 4 + beta * (2 * n - 3)
    if den2a == 0 or den2b == 0:
        raise PoleError("kappa_2 denominator vanishes")
    k2 = (
        rat(1, 4)
        * n
        * (2 * a + 2 + beta * (n - 1))
        * (d + 2 + beta * (n - 1))
        / den2a
        * (d + 2 * a + 4 + beta * (n - 2))
        / den2b
    )

    # kappa_3 in fully factored form: the raw coefficient reads
    # delta/2 - alpha + 2 beta kappa_1 - beta n, which equals
    # (delta/2 - alpha)(s + 2 - beta) / (s + 2 + beta(n-1)).
    den3 = (
        (s + 2 + beta * (n - 1))
        * (s + 4 + beta * (n - 1))
        * (s + 2 + beta * (n - 2))
    )
    if den3 == 0:
        raise PoleError("kappa_3 denominator vanishes")
    k3 = 2 * k2 * (d / 2 - a) * (s + 2 - beta) / den3
    return (k1, k2, k3)


def _coeff_A(beta, alpha, delta, n, l, eta, chi):
    s = rat(alpha) + rat(delta) / 2
    t = s + beta * n
    return (
        eta * l * (l - 1) * (l - 2)
        + beta * l * (2 * l - 1)
        - (6 - 3 * beta) * (t + 2 - beta) * l
        - t * (t + 2 - beta) * (l + 1)
    )


def _coeff_B(l, i, chi):
    li = l - i
    return (2 - chi) * li * (li * (6 * i - 2) + 3) + (chi - 1) * li * li * (6 * i + 2)


class ConductanceEngine:
    """Memoized cumulant computation across the dimension lattice for a fixed
    (beta, alpha, delta).  Single-threaded per instance; finished sequences
    are immutable and freely shareable."""

    def __init__(self, beta, alpha, delta):
        self.beta = beta
        self.alpha = rat(alpha)
        self.delta = rat(delta)
        self._kappa = {}  # dimension -> [kappa_1, kappa_2, ...]
        self._radius = 0
        self._center = None
        self._max_radius = None

    def _note_visit(self, n):
        if self._center is None:
            return
        step = 2 if self.beta == 1 else 1
        r = abs(n - self._center) // step
        if self._max_radius is not None and r > self._max_radius:
            raise AssertionError(
                f"lattice visit at dimension {n} exceeds radius bound {self._max_radius}"
            )
        self._radius = max(self._radius, r)

    def kappas(self, n, order):
        """kappa_1..kappa_order at dimension n (n=0 yields an empty sum: all zero)."""
        if order < 1:
            return []
        if n == 0:
            return [rat(0)] * order
        self._note_visit(n)
        cached = self._kappa.get(n, None)
        if cached is None:
            cached = list(_initial_three(self.beta, self.alpha, self.delta, n))
            self._kappa[n] = cached
        while len(cached) < order:
            self._extend(n, cached)
        return cached[:order]

    def _extend(self, n, kappa):
        beta = self.beta
        l = len(kappa)  # recurrence index producing kappa_{l+1}
        eta = 4 if beta == 4 else 1
        chi = 2 if beta == 2 else 1
        A = _coeff_A(beta, self.alpha, self.delta, n, l, eta, chi)
        if A == 0:
            raise PoleError(f"leading coefficient vanishes at order {l} (n={n})")
        bn = _raw_coupling(beta, self.alpha, self.delta, n)
        rhs = rat(0)
        if bn != 0:
            mu = self.reduced_moments(n, l - 3)
            rhs = (12 * bn / beta) * l * (l - 1) * (l - 2) * mu[l - 3]
        quad = rat(0)
        for i in range(l):
            ki = kappa[i]  # kappa_{i+1}
            klm = kappa[l - i - 1]  # kappa_{l-i}
            if ki != 0 and klm != 0:
                quad += math.comb(l, i) * _coeff_B(l, i, chi) * ki * klm
        value = (
            rhs
            + l * (2 * l - 1) * (self.alpha - self.delta / 2 + beta * n) * kappa[l - 1]
            + l * (l - 1) * (l - 2) * kappa[l - 2]
            - eta * quad
        )
        kappa.append(value / A)

    def reduced_cumulants(self, n, order):
        """r_l = kappa_l(n-i) + kappa_l(n+i) - 2*kappa_l(n), l = 1..order."""
        if order < 1:
            return []
        step = 2 if self.beta == 1 else 1
        minus = self.kappas(n - step, order)
        plus = self.kappas(n + step, order)
        here = self.kappas(n, order)
        return [minus[j] + plus[j] - 2 * here[j] for j in range(order)]

    def reduced_moments(self, n, order):
        """mu_0..mu_order via the Bell recurrence on the reduced cumulants."""
        r = self.reduced_cumulants(n, order)
        return bell_transform(r, order)


def bell_transform(r, order):
    """mu_0..mu_order from r_1..r_order via
    mu_l = sum_j C(l-1, j) r_{l-j} mu_j, the coefficient form of mu = exp(r)
    as exponential generating functions."""
    mu = [rat(1)]
    for l in range(1, order + 1):
        acc = rat(0)
        for j in range(l):
            rv = r[l - j - 1]
            if rv != 0 and mu[j] != 0:
                acc += math.comb(l - 1, j) * rv * mu[j]
        mu.append(acc)
    return mu


def conductance_cumulants(p: TransportParams, max_order) -> CumulantSequence:
    """kappa_1..kappa_L exactly, engaging the dimension lattice when beta != 2."""
    if max_order < 1:
        raise InvalidOrderError("max_order must be >= 1")
    engine = ConductanceEngine(p.beta, p.alpha, p.delta)
    engine._center = p.n
    if p.beta != 2:
        # order l consumes reduced data to order l-3; each recursion level
        # drops the needed order, so this radius is a safe ceiling.
        engine._max_radius = (max(max_order - 3, 0) + 2) // 3 + 1
    values = tuple(engine.kappas(p.n, max_order))
    return CumulantSequence(
        params=p,
        values=values,
        lattice_radius=engine._radius,
        extended_validity=p.extended_validity,
    )


def reduced_moments(p: TransportParams, max_order, provider=None) -> ReducedSequence:
    """Reduced cumulants r_1..r_L and moments mu_0..mu_L at dimension n.

    ``provider`` maps (dimension, order) -> [kappa_1..kappa_order]; the default
    is the exact recurrence engine.  Only meaningful for beta in {1,4}.
    """
    if p.beta == 2:
        raise UnsupportedBetaError("beta=2 has no dimension lattice")
    step = p.i_shift
    if provider is None:
        engine = ConductanceEngine(p.beta, p.alpha, p.delta)
        provider = engine.kappas
    minus = provider(p.n - step, max_order)
    plus = provider(p.n + step, max_order)
    here = provider(p.n, max_order)
    r = [minus[j] + plus[j] - 2 * here[j] for j in range(max_order)]
    mu = bell_transform(r, max_order)
    return ReducedSequence(r_values=tuple(r), mu_values=tuple(mu))


def fourth_cumulant_closed(p: TransportParams):
    """Closed-form kappa_4 for beta in {1,2}; must match the recurrence exactly."""
    a, d, n = p.alpha, p.delta, p.n
    k1, k2, k3 = conductance_initial(p)
    if p.beta == 1:
        bn = b_constant(p)
        den = (a + d / 2 + n + 4) * (4 * a + 2 * d + 4 * n - 3)
        if den == 0:
            raise PoleError("kappa_4 denominator vanishes")
        return 3 * (
            -2 * k2 + 10 * k1 * k3 + 22 * k2 * k2
            + 5 * k3 * (d / 2 - a - n) - 24 * bn
        ) / den
    if p.beta == 2:
        den = (a + d / 2 + 2 * n) ** 2 - 9
        if den == 0:
            raise PoleError("kappa_4 denominator vanishes")
        return rat(3, 4) * (
            -2 * k2 + 20 * k1 * k3 + 32 * k2 * k2 + 5 * k3 * (d / 2 - a - 2 * n)
        ) / den
    raise UnsupportedBetaError("no closed kappa_4 for beta=4; use the recurrence")
