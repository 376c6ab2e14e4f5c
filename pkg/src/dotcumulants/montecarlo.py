"""Monte Carlo sampling of transmission eigenvalues and proper delay times,
unbiased cumulant estimation (k-statistics), and the five-cumulant Edgeworth
density.

Randomness: numpy's PCG64 seeded through SeedSequence.  Batches are drawn in
fixed-size sub-batches whose seeds are spawned from the master seed, so the
same (seed, params, count) always produces byte-identical values and merging
is order-independent.

The tridiagonal sampler constructions are validated against the exact
low-order cumulants in the test suite; a failed match there is a sampler bug
by definition, so the degree-of-freedom maps below carry no authority of
their own.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import (
    EnvelopeFailureError,
    InsufficientSamplesError,
    InvalidCountError,
    InvalidVarianceError,
)
from .params import DelayParams, TransportParams

_SUBBATCH = 1 << 14


@dataclass(frozen=True)
class SampleBatch:
    statistic: str  # "G", "P" or "tauW"
    params: object
    seed: int
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False

    @property
    def count(self):
        return len(self.values)


class JacobiSample(NamedTuple):
    g: SampleBatch
    p: SampleBatch


def _rng_stream(seed):
    """Unbounded deterministic stream of independent generators: child i is
    PCG64 seeded by SeedSequence(seed, spawn_key=(i,)), so a sampler may
    consume as many sub-batches as it needs while staying reproducible."""
    i = 0
    while True:
        yield np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        i += 1


def _subbatch_rngs(seed, count):
    out = []
    done = 0
    stream = _rng_stream(seed)
    while done < count:
        c = min(_SUBBATCH, count - done)
        out.append((next(stream), c))
        done += c
    return out


def _thread_count():
    try:
        return max(1, int(os.environ.get("DOTCUMULANTS_THREADS", "1")))
    except ValueError:
        return 1


def _fill_subbatches(seed, count, out_arrays, worker):
    """Run ``worker(rng, chunk)`` per sub-batch and scatter the results into
    preallocated arrays.  Each sub-batch owns an independent generator, so
    the output is identical whatever the thread count."""
    jobs = []
    pos = 0
    for rng, c in _subbatch_rngs(seed, count):
        jobs.append((rng, c, pos))
        pos += c

    def run(job):
        rng, c, offset = job
        results = worker(rng, c)
        for target, values in zip(out_arrays, results):
            target[offset : offset + c] = values

    threads = _thread_count()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, jobs))
    else:
        for job in jobs:
            run(job)


# -- Wigner delay time -------------------------------------------------------------


def sample_delay_times(p: DelayParams, count, seed) -> SampleBatch:
    """Draws of the Wigner delay time via the inverse spectrum.

    With x = 1/tau the jpdf is Laguerre-type with weight exponent
    omega = beta*n/2 and rate beta*n/2; rescaling to rate 1/2 gives the
    bidiagonal chi-squared factorization with degrees of freedom
    2a - beta*(i-1) on the diagonal (2a = 2*omega + 2 + beta*(n-1)) and
    beta*(n-i) below it.  Then tauW = beta * trace((B B^T)^{-1}), computed
    from the closed form of the inverse's Frobenius norm.
    """
    if count < 1:
        raise InvalidCountError("count must be >= 1")
    if not p.has_default_b:
        raise InvalidCountError("sampler is defined for the default weight exponent")
    beta, n = p.beta, p.n
    two_a = beta * n + 2 + beta * (n - 1)
    diag_df = np.array([two_a - beta * (i - 1) for i in range(1, n + 1)], dtype=float)
    sub_df = np.array([beta * (n - i) for i in range(1, n)], dtype=float)
    out = np.empty(count)

    def worker(rng, c):
        d2 = rng.chisquare(diag_df, size=(c, n))
        e2 = rng.chisquare(sub_df, size=(c, n - 1)) if n > 1 else np.zeros((c, 0))
        # trace((B B^T)^{-1}) = sum_j c_j / d_j^2 with the backward recursion
        # c_j = 1 + (e_j^2 / d_{j+1}^2) c_{j+1}
        acc = np.ones(c)
        trace = np.ones(c) / d2[:, n - 1]
        for j in range(n - 2, -1, -1):
            acc = 1.0 + (e2[:, j] / d2[:, j + 1]) * acc
            trace += acc / d2[:, j]
        return (beta * trace,)

    _fill_subbatches(seed, count, (out,), worker)
    return SampleBatch(statistic="tauW", params=p, seed=seed, values=out)


# -- transmission eigenvalues -------------------------------------------------------


def _sample_rejection(p: TransportParams, count, seed):
    """Exact rejection against the product-Beta envelope (small n): propose
    i.i.d. Beta(alpha+1, delta/2+1) and accept with probability
    prod |T_k - T_j|^beta <= 1."""
    a = float(p.alpha) + 1.0
    b = float(p.delta) / 2.0 + 1.0
    n = p.n
    got_g, got_p = [], []
    remaining = count
    attempts = 0
    for rng in _rng_stream(seed):
        T = rng.beta(a, b, size=(_SUBBATCH, n))
        accept_prob = np.ones(_SUBBATCH)
        for i in range(n):
            for j in range(i + 1, n):
                accept_prob *= np.abs(T[:, i] - T[:, j]) ** p.beta
        keep = rng.random(_SUBBATCH) < accept_prob
        attempts += _SUBBATCH
        Tk = T[keep][:remaining]
        got_g.append(Tk.sum(axis=1))
        got_p.append((Tk * (1.0 - Tk)).sum(axis=1))
        remaining -= len(Tk)
        if remaining <= 0:
            break
        if attempts >= (1 << 22) and (count - remaining) / attempts < 1e-6:
            raise EnvelopeFailureError(
                f"rejection acceptance rate below 1e-6 after {attempts} proposals"
            )
    return np.concatenate(got_g), np.concatenate(got_p)


@lru_cache(maxsize=64)
def _chain_beta_parameters(beta, alpha_str, delta_str, n):
    """Beta-distribution parameters of the canonical-moment chain whose
    tridiagonal matrix has the transport ensemble as its spectrum.

    Odd positions (j = 1..n):    Beta((n-j) b/2 + a + 1, (n-j) b/2 + d + 1)
    Even positions (j = 1..n-1): Beta((n-j) b/2, (n-j-1) b/2 + a + d + 2)
    with a = alpha, d = delta/2.  Validated against exact kappa_1, kappa_2.
    """
    a = float(Fraction(alpha_str))
    d = float(Fraction(delta_str)) / 2.0
    out = []
    for pos in range(1, 2 * n):
        if pos % 2 == 1:
            j = (pos + 1) // 2
            out.append(((n - j) * beta / 2.0 + a + 1.0, (n - j) * beta / 2.0 + d + 1.0))
        else:
            j = pos // 2
            out.append(((n - j) * beta / 2.0, (n - j - 1) * beta / 2.0 + a + d + 2.0))
    return tuple(out)


def _sample_chain(p: TransportParams, count, seed):
    """Tridiagonal construction for larger n: independent Beta canonical
    moments feed the chain zeta_j = (1 - p_{j-1}) p_j, and the statistics
    come from traces of the Jacobi matrix (no eigendecomposition needed):
    G = tr J, sum T^2 = tr J^2."""
    n = p.n
    params = _chain_beta_parameters(p.beta, str(p.alpha), str(p.delta), n)
    G = np.empty(count)
    T2 = np.empty(count)

    def worker(rng, c):
        u = np.empty((c, 2 * n - 1))
        for idx, (s, t) in enumerate(params):
            u[:, idx] = rng.beta(s, t, size=c)
        zeta = np.empty((c, 2 * n - 1))
        zeta[:, 0] = u[:, 0]
        for idx in range(1, 2 * n - 1):
            zeta[:, idx] = (1.0 - u[:, idx - 1]) * u[:, idx]
        # diagonal entries a_k = zeta_{2k-2} + zeta_{2k-1} (zeta_0 := 0),
        # squared off-diagonal entries b_k^2 = zeta_{2k-1} zeta_{2k}
        diag = np.empty((c, n))
        diag[:, 0] = zeta[:, 0]
        for k in range(2, n + 1):
            diag[:, k - 1] = zeta[:, 2 * k - 3] + zeta[:, 2 * k - 2]
        off2 = np.empty((c, n - 1))
        for k in range(1, n):
            off2[:, k - 1] = zeta[:, 2 * k - 2] * zeta[:, 2 * k - 1]
        return diag.sum(axis=1), (diag**2).sum(axis=1) + 2.0 * off2.sum(axis=1)

    _fill_subbatches(seed, count, (G, T2), worker)
    return G, G - T2


def sample_jacobi_spectrum(p: TransportParams, count, seed) -> JacobiSample:
    """Batches of (G, P): exact rejection sampling for n <= 4, the validated
    tridiagonal chain construction for larger n."""
    if count < 1:
        raise InvalidCountError("count must be >= 1")
    if p.n <= 4:
        g, pp = _sample_rejection(p, count, seed)
    else:
        g, pp = _sample_chain(p, count, seed)
    return JacobiSample(
        g=SampleBatch(statistic="G", params=p, seed=seed, values=g),
        p=SampleBatch(statistic="P", params=p, seed=seed, values=pp),
    )


# -- k-statistics --------------------------------------------------------------------


def _integer_partitions(r):
    if r == 0:
        yield ()
        return
    def rec(rest, largest):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, largest), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail
    yield from rec(r, r)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _falling(N, p):
    out = Fraction(1)
    for t in range(p):
        out *= N - t
    return out


@lru_cache(maxsize=None)
def kstat_coefficients(N, r):
    """Coefficients c_lambda with k_r = sum_lambda c_lambda prod_i S_{lambda_i}
    (S_a = power sums), solved exactly from the unbiasedness requirement
    E[k_r] = kappa_r for an i.i.d. sample of size N.

    Both sides are expanded in the population raw moments: E[prod S_{a_i}]
    = sum over set partitions of the index multiset of falling(N, blocks)
    times a product of raw moments, and kappa_r is the Moebius expansion
    over set partitions of {1..r}.  Equating coefficients per raw-moment
    partition gives a square exact linear system.
    """
    lambdas = list(_integer_partitions(r))
    targets = {lam: Fraction(0) for lam in lambdas}
    for part in _set_partitions(list(range(r))):
        key = tuple(sorted((len(b) for b in part), reverse=True))
        p = len(part)
        targets[key] += Fraction((-1) ** (p - 1) * math.factorial(p - 1))
    rows = {}
    for lam in lambdas:
        row = {t: Fraction(0) for t in lambdas}
        for part in _set_partitions(list(range(len(lam)))):
            key = tuple(
                sorted((sum(lam[i] for i in block) for block in part), reverse=True)
            )
            row[key] += _falling(N, len(part))
        rows[lam] = row
    # exact Gaussian elimination on the (lambda x target-partition) system
    mat = [[rows[lam][t] for lam in lambdas] + [targets[t]] for t in lambdas]
    m = len(lambdas)
    for col in range(m):
        piv = next(i for i in range(col, m) if mat[i][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for i in range(m):
            if i != col and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[col])]
    return {lam: mat[i][m] for i, lam in enumerate(lambdas)}


def _kstats_from_power_sums(S, N, max_order):
    out = []
    for r in range(1, max_order + 1):
        coeffs = kstat_coefficients(N, r)
        val = np.zeros_like(np.asarray(S[1], dtype=float) * 0.0)
        for lam, c in coeffs.items():
            term = float(c) * np.ones_like(val)
            for a in lam:
                term = term * S[a]
            val = val + term
        out.append(val)
    return out


def estimate_cumulants(batch: SampleBatch, max_order=5):
    """Unbiased k-statistics k_1..k_max_order with jackknife standard errors."""
    if max_order > 5:
        raise InsufficientSamplesError("k-statistics implemented through order 5")
    x = np.asarray(batch.values, dtype=float)
    N = len(x)
    if N <= max_order:
        raise InsufficientSamplesError("need more samples than the max order")
    powers = [None] + [x**a for a in range(1, max_order + 1)]
    S = [None] + [float(powers[a].sum()) for a in range(1, max_order + 1)]
    full = _kstats_from_power_sums(
        [None] + [np.array(S[a]) for a in range(1, max_order + 1)], N, max_order
    )
    # delete-one jackknife from the same power sums
    S_loo = [None] + [S[a] - powers[a] for a in range(1, max_order + 1)]
    loo = _kstats_from_power_sums(S_loo, N - 1, max_order)
    results = []
    for r in range(1, max_order + 1):
        k_full = float(full[r - 1])
        k_loo = loo[r - 1]
        se = math.sqrt((N - 1) / N * float(((k_loo - k_loo.mean()) ** 2).sum()))
        results.append((k_full, se))
    return results


# -- Edgeworth density ----------------------------------------------------------------


def _hermite_e(degree, u):
    coeffs = [0.0] * degree + [1.0]
    return np.polynomial.hermite_e.hermeval(u, coeffs)


def edgeworth_density(K, x_grid):
    """Five-cumulant Edgeworth density on the caller's grid, in original units.

    Standard term grouping through the third correction order: with
    g3 = K3/K2^{3/2}, g4 = K4/K2^2, g5 = K5/K2^{5/2}, the standardized
    density is phi(u) [1 + g3 He3/6 + (g4 He4/24 + g3^2 He6/72)
    + (g5 He5/120 + g3 g4 He7/144 + g3^3 He9/1296)].
    """
    K = list(K) + [0.0] * (5 - len(K))
    mean, var = float(K[0]), float(K[1])
    if var <= 0:
        raise InvalidVarianceError("K_2 must be positive")
    sd = math.sqrt(var)
    g3 = float(K[2]) / sd**3
    g4 = float(K[3]) / sd**4
    g5 = float(K[4]) / sd**5
    u = (np.asarray(x_grid, dtype=float) - mean) / sd
    phi = np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    series = (
        1.0
        + g3 * _hermite_e(3, u) / 6.0
        + g4 * _hermite_e(4, u) / 24.0
        + g3 * g3 * _hermite_e(6, u) / 72.0
        + g5 * _hermite_e(5, u) / 120.0
        + g3 * g4 * _hermite_e(7, u) / 144.0
        + g3**3 * _hermite_e(9, u) / 1296.0
    )
    return phi * series / sd
