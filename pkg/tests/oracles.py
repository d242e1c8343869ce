"""
Independent reference implementations used by the tests.

Nothing here imports from ``qwq``. Each oracle takes the slow, obvious route:
full dense matrices, explicit path enumeration, scipy's bounded scalar
minimizer, scipy's eigensolver.
"""

from __future__ import annotations

import itertools
from math import comb, log

import numpy as np
from scipy import linalg, optimize, special, stats

LN2 = log(2.0)


def coin_matrix(alpha, beta, theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [np.exp(1j * alpha) * c, np.exp(-1j * beta) * s],
            [np.exp(1j * beta) * s, -np.exp(-1j * alpha) * c],
        ]
    )


def coin_vector(eta, gamma):
    return np.array([np.cos(eta), np.exp(1j * gamma) * np.sin(eta)])


# ---------------------------------------------------------------------------
# dense walks


def line_walk_dense(U, phi, tau, kraus=None):
    """Joint density matrix on positions -tau..tau (coin-major) after tau steps."""
    m = 2 * tau + 1
    right = np.eye(m, k=-1)  # |x+1><x|
    left = np.eye(m, k=1)
    P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    shift = np.kron(P0, right) + np.kron(P1, left)
    W = shift @ np.kron(U, np.eye(m))
    kraus = [np.eye(2)] if kraus is None else kraus
    lifted = [W @ np.kron(K, np.eye(m)) for K in kraus]
    psi = np.kron(phi, np.eye(m)[tau])
    rho = np.outer(psi, psi.conj())
    for _ in range(tau):
        rho = sum(A @ rho @ A.conj().T for A in lifted)
    return rho


def loop_walk_dense(U, phi, n, k, r, tau, kraus=None, start=1):
    """Joint density matrices on sites 1..n+1 for steps 1..tau (list)."""
    m = n + 1
    right = np.zeros((m, m))
    left = np.zeros((m, m))
    for s in range(1, n + 1):
        right[s % n, s - 1] = 1.0  # s -> s+1, n -> 1
        left[(s - 2) % n, s - 1] = 1.0  # s -> s-1, 1 -> n
    right[n, n] = left[n, n] = 1.0
    P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    W = (np.kron(P0, right) + np.kron(P1, left)) @ np.kron(U, np.eye(m))
    keep = np.eye(m)
    keep[k - 1, k - 1] = np.sqrt(1 - r)
    leak = np.zeros((m, m))
    leak[n, k - 1] = np.sqrt(r)
    sink = [np.kron(np.eye(2), keep), np.kron(np.eye(2), leak)]
    kraus = [np.eye(2)] if kraus is None else kraus
    lifted = [W @ np.kron(K, np.eye(m)) for K in kraus]
    psi = np.kron(phi, np.eye(m)[start - 1])
    rho = np.outer(psi, psi.conj())
    out = []
    for _ in range(tau):
        rho = sum(A @ rho @ A.conj().T for A in lifted)
        rho = sum(S @ rho @ S.conj().T for S in sink)
        out.append(rho)
    return out


def walker_density(rho_joint):
    m = rho_joint.shape[0] // 2
    return rho_joint[:m, :m] + rho_joint[m:, m:]


def unital_decay(q):
    return [np.sqrt(q) * np.diag([1.0, 0.0]), np.sqrt(q) * np.diag([0.0, 1.0]), np.sqrt(1 - q) * np.eye(2)]


# ---------------------------------------------------------------------------
# closed form


def r_matrix_paths(U, tau, n_plus):
    """R_{N+} as the explicit sum over projector strings of length tau-1."""
    P = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    out = np.zeros((2, 2), dtype=complex)
    for ks in itertools.product((0, 1), repeat=tau - 1):
        if ks.count(0) != n_plus:
            continue
        M = U.copy()
        for kk in ks:
            M = U @ P[kk] @ M
        out += M
    return out


def compositions_brute(n_balls, n_boxes):
    if n_boxes == 0:
        return int(n_balls == 0)
    return sum(
        1 for parts in itertools.product(range(1, n_balls + 1), repeat=n_boxes) if sum(parts) == n_balls
    )


def hyp2f1_series(a, b, c, z):
    """Direct Pochhammer sum, enough terms for a terminating series."""
    total = 0.0
    for j in range(0, 60):
        total += special.poch(a, j) * special.poch(b, j) / (special.poch(c, j) * special.factorial(j)) * z**j
    return total


# ---------------------------------------------------------------------------
# information measures


def kl_bits(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    if np.any((p > 0) & (q == 0)):
        return np.inf
    return float(np.sum(special.rel_entr(p, q)) / LN2)


def entropy_bits(p):
    return float(stats.entropy(np.asarray(p, float), base=2))


def vn_entropy_bits(rho):
    w = linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def binomial_on(support, tau, p):
    k = (np.asarray(support) + tau) / 2
    return stats.binom.pmf(k, tau, p)


def q_line_numeric(probs, support, tau):
    """Q by scipy's bounded minimizer plus a dense scan for the bracket."""

    def f(p):
        return kl_bits(probs, binomial_on(support, tau, p))

    grid = np.linspace(0, 1, 2001)
    vals = np.array([f(p) for p in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if vals[i] <= res.fun:
        return float(vals[i]), float(grid[i])
    return float(res.fun), float(res.x)


def loop_classical(p, n, k, r, tau, start=1):
    """Classical loop law after tau steps by explicit dictionary bookkeeping."""
    dist = {s: 0.0 for s in range(1, n + 2)}
    dist[start] = 1.0
    for _ in range(tau):
        new = {s: 0.0 for s in range(1, n + 2)}
        new[n + 1] += dist[n + 1]
        for s in range(1, n + 1):
            new[s % n + 1] += p * dist[s]
            new[(s - 2) % n + 1] += (1 - p) * dist[s]
        moved = new[k] * r
        new[k] -= moved
        new[n + 1] += moved
        dist = new
    return np.array([dist[s] for s in range(1, n + 2)])


def binomial_moments(p, tau):
    return tau * (2 * p - 1), 4 * tau * p * (1 - p)


def composition_formula(n_balls, n_boxes):
    return comb(n_balls - 1, n_boxes - 1) if n_boxes >= 1 and n_balls >= n_boxes else 0
