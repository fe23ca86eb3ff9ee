"""Generalized Pareto maximum-likelihood kernels.

Grimshaw (1993) reduces the two-parameter GPD likelihood to a scalar
equation: with ``theta = shape/scale`` and excesses ``y``, the stationary
points of the profile log-likelihood solve ``w(theta) = 0`` where

    w(theta) = (1 + mean(log1p(theta*y))) * mean(1/(1 + theta*y)) - 1.

Candidate roots are bracketed on ``(-1/max(y), 0)`` (bounded-tail side) and
``(0, 2*(mean(y)-min(y))/min(y)^2)`` (heavy-tail side), bisected, and the
best candidate is kept by profile likelihood; the exponential limit
(shape 0, scale mean(y)) always competes. Everything runs on excesses
normalized to unit mean, which makes the bracketing margins scale-free.
"""

import numpy as np

from ._accel import jit

# grid sizes for the bracketing scans
_N_LEFT = 64
_N_RIGHT = 96
_BISECT_ITERS = 90
_GOLDEN_ITERS = 70


@jit
def _candidate(y, theta):
    """(w, gamma, profile log-likelihood) at one theta.

    Assumes 1 + theta*y > 0 for all y; gamma is the profile-optimal shape
    and gamma/theta the matching scale.
    """
    n = y.size
    s = theta * y
    gamma = np.mean(np.log1p(s))
    v = np.mean(1.0 / (1.0 + s))
    w = (1.0 + gamma) * v - 1.0
    sigma = gamma / theta
    if sigma <= 0.0 or not np.isfinite(sigma):
        return w, gamma, -np.inf
    ll = -n * np.log(sigma) - (1.0 + gamma) * n
    return w, gamma, ll


@jit
def _bisect(y, ta, wa, tb):
    """Root of w on a sign-changing bracket [ta, tb]."""
    for _ in range(_BISECT_ITERS):
        tm = 0.5 * (ta + tb)
        wm, _, _ = _candidate(y, tm)
        if wm == 0.0:
            return tm
        if (wm > 0.0) == (wa > 0.0):
            ta = tm
            wa = wm
        else:
            tb = tm
    return 0.5 * (ta + tb)


@jit
def _golden_max(y, a, b):
    """Golden-section maximizer of the profile likelihood on [a, b]."""
    gr = 0.6180339887498949
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    _, _, fc = _candidate(y, c)
    _, _, fd = _candidate(y, d)
    for _ in range(_GOLDEN_ITERS):
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - gr * (b - a)
            _, _, fc = _candidate(y, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + gr * (b - a)
            _, _, fd = _candidate(y, d)
    return 0.5 * (a + b)


@jit
def _scan(y, grid, best_gamma, best_sigma, best_ll):
    """Scan a theta grid: bisect every sign change of w, golden-refine the
    best grid point, and fold the winners into the running best candidate."""
    m = grid.size
    prev_t = grid[0]
    prev_w, g0, l0 = _candidate(y, prev_t)
    if l0 > best_ll:
        best_ll = l0
        best_gamma = g0
        best_sigma = g0 / prev_t
    best_k = 0
    best_grid_ll = l0
    for k in range(1, m):
        t = grid[k]
        w, g, ll = _candidate(y, t)
        if ll > best_ll:
            best_ll = ll
            best_gamma = g
            best_sigma = g / t
        if ll > best_grid_ll:
            best_grid_ll = ll
            best_k = k
        if (w > 0.0) != (prev_w > 0.0):
            root = _bisect(y, prev_t, prev_w, t)
            _, gr_, lr = _candidate(y, root)
            if lr > best_ll:
                best_ll = lr
                best_gamma = gr_
                best_sigma = gr_ / root
        prev_t = t
        prev_w = w
    lo = grid[best_k - 1] if best_k > 0 else grid[0]
    hi = grid[best_k + 1] if best_k < m - 1 else grid[m - 1]
    if hi > lo:
        t = _golden_max(y, lo, hi)
        _, g, ll = _candidate(y, t)
        if ll > best_ll:
            best_ll = ll
            best_gamma = g
            best_sigma = g / t
    return best_gamma, best_sigma, best_ll


@jit
def grimshaw_fit(y):
    """GPD MLE on positive excesses ``y`` with unit mean.

    Returns ``(gamma, sigma, log_likelihood)``; the caller rescales sigma
    back to the original units.
    """
    n = y.size
    ymin = y.min()
    ymax = y.max()

    # exponential limit: gamma -> 0, scale = mean = 1
    best_gamma = 0.0
    best_sigma = 1.0
    best_ll = -float(n)

    # bounded-tail side: theta in (-1/ymax, 0)
    theta_min = -1.0 / ymax
    lo = theta_min * (1.0 - 1e-9)
    hi = -1e-10
    left = np.linspace(lo, hi, _N_LEFT)
    best_gamma, best_sigma, best_ll = _scan(y, left, best_gamma, best_sigma, best_ll)

    # heavy-tail side: theta in (0, 2*(mean-ymin)/ymin^2), mean == 1
    theta_hi = 2.0 * (1.0 - ymin) / (ymin * ymin)
    if not np.isfinite(theta_hi) or theta_hi <= 0.0:
        theta_hi = 1e12
    theta_hi = min(theta_hi, 1e12)
    right = 10.0 ** np.linspace(-8.0, np.log10(theta_hi), _N_RIGHT)
    best_gamma, best_sigma, best_ll = _scan(y, right, best_gamma, best_sigma, best_ll)

    return best_gamma, best_sigma, best_ll
