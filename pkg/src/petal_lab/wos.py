"""Walk-on-spheres estimators for log conformal radii.

Walks are grouped in fixed-size chunks; chunk k draws from the generator
seeded by (seed, k), so results do not depend on how chunks are scheduled
across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DomainError
from .hypgeo import MCEstimate, conf_radius, green

CHUNK = 4096
DEFAULT_SHELL = 1e-6
DEFAULT_STEP_CAP = 10**6


def _walk_chunk(domain, w: complex, n: int, eps: float, rng, step_cap: int):
    pos = np.full(n, w, dtype=complex)
    exits = np.full(n, np.nan + 0j)
    active = np.arange(n)
    steps = 0
    while active.size and steps < step_cap:
        d, nearest = domain.boundary_query(pos[active])
        d = np.atleast_1d(d)
        nearest = np.atleast_1d(nearest)
        fin = d < eps
        exits[active[fin]] = nearest[fin]
        active = active[~fin]
        d = d[~fin]
        theta = rng.uniform(0.0, 2.0 * math.pi, active.size)
        pos[active] += d * np.exp(1j * theta)
        steps += 1
    ok = np.ones(n, dtype=bool)
    ok[active] = False
    return exits, ok


def wos_exit_points(domain, w: complex, walks: int, *, shell_epsilon: float = DEFAULT_SHELL,
                    rng_seed: int = 0, step_cap: int = DEFAULT_STEP_CAP, threads: int = 1):
    """Sample approximate Brownian exit points of ``domain`` started at ``w``.

    Returns (exit_points, ok) where ok marks walks that terminated within
    the step cap.
    """
    w = complex(w)
    if not bool(domain.contains(w)):
        raise DomainError("start point outside domain")
    if walks < 1:
        raise ValueError("need at least one walk")
    sizes = [CHUNK] * (walks // CHUNK)
    if walks % CHUNK:
        sizes.append(walks % CHUNK)

    entropy = [int(v) for v in np.atleast_1d(rng_seed)]

    def run(k):
        rng = np.random.default_rng(np.random.SeedSequence(entropy + [k]))
        return _walk_chunk(domain, w, sizes[k], shell_epsilon, rng, step_cap)

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    exits = np.concatenate([p[0] for p in parts])
    ok = np.concatenate([p[1] for p in parts])
    return exits, ok


def _estimate(scores, ok, eps) -> MCEstimate:
    good = scores[ok]
    n = good.size
    if n == 0:
        return MCEstimate(math.nan, math.inf, 1, eps, int((~ok).sum()))
    se = float(good.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MCEstimate(float(good.mean()), se, n, eps, int((~ok).sum()))


def wos_log_conf_radius(domain, w: complex, walks: int = 100_000, shell_epsilon: float = DEFAULT_SHELL,
                        rng_seed: int = 0, *, step_cap: int = DEFAULT_STEP_CAP,
                        threads: int = 1) -> MCEstimate:
    """Estimate log R(w, domain) as the mean of log|exit - w|."""
    exits, ok = wos_exit_points(domain, w, walks, shell_epsilon=shell_epsilon, rng_seed=rng_seed,
                                step_cap=step_cap, threads=threads)
    scores = np.full(exits.shape, np.nan)
    scores[ok] = np.log(np.abs(exits[ok] - w))
    return _estimate(scores, ok, shell_epsilon)


def outer_green_scores(outer, exits, w: complex, shell_epsilon: float):
    """G_outer(x, w) at exit points x; zero for points on the boundary of ``outer``."""
    exits = np.asarray(exits, dtype=complex)
    d, _ = outer.boundary_query(exits)
    d = np.atleast_1d(d)
    inside = np.asarray(outer.contains(exits)) & (d > shell_epsilon)
    out = np.zeros(exits.shape)
    if inside.any():
        out[inside] = np.asarray(green(outer, exits[inside], w))
    return out


def wos_log_ratio_to_outer(domain, outer, w: complex, walks: int = 100_000,
                           shell_epsilon: float = DEFAULT_SHELL, rng_seed: int = 0, *,
                           step_cap: int = DEFAULT_STEP_CAP, threads: int = 1) -> MCEstimate:
    """Estimate log R(w, outer)/R(w, domain) for ``domain`` inside an explicitly mapped ``outer``.

    By the strong Markov property this ratio is the expected value of
    G_outer(X, w) at the exit point X of Brownian motion from ``domain``.
    The score vanishes wherever the boundaries coincide, so the variance is
    far smaller than that of log|X - w|.
    """
    exits, ok = wos_exit_points(domain, w, walks, shell_epsilon=shell_epsilon, rng_seed=rng_seed,
                                step_cap=step_cap, threads=threads)
    scores = np.full(exits.shape, np.nan)
    scores[ok] = outer_green_scores(outer, exits[ok], w, shell_epsilon)
    return _estimate(scores, ok, shell_epsilon)


def wos_log_conf_radius_via_outer(domain, outer, w: complex, walks: int = 100_000,
                                  shell_epsilon: float = DEFAULT_SHELL, rng_seed: int = 0,
                                  **kw) -> MCEstimate:
    """log R(w, domain) as the exact log R(w, outer) minus the scored ratio."""
    r = wos_log_ratio_to_outer(domain, outer, w, walks, shell_epsilon, rng_seed, **kw)
    base = math.log(float(conf_radius(outer, w)))
    return MCEstimate(base - r.mean, r.std_error, r.walks, r.shell_epsilon, r.discarded)
