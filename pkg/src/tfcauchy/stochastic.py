"""Monte Carlo engine for the probabilistic solution representation.

The estimator has two parts: an initial-datum term, the expectation of the
Feynman-Kac weight times phi0 at the subordinate Brownian position run to an
independently drawn inverse-subordinator time, and a source term, a singular
time integral crossed with a subordination integral in which every killed
semigroup evaluation is a path average.  Paths of the subordinate motion are
simulated on an operational-time grid; a jump landing outside the interval
kills the path, which is exactly the exterior condition (no overshoot
correction is attempted, and the induced bias is measured by h-refinement
in the tests).

Reproducibility: paths are organized in fixed-size blocks; block i of a run
draws from a generator seeded with (master_seed, *context, i), and results
are reduced in block order.  The schedule of random draws never depends on
the potential or the data, so two runs that share an RngSpec use identical
paths (common random numbers), making pathwise comparison statements exact.
Worker counts cannot change any output byte.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .bernstein import BernsteinFunction
from .errors import ParameterError, UnsupportedModeError
from .operator import Domain1D
from .solver import ProblemSpec
from .special import inverse_subordinator_density

_PI = np.pi


@dataclass(frozen=True)
class RngSpec:
    """Master seed plus the derivation rule for independent substreams."""

    master_seed: int
    block_size: int = 8192

    def stream(self, *context):
        """Independent generator for a context tuple (point index, block index, ...)."""
        return np.random.default_rng(np.random.SeedSequence((self.master_seed, *context)))


@dataclass
class PathEnsemble:
    """Outcome of killed-path simulation at a common operational horizon."""

    n_paths: int
    h: float
    horizon: float
    exit_flag: np.ndarray
    exit_time: np.ndarray
    terminal_position: np.ndarray
    fk_weight: np.ndarray
    diagnostics: dict = field(default_factory=dict)


@dataclass
class PointEstimate:
    t: float
    x: float
    estimate: float
    stderr: float
    n_paths: int
    h: float
    seed: int
    partial: bool = False
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    h: float = 1e-3
    rng: RngSpec = RngSpec(0)
    n_time_nodes: int = 12        # Gauss-Jacobi nodes for the singular s-integral
    n_subord_nodes: int = 48      # nodes for the subordination weight integral
    max_blocks: int = None        # deterministic budget cap; triggers partial results


# ---------------------------------------------------------------------------
# samplers


def _kanter(alpha, theta, w):
    """Kanter's transformation of U(0,pi) x Exp(1) into a standard positive
    alpha-stable variable (Laplace transform exp(-u^alpha))."""
    log_a = ((alpha / (1.0 - alpha)) * np.log(np.sin(alpha * theta))
             + np.log(np.sin((1.0 - alpha) * theta))
             - (1.0 / (1.0 - alpha)) * np.log(np.sin(theta)))
    return (np.exp(log_a) / w) ** ((1.0 - alpha) / alpha)


def sample_stable_subordinator(alpha, t, rng, size=None):
    """Draws of xi_t with E exp(-u xi_t) = exp(-t u^alpha); self-similar in t."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError("stable subordinator index must lie in (0, 1)")
    if t <= 0:
        raise ParameterError("t must be positive")
    n = 1 if size is None else size
    theta = rng.uniform(0.0, _PI, n)
    w = rng.exponential(1.0, n)
    out = t ** (1.0 / alpha) * _kanter(alpha, theta, w)
    return float(out[0]) if size is None else out


def sample_inverse_subordinator(alpha, t, rng, size=None):
    """Draws of the inverse subordinator via the identity eta_t = (t/xi_1)^alpha."""
    xi = sample_stable_subordinator(alpha, 1.0, rng, size=size if size else 1)
    out = (t / np.asarray(xi)) ** alpha
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# killed subordinate Brownian paths


def _subordinator_index(psi: BernsteinFunction):
    if psi.kind != "fractional":
        raise UnsupportedModeError(
            "path simulation is available for fractional symbols only; "
            f"got {psi.label}")
    return psi.nu / 2.0


def _grid_interpolant(domain: Domain1D, vec):
    """Linear interpolant of a grid vector, zero at and beyond the boundary."""
    xs = np.concatenate(([domain.a], domain.x, [domain.b]))
    vals = np.concatenate(([0.0], np.asarray(vec, dtype=float), [0.0]))
    return lambda p: np.interp(p, xs, vals)


class _StepStats:
    __slots__ = ("jump_abs_sum", "jump_count", "skip_count")

    def __init__(self):
        self.jump_abs_sum = 0.0
        self.jump_count = 0
        self.skip_count = 0


def _advance(pos, alive, logw, step, asub, rng, a, b, v_fn, stats):
    """One operational substep for every path in a block.

    Draws are taken for the whole block regardless of the alive mask so that
    the draw schedule depends only on (block, step index).
    """
    n = len(pos)
    theta = rng.uniform(0.0, _PI, n)
    w = rng.exponential(1.0, n)
    z = rng.normal(0.0, 1.0, n)
    act = alive & (step > 0.0)
    if asub >= 1.0:                      # nu = 2: deterministic drift subordinator
        ds = step
    else:
        ds = step ** (1.0 / asub) * _kanter(asub, theta, w)
    dx = z * np.sqrt(2.0 * ds)
    if v_fn is not None and act.any():
        logw[act] -= v_fn(pos[act]) * step[act]       # left-endpoint rule
    newpos = np.where(act, pos + dx, pos)
    out = act & ((newpos <= a) | (newpos >= b))
    inside_move = act & ~out
    if stats is not None:
        adx = np.abs(dx[act])
        stats.jump_abs_sum += float(adx.sum())
        stats.jump_count += int(act.sum())
        stats.skip_count += int((np.abs(dx[inside_move]) > 0.5 * (b - a)).sum())
    return newpos, out


def _paths_to_own_horizons(domain, asub, v_fn, x0, horizons, h, rng, stats=None):
    """March a block of paths, each to its own operational horizon.

    Returns (position, alive, log_weight, exit_time) at the horizons; the
    last substep of a path is the remainder of its horizon modulo h.
    """
    a, b = domain.a, domain.b
    n = len(horizons)
    pos = np.full(n, float(x0))
    alive = np.ones(n, bool)
    logw = np.zeros(n)
    exit_time = np.full(n, np.nan)
    elapsed = np.zeros(n)
    remaining = np.asarray(horizons, dtype=float).copy()
    while True:
        act = alive & (remaining > 1e-300)
        if not act.any():
            break
        step = np.where(act, np.minimum(remaining, h), 0.0)
        pos, out = _advance(pos, alive, logw, step, asub, rng, a, b, v_fn, stats)
        elapsed += step
        exit_time[out] = elapsed[out]
        alive &= ~out
        remaining -= step
    return pos, alive, logw, exit_time


def _paths_at_checkpoints(a, b, asub, v_fn, x0, cps, h, rng, stats, n_paths):
    """March a block of paths through a shared increasing checkpoint list.

    Returns (positions, alive, log_weights) with shape (n_checkpoints, n).
    Gaps between checkpoints are refined into substeps no longer than h.
    """
    if (np.diff(cps) < 0).any() or (cps <= 0).any():
        raise ParameterError("checkpoints must be positive and nondecreasing")
    n = n_paths
    pos = np.full(n, float(x0))
    alive = np.ones(n, bool)
    logw = np.zeros(n)
    P = np.empty((len(cps), n))
    A = np.empty((len(cps), n), bool)
    W = np.empty((len(cps), n))
    tcur = 0.0
    for k, tnext in enumerate(cps):
        gap = tnext - tcur
        if gap > 0:
            nsub = max(1, int(np.ceil(gap / h - 1e-12)))
            sub = gap / nsub
            for _ in range(nsub):
                step = np.where(alive, sub, 0.0)
                pos, out = _advance(pos, alive, logw, step, asub, rng, a, b, v_fn, stats)
                alive &= ~out
        P[k] = pos
        A[k] = alive
        W[k] = logw
        tcur = tnext
    return P, A, W


def simulate_killed_path(domain, psi: BernsteinFunction, V, x0, horizon, h, rng,
                         n_paths=1) -> PathEnsemble:
    """Simulate killed subordinate Brownian paths to a common horizon.

    V may be None, a scalar or a grid vector; x0 must be interior; h should
    be at most 1e-2 * horizon for the left-endpoint weight rule to make sense.
    """
    if not (domain.a < x0 < domain.b):
        raise ParameterError("start point must be interior")
    if h > 1e-2 * horizon:
        raise ParameterError("operational step too coarse: need h <= horizon/100")
    asub = _subordinator_index(psi)
    v_fn = None
    if V is not None:
        v_vec = np.broadcast_to(np.asarray(V, dtype=float), (domain.n_grid,))
        if (v_vec < 0).any():
            raise ParameterError("the potential must be nonnegative")
        if v_vec.max() > 0:
            v_fn = _grid_interpolant(domain, v_vec)
    stats = _StepStats()
    pos, alive, logw, exit_time = _paths_to_own_horizons(
        domain, asub, v_fn, x0, np.full(n_paths, float(horizon)), h, rng, stats)
    return PathEnsemble(
        n_paths=n_paths, h=h, horizon=horizon,
        exit_flag=~alive, exit_time=exit_time,
        terminal_position=pos, fk_weight=np.exp(logw),
        diagnostics={
            "mean_jump_size": stats.jump_abs_sum / max(stats.jump_count, 1),
            "boundary_skip_count": stats.skip_count,
            "exited_fraction": float((~alive).mean()),
        })


def survival_curve(domain, psi, x0, checkpoints, h, rng_spec: RngSpec, n_paths):
    """MC estimate of P(tau_D > u) at each checkpoint, with standard errors."""
    asub = _subordinator_index(psi)
    cps = np.asarray(checkpoints, dtype=float)
    tot = np.zeros(len(cps))
    done = 0
    blk = 0
    while done < n_paths:
        m = min(rng_spec.block_size, n_paths - done)
        rng = rng_spec.stream(blk)
        _, A, _ = _paths_at_checkpoints(domain.a, domain.b, asub, None, x0,
                                        cps, h, rng, None, n_paths=m)
        tot += A.sum(axis=1)
        done += m
        blk += 1
    p = tot / done
    se = np.sqrt(np.maximum(p * (1.0 - p), 0.0) / done)
    return p, se


def exit_time_moments(domain, psi, x0, h, rng_spec: RngSpec, n_paths, horizon, kmax=2):
    """Empirical exit-time moments E[tau^k], censored at the horizon."""
    asub = _subordinator_index(psi)
    sums = np.zeros(kmax)
    censored = 0
    done = 0
    blk = 0
    while done < n_paths:
        m = min(rng_spec.block_size, n_paths - done)
        rng = rng_spec.stream(blk)
        _, alive, _, exit_time = _paths_to_own_horizons(
            domain, asub, None, x0, np.full(m, float(horizon)), h, rng)
        tau = np.where(alive, horizon, exit_time)
        censored += int(alive.sum())
        for k in range(1, kmax + 1):
            sums[k - 1] += float((tau ** k).sum())
        done += m
        blk += 1
    return {"moments": (sums / done).tolist(), "censored_fraction": censored / done,
            "horizon": horizon, "n_paths": done}


# ---------------------------------------------------------------------------
# subordination quadrature for the source term


@functools.lru_cache(maxsize=64)
def _subordination_nodes(alpha: float, n_nodes: int):
    """Nodes u_q, weights w_q for int_0^inf omega(u) G(u) du with
    omega(u) = u^(-1/alpha) g_1(u^(-1/alpha)) = alpha u eta_1(u).

    The support is found by scanning omega on a log grid; the rule is
    Gauss-Legendre in log u.  The weight total approximates 1/Gamma(alpha)
    and is computed numerically, never assumed.
    """
    scan = np.logspace(-8, 6, 300)
    om = alpha * scan * inverse_subordinator_density(alpha, 1.0, scan)
    top = om.max()
    keep = om > 1e-15 * top
    ylo, yhi = np.log(scan[keep][0]), np.log(scan[keep][-1])
    y, gw = roots_legendre(n_nodes)
    y = 0.5 * (y + 1.0) * (yhi - ylo) + ylo
    gw = gw * 0.5 * (yhi - ylo)
    u = np.exp(y)
    w = gw * u * alpha * u * inverse_subordinator_density(alpha, 1.0, u)
    return u, w, float(w.sum())


def estimate_solution_mc(spec: ProblemSpec, points, mc: McConfig):
    """Monte Carlo solution estimates at (t, x) probe points.

    The initial-datum term averages fk_weight * phi0(X_eta) over surviving
    paths with eta drawn per path; the source term integrates killed-path
    averages of F over the singular time weight and the subordination weight,
    each by deterministic quadrature.  The two ensembles are independent, so
    their standard errors combine in quadrature.
    """
    if not (0.0 < spec.alpha < 1.0):
        raise ParameterError("the probabilistic representation needs alpha in (0, 1)")
    asub = _subordinator_index(spec.psi)
    dom = spec.domain
    v_fn = _grid_interpolant(dom, spec.V) if spec.V.max() > 0 else None
    phi0_fn = _grid_interpolant(dom, spec.phi0)
    out = []
    for ip, (t, x) in enumerate(points):
        if not (dom.a < x < dom.b):
            raise ParameterError("probe points must be interior")
        if not (0 < t <= spec.T):
            raise ParameterError("probe times must lie in (0, T]")
        stats = _StepStats()
        s1 = s1sq = 0.0
        n1 = 0
        blk = 0
        partial = False
        n_blocks_needed = int(np.ceil(mc.n_paths / mc.rng.block_size))
        if mc.max_blocks is not None and n_blocks_needed > mc.max_blocks:
            n_blocks_needed = mc.max_blocks
            partial = True
        # term 1: initial datum
        if np.abs(spec.phi0).max() > 0:
            for blk in range(n_blocks_needed):
                m = min(mc.rng.block_size, mc.n_paths - blk * mc.rng.block_size)
                rng = mc.rng.stream(ip, 0, blk)
                xi1 = sample_stable_subordinator(spec.alpha, 1.0, rng, size=m)
                eta = (t / xi1) ** spec.alpha
                pos, alive, logw, _ = _paths_to_own_horizons(
                    dom, asub, v_fn, x, eta, mc.h, rng, stats)
                vals = np.where(alive, np.exp(logw) * phi0_fn(pos), 0.0)
                s1 += float(vals.sum())
                s1sq += float((vals ** 2).sum())
                n1 += m
        term1 = s1 / n1 if n1 else 0.0
        var1 = (s1sq / n1 - term1 ** 2) / n1 if n1 else 0.0
        # term 2: source
        term2 = 0.0
        var2 = 0.0
        n2 = 0
        if spec.F is not None:
            sj, wj = roots_jacobi(mc.n_time_nodes, 0.0, spec.alpha - 1.0)
            sigma = 0.5 * t * (sj + 1.0)                  # backward time t - s
            wj = wj * (0.5 * t) ** spec.alpha
            uq, wq, _tot = _subordination_nodes(spec.alpha, mc.n_subord_nodes)
            lmat = np.outer(sigma ** spec.alpha, uq)      # operational horizons
            cps = np.unique(lmat)
            idx = {l: k for k, l in enumerate(cps)}
            src_fns = _source_time_slices(spec.F, dom, t - sigma)
            s2 = s2sq = 0.0
            for blk in range(n_blocks_needed):
                m = min(mc.rng.block_size, mc.n_paths - blk * mc.rng.block_size)
                rng = mc.rng.stream(ip, 1, blk)
                P, A, W = _paths_at_checkpoints(dom.a, dom.b, asub, v_fn, x,
                                                cps, mc.h, rng, stats, n_paths=m)
                EW = np.exp(W)
                contrib = np.zeros(m)
                for j in range(len(sigma)):
                    row = np.zeros(m)
                    for q in range(len(uq)):
                        k = idx[lmat[j, q]]
                        row += wq[q] * np.where(A[k], EW[k] * src_fns[j](P[k]), 0.0)
                    contrib += wj[j] * row
                s2 += float(contrib.sum())
                s2sq += float((contrib ** 2).sum())
                n2 += m
            term2 = s2 / n2 if n2 else 0.0
            var2 = (s2sq / n2 - term2 ** 2) / n2 if n2 else 0.0
        est = term1 + term2
        se = float(np.sqrt(max(var1, 0.0) + max(var2, 0.0)))
        out.append(PointEstimate(
            t=float(t), x=float(x), estimate=float(est), stderr=se,
            n_paths=max(n1, n2), h=mc.h, seed=mc.rng.master_seed, partial=partial,
            diagnostics={
                "term1": float(term1), "term2": float(term2),
                "mean_jump_size": stats.jump_abs_sum / max(stats.jump_count, 1),
                "boundary_skip_count": stats.skip_count,
            }))
    return out


def _source_time_slices(F, dom: Domain1D, s_times):
    """Per-time-node spatial evaluators F(s_j, .), zero outside the interval."""
    from .solver import SeparableSource, TableSource
    if isinstance(F, SeparableSource):
        fn = _grid_interpolant(dom, F.rho2)
        return [(lambda p, c=float(F.rho1(s)): c * fn(p)) for s in s_times]
    if isinstance(F, TableSource):
        rows = F.on_grid(np.asarray(s_times))
        return [_grid_interpolant(dom, rows[j]) for j in range(len(s_times))]
    raise ParameterError("unsupported source type for MC estimation")


def estimates_to_csv(estimates, path):
    """CSV export with columns (t, x, estimate, stderr, n_paths, h, seed)."""
    with open(path, "w") as fh:
        fh.write("t,x,estimate,stderr,n_paths,h,seed\n")
        for e in estimates:
            fh.write(f"{e.t!r},{e.x!r},{e.estimate!r},{e.stderr!r},"
                     f"{e.n_paths},{e.h!r},{e.seed}\n")
