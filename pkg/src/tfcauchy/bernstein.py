"""Catalog of Bernstein functions used as spatial symbols, with property checks.

The catalog members are Laplace exponents of subordinators, all vanishing at
0+.  Each entry carries two pieces of scaling metadata used downstream:

* ``lower_scaling_beta``: an exponent with liminf Psi(u)/u**beta > 0 at
  infinity, controlling admissible dual-norm indices for the initial trace;
* ``wlsc``: a weak lower scaling triple (mu, c, theta) with
  Psi(gamma*u) >= c * gamma**mu * Psi(u) for u > theta, gamma >= 1.

Catalog objects are immutable and every check below is a pure function, so
concurrent use needs no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError

KINDS = ("fractional", "relativistic", "sum_of_fractional",
         "log_damped", "log_boosted", "classical_laplacian")


@dataclass(frozen=True)
class Wlsc:
    mu_lower: float
    c_lower: float = 1.0
    theta_lower: float = 0.0

    def __post_init__(self):
        if self.mu_lower <= 0:
            raise ParameterError("WLSC exponent must be positive")
        if not (0.0 < self.c_lower <= 1.0):
            raise ParameterError("WLSC constant must lie in (0, 1]")
        if self.theta_lower < 0:
            raise ParameterError("WLSC threshold must be nonnegative")


@dataclass(frozen=True)
class BernsteinFunction:
    """A catalog Bernstein function with parameters and scaling metadata."""

    kind: str
    nu: float = 1.0
    nu_tilde: float = 0.0
    mass: float = 0.0                   # relativistic mass parameter
    drift_b: float = 0.0
    lower_scaling_beta: float = field(default=None)
    wlsc: Wlsc = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown Bernstein catalog kind {self.kind!r}")
        nu, nt = self.nu, self.nu_tilde
        if self.kind == "fractional" and not (0.0 < nu <= 2.0):
            raise ParameterError("fractional: need nu in (0, 2]")
        if self.kind == "relativistic":
            if not (0.0 < nu < 2.0) or self.mass <= 0.0:
                raise ParameterError("relativistic: need nu in (0, 2) and mass > 0")
        if self.kind == "sum_of_fractional":
            if not (0.0 < nu <= 2.0 and 0.0 < nt <= 2.0):
                raise ParameterError("sum_of_fractional: need nu, nu_tilde in (0, 2]")
        if self.kind == "log_damped":
            if not (0.0 < nu <= 2.0 and 0.0 <= nt < nu):
                raise ParameterError("log_damped: need nu in (0, 2], nu_tilde in [0, nu)")
        if self.kind == "log_boosted":
            if not (0.0 < nu < 2.0 and 0.0 < nt < 2.0 - nu):
                raise ParameterError("log_boosted: need nu in (0, 2), nu_tilde in (0, 2-nu)")
        if self.drift_b < 0:
            raise ParameterError("drift must be nonnegative")
        if self.lower_scaling_beta is None:
            object.__setattr__(self, "lower_scaling_beta", _default_beta(self))
        if not (0.0 < self.lower_scaling_beta <= 1.0):
            raise ParameterError("lower_scaling_beta must lie in (0, 1]")
        if self.wlsc is None:
            object.__setattr__(self, "wlsc", Wlsc(_default_mu(self)))

    def __call__(self, u):
        return psi_eval(self, u)

    def with_wlsc(self, mu_lower, c_lower=1.0, theta_lower=0.0):
        return replace(self, wlsc=Wlsc(mu_lower, c_lower, theta_lower))

    @property
    def label(self):
        parts = [self.kind, f"nu={self.nu:g}"]
        if self.kind in ("sum_of_fractional", "log_damped", "log_boosted"):
            parts.append(f"nu_tilde={self.nu_tilde:g}")
        if self.kind == "relativistic":
            parts.append(f"m={self.mass:g}")
        return " ".join(parts)


def _default_mu(psi):
    """WLSC exponents of the catalog (theta = 0 for every entry)."""
    table = {
        "fractional": psi.nu / 2.0,
        "relativistic": psi.nu / 2.0,
        "sum_of_fractional": min(psi.nu, psi.nu_tilde) / 2.0,
        "log_damped": (psi.nu - psi.nu_tilde) / 2.0,
        "log_boosted": psi.nu / 2.0,
        "classical_laplacian": 1.0,
    }
    return table[psi.kind]


def _default_beta(psi):
    """Exponent for the liminf growth bound at infinity; capped at 1."""
    table = {
        "fractional": psi.nu / 2.0,
        "relativistic": psi.nu / 2.0,
        "sum_of_fractional": max(psi.nu, psi.nu_tilde) / 2.0,
        "log_damped": (psi.nu - psi.nu_tilde) / 2.0,
        "log_boosted": psi.nu / 2.0,
        "classical_laplacian": 1.0,
    }
    return min(1.0, table[psi.kind])


def fractional(nu):
    """Psi(u) = u**(nu/2)."""
    return BernsteinFunction("fractional", nu=nu)


def relativistic(nu, mass):
    """Psi(u) = (u + m**(2/nu))**(nu/2) - m."""
    return BernsteinFunction("relativistic", nu=nu, mass=mass)


def sum_of_fractional(nu, nu_tilde):
    """Psi(u) = u**(nu/2) + u**(nu_tilde/2)."""
    return BernsteinFunction("sum_of_fractional", nu=nu, nu_tilde=nu_tilde)


def log_damped(nu, nu_tilde):
    """Psi(u) = u**(nu/2) * log(1+u)**(-nu_tilde/2)."""
    return BernsteinFunction("log_damped", nu=nu, nu_tilde=nu_tilde)


def log_boosted(nu, nu_tilde):
    """Psi(u) = u**(nu/2) * log(1+u)**(nu_tilde/2)."""
    return BernsteinFunction("log_boosted", nu=nu, nu_tilde=nu_tilde)


def classical_laplacian():
    """Psi(u) = u, the pure drift subordinator (Brownian motion itself)."""
    return BernsteinFunction("classical_laplacian", nu=2.0, drift_b=1.0)


def psi_eval(psi: BernsteinFunction, u):
    """Evaluate a catalog member at u >= 0 (vectorized)."""
    uu = np.asarray(u, dtype=float)
    if (uu < 0).any():
        raise ParameterError("Bernstein functions are evaluated on u >= 0")
    kind, nu, nt = psi.kind, psi.nu, psi.nu_tilde
    if kind == "fractional":
        out = uu ** (nu / 2.0)
    elif kind == "relativistic":
        out = (uu + psi.mass ** (2.0 / nu)) ** (nu / 2.0) - psi.mass
    elif kind == "sum_of_fractional":
        out = uu ** (nu / 2.0) + uu ** (nt / 2.0)
    elif kind == "log_damped":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(uu > 0.0, uu ** (nu / 2.0) * np.log1p(uu) ** (-nt / 2.0), 0.0)
        if nt == 0.0:
            out = uu ** (nu / 2.0)
    elif kind == "log_boosted":
        out = uu ** (nu / 2.0) * np.log1p(uu) ** (nt / 2.0)
    else:
        out = uu.copy()
    return out if np.ndim(u) else float(out)


# ---------------------------------------------------------------------------
# property checks


def _as_callable(psi):
    if isinstance(psi, BernsteinFunction):
        return lambda u: psi_eval(psi, u)
    return psi


def check_complete_monotonicity(psi, grid, order=3, noise_safety=10.0):
    """Finite-difference sign pattern of the first `order` derivatives.

    A Bernstein function has f >= 0, f' >= 0, f'' <= 0, f''' >= 0, ...
    Divided differences of order k estimate f^(k)/k!, so the expected sign of
    the k-th divided difference is (-1)**(k-1).  Violations are only reported
    when they exceed a rounding-noise bound computed from the divided
    difference weights, which keeps the check meaningful on log-spaced grids.

    Returns a dict report; report["violations"] is empty for a pass.
    """
    if order > 4:
        raise ParameterError("orders above 4 are numerically unstable; use order <= 4")
    f = _as_callable(psi)
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or len(x) < order + 1 or (np.diff(x) <= 0).any():
        raise ParameterError("grid must be strictly increasing with at least order+1 points")
    fx = np.asarray(f(x), dtype=float)
    eps = np.finfo(float).eps
    violations = []
    for k in range(1, order + 1):
        want = (-1.0) ** (k - 1)
        for i in range(len(x) - k):
            xs = x[i:i + k + 1]
            # divided difference = sum_j f(x_j) / prod_{m != j} (x_j - x_m)
            w = np.array([1.0 / np.prod(xs[j] - np.delete(xs, j)) for j in range(k + 1)])
            dd = float(w @ fx[i:i + k + 1])
            noise = noise_safety * eps * float(np.abs(w) @ np.abs(fx[i:i + k + 1]))
            if want * dd < -noise:
                violations.append({"order": k, "u_window": (float(xs[0]), float(xs[-1])),
                                   "value": dd, "noise_bound": noise})
    return {
        "check": "complete_monotonicity",
        "order": order,
        "n_grid": len(x),
        "passed": not violations,
        "violations": violations,
    }


def check_hartman_wintner(psi, u_max=1e6, n_points=60):
    """Trajectory of Psi(u^2)/log(u) on a log grid; advisory divergence report.

    The condition asks this ratio to blow up as u grows; the report records
    the trajectory and whether it is increasing beyond a threshold.
    """
    if u_max < 1e3:
        raise ParameterError("u_max must be at least 1e3 to see the trend")
    f = _as_callable(psi)
    u = np.logspace(np.log10(2.0), np.log10(u_max), n_points)
    ratio = np.asarray(f(u ** 2), dtype=float) / np.log(u)
    # slow divergers dip first (the log in the denominator wins early), so the
    # verdict looks only at the trend on the last third of the log grid
    tail = ratio[2 * n_points // 3:]
    diverges = bool((np.diff(tail) > 0).all() and tail[-1] >= 1.05 * tail[0])
    return {
        "check": "hartman_wintner",
        "u": u.tolist(),
        "ratio": ratio.tolist(),
        "diverges": diverges,
        "ratio_growth": float(ratio[-1] / ratio[0]),
    }


def wlsc_verify(psi: BernsteinFunction, n_gamma=25, n_u=40, u_max=1e8):
    """Sampled verification of Psi(gamma*u) >= c * gamma**mu * Psi(u).

    Samples gamma in [1, 1e4] and u in (theta, u_max] on log grids and
    reports the empirical infimum of Psi(gamma*u) / (gamma**mu * Psi(u)),
    which is the largest constant c that would still pass on this sample.
    A violation (infimum below the stored c) is reported, not raised.
    """
    if psi.wlsc is None:
        raise ParameterError("psi carries no WLSC metadata")
    mu, c, theta = psi.wlsc.mu_lower, psi.wlsc.c_lower, psi.wlsc.theta_lower
    gammas = np.logspace(0.0, 4.0, n_gamma)
    u_lo = max(theta * (1.0 + 1e-9), 1e-6)
    us = np.logspace(np.log10(u_lo), np.log10(u_max), n_u)
    G, U = np.meshgrid(gammas, us, indexing="ij")
    num = psi_eval(psi, (G * U).ravel()).reshape(G.shape)
    den = G ** mu * psi_eval(psi, us)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.inf)
    inf_ratio = float(np.min(ratio))
    worst = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    return {
        "check": "wlsc",
        "mu_lower": mu,
        "c_lower": c,
        "theta_lower": theta,
        "passed": bool(inf_ratio >= c * (1.0 - 1e-12)),
        "max_passing_c": inf_ratio,
        "worst_pair": {"gamma": float(gammas[worst[0]]), "u": float(us[worst[1]])},
    }
