"""Run configuration: INI-style files mapped to problem instances.

One config file describes one reproducible experiment.  Sections mirror the
module split ([domain], [symbol], [problem], [mc], [checks], [outputs]);
unknown sections or keys are rejected before any computation starts, and the
fully resolved configuration is embedded in the run manifest so a run can be
replayed bit for bit.

Grid functions are given as name(arg=value,...) presets:

    zero | const(c=..) | bump(center=..,width=..,height=..) | eigen(n=..)
    gauss(center=..,sigma=..,height=..) | indicator(lo=..,hi=..) | sin2()
    linear(a=..,b=..)   (time profiles: value a + b*t)
"""

from __future__ import annotations

import configparser
import re

import numpy as np

from . import bernstein as bfn
from .errors import ConfigError, ParameterError
from .operator import Domain1D, MODE_JUMP, MODE_SPECTRAL, build_operator, eigensystem
from .solver import ProblemSpec, SeparableSource

_SECTIONS = {
    "domain": {"a", "b", "n_grid"},
    "symbol": {"kind", "nu", "nu_tilde", "mass"},
    "problem": {"alpha", "t_horizon", "potential", "phi0", "rho1", "rho2",
                "operator_mode", "n_modes", "time_steps", "method"},
    "mc": {"n_paths", "h", "master_seed"},
    "checks": {"run", "abp_p", "positivity_tmin", "decay_cap", "stability_cap",
               "comparison_tol"},
    "outputs": {"directory", "formats"},
}

_CHECK_IDS = ("positivity", "decay", "abp", "caputo")


def _parse_preset(text):
    """'name(k=v, k=v)' -> (name, {k: float(v)})."""
    text = text.strip()
    m = re.fullmatch(r"([a-z_0-9]+)\s*(?:\(([^)]*)\))?", text)
    if not m:
        raise ConfigError(f"cannot parse function preset {text!r}")
    name, args = m.group(1), {}
    if m.group(2):
        for piece in m.group(2).split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise ConfigError(f"preset argument {piece!r} must be key=value")
            k, v = piece.split("=", 1)
            try:
                args[k.strip()] = float(v)
            except ValueError as exc:
                raise ConfigError(f"non-numeric preset argument {piece!r}") from exc
    return name, args


def grid_function(preset, domain: Domain1D, es=None):
    """Realize a spatial preset on the interior grid."""
    name, a = _parse_preset(preset)
    x = domain.x
    if name == "zero":
        return np.zeros(domain.n_grid)
    if name == "const":
        return np.full(domain.n_grid, a.get("c", 1.0))
    if name == "bump":
        c = a.get("center", 0.5 * (domain.a + domain.b))
        w = a.get("width", 0.25 * (domain.b - domain.a))
        h = a.get("height", 1.0)
        r = (x - c) / w
        out = np.where(np.abs(r) < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - r ** 2, 1e-300)), 0.0)
        return h * out
    if name == "gauss":
        c = a.get("center", 0.5 * (domain.a + domain.b))
        s = a.get("sigma", 0.1 * (domain.b - domain.a))
        return a.get("height", 1.0) * np.exp(-0.5 * ((x - c) / s) ** 2)
    if name == "indicator":
        lo, hi = a.get("lo", domain.a), a.get("hi", domain.b)
        return ((x >= lo) & (x <= hi)).astype(float)
    if name == "eigen":
        if es is None:
            raise ConfigError("eigen(n=..) preset needs the eigensystem")
        n = int(a.get("n", 1))
        if not 1 <= n <= es.n_modes:
            raise ConfigError(f"eigen preset index {n} out of range")
        return es.eigvecs[:, n - 1].copy()
    raise ConfigError(f"unknown spatial preset {name!r}")


def time_function(preset, T):
    """Realize a time-profile preset as a callable."""
    name, a = _parse_preset(preset)
    if name == "zero":
        return lambda t: 0.0
    if name == "const":
        c = a.get("c", 1.0)
        return lambda t: c
    if name == "sin2":
        return lambda t: np.sin(np.pi * t / T) ** 2
    if name == "linear":
        aa, bb = a.get("a", 0.0), a.get("b", 1.0)
        return lambda t: aa + bb * t
    raise ConfigError(f"unknown time preset {name!r}")


class RunConfig:
    """Validated configuration for one experiment."""

    def __init__(self, mapping):
        self.raw = {sec: dict(kv) for sec, kv in mapping.items() if sec != "DEFAULT"}
        for sec, kv in self.raw.items():
            if sec not in _SECTIONS:
                raise ConfigError(f"unknown section [{sec}]")
            unknown = set(kv) - _SECTIONS[sec]
            if unknown:
                raise ConfigError(f"unknown keys in [{sec}]: {sorted(unknown)}")
        for required in ("domain", "symbol", "problem"):
            if required not in self.raw:
                raise ConfigError(f"missing section [{required}]")
        self._validate()

    @staticmethod
    def from_file(path):
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        return RunConfig({s: dict(cp[s]) for s in cp.sections()})

    @staticmethod
    def from_dict(d):
        return RunConfig(d)

    def _get(self, sec, key, default=None, cast=str):
        val = self.raw.get(sec, {}).get(key, None)
        if val is None:
            if default is None:
                raise ConfigError(f"missing key {key!r} in [{sec}]")
            return default
        try:
            return cast(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for [{sec}] {key}: {val!r}") from exc

    def _validate(self):
        self.a = self._get("domain", "a", cast=float)
        self.b = self._get("domain", "b", cast=float)
        self.n_grid = self._get("domain", "n_grid", cast=int)
        if not self.a < self.b:
            raise ConfigError("need a < b in [domain]")
        if self.n_grid < 8:
            raise ConfigError("n_grid must be at least 8")
        kind = self._get("symbol", "kind")
        nu = self._get("symbol", "nu", default=1.0, cast=float)
        nt = self._get("symbol", "nu_tilde", default=0.0, cast=float)
        mass = self._get("symbol", "mass", default=0.0, cast=float)
        try:
            if kind == "fractional":
                self.psi = bfn.fractional(nu)
            elif kind == "relativistic":
                self.psi = bfn.relativistic(nu, mass)
            elif kind == "sum_of_fractional":
                self.psi = bfn.sum_of_fractional(nu, nt)
            elif kind == "log_damped":
                self.psi = bfn.log_damped(nu, nt)
            elif kind == "log_boosted":
                self.psi = bfn.log_boosted(nu, nt)
            elif kind == "classical_laplacian":
                self.psi = bfn.classical_laplacian()
            else:
                raise ConfigError(f"unknown symbol kind {kind!r}")
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        self.alpha = self._get("problem", "alpha", cast=float)
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        self.T = self._get("problem", "t_horizon", default=1.0, cast=float)
        if self.T <= 0:
            raise ConfigError("t_horizon must be positive")
        self.operator_mode = self._get("problem", "operator_mode",
                                       default=MODE_SPECTRAL)
        if self.operator_mode not in (MODE_SPECTRAL, MODE_JUMP):
            raise ConfigError(f"unknown operator_mode {self.operator_mode!r}")
        self.method = self._get("problem", "method", default="spectral")
        if self.method not in ("spectral", "monte_carlo", "both"):
            raise ConfigError("method must be spectral, monte_carlo or both")
        if self.method != "spectral" and self.psi.kind != "fractional":
            raise ConfigError("monte_carlo method needs a fractional symbol")
        self.n_modes = self._get("problem", "n_modes", default=0, cast=int) or None
        self.time_steps = self._get("problem", "time_steps", default=64, cast=int)
        if self.time_steps < 4:
            raise ConfigError("time_steps must be at least 4")
        self.potential_preset = self._get("problem", "potential", default="zero")
        self.phi0_preset = self._get("problem", "phi0", default="zero")
        self.rho1_preset = self._get("problem", "rho1", default="")
        self.rho2_preset = self._get("problem", "rho2", default="")
        if bool(self.rho1_preset) != bool(self.rho2_preset):
            raise ConfigError("separable source needs both rho1 and rho2")
        self.n_paths = self._get("mc", "n_paths", default=20000, cast=int)
        self.mc_h = self._get("mc", "h", default=1e-3, cast=float)
        self.master_seed = self._get("mc", "master_seed", default=0, cast=int)
        checks = self._get("checks", "run", default="")
        self.checks = [c.strip() for c in checks.split(",") if c.strip()]
        for c in self.checks:
            if c not in _CHECK_IDS:
                raise ConfigError(f"unknown check id {c!r}; valid: {_CHECK_IDS}")
        self.abp_p = self._get("checks", "abp_p", default=0.0, cast=float) or None
        self.decay_cap = self._get("checks", "decay_cap", default=10.0, cast=float)
        self.positivity_tmin = self._get("checks", "positivity_tmin",
                                         default=0.0, cast=float) or None
        # the exponent threshold is computed from stored symbol metadata,
        # never re-entered by hand
        if "abp" in self.checks:
            thr = 1.0 / (2.0 * self.psi.wlsc.mu_lower) + 1.0 / self.alpha
            if self.abp_p is None or not self.abp_p > thr:
                raise ConfigError(
                    f"abp check needs abp_p > d/(2 mu) + 1/alpha = {thr:.6g}; "
                    f"got {self.abp_p}")
        self.out_dir = self._get("outputs", "directory", default="out")
        self.formats = self._get("outputs", "formats", default="csv,json")

    def build_problem(self):
        """Materialize (domain, operator, eigensystem, ProblemSpec)."""
        domain = Domain1D(self.a, self.b, self.n_grid)
        op = build_operator(domain, self.psi,
                            grid_function(self.potential_preset, domain),
                            self.operator_mode)
        es = eigensystem(op, self.n_modes)
        phi0 = grid_function(self.phi0_preset, domain, es)
        F = None
        if self.rho1_preset:
            F = SeparableSource(time_function(self.rho1_preset, self.T),
                                grid_function(self.rho2_preset, domain, es))
        spec = ProblemSpec(domain, self.psi, op.potential, phi0, F,
                           self.alpha, self.T)
        return domain, op, es, spec

    def to_dict(self):
        return {sec: dict(kv) for sec, kv in self.raw.items()}
