"""Experiment configs, table reproductions and error sweeps (CSV output)."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .. import kernels, polybasis
from ..baselines import maxvol_chart, monomial_eval, monomial_fit, monomial_vandermonde, normal_coordinate_interp
from ..errors import NumericalError
from ..interpolant import evaluate_many, evaluate_many_with_velocity, fit_hermite, fit_lagrange
from ..manifold import (
    MvCoordinates,
    build_chart,
    coordinate_velocity,
    default_ref_index,
    geometric_condition,
    identity_chart,
    orthogonality_defect,
    projector_velocity_error,
    reconstruct,
    reconstruct_velocity,
    subspace_error,
    to_coordinates,
)
from . import scenarios

__all__ = [
    "SCENARIOS",
    "METHODS",
    "DEFAULT_METHODS",
    "ExperimentConfig",
    "ErrorRecord",
    "CsvTable",
    "format_float",
    "Scenario",
    "make_scenario",
    "run_conditioning_table",
    "run_geometry_table",
    "run_error_sweep",
]

SCENARIOS = ("example1", "example1_hard", "example2", "helmholtz")
METHODS = ("mv_cva", "mv_cva_surrogate", "monomial_local", "monomial_maxvol", "normal_coords")
DEFAULT_METHODS = ("mv_cva", "monomial_local", "monomial_maxvol", "normal_coords")
HELMHOLTZ_K = (10.0, 20.0)

_DEFAULTS = {
    "example1": dict(n=1000, p=10, m=8, noise=0.0),
    "example1_hard": dict(n=1000, p=10, m=18, noise=0.0),
    "example2": dict(n=1000, p=10, m=10, noise=1e-10),
    "helmholtz": dict(n=500, p=8, m=12, noise=0.0),
}
SMALL_N = 200


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run; ``None`` fields take scenario defaults.

    For ``helmholtz`` the parameter ``t`` in ``interval`` (default ``[0, 1]``)
    maps affinely to the wavenumber ``k`` in ``[10, 20]``.
    """

    scenario: str = "example1"
    seed: int = 0
    n: Optional[int] = None
    p: Optional[int] = None
    m: Optional[int] = None
    degree: Optional[int] = None
    probes: int = 200
    noise: Optional[float] = None
    interval: tuple = (0.0, 1.0)
    methods: tuple = DEFAULT_METHODS
    approach: str = "augmented"
    ref_index: Optional[int] = None
    mode: str = "hermite"
    small: bool = False
    out: Optional[str] = None

    def resolved(self) -> "ExperimentConfig":
        """Copy with defaults filled in; raises ``ValueError`` on invalid settings."""
        if self.scenario not in _DEFAULTS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.seed is None:
            raise ValueError("seed is mandatory")
        d = dict(_DEFAULTS[self.scenario])
        if self.small:
            d["n"] = SMALL_N
        cfg = replace(
            self,
            n=self.n if self.n is not None else d["n"],
            p=self.p if self.p is not None else d["p"],
            m=self.m if self.m is not None else d["m"],
            noise=self.noise if self.noise is not None else d["noise"],
            methods=tuple(self.methods),
            interval=tuple(float(v) for v in self.interval),
        )
        if cfg.mode not in ("hermite", "lagrange"):
            raise ValueError(f"unknown mode {cfg.mode!r}")
        if cfg.degree is None:
            cfg = replace(cfg, degree=2 * cfg.m - 1 if cfg.mode == "hermite" else cfg.m - 1)
        for name in ("n", "p", "m", "probes"):
            if getattr(cfg, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if cfg.degree < 0:
            raise ValueError("degree must be nonnegative")
        if cfg.n < cfg.p:
            raise ValueError("need n >= p")
        if cfg.m < 2:
            raise ValueError("need m >= 2")
        if not cfg.noise >= 0:
            raise ValueError("noise must be >= 0")
        if len(cfg.interval) != 2 or not cfg.interval[1] > cfg.interval[0]:
            raise ValueError("interval must be (a, b) with b > a")
        bad = [mt for mt in cfg.methods if mt not in METHODS]
        if bad or not cfg.methods:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if cfg.approach not in ("augmented", "surrogate"):
            raise ValueError(f"unknown approach {cfg.approach!r}")
        return cfg


@dataclass(frozen=True)
class ErrorRecord:
    t: float
    method: str
    relative_error: float
    orthogonality_defect: float
    velocity_error: float = math.nan

    @property
    def status(self):
        return "ok" if math.isfinite(self.relative_error) else "diverged"


def format_float(v) -> str:
    """17 significant digits (round-trip exact)."""
    return format(float(v), ".17g")


@dataclass
class CsvTable:
    header: list
    rows: list = field(default_factory=list)

    def to_string(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_string())

    def column(self, name):
        j = self.header.index(name)
        return [row[j] for row in self.rows]


def _emit(table: CsvTable, out):
    if out:
        table.write(out)
    return table


# -- Table 1 -------------------------------------------------------------------

def run_conditioning_table(config: Optional[ExperimentConfig] = None, sizes: Sequence[int] = (12, 20, 30, 40)) -> CsvTable:
    """cond2 of the monomial Vandermonde matrix vs. the V+A basis, equispaced nodes on [-1, 1]."""
    table = CsvTable(["m", "cond_monomial", "cond_arnoldi"])
    for m in sizes:
        t = np.linspace(-1.0, 1.0, m)
        cv = kernels.cond2(monomial_vandermonde(t, m - 1))
        model = polybasis.va_fit(t, np.zeros((m, 1)), m - 1)
        table.rows.append([int(m), float(cv), float(kernels.cond2(model.Q))])
    return _emit(table, config.out if config else None)


# -- scenarios -------------------------------------------------------------------

@dataclass
class Scenario:
    """Node samples plus a ground-truth oracle for one experiment."""

    config: ExperimentConfig
    nodes: np.ndarray
    sample: Callable  # (index, t) -> (StiefelPoint, TangentLift) fed to the methods
    truth: Callable  # t -> (StiefelPoint, TangentLift) of the exact curve

    def samples(self):
        pairs = [self.sample(i, t) for i, t in enumerate(self.nodes)]
        return [P for P, _ in pairs], [D for _, D in pairs]


def make_scenario(config: ExperimentConfig) -> Scenario:
    cfg = config.resolved()
    nodes = polybasis.chebyshev_nodes(cfg.m, cfg.interval)
    n, p, seed = cfg.n, cfg.p, cfg.seed
    if cfg.scenario == "helmholtz":
        a, b = cfg.interval
        k0, k1 = HELMHOLTZ_K
        dk_dt = (k1 - k0) / (b - a)

        def truth(t):
            return scenarios.gen_helmholtz(n, p, k0 + (t - a) * dk_dt, dk_dt)

        sample = lambda i, t: truth(t)  # noqa: E731
    else:
        def truth(t):
            return scenarios.gen_transcendental(n, p, t, seed)

        if cfg.noise > 0:
            def sample(i, t):
                return scenarios.noisy_transcendental(n, p, t, seed, cfg.noise, i)
        else:
            sample = lambda i, t: truth(t)  # noqa: E731
    return Scenario(cfg, nodes, sample, truth)


# -- Table 2 ---------------------------------------------------------------------

def run_geometry_table(config: Optional[ExperimentConfig] = None) -> CsvTable:
    """Per-node ``||U1^{-1}||_F`` for the unstabilized, maxvol and Householder charts."""
    cfg = (config or ExperimentConfig()).resolved()
    sc = make_scenario(replace(cfg, noise=0.0))
    pts, _ = sc.samples()
    ref = default_ref_index(sc.nodes) if cfg.ref_index is None else cfg.ref_index
    house = build_chart(pts, ref)
    mv = maxvol_chart(pts).chart
    ident = identity_chart(cfg.n, cfg.p)

    def kappa(chart, P, spectral=False):
        try:
            return geometric_condition(chart, P, spectral)
        except NumericalError:
            return math.inf

    table = CsvTable(["index", "t", "kappa_unstabilized", "kappa_maxvol", "kappa_householder", "kappa_householder_spectral"])
    for i, (t, P) in enumerate(zip(sc.nodes, pts)):
        table.rows.append([i, float(t), kappa(ident, P), kappa(mv, P), kappa(house, P), kappa(house, P, True)])
    return _emit(table, cfg.out)


# -- error sweeps ------------------------------------------------------------------

def _nan_result(count):
    return [(None, None)] * count


def _mv_method(cfg, nodes, pts, lifts, probes, approach):
    if cfg.mode == "lagrange":
        interp = fit_lagrange(nodes, pts, cfg.degree, cfg.ref_index)
        return [(P.U, None) for P in evaluate_many(interp, probes)]
    interp = fit_hermite(nodes, pts, lifts, cfg.degree, approach, cfg.ref_index)
    return [(P.U, D.Udot) for P, D in evaluate_many_with_velocity(interp, probes)]


def _chart_monomial_method(cfg, chart, nodes, pts, lifts, probes):
    n, p = cfg.n, cfg.p
    if cfg.mode == "lagrange":
        X = np.vstack([to_coordinates(chart, P).x for P in pts])
        model = monomial_fit(nodes, X, cfg.degree)
        Xs, Xds = monomial_eval(model, probes), None
    else:
        cs = [coordinate_velocity(chart, P, D) for P, D in zip(pts, lifts)]
        model = monomial_fit(nodes, np.vstack([c.x for c in cs]), cfg.degree, derivs=np.vstack([c.xdot for c in cs]))
        Xs, Xds = monomial_eval(model, probes)
    out = []
    for j in range(len(probes)):
        try:
            Xi = kernels.unvec(Xs[j], n - p, p)
            if Xds is None:
                out.append((reconstruct(chart, Xi).U, None))
            else:
                P, D = reconstruct_velocity(chart, MvCoordinates(Xi, kernels.unvec(Xds[j], n - p, p)))
                out.append((P.U, D.Udot))
        except (NumericalError, ValueError, np.linalg.LinAlgError):
            out.append((None, None))
    return out


def _normal_method(cfg, nodes, pts, lifts, probes):
    interp = normal_coordinate_interp(
        nodes, pts, lifts if cfg.mode == "hermite" else None, cfg.degree,
        base_index=cfg.ref_index,
    )
    out = []
    for U in interp(probes):
        out.append((U if np.all(np.isfinite(U)) else None, None))
    return out


def _run_method(method, cfg, nodes, pts, lifts, probes):
    if method == "mv_cva":
        return _mv_method(cfg, nodes, pts, lifts, probes, cfg.approach)
    if method == "mv_cva_surrogate":
        return _mv_method(cfg, nodes, pts, lifts, probes, "surrogate")
    if method == "monomial_local":
        return _chart_monomial_method(cfg, identity_chart(cfg.n, cfg.p), nodes, pts, lifts, probes)
    if method == "monomial_maxvol":
        return _chart_monomial_method(cfg, maxvol_chart(pts).chart, nodes, pts, lifts, probes)
    if method == "normal_coords":
        return _normal_method(cfg, nodes, pts, lifts, probes)
    raise ValueError(f"unknown method {method!r}")


def run_error_sweep(config: ExperimentConfig) -> CsvTable:
    """Relative subspace error, orthogonality defect and velocity error per probe and method.

    Baseline failures (singular charts, non-finite fits) are recorded as
    ``diverged`` rows and never abort the sweep.
    """
    cfg = config.resolved()
    sc = make_scenario(cfg)
    pts, lifts = sc.samples()
    probes = np.linspace(cfg.interval[0], cfg.interval[1], cfg.probes)
    truth = [sc.truth(t) for t in probes]
    methods = cfg.methods if "mv_cva" in cfg.methods else ("mv_cva",) + cfg.methods
    records = []
    for method in methods:
        try:
            with np.errstate(all="ignore"):
                results = _run_method(method, cfg, sc.nodes, pts, lifts, probes)
        except (NumericalError, np.linalg.LinAlgError):
            if method.startswith("mv_cva"):
                raise
            results = _nan_result(len(probes))
        for t, (P, D), (U, Ud) in zip(probes, truth, results):
            if U is None or not np.all(np.isfinite(U)):
                records.append(ErrorRecord(float(t), method, math.nan, math.nan))
                continue
            rel = subspace_error(P.U, U)[1]
            vel = math.nan
            if Ud is not None and np.all(np.isfinite(Ud)):
                diff, ref = projector_velocity_error(U, Ud, P.U, D.Udot)
                vel = diff / ref if ref > 0 else diff
            records.append(ErrorRecord(float(t), method, rel, orthogonality_defect(U), vel))
    table = CsvTable(["scenario", "method", "t", "relative_error", "orthogonality_defect", "velocity_error", "status"])
    for r in records:
        table.rows.append([cfg.scenario, r.method, r.t, r.relative_error, r.orthogonality_defect, r.velocity_error, r.status])
    table.records = records
    return _emit(table, cfg.out)
