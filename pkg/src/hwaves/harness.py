"""Built-in initial data, error norms, convergence studies and report I/O."""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import (
    BlowUpError,
    ConvergenceError,
    GridMismatchError,
    ParameterError,
    SolverError,
)
from .etd import evolve
from .euler import SurfaceState, evolve_euler
from .models import ModelKind, WaveState, WW2State, build_system, state_to_array
from .spectral import PeriodicGrid, SpectralField, hilbert, houli_symbol, l2_norm, transform

__all__ = [
    "ExperimentConfig",
    "ModelConvergence",
    "ConvergenceReport",
    "init_example1",
    "init_example2",
    "init_example3",
    "initial_states",
    "scaled_l2_error",
    "resample",
    "run_model",
    "run_reference",
    "simulate",
    "fit_loglog",
    "convergence_study",
    "load_config",
    "write_trajectory_csv",
    "write_report_csv",
    "write_report_json",
]

NUMERICAL_FAILURES = (BlowUpError, ConvergenceError, SolverError)

# nominal error order (in the eps-scaled norm) of each model against Euler
_NOMINAL_ORDER = {"linear": 1, "quadratic": 2, "cubic": 3, "ww2": 2, "capillary": 2, "internal": 2}
_MODELS = ("linear", "quadratic", "cubic", "capillary", "internal", "ww2")
_EXAMPLE_TIMES = {1: 0.625, 2: 6.0, 3: 1.0}


# ---------------------------------------------------------------- initial data


def _check_eps(eps, allow_zero=False):
    if not np.isfinite(eps) or eps < 0 or (eps == 0 and not allow_zero):
        raise ParameterError(f"epsilon must be positive, got {eps}")


def _states(h: SpectralField):
    zero = h.grid.zeros()
    return WaveState(h, zero), SurfaceState(h, zero)


def init_example1(eps: float, grid: PeriodicGrid):
    """``h = eps (sin x / 5 + sin 2x / 10 + sin 3x / 5)`` at rest; slope ``eps`` at ``x = 0``."""
    _check_eps(eps)
    x = grid.x
    h = eps * (np.sin(x) / 5 + np.sin(2 * x) / 10 + np.sin(3 * x) / 5)
    return _states(transform(grid, h))


def example2_profile(n: int, x) -> np.ndarray:
    """Zero-mean bulge of maximum slope 1 attained where ``tan(x/2) = +-n``."""
    if int(n) != n or n < 1 or n % 2 == 0:
        raise ParameterError(f"Example 2 needs an odd positive n, got {n}")
    n2 = float(n) * n
    # Gamma(n^2/2 + 1) / (sqrt(pi) Gamma(n^2/2 + 3/2)) is the mean of sin^{n^2+1}(x/2)
    mean = math.exp(gammaln(n2 / 2 + 1) - gammaln(n2 / 2 + 1.5)) / math.sqrt(math.pi)
    amp = (2.0 / n) * math.exp(0.5 * (n2 - 1) * math.log1p(1.0 / n2))
    return amp * (np.sin(np.asarray(x) / 2) ** (n2 + 1) - mean)


def init_example2(n: int, eps: float, grid: PeriodicGrid):
    _check_eps(eps)
    return _states(transform(grid, eps * example2_profile(n, grid.x)))


def init_example3(eps: float, grid: PeriodicGrid):
    """Leading-order standing-wave seed ``h = eps cos x`` at rest."""
    _check_eps(eps, allow_zero=True)
    return _states(transform(grid, eps * np.cos(grid.x)))


def initial_states(example: int, eps: float, grid: PeriodicGrid, n: int = 7):
    if example == 1:
        return init_example1(eps, grid)
    if example == 2:
        return init_example2(n, eps, grid)
    if example == 3:
        return init_example3(eps, grid)
    raise ParameterError(f"unknown example {example!r}; choose 1, 2 or 3")


# ---------------------------------------------------------------- norms


def resample(f: SpectralField, grid: PeriodicGrid) -> SpectralField:
    """Spectral truncation or zero-padding of ``f`` onto ``grid``; Nyquist modes are dropped."""
    if f.grid.M == grid.M:
        return f
    keep = min(f.grid.M, grid.M) // 2
    c = np.zeros(f.coeffs.shape[:-1] + (grid.nmodes,), dtype=complex)
    c[..., :keep] = f.coeffs[..., :keep]
    return SpectralField(grid, c)


def scaled_l2_error(a: SpectralField, b: SpectralField, eps: float, normalized: bool = False) -> float:
    """``||a - b||_{L^2(0, 2 pi)} / eps`` by Parseval.

    ``normalized=True`` divides by ``sqrt(2 pi)``, giving the root-mean-square
    difference instead.
    """
    if a.grid.M != b.grid.M:
        raise GridMismatchError(f"grids differ: M={a.grid.M} vs M={b.grid.M}")
    _check_eps(eps)
    err = l2_norm(a - b) / eps
    return float(err / math.sqrt(2 * math.pi) if normalized else err)


# ---------------------------------------------------------------- configuration


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a simulation or an eps sweep."""

    models: tuple = ("linear", "quadratic", "cubic")
    eps_list: tuple = (0.05, 0.1, 0.2, 0.4)
    M: int = 256
    t_final: float = 0.625
    steps: int = 2000
    out: str | None = None
    g: float = 1.0
    lam: float = 0.0
    atwood: float = -1.0
    filter: bool = True
    example: int = 1
    n: int = 7
    nu: int = 4
    reference: str = "euler"
    ref_M: int = 512
    ref_steps: int = 4000
    ref_method: str = "gmres"
    save_every: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.models, str):
            self.models = (self.models,)
        self.models = tuple(self.models)
        self.eps_list = tuple(float(e) for e in np.atleast_1d(self.eps_list))
        for m in self.models:
            if m not in _MODELS:
                raise ParameterError(f"unknown model {m!r}; choose from {', '.join(_MODELS)}")
        if self.reference not in ("euler",) + _MODELS:
            raise ParameterError(f"unknown reference {self.reference!r}")
        if not self.eps_list:
            raise ParameterError("at least one epsilon is required")
        for e in self.eps_list:
            _check_eps(e)
        for name in ("M", "ref_M"):
            v = getattr(self, name)
            if int(v) != v or v < 4 or v % 2:
                raise ParameterError(f"{name} must be an even integer >= 4, got {v}")
        for name in ("steps", "ref_steps", "nu", "workers"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v}")
        if not np.isfinite(self.t_final) or self.t_final <= 0:
            raise ParameterError(f"final time must be positive, got {self.t_final}")
        if not np.isfinite(self.g) or self.g <= 0:
            raise ParameterError(f"gravity must be positive, got {self.g}")
        if self.example not in (1, 2, 3):
            raise ParameterError(f"unknown example {self.example!r}; choose 1, 2 or 3")
        if self.example == 2 and (self.n < 1 or self.n % 2 == 0):
            raise ParameterError(f"Example 2 needs an odd positive n, got {self.n}")
        if self.ref_method not in ("direct", "gmres"):
            raise ParameterError(f"unknown reference solver {self.ref_method!r}")
        if self.save_every < 0 or self.seed < 0:
            raise ParameterError("save_every and seed must be nonnegative")
        # ModelKind validates lam and atwood
        ModelKind("capillary", lam=self.lam, atwood=self.atwood)

    @classmethod
    def for_example(cls, example: int, **overrides) -> "ExperimentConfig":
        """Defaults of the published sweeps (final time per example, Example 3 at small eps)."""
        base = {"example": example, "t_final": _EXAMPLE_TIMES.get(example, 1.0)}
        if example == 3:
            base["eps_list"] = (0.0125, 0.025, 0.05, 0.1)
        base.update(overrides)
        return cls(**base)

    def kind(self, model: str) -> ModelKind:
        return ModelKind(model, lam=self.lam if model in ("capillary", "ww2") else 0.0, atwood=self.atwood)

    def to_dict(self) -> dict:
        return asdict(self)


# flat "key = value" config keys mirror the CLI flags
_CONFIG_KEYS = {
    "model": ("models", lambda s: tuple(p.strip() for p in s.split(",") if p.strip())),
    "models": ("models", lambda s: tuple(p.strip() for p in s.split(",") if p.strip())),
    "example": ("example", int),
    "eps": ("eps_list", lambda s: (float(s),)),
    "eps-list": ("eps_list", lambda s: tuple(float(p) for p in s.split(",") if p.strip())),
    "grid": ("M", int),
    "steps": ("steps", int),
    "tfinal": ("t_final", float),
    "g": ("g", float),
    "lambda": ("lam", float),
    "atwood": ("atwood", float),
    "n": ("n", int),
    "out": ("out", str),
    "seed": ("seed", int),
    "no-filter": ("filter", lambda s: not _parse_bool(s)),
    "filter": ("filter", lambda s: _parse_bool(s)),
    "nu": ("nu", int),
    "reference": ("reference", str),
    "ref-grid": ("ref_M", int),
    "ref-steps": ("ref_steps", int),
    "ref-method": ("ref_method", str),
    "save-every": ("save_every", int),
    "workers": ("workers", int),
}


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on", ""):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {s!r}")


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` starts a comment) into config fields."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("_", "-")
        if not sep and key not in ("no-filter", "filter"):
            raise ParameterError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _CONFIG_KEYS:
            raise ParameterError(f"line {lineno}: unknown key {key!r}")
        name, conv = _CONFIG_KEYS[key]
        try:
            out[name] = conv(value.strip())
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return out


def load_config(path: str, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.update(overrides)
    example = values.pop("example", 1)
    return ExperimentConfig.for_example(example, **values)


# ---------------------------------------------------------------- runs


def _model_u0(kind: ModelKind, state: WaveState) -> np.ndarray:
    if kind.name == "ww2":
        # at linear order h_t = H omega, so omega = -H h_t
        return state_to_array(WW2State(state.h, -hilbert(state.ht)))
    return state_to_array(state)


def run_model(model: str, state: WaveState, config: ExperimentConfig, output_steps=None):
    """Evolve one h-model with ETD; returns ``(times, [h fields])``."""
    grid = state.h.grid
    kind = config.kind(model)
    L, N = build_system(kind, config.g, grid)
    times, us = evolve(
        _model_u0(kind, state),
        config.t_final,
        config.steps,
        L,
        N,
        scheme=config.nu,
        output_steps=output_steps,
        filter_symbol=houli_symbol(grid) if config.filter else None,
    )
    return times, [SpectralField(grid, u[0]) for u in us]


def run_reference(state: SurfaceState, config: ExperimentConfig, output_steps=None):
    """Evolve the Euler equations with DOP853; returns ``(times, [h fields])``."""
    times, states = evolve_euler(
        state, config.t_final, config.ref_steps, config.g, config.lam,
        output_steps=output_steps, method=config.ref_method, filter=config.filter,
    )
    return times, [s.h for s in states]


def simulate(config: ExperimentConfig, model: str | None = None, eps: float | None = None):
    """One trajectory; returns ``(times, values)`` with ``values`` of shape ``(n_out, M)``.

    ``model`` may also be ``"euler"``, which uses the reference solver on a
    grid of ``config.M`` points with ``config.steps`` steps.
    """
    model = model or config.models[0]
    eps = config.eps_list[0] if eps is None else float(eps)
    grid = PeriodicGrid(config.M)
    wave, surf = initial_states(config.example, eps, grid, config.n)
    every = config.save_every or max(1, config.steps // 100)
    out = sorted(set(range(0, config.steps + 1, every)) | {config.steps})
    if model == "euler":
        cfg = ExperimentConfig(**{**config.to_dict(), "ref_steps": config.steps, "ref_M": config.M})
        times, hs = run_reference(surf, cfg, output_steps=out)
    else:
        times, hs = run_model(model, wave, config, output_steps=out)
    return times, np.array([h.values for h in hs])


# ---------------------------------------------------------------- convergence


@dataclass
class ModelConvergence:
    model: str
    eps: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # eps-scaled L^2(0, 2 pi) errors
    flagged: list = field(default_factory=list)  # (eps, reason) pairs excluded from the fit
    slope: float = float("nan")
    prefactor: float = float("nan")  # free least-squares fit err ~ prefactor * eps^slope
    order: int | None = None
    fixed_prefactor: float = float("nan")  # fit with the slope pinned at ``order``

    @property
    def unscaled_slope(self) -> float:
        """Slope of the unscaled error, one more than the eps-scaled slope."""
        return self.slope + 1.0

    @property
    def fixed_prefactor_rms(self) -> float:
        """``fixed_prefactor`` in the root-mean-square norm."""
        return self.fixed_prefactor / math.sqrt(2 * math.pi)

    @property
    def slope_defined(self) -> bool:
        return bool(np.isfinite(self.slope))


@dataclass
class ConvergenceReport:
    config: ExperimentConfig
    models: dict = field(default_factory=dict)
    runtime: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "metadata": {
                "example": self.config.example,
                "n": self.config.n if self.config.example == 2 else None,
                "M": self.config.M,
                "steps": self.config.steps,
                "t_final": self.config.t_final,
                "g": self.config.g,
                "lambda": self.config.lam,
                "atwood": self.config.atwood,
                "filter": self.config.filter,
                "nu": self.config.nu,
                "reference": self.config.reference,
                "ref_M": self.config.ref_M,
                "ref_steps": self.config.ref_steps,
                "error_norm": "L2(0, 2pi) scaled by 1/eps; *_rms values divide by sqrt(2 pi)",
            },
            "models": {},
        }
        for name, mc in self.models.items():
            out["models"][name] = {
                "eps": mc.eps,
                "errors": mc.errors,
                "slope": _json_float(mc.slope),
                "unscaled_slope": _json_float(mc.unscaled_slope),
                "prefactor": _json_float(mc.prefactor),
                "order": mc.order,
                "fixed_prefactor": _json_float(mc.fixed_prefactor),
                "fixed_prefactor_rms": _json_float(mc.fixed_prefactor_rms),
                "flagged": [{"eps": e, "reason": r} for e, r in mc.flagged],
            }
        return out


def _json_float(v):
    return float(v) if np.isfinite(v) else None


def fit_loglog(eps, errors):
    """Least-squares ``log err = slope log eps + log prefactor``; NaNs when undefined.

    The fit is undefined with fewer than two points or with any zero error.
    """
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.size < 2 or np.any(errors <= 0) or np.unique(eps).size < 2:
        return float("nan"), float("nan")
    slope, icpt = np.polyfit(np.log(eps), np.log(errors), 1)
    return float(slope), float(np.exp(icpt))


def _fixed_slope_prefactor(eps, errors, order):
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if order is None or eps.size == 0 or np.any(errors <= 0):
        return float("nan")
    return float(np.exp(np.mean(np.log(errors) - order * np.log(eps))))


def _run_point(task):
    """One sweep point; returns ``(key, h coefficients or None, reason, seconds)``."""
    config, who, eps = task
    t0 = time.perf_counter()
    try:
        if who == "reference":
            grid = PeriodicGrid(config.ref_M if config.reference == "euler" else config.M)
            wave, surf = initial_states(config.example, eps, grid, config.n)
            if config.reference == "euler":
                _, hs = run_reference(surf, config)
            else:
                _, hs = run_model(config.reference, wave, config)
        else:
            grid = PeriodicGrid(config.M)
            wave, _ = initial_states(config.example, eps, grid, config.n)
            _, hs = run_model(who, wave, config)
        return (who, eps), hs[-1], None, time.perf_counter() - t0
    except NUMERICAL_FAILURES as exc:
        return (who, eps), None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0


def convergence_study(config: ExperimentConfig, progress=None) -> ConvergenceReport:
    """Errors of each model against the reference at ``t_final`` for every eps.

    Runs that fail numerically are flagged, excluded from the fits and
    reported with a warning.  ``progress(who, eps, seconds)`` is called after
    every run.
    """
    tasks = [(config, "reference", e) for e in config.eps_list]
    tasks += [(config, m, e) for m in config.models for e in config.eps_list]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = []
        for task in tasks:
            results.append(_run_point(task))
            if progress is not None:
                key, _, _, sec = results[-1]
                progress(key[0], key[1], sec)
    final = {key: (h, reason) for key, h, reason, _ in results}
    report = ConvergenceReport(config)
    for key, _, _, sec in results:
        report.runtime[f"{key[0]}@{key[1]:g}"] = round(sec, 3)
    grid = PeriodicGrid(config.M)
    for model in config.models:
        mc = ModelConvergence(model, order=_NOMINAL_ORDER.get(model))
        for eps in config.eps_list:
            ref, ref_reason = final[("reference", eps)]
            h, reason = final[(model, eps)]
            why = reason or (f"reference failed: {ref_reason}" if ref is None else None)
            if why is not None:
                warnings.warn(f"{model} at eps={eps:g} excluded from the fit: {why}", RuntimeWarning)
                mc.flagged.append((eps, why))
                continue
            mc.eps.append(eps)
            mc.errors.append(scaled_l2_error(h, resample(ref, grid), eps))
        if len(mc.eps) < 3:
            warnings.warn(f"{model}: fewer than 3 usable points, slope is not reliable", RuntimeWarning)
        mc.slope, mc.prefactor = fit_loglog(mc.eps, mc.errors)
        mc.fixed_prefactor = _fixed_slope_prefactor(mc.eps, mc.errors, mc.order)
        report.models[model] = mc
    return report


# ---------------------------------------------------------------- output


def write_trajectory_csv(path: str, times, values) -> None:
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x_{j}" for j in range(values.shape[1])])
        for t, row in zip(times, values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def write_report_csv(path: str, report: ConvergenceReport) -> None:
    """Rows ``model, eps, error, slope_running`` (slope over the points so far)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "eps", "error", "slope_running"])
        for name, mc in report.models.items():
            for i, (e, err) in enumerate(zip(mc.eps, mc.errors)):
                slope, _ = fit_loglog(mc.eps[: i + 1], mc.errors[: i + 1])
                w.writerow([name, repr(e), repr(err), "" if not np.isfinite(slope) else repr(slope)])


def write_report_json(path: str, report: ConvergenceReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")

