"""Synthetic benchmark: target/source generators, Monte Carlo driver and
result aggregation.

Every random draw comes from a generator keyed by
``(base_seed, trial, stream_tag)``, so trials can run in any order or in
parallel and still produce identical output.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.signal import lfilter

from ._random import keyed_rng
from .alignment import expand
from .estimators import (
    multisource_input,
    target_multisource_input,
    target_unisource_input,
    transfer_input,
)
from .selection import SelectionConfig, detect_informative, refine_subset
from .signal import Penalty, PenaltySpec, SourceDataset, _freeze, mse_loss
from .solvers import solve
from .tuning import CvSpec, PermutationSpec, default_grid, cv_select_lambda, permutation_threshold

__all__ = [
    "Scenario",
    "Configuration",
    "ScenarioSpec",
    "ConfigurationSpec",
    "TrialResult",
    "MethodSummary",
    "METHODS",
    "DEFAULT_METHODS",
    "gen_target",
    "gen_sources",
    "ar1_filter",
    "run_trial",
    "run_monte_carlo",
    "summarize",
    "results_to_csv",
    "summary_to_csv",
    "format_summary",
    "worker_count",
]

BASE_N0 = 200
EQUAL_CPS = (25, 50, 75, 100, 125, 150, 175)
UNEQUAL_CPS = (20, 40, 50, 120, 134, 160, 176)
LEVEL_MULTIPLIERS = (2, 4, 1, 5, 7, 8, 2, 1)

# stream tags
_TAG_TARGET = 0
_TAG_SOURCE_NOISE = 1000
_TAG_DELTA = 2000
_TAG_PERMUTATION = 3000

WORKERS_ENV = "PCTRANSFER_WORKERS"


class Scenario(enum.IntEnum):
    EQUALLY_SPACED = 1
    UNEQUALLY_SPACED = 2


class Configuration(enum.IntEnum):
    DETERMINISTIC = 1
    GAUSSIAN = 2


@dataclass(frozen=True)
class ScenarioSpec:
    """Target signal design.

    ``reference_design`` pins ``n0 = 200``; otherwise the base changepoints
    (defined for length 200) are rescaled to ``n0``.
    """

    scenario: Scenario = Scenario.EQUALLY_SPACED
    gamma: float = 0.5
    n0: int = 200
    sigma: float = 0.5
    rho_noise: float = 0.0
    reference_design: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if int(self.n0) < 1:
            raise ValueError(f"n0 must be >= 1, got {self.n0}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.rho_noise < 1.0:
            raise ValueError(f"rho_noise must lie in [0, 1), got {self.rho_noise}")
        if self.reference_design and self.n0 != BASE_N0:
            raise ValueError(f"reference-design mode requires n0 = {BASE_N0}, got {self.n0}")
        object.__setattr__(self, "n0", int(self.n0))
        cps = self.changepoints()
        if any(b <= a for a, b in zip((0,) + cps, cps + (self.n0,))):
            raise ValueError(f"n0={self.n0} is too short to hold the scenario's changepoints")

    def changepoints(self) -> tuple:
        """1-based changepoint positions: ``f_i != f_{i+1}`` for each listed ``i``."""
        base = EQUAL_CPS if self.scenario is Scenario.EQUALLY_SPACED else UNEQUAL_CPS
        if self.n0 == BASE_N0:
            return base
        return tuple(int(round(c * self.n0 / BASE_N0)) for c in base)

    def truth(self) -> np.ndarray:
        bounds = (0,) + self.changepoints() + (self.n0,)
        f = np.empty(self.n0)
        for lo, hi, mult in zip(bounds[:-1], bounds[1:], LEVEL_MULTIPLIERS):
            f[lo:hi] = mult * self.gamma
        return _freeze(f)


@dataclass(frozen=True)
class ConfigurationSpec:
    """Source design.

    ``alpha``/``alpha_tilde`` are the offsets for informative and
    non-informative sources in the deterministic configuration, and the
    discrepancy variances (kappa, kappa tilde) in the Gaussian one.
    ``alpha_tilde=None`` uses 2 (deterministic) or 5 (Gaussian).
    ``source_lens=None`` gives every source length ``2 * n0``.
    """

    configuration: Configuration = Configuration.DETERMINISTIC
    informative: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    alpha: float = 0.2
    alpha_tilde: Optional[float] = None
    H: float = 0.15
    rho_delta: float = 0.0
    K: int = 10
    source_lens: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "configuration", Configuration(self.configuration))
        k = int(self.K)
        if k < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        inf = tuple(sorted(set(int(i) for i in self.informative)))
        if any(not 1 <= i <= k for i in inf):
            raise ValueError(f"informative set {inf} is not a subset of 1..{k}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.alpha_tilde is not None and not self.alpha_tilde >= 0:
            raise ValueError(f"alpha_tilde must be >= 0, got {self.alpha_tilde}")
        if not 0.0 <= self.H <= 1.0:
            raise ValueError(f"H must lie in [0, 1], got {self.H}")
        if not 0.0 <= self.rho_delta < 1.0:
            raise ValueError(f"rho_delta must lie in [0, 1), got {self.rho_delta}")
        if self.source_lens is not None:
            lens = tuple(int(m) for m in self.source_lens)
            if len(lens) != k or any(m < 1 for m in lens):
                raise ValueError(f"need {k} positive source lengths, got {lens}")
            object.__setattr__(self, "source_lens", lens)
        object.__setattr__(self, "K", k)
        object.__setattr__(self, "informative", inf)

    @property
    def offset_out(self) -> float:
        if self.alpha_tilde is not None:
            return float(self.alpha_tilde)
        return 2.0 if self.configuration is Configuration.DETERMINISTIC else 5.0

    def lengths(self, n0: int) -> tuple:
        return self.source_lens if self.source_lens is not None else (2 * n0,) * self.K

    def first_informative(self) -> int:
        if not self.informative:
            raise ValueError("method needs a nonempty informative set")
        return self.informative[0]


def ar1_filter(innov: np.ndarray, rho: float) -> np.ndarray:
    """``e_1 = x_1``, ``e_i = rho*e_{i-1} + (1 - rho)*x_i``; ``rho=0`` returns ``x``."""
    x = np.asarray(innov, dtype=np.float64)
    if rho == 0.0 or x.size < 2:
        return x.copy()
    out = np.empty_like(x)
    out[0] = x[0]
    out[1:], _ = lfilter([1.0 - rho], [1.0, -rho], x[1:], zi=[rho * x[0]])
    return out


def gen_target(spec: ScenarioSpec, seed: int, trial: int = 0):
    """Return ``(truth, data)`` for one trial."""
    f = spec.truth()
    eps = keyed_rng(seed, trial, _TAG_TARGET).normal(0.0, 1.0, spec.n0) * spec.sigma
    data = f + ar1_filter(eps, spec.rho_noise)
    return f, _freeze(data)


def gen_sources(
    truth,
    spec: ConfigurationSpec,
    sigma: float,
    seed: int,
    trial: int = 0,
    rho_noise: float = 0.0,
) -> list:
    """Source datasets for one trial, with known truths attached.

    Source ``k`` has truth ``expand(f, n_k)`` plus its discrepancy on the
    first ``floor(H * n_k)`` indices, and data equal to truth plus iid or
    AR(1) noise.
    """
    f = np.asarray(truth, dtype=np.float64)
    lens = spec.lengths(f.size)
    out = []
    for k, nk in enumerate(lens, start=1):
        informative = k in spec.informative
        base = expand(f, nk)
        h = int(math.floor(spec.H * nk + 1e-9))
        delta = np.zeros(nk)
        if spec.configuration is Configuration.DETERMINISTIC:
            delta[:h] = spec.alpha if informative else spec.offset_out
        else:
            var = spec.alpha if informative else spec.offset_out
            draws = keyed_rng(seed, trial, _TAG_DELTA + k).normal(0.0, 1.0, nk) * math.sqrt(var)
            delta[:h] = ar1_filter(draws, spec.rho_delta)[:h]
        fk = _freeze(base + delta)
        eps = keyed_rng(seed, trial, _TAG_SOURCE_NOISE + k).normal(0.0, 1.0, nk) * sigma
        yk = _freeze(fk + ar1_filter(eps, rho_noise))
        out.append(SourceDataset(yk, index=k, truth=fk))
    return out


# ---------------------------------------------------------------- methods


@dataclass
class _TrialContext:
    y: np.ndarray
    truth: np.ndarray
    sources: list
    config: ConfigurationSpec
    grids: dict
    selection: "SelectionSettings"
    perm_seed: int
    cv_folds: int
    _a_hat: Optional[tuple] = None

    def by_index(self, idx: Iterable[int]) -> list:
        return [self.sources[i - 1] for i in idx]

    def a_hat(self) -> tuple:
        if self._a_hat is None:
            widths = [min(self.selection.screen_width, s.n) for s in self.sources]
            perm = PermutationSpec(
                B=self.selection.B, q=self.selection.q, rng_seed=self.perm_seed
            )
            tau = permutation_threshold(self.y, self.sources, widths, perm)
            cfg = SelectionConfig(tuple(widths), (tau,) * len(self.sources))
            self._a_hat = detect_informative(self.y, self.sources, cfg)
        return self._a_hat

    def fit(self, v, kind: Penalty) -> np.ndarray:
        lam = cv_select_lambda(v, kind, CvSpec(self.cv_folds, tuple(self.grids[kind])))
        return solve(v, PenaltySpec(kind, lam))


@dataclass(frozen=True)
class SelectionSettings:
    """Screening width and permutation settings used for detected sets."""

    screen_width: int = 50
    B: int = 1000
    q: float = 0.999


def _target_only(ctx, kind):
    return ctx.fit(ctx.y, kind), None


def _unisource_first(ctx, kind):
    k = ctx.config.first_informative()
    return ctx.fit(transfer_input(ctx.sources[k - 1], ctx.y.size), kind), (k,)


def _multi(ctx, kind, idx):
    if not idx:
        return ctx.fit(ctx.y, kind), ()
    return ctx.fit(multisource_input(ctx.by_index(idx), ctx.y.size), kind), tuple(idx)


def _oracle_set(ctx, kind):
    ctx.config.first_informative()  # raises on an empty informative set
    return _multi(ctx, kind, ctx.config.informative)


def _detected(ctx, kind):
    return _multi(ctx, kind, ctx.a_hat())


def _detected_refined(ctx, kind):
    a_hat = ctx.a_hat()
    if not a_hat:
        return _multi(ctx, kind, ())
    lens = {s.index: s.n for s in ctx.sources}
    return _multi(ctx, kind, refine_subset(a_hat, lens))


def _all_sources(ctx, kind):
    return _multi(ctx, kind, tuple(s.index for s in ctx.sources))


def _all_refined(ctx, kind):
    lens = {s.index: s.n for s in ctx.sources}
    return _multi(ctx, kind, refine_subset(tuple(lens), lens))


def _target_unisource(ctx, kind):
    k = ctx.config.first_informative()
    return ctx.fit(target_unisource_input(ctx.y, ctx.sources[k - 1]), kind), (k,)


def _target_multisource(ctx, kind):
    v = target_multisource_input(ctx.y, ctx.sources)
    return ctx.fit(v, kind), tuple(s.index for s in ctx.sources)


def _registry() -> dict:
    table = {}
    for pen in Penalty:
        p = pen.value
        table[p] = (pen, _target_only)
        table[f"{p}-T-1"] = (pen, _unisource_first)
        table[f"{p}-T-A"] = (pen, _oracle_set)
        table[f"{p}-T-Ahat"] = (pen, _detected)
        table[f"{p}-T-Atilde"] = (pen, _detected_refined)
        table[f"{p}-T-K"] = (pen, _all_sources)
        table[f"{p}-T-Ktilde"] = (pen, _all_refined)
    table["l0-T-01"] = (Penalty.L0, _target_unisource)
    table["l0-T-0K"] = (Penalty.L0, _target_multisource)
    return table


METHODS: dict = _registry()
"""Method name -> (penalty, pipeline). ``T-1`` uses the first informative
source, ``T-A`` the true informative set, ``T-Ahat`` the detected set,
``T-K`` all sources; ``tilde`` variants refine the set first;
``T-01``/``T-0K`` also merge the target data."""

DEFAULT_METHODS = tuple(
    f"{p}{suffix}" for p in ("l1", "l0") for suffix in ("", "-T-1", "-T-A", "-T-Ahat", "-T-K")
)


@dataclass(frozen=True)
class TrialResult:
    method: str
    trial: int
    loss: float
    selected_set: Optional[tuple]
    seed: int

    def __post_init__(self):
        if not self.loss >= 0:
            raise ValueError(f"loss must be >= 0, got {self.loss}")


def _check_methods(methods: Sequence[str]) -> tuple:
    methods = tuple(methods)
    if not methods:
        raise ValueError("no methods requested")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}; known: {sorted(METHODS)}")
    return methods


def _perm_seed(base_seed: int, trial: int) -> int:
    state = np.random.SeedSequence([base_seed, trial, _TAG_PERMUTATION]).generate_state(1, np.uint64)
    return int(state[0])


def run_trial(
    scenario: ScenarioSpec,
    configuration: ConfigurationSpec,
    methods: Sequence[str],
    trial: int,
    base_seed: int = 0,
    selection: SelectionSettings = SelectionSettings(),
    cv_folds: int = 5,
) -> list:
    """Run every method on one freshly generated trial."""
    methods = _check_methods(methods)
    truth, y = gen_target(scenario, base_seed, trial)
    sources = gen_sources(
        truth, configuration, scenario.sigma, base_seed, trial, scenario.rho_noise
    )
    # one CV grid per penalty per trial, derived from the target data
    grid = tuple(default_grid(y))
    ctx = _TrialContext(
        y=y,
        truth=truth,
        sources=sources,
        config=configuration,
        grids={Penalty.L1: grid, Penalty.L0: grid},
        selection=selection,
        perm_seed=_perm_seed(base_seed, trial),
        cv_folds=cv_folds,
    )
    out = []
    for name in methods:
        kind, pipeline = METHODS[name]
        est, used = pipeline(ctx, kind)
        out.append(TrialResult(name, trial, mse_loss(est, truth), used, base_seed))
    return out


def worker_count(requested: Optional[int] = None) -> int:
    """Worker processes: explicit value, else ``$PCTRANSFER_WORKERS``, else 1."""
    if requested is not None:
        n = int(requested)
    else:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        try:
            n = int(raw) if raw else 1
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    return n


def _trial_job(args):
    return run_trial(*args)


def run_monte_carlo(
    scenario: ScenarioSpec,
    configuration: ConfigurationSpec,
    methods: Sequence[str] = DEFAULT_METHODS,
    trials: int = 100,
    base_seed: int = 0,
    selection: SelectionSettings = SelectionSettings(),
    cv_folds: int = 5,
    workers: Optional[int] = None,
) -> list:
    """Run ``trials`` independent trials; results sorted by (method, trial).

    Output depends only on the arguments, never on ``workers``.
    """
    if int(trials) < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    methods = _check_methods(methods)
    jobs = [
        (scenario, configuration, methods, t, base_seed, selection, cv_folds)
        for t in range(int(trials))
    ]
    n_workers = min(worker_count(workers), len(jobs))
    if n_workers == 1:
        chunks = [_trial_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_trial_job, jobs))
    results = [r for chunk in chunks for r in chunk]
    results.sort(key=lambda r: (r.method, r.trial))
    return results


# ---------------------------------------------------------------- reporting


@dataclass(frozen=True)
class MethodSummary:
    method: str
    mean: float
    se: float
    n: int


def summarize(results: Sequence[TrialResult]) -> list:
    """Per-method mean loss and standard error ``sd / sqrt(N)`` (0 when N = 1)."""
    if not results:
        raise ValueError("cannot summarise an empty result list")
    groups: dict = {}
    for r in results:
        groups.setdefault(r.method, []).append(r.loss)
    out = []
    for name in sorted(groups):
        losses = np.asarray(groups[name])
        n = losses.size
        se = float(np.std(losses, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append(MethodSummary(name, float(np.mean(losses)), se, n))
    return out


def _format_set(s: Optional[tuple]) -> str:
    if s is None:
        return ""
    if not s:
        return "EMPTY"
    return ";".join(str(k) for k in s)


def results_to_csv(results: Sequence[TrialResult]) -> str:
    """CSV text with columns method, trial, loss, selected_set, seed."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "trial", "loss", "selected_set", "seed"])
    for r in sorted(results, key=lambda r: (r.method, r.trial)):
        w.writerow([r.method, r.trial, repr(float(r.loss)), _format_set(r.selected_set), r.seed])
    return buf.getvalue()


def summary_to_csv(summary: Sequence[MethodSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "mean_loss", "se", "trials"])
    for s in summary:
        w.writerow([s.method, repr(float(s.mean)), repr(float(s.se)), s.n])
    return buf.getvalue()


def format_summary(summary: Sequence[MethodSummary]) -> str:
    """Human-readable summary table."""
    width = max(len("method"), *(len(s.method) for s in summary))
    lines = [f"{'method':<{width}}  {'mean loss':>12}  {'se':>12}  {'N':>5}"]
    for s in summary:
        lines.append(f"{s.method:<{width}}  {s.mean:>12.6g}  {s.se:>12.6g}  {s.n:>5}")
    return "\n".join(lines)
