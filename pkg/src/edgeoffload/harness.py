"""Reproducible benchmark harness.

Generates random scenarios in three data-rate regimes, runs the relaxation
pipeline with and without compression (and the exact oracle when the
instance is small enough), and emits one CSV row per run.  Every random
draw is keyed by (seed, rate range, task count, realization), so rows are
independent of execution order and a repeated run is bit-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .model import Cap, Device, Instance, Task, objective
from .oracle import solve_exact
from .rounding import RoundingOptions, run_algorithm1
from .sdp import SdpSolverError

__all__ = [
    "RATE_RANGES",
    "ScenarioTemplate",
    "ExperimentConfig",
    "ResultRow",
    "AggregateRow",
    "ConfigError",
    "CSV_HEADER",
    "default_instance_template",
    "sample_realization",
    "run_benchmark",
    "aggregate",
    "write_csv",
    "rows_to_csv",
    "config_from_json",
    "config_to_json",
]

# uplink/downlink rate regimes, bits/s
RATE_RANGES: dict[str, tuple[float, float]] = {
    "low": (0.5e6, 1.0e6),
    "mid": (1.0e6, 2.0e6),
    "high": (2.0e6, 10.0e6),
}
_RANGE_INDEX = {name: idx for idx, name in enumerate(RATE_RANGES)}

CSV_HEADER = (
    "rate_range,n_tasks,realization,scheme,psi,latency_s,energy_j,gamma,"
    "sdr_lower_bound,iterations,wall_ms,status"
)

SCHEME_COMPRESS = "sdr_compress"
SCHEME_NOCOMPRESS = "sdr_nocompress"
SCHEME_ORACLE = "oracle"


class ConfigError(ValueError):
    """Raised for malformed experiment or instance configuration."""


@dataclass(frozen=True)
class ScenarioTemplate:
    """Fixed scenario parameters of the simulation setup.

    Tasks are homogeneous: every input is ``alpha`` bits, outputs are
    ``beta_ratio`` of the input, and the work is ``kappa`` cycles per input
    bit.  Per-realization draws cover the link rates and the compression
    cost parameters (jc in cycles/bit, ec in J/cycle).
    """

    r0: float = 400e6
    p_comp: float = 0.8
    p_tx: float = 1.258
    p_rx: float = 1.181
    kappa: float = 330.0
    alpha: float = 4e6
    beta_ratio: float = 0.2
    cap_rates: tuple[float, ...] = (2e9, 2.2e9)
    lambda_t: float = 0.5
    lambda_e: float = 0.5
    jc_range: tuple[float, float] = (200.0, 500.0)
    ec_range: tuple[float, float] = (10e-11, 20e-11)

    @property
    def omega(self) -> float:
        return self.kappa * self.alpha

    @property
    def beta(self) -> float:
        return self.beta_ratio * self.alpha


def default_instance_template() -> ScenarioTemplate:
    """The reference scenario parameters."""
    return ScenarioTemplate()


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run: a rate regime swept over task counts.

    The exact oracle is run alongside whenever (M+1)^N stays within
    ``oracle_limit`` (0 disables it).  ``record_timing`` keeps wall-clock
    columns at 0 by default so repeated runs stay bit-identical.
    """

    rate_range: str
    seed: int
    n_tasks: tuple[int, ...] = tuple(range(1, 11))
    realizations: int = 50
    template: ScenarioTemplate = field(default_factory=ScenarioTemplate)
    rounding: RoundingOptions = field(default_factory=lambda: RoundingOptions(refine_gamma=True))
    oracle_limit: int = 1000
    record_timing: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_tasks", tuple(int(n) for n in self.n_tasks))
        if self.rate_range not in RATE_RANGES:
            raise ConfigError(
                f"rate_range must be one of {sorted(RATE_RANGES)}, got {self.rate_range!r}"
            )
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")
        if not self.n_tasks or any(n < 1 for n in self.n_tasks):
            raise ConfigError(f"n_tasks sweep must be non-empty positive, got {self.n_tasks}")


@dataclass(frozen=True)
class ResultRow:
    rate_range: str
    n_tasks: int
    realization: int
    scheme: str
    psi: float
    latency_s: float
    energy_j: float
    gamma: float
    sdr_lower_bound: float
    iterations: int
    wall_ms: float
    status: str

    def csv_line(self) -> str:
        return (
            f"{self.rate_range},{self.n_tasks},{self.realization},{self.scheme},"
            f"{self.psi!r},{self.latency_s!r},{self.energy_j!r},{self.gamma!r},"
            f"{self.sdr_lower_bound!r},{self.iterations},{self.wall_ms!r},{self.status}"
        )


@dataclass(frozen=True)
class AggregateRow:
    rate_range: str
    n_tasks: int
    scheme: str
    count: int
    mean_psi: float
    std_psi: float
    mean_gamma: float
    mean_ratio_to_oracle: float


def sample_realization(config: ExperimentConfig, n_tasks: int, rng: np.random.Generator) -> Instance:
    """Draw one instance: compression costs first, then per-cap link rates."""
    tpl = config.template
    lo, hi = RATE_RANGES[config.rate_range]
    jc = float(rng.uniform(*tpl.jc_range))
    ec = float(rng.uniform(*tpl.ec_range))
    device = Device(r0=tpl.r0, p_comp=tpl.p_comp, p_tx=tpl.p_tx, p_rx=tpl.p_rx, jc=jc, ec=ec)
    caps = tuple(
        Cap(r=rate, c_ul=float(rng.uniform(lo, hi)), c_dl=float(rng.uniform(lo, hi)))
        for rate in tpl.cap_rates
    )
    tasks = tuple(Task(alpha=tpl.alpha, beta=tpl.beta, omega=tpl.omega) for _ in range(n_tasks))
    return Instance(device=device, caps=caps, tasks=tasks, lambda_t=tpl.lambda_t, lambda_e=tpl.lambda_e)


def _job_rng(config: ExperimentConfig, n: int, realization: int) -> np.random.Generator:
    return np.random.default_rng(
        (config.seed, _RANGE_INDEX[config.rate_range], n, realization)
    )


def _rounding_seed(config: ExperimentConfig, n: int, realization: int, scheme_code: int) -> int:
    ss = np.random.SeedSequence(
        (config.seed, _RANGE_INDEX[config.rate_range], n, realization, scheme_code)
    )
    return int(ss.generate_state(1)[0])


def _scheme_row(
    config: ExperimentConfig,
    instance: Instance,
    n: int,
    realization: int,
    scheme: str,
    pin_gamma_zero: bool,
) -> ResultRow:
    opts = replace(
        config.rounding,
        seed=_rounding_seed(config, n, realization, 1 if pin_gamma_zero else 0),
    )
    start = time.perf_counter() if config.record_timing else 0.0
    try:
        report = run_algorithm1(instance, opts, pin_gamma_zero=pin_gamma_zero)
    except SdpSolverError:
        return ResultRow(
            config.rate_range, n, realization, scheme,
            float("nan"), float("nan"), float("nan"), float("nan"),
            float("nan"), 0, 0.0, "numerical-failure",
        )
    wall_ms = (time.perf_counter() - start) * 1e3 if config.record_timing else 0.0
    return ResultRow(
        rate_range=config.rate_range,
        n_tasks=n,
        realization=realization,
        scheme=scheme,
        psi=report.psi,
        latency_s=report.breakdown.latency,
        energy_j=report.breakdown.energy,
        gamma=report.gamma,
        sdr_lower_bound=report.sdr_lower_bound,
        iterations=report.solver_iterations,
        wall_ms=wall_ms,
        status=report.solver_status,
    )


def run_benchmark(config: ExperimentConfig) -> list[ResultRow]:
    """All rows of one benchmark run, sorted for stable output."""
    rows: list[ResultRow] = []
    m = len(config.template.cap_rates)
    for n in config.n_tasks:
        for realization in range(config.realizations):
            instance = sample_realization(config, n, _job_rng(config, n, realization))
            rows.append(_scheme_row(config, instance, n, realization, SCHEME_COMPRESS, False))
            rows.append(_scheme_row(config, instance, n, realization, SCHEME_NOCOMPRESS, True))
            if config.oracle_limit > 0 and (m + 1) ** n <= config.oracle_limit:
                start = time.perf_counter() if config.record_timing else 0.0
                result = solve_exact(instance, max_assignments=config.oracle_limit)
                wall_ms = (time.perf_counter() - start) * 1e3 if config.record_timing else 0.0
                bd = objective(instance, result.decision)
                rows.append(
                    ResultRow(
                        config.rate_range, n, realization, SCHEME_ORACLE,
                        result.psi_p1, bd.latency, bd.energy, result.decision.gamma,
                        float("nan"), 0, wall_ms, "exact",
                    )
                )
    rows.sort(key=lambda r: (r.rate_range, r.n_tasks, r.realization, r.scheme))
    return rows


def rows_to_csv(rows: list[ResultRow]) -> str:
    return CSV_HEADER + "\n" + "".join(row.csv_line() + "\n" for row in rows)


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(rows_to_csv(rows))


def aggregate(rows: list[ResultRow]) -> list[AggregateRow]:
    """Mean/stddev per (rate range, task count, scheme).

    The stddev is the sample standard deviation, 0 for a single row.  Where
    oracle rows exist, the compression scheme additionally reports the mean
    of its per-realization psi ratio against the oracle.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    groups: dict[tuple[str, int, str], list[ResultRow]] = {}
    oracle_psi: dict[tuple[str, int, int], float] = {}
    for row in rows:
        groups.setdefault((row.rate_range, row.n_tasks, row.scheme), []).append(row)
        if row.scheme == SCHEME_ORACLE:
            oracle_psi[(row.rate_range, row.n_tasks, row.realization)] = row.psi
    out: list[AggregateRow] = []
    for (rate_range, n, scheme) in sorted(groups):
        members = groups[(rate_range, n, scheme)]
        psis = np.array([r.psi for r in members])
        gammas = np.array([r.gamma for r in members])
        std = float(np.std(psis, ddof=1)) if psis.size > 1 else 0.0
        ratios = [
            r.psi / oracle_psi[(rate_range, n, r.realization)]
            for r in members
            if scheme == SCHEME_COMPRESS and (rate_range, n, r.realization) in oracle_psi
        ]
        out.append(
            AggregateRow(
                rate_range=rate_range,
                n_tasks=n,
                scheme=scheme,
                count=len(members),
                mean_psi=float(np.mean(psis)),
                std_psi=std,
                mean_gamma=float(np.mean(gammas)),
                mean_ratio_to_oracle=float(np.mean(ratios)) if ratios else float("nan"),
            )
        )
    return out


_CONFIG_SCALARS = {"rate_range", "seed", "realizations", "oracle_limit", "record_timing"}


def config_to_json(config: ExperimentConfig) -> str:
    payload = asdict(config)
    payload["n_tasks"] = list(config.n_tasks)
    payload["template"]["cap_rates"] = list(config.template.cap_rates)
    payload["template"]["jc_range"] = list(config.template.jc_range)
    payload["template"]["ec_range"] = list(config.template.ec_range)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _strict_kwargs(payload: dict, cls, context: str) -> dict:
    allowed = {f.name for f in fields(cls)}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {sorted(unknown)}")
    return payload


def config_from_json(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse an experiment config; unknown keys are rejected."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{source}: top level must be an object")
    payload = dict(payload)
    template_payload = payload.pop("template", None)
    rounding_payload = payload.pop("rounding", None)
    kwargs = _strict_kwargs(payload, ExperimentConfig, source)
    if "n_tasks" in kwargs:
        kwargs["n_tasks"] = tuple(kwargs["n_tasks"])
    if template_payload is not None:
        tp = dict(template_payload)
        for key in ("cap_rates", "jc_range", "ec_range"):
            if key in tp:
                tp[key] = tuple(tp[key])
        kwargs["template"] = ScenarioTemplate(**_strict_kwargs(tp, ScenarioTemplate, f"{source}: template"))
    if rounding_payload is not None:
        kwargs["rounding"] = RoundingOptions(
            **_strict_kwargs(dict(rounding_payload), RoundingOptions, f"{source}: rounding")
        )
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
