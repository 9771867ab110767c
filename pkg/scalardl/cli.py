"""
Config-driven experiment runner.

    scalardl run cfg.json            λ × seed sweep, per-cell traces and a summary
    scalardl check-bounds cfg.json   seed-replicated bound check per λ
    scalardl pareto cfg.json         grid Pareto front and certificates
    scalardl parse-idx FILE          IDX header as JSON
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from scalardl import data as datasets
from scalardl import metrics, theory
from scalardl.core import ContractError, DimensionError, DomainError, ResourceError, RngStream
from scalardl.objectives import (
    DatasetHandle,
    NoiseModel,
    Objective,
    Quadratic,
    ScaledSqNorm,
    SoftmaxCE,
    random_quadratics,
)
from scalardl.scalarization import (
    CompositeObjective,
    GridSpec,
    brute_force_front,
    check_pareto,
    check_weak_pareto,
    grid_argmin,
)
from scalardl.trainer import DivergenceError, TrainConfig, replicate, run
from scalardl.utils import Stopwatch, config_hash, fmt_float, run_in_threads

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 0.65, 0.75, 0.87)
SUMMARY_COLUMNS = [
    "lambda",
    "seed",
    "status",
    "test_accuracy",
    "test_f1",
    "final_gap",
    "max_drift",
    "config_hash",
]

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QuadraticInstance(StrictModel):
    kind: Literal["quadratic"]
    m_agents: int = Field(2, ge=1)
    dim: int = Field(1, ge=1)
    # explicit agent centers; random N(0, spread²·I) centers otherwise
    centers: Optional[List[List[float]]] = None
    spread: float = Field(1.0, ge=0)
    curvature: float = Field(1.0, gt=0)
    init: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.centers is not None:
            if len(self.centers) != self.m_agents:
                raise ValueError(f"{len(self.centers)} centers for {self.m_agents} agents")
            if any(len(c) != self.dim for c in self.centers):
                raise ValueError(f"every center needs {self.dim} coordinates")
        if self.init is not None and len(self.init) != self.dim:
            raise ValueError(f"init needs {self.dim} coordinates")
        return self


class SoftmaxInstance(StrictModel):
    kind: Literal["softmax"]
    m_agents: int = Field(5, ge=1)
    dim: int = Field(2, ge=1)
    n_classes: int = Field(3, ge=2)
    separation: float = Field(1.0, ge=0)
    n_per_agent: int = Field(500, ge=1)
    n_test_per_agent: int = Field(200, ge=1)
    l2: float = Field(1e-3, ge=0)


class MnistInstance(StrictModel):
    kind: Literal["mnist"]
    m_agents: int = Field(5, ge=1)
    train_images: str
    train_labels: str
    test_images: str
    test_labels: str
    train_per_agent: int = Field(8000, ge=1)
    val_per_agent: int = Field(2000, ge=0)
    l2: float = Field(0.0, ge=0)


Instance = Annotated[
    Union[QuadraticInstance, SoftmaxInstance, MnistInstance], Field(discriminator="kind")
]


class TrainerSection(StrictModel):
    rounds: int = Field(50, ge=1)
    local_epochs: int = Field(1, ge=1)
    lr: Optional[float] = Field(0.001, ge=0)
    schedule: Literal["fixed", "theorem2"] = "fixed"
    parallel_agents: bool = False
    restart_from_init: bool = False
    # None: one pass over the local shard in minibatch mode, else 1
    steps_per_epoch: Optional[int] = Field(None, ge=1)
    check_lr: bool = False
    log_every: int = Field(0, ge=0)


class NoiseSection(StrictModel):
    sigma_c: float = Field(0.0, ge=0)
    sigma_s: float = Field(0.0, ge=0)
    distribution: Literal["gaussian", "zero"] = "gaussian"
    batch_size: Optional[int] = Field(None, ge=1)


class BoundsSection(StrictModel):
    n_seeds: int = Field(32, ge=1)
    probe_points: int = Field(1000, ge=1)
    # ζ probe radius around Θ⁰; default max(2·‖Θ⁰ − θ*‖, 1)
    probe_radius: Optional[float] = Field(None, gt=0)


class ParetoSection(StrictModel):
    lower: List[float]
    upper: List[float]
    num: List[int]
    tol: float = Field(1e-9, ge=0)
    radius: Optional[float] = Field(None, gt=0)


class ExperimentConfig(StrictModel):
    instance: Instance
    output_dir: str
    partition: Literal["iid", "label_pairs"] = "iid"
    pairs: Optional[Dict[int, Tuple[int, int]]] = None
    lambda_sweep: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDAS), min_length=1)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    # seeds instance construction (centers, blobs, partition), shared by all runs
    data_seed: int = 0
    coordinator_scale: Optional[float] = Field(None, ge=0)
    trainer: TrainerSection = Field(default_factory=TrainerSection)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    bounds: BoundsSection = Field(default_factory=BoundsSection)
    pareto: Optional[ParetoSection] = None

    @field_validator("lambda_sweep")
    @classmethod
    def _check_lambdas(cls, lams):
        for lam in lams:
            if lam >= 1.0:
                raise ValueError("lambda must be < 1")
            if lam < 0.0:
                raise ValueError("lambda must be >= 0")
        return lams

    @model_validator(mode="after")
    def _resolve_defaults(self):
        inst = self.instance
        if self.partition == "label_pairs" and inst.kind != "mnist":
            raise ValueError("label_pairs partition needs the mnist instance")
        if self.coordinator_scale is None:
            if inst.kind == "mnist":
                self.coordinator_scale = 1e7 if self.partition == "label_pairs" else 100.0
            else:
                self.coordinator_scale = 0.5
        if inst.kind == "mnist" and self.noise.batch_size is None:
            self.noise.batch_size = 32
        if self.trainer.steps_per_epoch is None:
            if inst.kind != "quadratic" and self.noise.batch_size is not None:
                n_local = inst.train_per_agent if inst.kind == "mnist" else inst.n_per_agent
                self.trainer.steps_per_epoch = math.ceil(n_local / self.noise.batch_size)
            else:
                self.trainer.steps_per_epoch = 1
        if self.trainer.schedule == "fixed" and self.trainer.lr is None:
            raise ValueError("fixed schedule needs trainer.lr")
        return self


def validate_config(raw: str) -> ExperimentConfig:
    payload = {}
    if raw.strip():
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        lines = [
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        ]
        raise ConfigError("\n".join(lines)) from e


def load_config(path) -> ExperimentConfig:
    return validate_config(Path(path).read_text(encoding="utf-8"))


def resolved_payload(cfg: ExperimentConfig) -> Dict:
    return cfg.model_dump(mode="json")


@dataclass
class Problem:
    """
    The agents/coordinator objectives of one config, built once for every
    (λ, seed) cell. `model` and `test` are None for quadratic instances.
    """

    kind: str
    comp: CompositeObjective
    init: np.ndarray
    model: Optional[SoftmaxCE] = None
    test: Optional[DatasetHandle] = None
    val: List[DatasetHandle] = field(default_factory=list)

    @property
    def synthetic(self) -> bool:
        return self.kind != "mnist"


def build_problem(cfg: ExperimentConfig) -> Problem:
    inst = cfg.instance
    gen = RngStream(cfg.data_seed).generator()
    sw = Stopwatch()
    if inst.kind == "quadratic":
        if inst.centers is not None:
            agents: List[Objective] = [Quadratic(c, inst.curvature) for c in inst.centers]
        else:
            agents = random_quadratics(inst.m_agents, inst.dim, inst.spread, gen, inst.curvature)
        coordinator = ScaledSqNorm(cfg.coordinator_scale, inst.dim)
        init = np.array(inst.init if inst.init is not None else np.zeros(inst.dim))
        comp = CompositeObjective(agents, [coordinator], 0.0)
        return Problem("quadratic", comp, init)

    if inst.kind == "softmax":
        blobs = datasets.synth_blobs(
            inst.m_agents,
            inst.dim,
            inst.separation,
            inst.n_per_agent,
            gen,
            n_classes=inst.n_classes,
            n_test_per_agent=inst.n_test_per_agent,
        )
        agents = [SoftmaxCE(ds, inst.l2) for ds in blobs.agents]
        dim = agents[0].dim
        comp = CompositeObjective(agents, [ScaledSqNorm(cfg.coordinator_scale, dim)], 0.0)
        return Problem("softmax", comp, np.zeros(dim), agents[0], blobs.test)

    train = datasets.load_mnist(inst.train_images, inst.train_labels, "train")
    test = datasets.load_mnist(inst.test_images, inst.test_labels, "test")
    if cfg.partition == "iid":
        part = datasets.partition_iid(
            train.n, inst.m_agents, inst.train_per_agent, inst.val_per_agent, gen
        )
    else:
        pairs = cfg.pairs or datasets.DIGIT_PAIRS
        if len(pairs) != inst.m_agents:
            raise DomainError(f"{len(pairs)} label pairs for {inst.m_agents} agents")
        part = datasets.partition_label_pairs(
            train.labels, pairs, inst.train_per_agent, inst.val_per_agent, gen
        )
    agents = [SoftmaxCE(part.train_set(train, a), inst.l2) for a in part.agents]
    val = [part.val_set(train, a) for a in part.agents] if inst.val_per_agent else []
    dim = agents[0].dim
    comp = CompositeObjective(agents, [ScaledSqNorm(cfg.coordinator_scale, dim)], 0.0)
    logger.info(f"built {cfg.partition} MNIST problem with {inst.m_agents} agents ({sw.elapsed:.2f}s)")
    return Problem("mnist", comp, np.zeros(dim), agents[0], test, val)


def train_config(cfg: ExperimentConfig, lam: float, seed: int, **overrides) -> TrainConfig:
    t = cfg.trainer
    kwargs = dict(
        rounds=t.rounds,
        local_epochs=t.local_epochs,
        lr=t.lr,
        schedule=t.schedule,
        lam=lam,
        seed=seed,
        parallel_agents=t.parallel_agents,
        restart_from_init=t.restart_from_init,
        steps_per_epoch=t.steps_per_epoch,
        check_lr=t.check_lr,
        log_every=t.log_every,
    )
    kwargs.update(overrides)
    return TrainConfig(**kwargs)


def noise_model(cfg: ExperimentConfig) -> NoiseModel:
    n = cfg.noise
    return NoiseModel(n.sigma_c, n.sigma_s, n.distribution, n.batch_size)


def _probe(cfg: ExperimentConfig, problem: Problem, theta_stars, gen) -> np.ndarray:
    D = max(float(np.linalg.norm(problem.init - s)) for s in theta_stars)
    radius = cfg.bounds.probe_radius or max(2.0 * D, 1.0)
    return theory.ball_probe(problem.init, radius, cfg.bounds.probe_points, gen)


def _measured_sigma(
    problem: Problem,
    comp: CompositeObjective,
    noise: NoiseModel,
    k: theory.BoundConstants,
    probe: np.ndarray,
    gen,
) -> theory.BoundConstants:
    # minibatch noise has no nominal σ_C, measure it
    if noise.batch_size is None or problem.model is None:
        return k
    calib = probe[: min(8, probe.shape[0])]
    sigma_c = max(theory.estimate_sigma(a, calib, noise, gen) for a in comp.agents)
    return replace(k, sigma_C=sigma_c)


def problem_constants(
    cfg: ExperimentConfig,
    problem: Problem,
    comp: CompositeObjective,
    noise: NoiseModel,
    theta_star: np.ndarray,
) -> theory.BoundConstants:
    gen = RngStream(cfg.data_seed, agent=1).generator()
    probe = _probe(cfg, problem, [theta_star], gen)
    k = theory.BoundConstants.from_problem(comp, noise, problem.init, theta_star, probe)
    return _measured_sigma(problem, comp, noise, k, probe, gen)


def write_csv(path: Path, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, payload: Dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _tag(lam: float, seed: Optional[int] = None) -> str:
    return f"l{lam:g}" if seed is None else f"l{lam:g}_s{seed}"


def _round_metrics(problem: Problem):
    if problem.model is None:
        return None

    def hook(record) -> Dict:
        report = metrics.evaluate(record.global_theta, problem.model, problem.test)
        out = {"test_accuracy": report.accuracy, "test_f1": report.f1_macro}
        if problem.val:
            out["val_f1"] = [
                metrics.evaluate(record.global_theta, problem.model, v).f1_macro
                for v in problem.val
            ]
        return out

    return hook


def run_cell(
    cfg: ExperimentConfig,
    problem: Problem,
    lam: float,
    seed: int,
    theta_star: Optional[np.ndarray],
    chash: str,
) -> List[str]:
    out = Path(cfg.output_dir)
    comp = problem.comp.with_lambda(lam)
    tcfg = train_config(cfg, lam, seed)
    noise = noise_model(cfg)
    sw = Stopwatch()
    try:
        trace = run(comp, tcfg, problem.init, noise, on_round=_round_metrics(problem))
    except DivergenceError as e:
        logger.warning(f"lambda={lam:g} seed={seed}: diverged: {e}")
        trace = e.trace

    extra = {"lambda": fmt_float(lam), "seed": str(seed), "config_hash": chash}
    header, rows = trace.to_rows(extra)
    write_csv(out / f"trace_{_tag(lam, seed)}.csv", header, rows)

    accuracy = f1 = None
    if trace.records and trace.records[-1].metrics:
        accuracy = trace.records[-1].metrics["test_accuracy"]
        f1 = trace.records[-1].metrics["test_f1"]
    status = metrics.run_status(trace.status, accuracy)
    if status == "degenerate":
        logger.warning(f"lambda={lam:g} seed={seed}: test accuracy {accuracy:.4f}, failed to train")

    final_gap = None
    if theta_star is not None and trace.records:
        final_gap = float(metrics.gap_series(trace, comp, theta_star)[-1])

    write_json(
        out / f"eval_{_tag(lam, seed)}.json",
        {
            "config_hash": chash,
            "lambda": lam,
            "seed": seed,
            "status": status,
            "error": trace.error,
            "lr": trace.lr,
            "rounds": [{"round": r.round, **r.metrics} for r in trace.records],
        },
    )

    if (
        problem.synthetic
        and theta_star is not None
        and tcfg.schedule == "theorem2"
        and tcfg.steps_per_epoch == 1
        and trace.status == "ok"
    ):
        k = problem_constants(cfg, problem, comp, noise, theta_star)
        report = theory.check_bounds([trace], comp, k, tcfg, theta_star)
        write_json(
            out / f"bounds_{_tag(lam, seed)}.json",
            {"config_hash": chash, "lambda": lam, "seed": seed, **report.to_dict()},
        )

    logger.info(f"lambda={lam:g} seed={seed}: {status} ({sw.elapsed:.2f}s)")
    return [
        fmt_float(lam),
        str(seed),
        status,
        fmt_float(accuracy),
        fmt_float(f1),
        fmt_float(final_gap),
        fmt_float(trace.max_drift),
        chash,
    ]


def _prepare(cfg: ExperimentConfig) -> Tuple[Path, str]:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = resolved_payload(cfg)
    # where artifacts land is not part of the experiment identity
    chash = config_hash({k: v for k, v in payload.items() if k != "output_dir"})
    write_json(out / "config.json", {"config_hash": chash, "config": payload})
    return out, chash


def _minimizers(problem: Problem, lams) -> Dict[float, np.ndarray]:
    # θ* is too costly to solve for at MNIST scale
    if not problem.synthetic:
        return {}
    return {lam: theory.minimizer(problem.comp.with_lambda(lam), problem.init) for lam in lams}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> int:
    sw = Stopwatch()
    out, chash = _prepare(cfg)
    problem = build_problem(cfg)
    stars = _minimizers(problem, cfg.lambda_sweep)
    cells = [(lam, seed) for lam in cfg.lambda_sweep for seed in cfg.seeds]
    logger.info(f"sweep of {len(cells)} cells on {threads} threads, config {chash}")

    rows = run_in_threads(
        lambda cell: run_cell(cfg, problem, cell[0], cell[1], stars.get(cell[0]), chash),
        cells,
        threads,
    )
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    bad = [f"{r[0]}/{r[1]}:{r[2]}" for r in rows if r[2] != "ok"]
    if bad:
        logger.warning(f"failed cells: {', '.join(bad)}")
    logger.info(f"wrote {out / 'summary.csv'} ({sw.elapsed:.2f}s)")
    return EXIT_OK


def check_bounds_experiment(cfg: ExperimentConfig, threads: int = 1) -> int:
    out, chash = _prepare(cfg)
    problem = build_problem(cfg)
    if not problem.synthetic:
        raise ContractError("check-bounds needs a synthetic instance")
    noise = noise_model(cfg)
    base = cfg.seeds[0]
    seeds = list(range(base, base + cfg.bounds.n_seeds))
    lams = cfg.lambda_sweep
    stars = _minimizers(problem, lams)
    gen = RngStream(cfg.data_seed, agent=1).generator()
    # one probe set for the whole sweep keeps ζ comparable across λ
    probe = _probe(cfg, problem, list(stars.values()), gen)
    sweep = theory.constants_sweep(
        problem.comp, noise, lams, problem.init, probe, [stars[lam] for lam in lams]
    )
    table, violated = [], False
    for lam, k in zip(lams, sweep):
        comp = problem.comp.with_lambda(lam)
        tcfg = train_config(cfg, lam, base, schedule="theorem2", steps_per_epoch=1)
        theta_star = stars[lam]
        k = _measured_sigma(problem, comp, noise, k, probe, gen)
        eta = theory.eta_theorem2(k, tcfg.rounds, tcfg.local_epochs)
        table.append(
            [fmt_float(lam)]
            + [fmt_float(v) for v in (k.L_C, k.L_S, k.alpha, k.L, k.Sigma, k.zeta, k.D, eta)]
            + [chash]
        )
        try:
            traces = replicate(comp, tcfg, problem.init, noise, seeds, threads)
        except DivergenceError as e:
            logger.warning(f"lambda={lam:g}: replicate diverged: {e}")
            write_json(
                out / f"bounds_{_tag(lam)}.json",
                {"config_hash": chash, "lambda": lam, "status": "diverged", "error": str(e)},
            )
            violated = True
            continue
        report = theory.check_bounds(traces, comp, k, tcfg, theta_star)
        violated = violated or not report.satisfied
        write_json(
            out / f"bounds_{_tag(lam)}.json",
            {"config_hash": chash, "lambda": lam, "status": "ok", **report.to_dict()},
        )
        logger.info(
            f"lambda={lam:g}: gap {report.empirical_lhs:.4g} <= {report.theorem2_rhs:.4g}: "
            f"{report.theorem2_satisfied}, drift {report.drift_lhs:.4g} <= {report.drift_rhs:.4g}: "
            f"{report.drift_satisfied}"
        )
    header = ["lambda", "L_C", "L_S", "alpha", "L", "Sigma", "zeta", "D", "eta", "config_hash"]
    write_csv(out / "constants.csv", header, table)
    return EXIT_VIOLATION if violated else EXIT_OK


def pareto_experiment(cfg: ExperimentConfig) -> int:
    if cfg.pareto is None:
        raise ContractError("pareto needs a `pareto` grid section")
    out, chash = _prepare(cfg)
    problem = build_problem(cfg)
    p = cfg.pareto
    grid = GridSpec(tuple(p.lower), tuple(p.upper), tuple(p.num))
    front = brute_force_front(problem.comp, grid)
    values = problem.comp.objective_matrix(front)
    header = [f"theta_{j}" for j in range(front.shape[1])]
    header += [f"C_{i + 1}" for i in range(problem.comp.m)]
    header += [f"S_{j + 1}" for j in range(problem.comp.n)] + ["config_hash"]
    rows = [[fmt_float(v) for v in np.concatenate([x, y])] + [chash] for x, y in zip(front, values)]
    write_csv(out / "front.csv", header, rows)

    for lam in cfg.lambda_sweep:
        comp = problem.comp.with_lambda(lam)
        theta_star = theory.minimizer(comp, problem.init)
        best = grid_argmin(comp, grid)
        write_json(
            out / f"pareto_{_tag(lam)}.json",
            {
                "config_hash": chash,
                "lambda": lam,
                "minimizer": theta_star.tolist(),
                "weak": check_weak_pareto(comp, theta_star, grid, p.tol).to_dict(),
                "strict": check_pareto(comp, theta_star, grid, p.tol, p.radius).to_dict(),
                "grid_argmin": best.tolist(),
                "grid_argmin_weak": check_weak_pareto(comp, best, grid, p.tol).to_dict(),
            },
        )
    logger.info(f"front of {front.shape[0]} points written to {out / 'front.csv'}")
    return EXIT_OK


def parse_idx_command(path) -> int:
    print(json.dumps(datasets.read_idx(path).header(), sort_keys=True))
    return EXIT_OK


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    update = {}
    if args.seed is not None:
        update["seeds"] = [args.seed]
    if args.out is not None:
        update["output_dir"] = args.out
    return cfg.model_copy(update=update) if update else cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="run this seed only")
    common.add_argument("--out", type=str, default=None, help="override output_dir")
    common.add_argument(
        "--threads", type=int, default=None, help="worker threads (env THREADS, default 1)"
    )
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="scalardl", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "lambda x seed training sweep"),
        ("check-bounds", "empirical check of the rate and drift bounds"),
        ("pareto", "grid Pareto front of a 1-3D instance"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("config", type=str, help="JSON experiment config")
    p = sub.add_parser("parse-idx", parents=[common], help="dump an IDX header")
    p.add_argument("file", type=str)
    return parser


def resolve_threads(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    raw = os.getenv("THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"THREADS must be an integer, got {raw!r}") from None


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    logging.basicConfig(
        format="%(levelname)s: %(asctime)s %(name)s:%(lineno)s %(message)s",
        level=logging.DEBUG if args.verbose else logging.INFO,
    )
    try:
        threads = resolve_threads(args.threads)
        if args.command == "parse-idx":
            return parse_idx_command(args.file)
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "run":
            return run_experiment(cfg, threads)
        if args.command == "check-bounds":
            return check_bounds_experiment(cfg, threads)
        return pareto_experiment(cfg)
    except (ConfigError, DomainError, DimensionError, ContractError, ResourceError) as e:
        logger.error(f"config error: {e}")
        return EXIT_CONFIG
    except datasets.PartitionError as e:
        logger.error(f"config error: {e}")
        return EXIT_CONFIG
    except (OSError, datasets.IdxError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
