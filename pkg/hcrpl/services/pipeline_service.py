# 自训练流程服务模块 - 预训练、按轮次的训练/预测/选择循环以及运行目录输出
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from hcrpl.config.settings import settings
from hcrpl.schemas.report import PretrainReport, RoundReport
from hcrpl.schemas.run import PriorSource, RunConfig
from hcrpl.services.dataset_service import (
    DomainDataset,
    TrainingSet,
    class_proportion,
    compose_ssda_source,
    oracle_class_proportion,
)
from hcrpl.services.ensemble_service import EnsembleStore, PredictionPass, se_predict, te_update
from hcrpl.services.evaluation_service import class_report, false_pseudo_label_ratio
from hcrpl.services.model_service import (
    ModelParams,
    accuracy,
    init_params,
    predict_labels,
    predict_proba,
    save_checkpoint,
    sgd_epoch,
)
from hcrpl.services.selection_service import (
    PseudoLabelSet,
    cbst_select,
    class_thresholds,
    portion_at_round,
)
from hcrpl.utils.errors import DimensionMismatch, EmptyTrainingSet, MissingTruth
from hcrpl.utils.logging import get_logger, log_phase, log_round
from hcrpl.utils.metrics import RunMetrics
from hcrpl.utils.random import STREAM_PREDICT, STREAM_PRETRAIN, STREAM_TRAIN, derive_rng
from hcrpl.utils.serialization import PathLike, write_csv, write_json


logger = get_logger(__name__)

BASE_METRIC_COLUMNS = [
    "round",
    "test_accuracy",
    "pseudo_count",
    "pseudo_accuracy",
    "false_ratio",
    "macro_f1",
    "worst_class_f1",
]


def metric_columns(n_classes: int) -> List[str]:
    """Header of ``metrics.csv``: base columns then per-class P/R/F1 triplets."""
    per_class = []
    for c in range(n_classes):
        per_class.extend([f"precision_{c}", f"recall_{c}", f"f1_{c}"])
    return BASE_METRIC_COLUMNS + per_class


@dataclass
class RoundState:
    """Model, ensemble and training set carried from one round to the next."""

    round: int
    params: ModelParams
    store: EnsembleStore
    pseudo: PseudoLabelSet
    train_set: TrainingSet


@dataclass
class RunResult:
    """Everything a finished run produces."""

    reports: List[RoundReport]
    params: ModelParams
    pretrain_report: PretrainReport
    store: EnsembleStore
    prior: Optional[np.ndarray] = None


def resolve_prior(cfg: RunConfig, source: DomainDataset, target: DomainDataset) -> np.ndarray:
    """Prior class proportion ``q(y)`` chosen by ``cfg.q_source``."""
    if cfg.q_source is PriorSource.EXPLICIT:
        q = np.asarray(cfg.q_explicit, dtype=np.float64)
        if q.shape[0] != source.n_classes:
            raise DimensionMismatch(
                f"q_explicit has {q.shape[0]} entries, the data has {source.n_classes} classes"
            )
        return q
    if cfg.q_source is PriorSource.TARGET_ORACLE:
        logger.warning("Using hidden target labels for the prior; analysis only")
        return oracle_class_proportion(target)
    return class_proportion(source)


class SelfTrainingRun:
    """One self-training run over a fixed source/target pair.

    The source here is already the SSDA-composed source when shots are used;
    :func:`run_full` takes care of that.
    """

    def __init__(
        self,
        source: DomainDataset,
        target: DomainDataset,
        cfg: RunConfig,
        prior: Optional[np.ndarray] = None,
        metrics: Optional[RunMetrics] = None,
    ):
        if source.dim != target.dim or source.n_classes != target.n_classes:
            raise DimensionMismatch("source and target must share C and D")
        if len(target) == 0:
            raise EmptyTrainingSet("target domain is empty")
        if not target.has_hidden_labels:
            raise MissingTruth("target needs hidden labels for evaluation")
        self.source = source
        self.target = target
        self.cfg = cfg
        self.prior = resolve_prior(cfg, source, target) if prior is None else np.asarray(prior, dtype=np.float64)
        self.metrics = metrics or RunMetrics()
        self.source_set = TrainingSet.from_dataset(source)

    # Phases

    def _train_epoch(
        self,
        params: ModelParams,
        train_set: TrainingSet,
        lr: float,
        rng: np.random.Generator,
        phase: str,
    ) -> ModelParams:
        started = time.perf_counter()
        params = sgd_epoch(params, train_set, self.cfg.train, rng, learning_rate=lr)
        duration = time.perf_counter() - started
        self.metrics.record_epoch(phase)
        self.metrics.record_phase("train", duration)
        log_phase(logger, "train", duration, rows=len(train_set), learning_rate=lr)
        return params

    def _predict(self, params: ModelParams, round_index: int, epoch: int) -> PredictionPass:
        started = time.perf_counter()
        prediction = se_predict(
            params,
            self.target,
            self.prior,
            self.cfg.temperature,
            derive_rng(self.cfg.seed, STREAM_PREDICT, round_index, epoch),
            augment_std=self.cfg.train.augment_std,
            use_apc=self.cfg.use_apc,
            use_se=self.cfg.use_se,
        )
        duration = time.perf_counter() - started
        self.metrics.record_phase("predict", duration)
        log_phase(logger, "predict", duration, round=round_index, epoch=epoch)
        return prediction

    def _test_accuracy(self, params: ModelParams) -> float:
        return float(np.mean(predict_labels(params, self.target.features) == self.target.hidden_labels))

    # Algorithm steps

    def pretrain(self) -> RoundState:
        """Source-only training, then the initial ensemble predictions."""
        params = init_params(self.source.n_classes, self.source.dim, self.cfg.seed)
        for epoch in range(1, self.cfg.pretrain_epochs + 1):
            params = self._train_epoch(
                params,
                self.source_set,
                self.cfg.first_round_lr,
                derive_rng(self.cfg.seed, STREAM_PRETRAIN, epoch),
                "pretrain",
            )
        prediction = self._predict(params, 0, 0)
        store = te_update(EnsembleStore(alpha=self.cfg.alpha), self.target.ids, prediction.probs)
        logger.info(
            "Pretraining completed",
            epochs=self.cfg.pretrain_epochs,
            test_accuracy=round(self._test_accuracy(params), 4),
        )
        return RoundState(
            round=0,
            params=params,
            store=store,
            pseudo=PseudoLabelSet(round=0),
            train_set=self.source_set,
        )

    def pretrain_report(self, params: ModelParams) -> PretrainReport:
        report = class_report(self.target.hidden_labels, predict_proba(params, self.target.features))
        return PretrainReport(
            **report.model_dump(),
            source_accuracy=accuracy(params, self.source),
        )

    def run_round(self, state: RoundState) -> Tuple[RoundState, RoundReport]:
        """Es epochs of train + predict, then select and rebuild the training set."""
        r = state.round + 1
        lr = self.cfg.first_round_lr if r == 1 else self.cfg.later_round_lr
        alpha = self.cfg.alpha if self.cfg.use_te else 0.0
        params, store = state.params, state.store
        epoch_accuracy: List[float] = []
        ratio = None
        for epoch in range(1, self.cfg.epochs_per_round + 1):
            params = self._train_epoch(
                params, state.train_set, lr, derive_rng(self.cfg.seed, STREAM_TRAIN, r, epoch), "round"
            )
            prediction = self._predict(params, r, epoch)
            store = te_update(store, self.target.ids, prediction.probs, alpha=alpha)
            ratio = prediction.ratio
            epoch_accuracy.append(self._test_accuracy(params))

        started = time.perf_counter()
        if self.cfg.select_pseudo_labels:
            portion = portion_at_round(r, self.cfg.portion)
            thresholds = class_thresholds(store.values, portion)
            pseudo = cbst_select(store.ids, store.values, thresholds, r)
            if self.cfg.accumulate_pseudo_labels:
                pseudo = pseudo.merged_with(state.pseudo)
        else:
            portion = 0.0
            pseudo = PseudoLabelSet(round=r)
        train_set = self.source_set.union(TrainingSet.from_pseudo_labels(self.target, pseudo.entries))
        self.metrics.record_phase("select", time.perf_counter() - started)

        false_ratio, empty = false_pseudo_label_ratio(pseudo, self.target.hidden_truth())
        evaluation = class_report(self.target.hidden_labels, predict_proba(params, self.target.features))
        report = RoundReport(
            **evaluation.model_dump(),
            round=r,
            portion=portion,
            epoch_test_accuracy=epoch_accuracy,
            pseudo_count=len(pseudo),
            pseudo_accuracy=1.0 - false_ratio,
            false_ratio=false_ratio,
            pseudo_empty=empty,
            pseudo_class_counts=pseudo.class_counts(self.target.n_classes),
            ensemble_proportion=store.proportion().tolist(),
            difficulty_ratio=None if ratio is None else ratio.tolist(),
            training_size=len(train_set),
        )
        self.metrics.record_round(report.pseudo_count, report.test_accuracy, report.worst_class_f1)
        log_round(logger, report)
        next_state = RoundState(round=r, params=params, store=store, pseudo=pseudo, train_set=train_set)
        return next_state, report


def pretrain(source: DomainDataset, target: DomainDataset, cfg: RunConfig) -> Tuple[ModelParams, EnsembleStore]:
    """Pretrained parameters and the initial ensemble store for ``target``."""
    state = SelfTrainingRun(source, target, cfg).pretrain()
    return state.params, state.store


def run_round(
    state: RoundState,
    cfg: RunConfig,
    source: DomainDataset,
    target: DomainDataset,
) -> Tuple[RoundState, RoundReport]:
    return SelfTrainingRun(source, target, cfg).run_round(state)


# Run directory

def metrics_row(report: RoundReport) -> List[Any]:
    row: List[Any] = [
        report.round,
        report.test_accuracy,
        report.pseudo_count,
        report.pseudo_accuracy,
        report.false_ratio,
        report.macro_f1,
        report.worst_class_f1,
    ]
    for p, r, f in zip(report.precision, report.recall, report.f1):
        row.extend([p, r, f])
    return row


def write_metrics_csv(path: PathLike, reports: List[RoundReport], n_classes: int) -> None:
    write_csv(path, metric_columns(n_classes), [metrics_row(r) for r in reports])


def run_full(
    source: DomainDataset,
    target: DomainDataset,
    cfg: RunConfig,
    out_dir: Optional[PathLike] = None,
    config_echo: Optional[Dict[str, Any]] = None,
) -> RunResult:
    """Complete run: optional SSDA composition, pretraining, then ``cfg.rounds`` rounds.

    With ``out_dir`` the run directory is filled as the run progresses:
    ``config.json``, ``pretrain.json``, ``round_{r:03}.json``, ``metrics.csv``
    and finally ``model_final.json``.
    """
    started = time.perf_counter()
    if cfg.ssda_shots > 0:
        source, target = compose_ssda_source(source, target, cfg.ssda_shots, cfg.seed)

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "config.json", config_echo or cfg.model_dump(mode="json"))

    run = SelfTrainingRun(source, target, cfg)
    logger.info(
        "Starting run",
        rounds=cfg.rounds,
        epochs_per_round=cfg.epochs_per_round,
        use_apc=cfg.use_apc,
        use_se=cfg.use_se,
        use_te=cfg.use_te,
        ssda_shots=cfg.ssda_shots,
        seed=cfg.seed,
    )
    state = run.pretrain()
    pretrain_report = run.pretrain_report(state.params)
    if out is not None:
        write_json(out / "pretrain.json", pretrain_report.model_dump(mode="json"))

    reports: List[RoundReport] = []
    for _ in range(cfg.rounds):
        state, report = run.run_round(state)
        reports.append(report)
        if out is not None:
            write_json(out / f"round_{report.round:03d}.json", report.model_dump(mode="json"))
            write_metrics_csv(out / "metrics.csv", reports, target.n_classes)

    if out is not None:
        save_checkpoint(state.params, out / "model_final.json")
        if settings.enable_metrics:
            run.metrics.write(out / "metrics.prom")

    logger.info(
        "Run completed",
        rounds=len(reports),
        final_test_accuracy=round(reports[-1].test_accuracy, 4),
        duration_s=round(time.perf_counter() - started, 2),
    )
    return RunResult(
        reports=reports,
        params=state.params,
        pretrain_report=pretrain_report,
        store=state.store,
        prior=run.prior,
    )
