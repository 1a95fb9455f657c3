"""Adversarial training runner."""

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import torch

from src.attack.config import AttackConfig
from src.common.errors import (
    NonFiniteGradientError,
    NonFiniteLogitsError,
    NonFiniteLossError,
)
from src.common.logger import LoggingContext, get_logger
from src.core.checkpoint import load_checkpoint, restore_training_state, save_checkpoint
from src.core.models import Classifier, build_classifier, forward
from src.core.optim import make_optimizer, set_learning_rate, sgd_update
from src.core.types import ArchitectureSpec
from src.data.augment import augment_batch
from src.data.batching import batches
from src.data.collection import ExampleSet
from src.data.spec import AugmentationConfig
from src.metrics.fairness import FairnessReport, fairness_report
from src.metrics.outcomes import collect_outcomes
from src.mining import MinedBatch, MiningConfig, mine_batch, weighted_loss
from src.trainer.config import TrainConfig
from src.trainer.rng import RngStreams
from src.trainer.schedule import lr_at

logger = get_logger(__name__)

WEIGHT_BINS = 10

# plain PGD-AT: K steps on every example, weight 1
_PLAIN_AT = MiningConfig(mode="none", early_drop_step=1, start_epoch=0)


@dataclass
class EpochStats:
    """
    Per-epoch instrumentation.

    Attributes:
        epoch: 0-based epoch index
        mode: mining mode in effect for the epoch ("none" before start_epoch)
        mining_active: whether examples were selected and weighted
        learning_rate: rate used for every update of the epoch
        mean_loss: mean weighted loss over batches that performed an update,
            None when every batch was skipped
        dropped_fraction: dropped examples over all examples
        hard_fraction: kept examples over all examples
        attack_steps: PGD iterations summed over examples and batches
        skipped_batches: batches without any kept example
        wall_seconds: monotonic wall time of the epoch
    """

    epoch: int
    mode: str
    mining_active: bool
    learning_rate: float
    mean_loss: Optional[float]
    dropped_fraction: float
    hard_fraction: float
    attack_steps: int
    skipped_batches: int
    wall_seconds: float

    def to_record(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class BatchRecord:
    """Mining statistics of one batch."""

    epoch: int
    batch: int
    batch_size: int
    kept: int
    dropped: int
    attack_steps: int
    loss: Optional[float]
    weight_histogram: List[int]

    def to_record(self) -> Dict[str, Any]:
        return asdict(self)


class TrainingHooks(object):
    """Callbacks a run reports through; the defaults do nothing."""

    def batch(self, record: BatchRecord) -> None:
        """Called after every batch."""

    def epoch(self, trainer: "AdversarialTrainer", stats: EpochStats) -> None:
        """Called after every epoch and any evaluation due for it."""

    def evaluation(self, epoch: int, report: FairnessReport) -> None:
        """Called with each fairness report."""


@dataclass
class TrainingResult:
    model: Classifier
    stats: List[EpochStats] = field(default_factory=list)
    reports: Dict[int, FairnessReport] = field(default_factory=dict)


def _weight_histogram(weights: torch.Tensor) -> List[int]:
    if weights.numel() == 0:
        return [0] * WEIGHT_BINS
    counts = torch.histc(weights.detach().double(), bins=WEIGHT_BINS, min=0.0, max=1.0)
    return [int(c) for c in counts.tolist()]


class AdversarialTrainer(object):
    """Trains a classifier with PGD-AT, HAM or one of the dropping baselines."""

    def __init__(
        self,
        config: TrainConfig,
        architecture: ArchitectureSpec,
        augmentation: Optional[AugmentationConfig] = None,
        num_threads: Optional[int] = 1,
        dtype: torch.dtype = torch.float32,
        device: str = "cpu",
    ) -> None:
        """Instantiate the model, optimizer and random streams from ``config``."""
        if num_threads is not None:
            torch.set_num_threads(num_threads)
        self.config = config
        self.augmentation = augmentation or AugmentationConfig()
        self.model = build_classifier(architecture, seed=config.seed, dtype=dtype).to(
            device
        )
        self.optimizer = make_optimizer(
            self.model, config.learning_rate, config.momentum, config.weight_decay
        )
        self.streams = RngStreams(config.seed)
        self.next_epoch = 0

    def _select(
        self, images: torch.Tensor, labels: torch.Tensor, mining: MiningConfig
    ) -> MinedBatch:
        return mine_batch(
            self.model,
            images,
            labels,
            self.config.attack,
            mining,
            attack_generator=self.streams.attack,
            mask_generator=self.streams.mask,
        )

    def _update(
        self, mined: MinedBatch, normalization: str, epoch: int, batch: int
    ) -> Optional[float]:
        """
        One SGD step on the kept examples; None when nothing is kept.

        Only the kept examples are forwarded, so BatchNorm architectures take
        their batch statistics from the kept set alone.
        """
        if mined.kept_count == 0:
            return None
        self.optimizer.zero_grad(set_to_none=True)
        logits = forward(self.model, mined.adversarial, "train")
        loss = weighted_loss(
            logits, mined.labels, mined.kept_weights, mined.batch_size, normalization
        )
        if not bool(torch.isfinite(loss)):
            raise NonFiniteLossError(epoch, batch, self.optimizer.param_groups[0]["lr"])
        loss.backward()
        sgd_update(self.model, self.optimizer)
        return float(loss.detach())

    def _run_epoch(
        self,
        train_set: ExampleSet,
        epoch: int,
        mining: MiningConfig,
        hooks: TrainingHooks,
    ) -> EpochStats:
        start = time.perf_counter()
        learning_rate = lr_at(self.config.schedule, self.config.learning_rate, epoch)
        set_learning_rate(self.optimizer, learning_rate)
        losses: List[float] = []
        seen = kept = steps = skipped = 0
        stream = batches(train_set, self.config.batch_size, self.config.seed, epoch)
        with LoggingContext({"epoch": epoch, "mode": mining.mode}):
            for index, (images, labels) in enumerate(stream):
                images = augment_batch(images, self.augmentation, self.streams.data)
                try:
                    mined = self._select(images, labels, mining)
                    loss = self._update(mined, mining.normalization, epoch, index)
                except (NonFiniteLogitsError, NonFiniteGradientError) as e:
                    raise NonFiniteLossError(epoch, index, learning_rate) from e
                if loss is None:
                    skipped += 1
                    logger.info(f"batch {index}: no hard examples, update skipped")
                else:
                    losses.append(loss)
                seen += mined.batch_size
                kept += mined.kept_count
                steps += mined.attack_steps
                hooks.batch(
                    BatchRecord(
                        epoch=epoch,
                        batch=index,
                        batch_size=mined.batch_size,
                        kept=mined.kept_count,
                        dropped=mined.dropped_count,
                        attack_steps=mined.attack_steps,
                        loss=loss,
                        weight_histogram=_weight_histogram(mined.kept_weights),
                    )
                )
        stats = EpochStats(
            epoch=epoch,
            mode=mining.mode,
            mining_active=mining.mode != "none",
            learning_rate=learning_rate,
            mean_loss=sum(losses) / len(losses) if losses else None,
            dropped_fraction=(seen - kept) / seen if seen else 0.0,
            hard_fraction=kept / seen if seen else 0.0,
            attack_steps=steps,
            skipped_batches=skipped,
            wall_seconds=time.perf_counter() - start,
        )
        self.next_epoch = epoch + 1
        loss_text = "-" if stats.mean_loss is None else f"{stats.mean_loss:.4f}"
        logger.info(
            f"epoch {epoch} lr={learning_rate:g} loss={loss_text} "
            f"dropped={stats.dropped_fraction:.3f} steps={steps} "
            f"time={stats.wall_seconds:.1f}s"
        )
        return stats

    def train_epoch_at(
        self, train_set: ExampleSet, epoch: int, hooks: Optional[TrainingHooks] = None
    ) -> EpochStats:
        """K-step PGD on every example and an unweighted mean cross-entropy step."""
        return self._run_epoch(train_set, epoch, _PLAIN_AT, hooks or TrainingHooks())

    def train_epoch_ham(
        self, train_set: ExampleSet, epoch: int, hooks: Optional[TrainingHooks] = None
    ) -> EpochStats:
        """
        Early-drop easy examples and reweight hard ones.

        Before ``mining.start_epoch`` this is ``train_epoch_at``.

        Raises:
            ValueError if the configured mining mode is not "ham"
        """
        if self.config.mining.mode != "ham":
            raise ValueError(f"mining mode is {self.config.mining.mode}, not ham")
        return self.train_epoch(train_set, epoch, hooks)

    def train_epoch(
        self, train_set: ExampleSet, epoch: int, hooks: Optional[TrainingHooks] = None
    ) -> EpochStats:
        """One epoch in the configured mining mode, gated by its start epoch."""
        mining = self.config.mining if self.config.mining.active(epoch) else _PLAIN_AT
        return self._run_epoch(train_set, epoch, mining, hooks or TrainingHooks())

    def evaluate(
        self,
        test_set: ExampleSet,
        attack: Optional[AttackConfig] = None,
        batch_size: int = 256,
    ) -> FairnessReport:
        """Fairness report of the current parameters under the evaluation attack."""
        generator = torch.Generator().manual_seed(self.config.seed)
        outcomes = collect_outcomes(
            self.model,
            test_set,
            attack or self.config.eval_attack,
            batch_size=batch_size,
            generator=generator,
        )
        return fairness_report(outcomes, test_set.num_classes)

    def save(self, path: Union[str, Path]) -> Path:
        """Checkpoint the state reached after the last completed epoch."""
        return save_checkpoint(
            path,
            self.model,
            self.optimizer,
            epoch=self.next_epoch - 1,
            rng_state=self.streams.state(),
        )

    def resume(self, path: Union[str, Path]) -> int:
        """
        Restore a checkpoint written by ``save``.

        Returns:
            the next epoch to run
        """
        checkpoint = load_checkpoint(path)
        self.next_epoch, rng_state = restore_training_state(
            checkpoint, self.model, self.optimizer
        )
        self.streams.set_state(rng_state)
        logger.info(f"resumed from {path} at epoch {self.next_epoch}")
        return self.next_epoch


def run_training(
    trainer: AdversarialTrainer,
    train_set: ExampleSet,
    test_set: Optional[ExampleSet] = None,
    eval_every: int = 1,
    hooks: Optional[TrainingHooks] = None,
) -> TrainingResult:
    """
    Run the remaining epochs of ``trainer.config``.

    Args:
        trainer (AdversarialTrainer): fresh or resumed trainer
        train_set (ExampleSet): training examples
        test_set (Optional[ExampleSet]): evaluated with the eval attack when given
        eval_every (int): evaluate every this many epochs and after the last one;
            0 evaluates only after the last epoch
        hooks (Optional[TrainingHooks]): receives batch, epoch and report events
    Returns:
        TrainingResult with the stats of the epochs run and reports by epoch
    """
    if eval_every < 0:
        raise ValueError(f"eval_every must be nonnegative not {eval_every}")
    hooks = hooks or TrainingHooks()
    result = TrainingResult(model=trainer.model)
    epochs = trainer.config.epochs
    for epoch in range(trainer.next_epoch, epochs):
        stats = trainer.train_epoch(train_set, epoch, hooks)
        result.stats.append(stats)
        due = eval_every > 0 and (epoch + 1) % eval_every == 0
        if test_set is not None and (due or epoch == epochs - 1):
            report = trainer.evaluate(test_set)
            result.reports[epoch] = report
            hooks.evaluation(epoch, report)
            logger.info(
                f"epoch {epoch} avg rob={report.avg_robust:.4f} "
                f"worst rob={report.worst_robust:.4f}"
            )
        hooks.epoch(trainer, stats)
    return result
