import pytest
import torch
from pydantic import ValidationError

from src.attack import AttackConfig
from src.common.errors import NonFiniteLossError
from src.core.models import build_classifier
from src.mining import MiningConfig
from src.trainer import (
    AdversarialTrainer,
    RngStreams,
    TrainingHooks,
    lr_at,
    run_training,
)
from tests.conftest import train_config

CIFAR_SCHEDULE = [(60, 0.1), (90, 0.01), (110, 0.005)]


class RecordingHooks(TrainingHooks):
    def __init__(self):
        self.batches = []
        self.epochs = []
        self.evaluations = []

    def batch(self, record):
        self.batches.append(record)

    def epoch(self, trainer, stats):
        self.epochs.append(stats.epoch)

    def evaluation(self, epoch, report):
        self.evaluations.append(epoch)


def _parameters(model):
    return [p.detach().clone() for p in model.parameters()]


def _same(first, second, atol=0.0):
    return all(torch.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(first, second))


@pytest.mark.parametrize(
    "epoch,expected",
    [
        (0, 0.1),
        (59, 0.1),
        (60, 0.01),
        (89, 0.01),
        (90, 0.001),
        (110, 0.0005),
        (119, 0.0005),
    ],
)
def test_learning_rate_schedule(epoch, expected):
    assert lr_at(CIFAR_SCHEDULE, 0.1, epoch) == pytest.approx(expected)


def test_learning_rate_without_schedule():
    assert lr_at([], 0.3, 100) == 0.3


@pytest.mark.parametrize(
    "overrides",
    [
        {"epochs": -1},
        {"batch_size": 0},
        {"learning_rate": -0.1},
        {"schedule": [(2, 0.1), (1, 0.01)]},
        {"schedule": [(3, 0.1)]},
        {"schedule": [(1, 0.0)]},
        {"mining": MiningConfig(mode="ham", early_drop_step=6, start_epoch=0)},
        {"unknown": 1},
    ],
)
def test_train_config_validation(overrides):
    with pytest.raises(ValidationError):
        train_config(**overrides)


def test_zero_epoch_schedule_is_unchecked():
    assert train_config(epochs=0, schedule=[(5, 0.1)]).epochs == 0


def test_rng_streams_are_reproducible_and_independent():
    def draw(generator):
        return torch.rand(4, generator=generator)

    first, second = RngStreams(3), RngStreams(3)
    assert torch.equal(draw(first.attack), draw(second.attack))

    third, fourth = RngStreams(3), RngStreams(3)
    torch.rand(100, generator=third.mask)
    assert torch.equal(draw(third.attack), draw(fourth.attack))
    assert not torch.equal(draw(RngStreams(3).data), draw(RngStreams(4).data))


def test_rng_streams_state_round_trip():
    streams = RngStreams(0)
    state = streams.state()
    expected = torch.rand(3, generator=streams.attack)
    streams.set_state(state)
    assert torch.equal(torch.rand(3, generator=streams.attack), expected)
    with pytest.raises(KeyError):
        streams.set_state({"data": state["data"]})


def test_zero_learning_rate_leaves_parameters(mlp_spec, synthetic_data):
    trainer = AdversarialTrainer(train_config(learning_rate=0.0, epochs=2), mlp_spec)
    before = _parameters(trainer.model)
    run_training(trainer, synthetic_data[0])
    assert _same(before, _parameters(trainer.model))


def test_plain_at_attack_step_count(mlp_spec, synthetic_data):
    train, _ = synthetic_data
    config = train_config(epochs=2)
    hooks = RecordingHooks()
    result = run_training(AdversarialTrainer(config, mlp_spec), train, hooks=hooks)
    num_batches = -(-len(train) // config.batch_size)
    assert len(hooks.batches) == 2 * num_batches
    for stats in result.stats:
        assert stats.attack_steps == len(train) * config.attack.steps
        assert stats.dropped_fraction == 0.0
        assert stats.hard_fraction == 1.0
        assert not stats.mining_active


def test_ham_is_gated_by_start_epoch(mlp_spec, synthetic_data):
    train, _ = synthetic_data
    mining = MiningConfig(mode="ham", early_drop_step=2, start_epoch=1)
    result = run_training(
        AdversarialTrainer(train_config(mining=mining), mlp_spec), train
    )
    assert [s.mode for s in result.stats] == ["none", "ham", "ham"]
    assert result.stats[0].attack_steps == len(train) * 5
    for stats in result.stats[1:]:
        assert stats.mining_active
        assert stats.attack_steps <= len(train) * 5
        assert stats.hard_fraction + stats.dropped_fraction == pytest.approx(1.0)


def test_ham_with_everything_hard_reduces_to_plain_at(mlp_spec, synthetic_data):
    train, _ = synthetic_data
    plain = AdversarialTrainer(train_config(), mlp_spec)
    mining = MiningConfig(
        mode="ham",
        early_drop_step=2,
        start_epoch=0,
        lambda_shift=50.0,
        force_all_hard=True,
    )
    ham = AdversarialTrainer(train_config(mining=mining), mlp_spec)
    plain_result = run_training(plain, train)
    ham_result = run_training(ham, train)
    assert _same(_parameters(plain.model), _parameters(ham.model), atol=1e-6)
    for a, b in zip(plain_result.stats, ham_result.stats):
        assert a.attack_steps == b.attack_steps
        assert a.mean_loss == pytest.approx(b.mean_loss, abs=1e-6)


def test_batch_records_account_for_every_example(mlp_spec, synthetic_data):
    train, _ = synthetic_data
    mining = MiningConfig(
        mode="ham",
        early_drop_step=2,
        start_epoch=0,
        lambda_shift=50.0,
        force_all_hard=True,
    )
    hooks = RecordingHooks()
    run_training(
        AdversarialTrainer(train_config(epochs=1, mining=mining), mlp_spec),
        train,
        hooks=hooks,
    )
    assert sum(r.batch_size for r in hooks.batches) == len(train)
    for record in hooks.batches:
        assert record.kept + record.dropped == record.batch_size
        assert sum(record.weight_histogram) == record.kept
        assert record.weight_histogram[-1] == record.kept


def test_train_epoch_ham_needs_ham_mode(mlp_spec, synthetic_data):
    trainer = AdversarialTrainer(train_config(), mlp_spec)
    with pytest.raises(ValueError):
        trainer.train_epoch_ham(synthetic_data[0], 0)


def test_train_epoch_at_ignores_mining(mlp_spec, synthetic_data):
    mining = MiningConfig(mode="ham", early_drop_step=2, start_epoch=0)
    trainer = AdversarialTrainer(train_config(mining=mining), mlp_spec)
    stats = trainer.train_epoch_at(synthetic_data[0], 0)
    assert stats.mode == "none"
    assert trainer.next_epoch == 1


def test_divergence_aborts_with_location(mlp_spec, synthetic_data):
    trainer = AdversarialTrainer(train_config(learning_rate=1e6, epochs=5), mlp_spec)
    with pytest.raises(NonFiniteLossError) as error:
        run_training(trainer, synthetic_data[0])
    assert error.value.learning_rate == 1e6
    assert error.value.epoch >= 0 and error.value.batch >= 0


def test_zero_epochs_returns_the_initial_model(mlp_spec, synthetic_data):
    train, test = synthetic_data
    trainer = AdversarialTrainer(train_config(epochs=0), mlp_spec)
    result = run_training(trainer, train, test)
    assert result.stats == [] and result.reports == {}
    initial = build_classifier(mlp_spec, seed=0)
    assert _same(_parameters(initial), _parameters(result.model))


def test_training_is_reproducible(mlp_spec, synthetic_data):
    train, test = synthetic_data
    mining = MiningConfig(mode="ham", early_drop_step=2, start_epoch=1)
    config = train_config(mining=mining)
    runs = [
        run_training(AdversarialTrainer(config, mlp_spec), train, test)
        for _ in range(2)
    ]
    assert _same(_parameters(runs[0].model), _parameters(runs[1].model))
    for a, b in zip(runs[0].stats, runs[1].stats):
        first, second = a.to_record(), b.to_record()
        first.pop("wall_seconds")
        second.pop("wall_seconds")
        assert first == second
    assert runs[0].reports[2].summary() == runs[1].reports[2].summary()


def test_resume_matches_an_uninterrupted_run(tmp_path, mlp_spec, synthetic_data):
    train, _ = synthetic_data
    mining = MiningConfig(mode="ham", early_drop_step=2, start_epoch=1)
    config = train_config(mining=mining, schedule=[(2, 0.1)])

    uninterrupted = AdversarialTrainer(config, mlp_spec)
    run_training(uninterrupted, train)

    interrupted = AdversarialTrainer(config, mlp_spec)
    interrupted.train_epoch(train, 0)
    interrupted.train_epoch(train, 1)
    path = interrupted.save(tmp_path / "last.pt")

    resumed = AdversarialTrainer(config, mlp_spec)
    assert resumed.resume(path) == 2
    result = run_training(resumed, train)
    assert [s.epoch for s in result.stats] == [2]
    assert result.stats[0].learning_rate == pytest.approx(0.01)
    assert _same(_parameters(uninterrupted.model), _parameters(resumed.model))


def test_evaluation_cadence(mlp_spec, synthetic_data):
    train, test = synthetic_data
    hooks = RecordingHooks()
    result = run_training(
        AdversarialTrainer(train_config(epochs=3), mlp_spec),
        train,
        test,
        eval_every=2,
        hooks=hooks,
    )
    assert sorted(result.reports) == [1, 2]
    assert hooks.evaluations == [1, 2]
    assert hooks.epochs == [0, 1, 2]
    assert result.reports[2].num_classes == 3


def test_interrupted_evaluation_leaves_the_epoch_unsaved(mlp_spec, synthetic_data):
    class FailingEvaluation(RecordingHooks):
        def evaluation(self, epoch, report):
            raise KeyboardInterrupt

    train, test = synthetic_data
    hooks = FailingEvaluation()
    with pytest.raises(KeyboardInterrupt):
        run_training(
            AdversarialTrainer(train_config(epochs=3), mlp_spec),
            train,
            test,
            eval_every=2,
            hooks=hooks,
        )
    assert hooks.epochs == [0]


def test_last_epoch_only_evaluation(mlp_spec, synthetic_data):
    train, test = synthetic_data
    result = run_training(
        AdversarialTrainer(train_config(epochs=2), mlp_spec), train, test, eval_every=0
    )
    assert sorted(result.reports) == [1]
    with pytest.raises(ValueError):
        run_training(AdversarialTrainer(train_config(), mlp_spec), train, eval_every=-1)


def test_adversarial_training_lowers_the_loss(mlp_spec, synthetic_data):
    train, _ = synthetic_data
    decreased = 0
    for seed in range(3):
        config = train_config(epochs=6, seed=seed, momentum=0.0)
        result = run_training(AdversarialTrainer(config, mlp_spec), train)
        if result.stats[-1].mean_loss < result.stats[0].mean_loss:
            decreased += 1
    assert decreased >= 2


def test_evaluate_uses_given_attack(mlp_spec, synthetic_data):
    _, test = synthetic_data
    trainer = AdversarialTrainer(train_config(), mlp_spec)
    clean = trainer.evaluate(test, AttackConfig(epsilon=0.0, step_size=0.01, steps=1))
    assert clean.boundary == [0.0, 0.0, 0.0]
    assert clean.robust == clean.standard
