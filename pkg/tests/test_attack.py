import pytest
import torch
from pydantic import ValidationError

from src.attack import NEVER, AttackConfig, pgd_step, project, resume_pgd, run_pgd
from src.common.errors import AttackConfigMismatchError
from src.core.models import build_classifier
from src.core.types import ArchitectureSpec
from tests.conftest import batch_of


def _box_model():
    """Linear model that predicts 0 when the first pixel dominates, 1 otherwise."""
    spec = ArchitectureSpec(name="linear", num_classes=3, image_shape=(1, 2, 1))
    model = build_classifier(spec, seed=0)
    with torch.no_grad():
        model.fc.weight.copy_(torch.tensor([[10.0, 0.0], [0.0, 10.0], [0.0, 0.0]]))
        model.fc.bias.zero_()
    return model


def _distance(a, b, norm):
    delta = (a - b).flatten(1)
    return delta.abs().max(dim=1).values if norm == "inf" else delta.norm(dim=1)


@pytest.mark.parametrize("norm", ["inf", "2"])
def test_project_lands_in_ball_and_box(norm):
    config = AttackConfig(epsilon=0.1, step_size=0.05, steps=3, norm=norm)
    generator = torch.Generator().manual_seed(0)
    origin = torch.rand(16, 1, 4, 1, generator=generator)
    point = origin + torch.randn(16, 1, 4, 1, generator=generator)
    projected = project(point, origin, config)
    assert bool((_distance(projected, origin, norm) <= 0.1 + 1e-6).all())
    assert bool((projected >= 0).all()) and bool((projected <= 1).all())


def test_project_keeps_points_already_inside():
    config = AttackConfig(epsilon=0.1, step_size=0.05, steps=3)
    origin = torch.full((2, 1, 2, 1), 0.5)
    point = origin + 0.05
    assert torch.equal(project(point, origin, config), point)


def test_project_infinity_norm_clips_each_pixel():
    config = AttackConfig(epsilon=0.1, step_size=0.05, steps=3)
    origin = torch.tensor([[[[0.5], [0.95]]]])
    point = torch.tensor([[[[0.9], [1.2]]]])
    expected = torch.tensor([[[[0.6], [1.0]]]])
    assert torch.allclose(project(point, origin, config), expected)


def _two_pixel_model(weight):
    spec = ArchitectureSpec(name="linear", num_classes=2, image_shape=(1, 2, 1))
    model = build_classifier(spec, seed=0)
    with torch.no_grad():
        model.fc.weight.copy_(torch.as_tensor(weight))
        model.fc.bias.zero_()
    return model


def test_pgd_step_from_origin():
    weight = torch.tensor([[1.0, 1.0], [2.0, 0.0]])
    model = _two_pixel_model(weight)
    origin = torch.tensor([[[[0.5], [0.5]]]])
    labels = torch.tensor([0])
    config = AttackConfig(epsilon=0.05, step_size=0.02, steps=3, random_init=False)

    probs = torch.softmax(weight @ origin.flatten(), dim=0)
    grad = (probs - torch.tensor([1.0, 0.0])) @ weight
    expected = origin + 0.02 * grad.sign().view(1, 1, 2, 1)

    step = pgd_step(model, origin, origin, labels, config)
    assert torch.allclose(step, expected)
    assert torch.allclose(step, torch.tensor([[[[0.52], [0.48]]]]))


def test_pgd_step_zero_gradient_stays():
    model = _two_pixel_model([[0.0, 0.0], [0.0, 0.0]])
    origin = torch.tensor([[[[0.5], [0.2]]]])
    current = origin + 0.03
    config = AttackConfig(epsilon=0.05, step_size=0.02, steps=3)
    step = pgd_step(model, current, origin, torch.tensor([1]), config)
    assert torch.equal(step, current)


@pytest.mark.parametrize("norm", ["inf", "2"])
@pytest.mark.parametrize("seed", range(10))
def test_iterates_stay_feasible(mlp_model, synthetic_data, norm, seed):
    train, _ = synthetic_data
    images, labels = batch_of(train, 32)
    config = AttackConfig(epsilon=0.05, step_size=0.02, steps=6, norm=norm)
    trajectory = run_pgd(
        mlp_model,
        images,
        labels,
        config,
        record_trajectory=True,
        generator=torch.Generator().manual_seed(seed),
    )
    for iterate in trajectory.iterates:
        assert bool((_distance(iterate, images, norm) <= 0.05 + 1e-6).all())
        assert bool((iterate >= 0).all()) and bool((iterate <= 1).all())


def test_recorded_trajectory_lengths(mlp_model, synthetic_data, attack):
    images, labels = batch_of(synthetic_data[0], 8)
    trajectory = run_pgd(mlp_model, images, labels, attack, record_trajectory=True)
    assert trajectory.steps_executed == attack.steps
    assert len(trajectory.per_step_logits) == attack.steps + 1
    assert len(trajectory.iterates) == attack.steps + 1
    assert trajectory.attack_steps == 8 * attack.steps
    assert torch.equal(trajectory.final_adversarial, trajectory.iterates[-1])


@pytest.mark.parametrize("norm", ["inf", "2"])
@pytest.mark.parametrize("stop_at", [0, 1, 3, 5])
def test_split_run_matches_full_run(mlp_model, synthetic_data, norm, stop_at):
    images, labels = batch_of(synthetic_data[0], 24)
    config = AttackConfig(epsilon=0.05, step_size=0.02, steps=5, norm=norm)
    full = run_pgd(
        mlp_model, images, labels, config, generator=torch.Generator().manual_seed(7)
    )
    partial = run_pgd(
        mlp_model,
        images,
        labels,
        config,
        stop_at=stop_at,
        generator=torch.Generator().manual_seed(7),
    )
    resumed = resume_pgd(mlp_model, partial, images, labels, config)
    assert resumed.steps_executed == full.steps_executed
    assert torch.equal(resumed.final_adversarial, full.final_adversarial)
    assert torch.equal(resumed.crossing_step, full.crossing_step)
    assert torch.equal(resumed.max_logits_delta, full.max_logits_delta)


def test_resume_of_a_subset_matches_the_full_run(mlp_model, synthetic_data, attack):
    images, labels = batch_of(synthetic_data[0], 12)
    config = attack.model_copy(update={"random_init": False})
    full = run_pgd(mlp_model, images, labels, config)
    partial = run_pgd(mlp_model, images, labels, config, stop_at=2)
    index = torch.tensor([1, 4, 9])
    resumed = resume_pgd(
        mlp_model, partial.select(index), images[index], labels[index], config
    )
    expected = full.final_adversarial[index]
    assert torch.allclose(resumed.final_adversarial, expected, atol=1e-6)


def test_zero_epsilon_is_a_no_op(mlp_model, synthetic_data):
    images, labels = batch_of(synthetic_data[0], 16)
    config = AttackConfig(epsilon=0.0, step_size=0.01, steps=4)
    trajectory = run_pgd(
        mlp_model, images, labels, config, generator=torch.Generator().manual_seed(0)
    )
    assert torch.equal(trajectory.final_adversarial, images)


def test_crossing_step_and_never():
    model = _box_model()
    images = torch.tensor([[[[0.9], [0.1]]], [[[0.1], [0.9]]]])
    labels = torch.tensor([0, 0])
    config = AttackConfig(epsilon=0.05, step_size=0.02, steps=4, random_init=False)
    trajectory = run_pgd(model, images, labels, config)
    assert trajectory.crossing_step.tolist() == [NEVER, 1]
    assert trajectory.crossed.tolist() == [False, True]


def test_crossing_at_the_second_step():
    # every step shrinks the pixel gap by 0.04, from 0.06 to 0.02 to -0.02
    model = _box_model()
    images = torch.tensor([[[[0.53], [0.47]]]])
    config = AttackConfig(epsilon=0.1, step_size=0.02, steps=4, random_init=False)
    trajectory = run_pgd(model, images, torch.tensor([0]), config)
    assert trajectory.crossing_step.tolist() == [2]
    expected = torch.tensor([[[[0.45], [0.55]]]])
    assert torch.allclose(trajectory.final_adversarial, expected)


def test_crossing_steps_lie_in_range(mlp_model, synthetic_data, attack):
    images, labels = batch_of(synthetic_data[0], 48)
    trajectory = run_pgd(
        mlp_model, images, labels, attack, generator=torch.Generator().manual_seed(1)
    )
    steps = trajectory.crossing_step
    assert bool(((steps == NEVER) | ((steps >= 1) & (steps <= attack.steps))).all())
    assert bool((trajectory.max_logits_delta >= 0).all())


def test_resume_with_other_config_raises(mlp_model, synthetic_data, attack):
    images, labels = batch_of(synthetic_data[0], 4)
    partial = run_pgd(mlp_model, images, labels, attack, stop_at=2)
    other = attack.model_copy(update={"steps": attack.steps + 1})
    with pytest.raises(AttackConfigMismatchError):
        resume_pgd(mlp_model, partial, images, labels, other)


def test_stop_at_out_of_range(mlp_model, synthetic_data, attack):
    images, labels = batch_of(synthetic_data[0], 4)
    with pytest.raises(ValueError):
        run_pgd(mlp_model, images, labels, attack, stop_at=attack.steps + 1)


@pytest.mark.parametrize(
    "values",
    [
        {"epsilon": -0.1, "step_size": 0.01, "steps": 1},
        {"epsilon": 0.1, "step_size": 0.0, "steps": 1},
        {"epsilon": 0.1, "step_size": 0.01, "steps": 0},
        {"epsilon": 0.1, "step_size": 0.3, "steps": 1},
        {"epsilon": 0.1, "step_size": 0.01, "steps": 1, "norm": "1"},
        {"epsilon": 0.1, "step_size": 0.01, "steps": 1, "restarts": 2},
    ],
)
def test_attack_config_validation(values):
    with pytest.raises(ValidationError):
        AttackConfig(**values)


def test_large_two_norm_step_is_allowed():
    AttackConfig(epsilon=0.1, step_size=0.3, steps=1, norm="2")


def test_split_run_equivalence_on_random_fixtures():
    spec = ArchitectureSpec(name="mlp", num_classes=4, image_shape=(1, 3, 2), hidden=8)
    generator = torch.Generator().manual_seed(2024)
    for trial in range(100):
        model = build_classifier(spec, seed=trial)
        steps = int(torch.randint(1, 11, (1,), generator=generator))
        stop_at = int(torch.randint(0, steps + 1, (1,), generator=generator))
        epsilon = float(torch.rand(1, generator=generator)) * 0.2
        config = AttackConfig(
            epsilon=epsilon,
            step_size=epsilon / 4 or 1e-3,
            steps=steps,
            norm="inf" if trial % 2 else "2",
        )
        images = torch.rand(6, 1, 3, 2, generator=generator)
        labels = torch.randint(0, 4, (6,), generator=generator)
        full = run_pgd(
            model,
            images,
            labels,
            config,
            generator=torch.Generator().manual_seed(trial),
        )
        partial = run_pgd(
            model,
            images,
            labels,
            config,
            stop_at=stop_at,
            generator=torch.Generator().manual_seed(trial),
        )
        resumed = resume_pgd(model, partial, images, labels, config)
        assert torch.equal(resumed.final_adversarial, full.final_adversarial)
        assert torch.equal(resumed.crossing_step, full.crossing_step)


def test_infinity_norm_feasibility_over_random_trials():
    spec = ArchitectureSpec(name="linear", num_classes=3, image_shape=(1, 4, 1))
    model = build_classifier(spec, seed=0)
    generator = torch.Generator().manual_seed(0)
    for _ in range(1000):
        epsilon = float(torch.rand(1, generator=generator)) * 0.3
        config = AttackConfig(epsilon=epsilon, step_size=epsilon / 2 or 1e-3, steps=3)
        images = torch.rand(1, 1, 4, 1, generator=generator)
        labels = torch.randint(0, 3, (1,), generator=generator)
        trajectory = run_pgd(
            model, images, labels, config, record_trajectory=True, generator=generator
        )
        for iterate in trajectory.iterates:
            assert float((iterate - images).abs().max()) <= epsilon + 1e-7
            assert float(iterate.min()) >= 0 and float(iterate.max()) <= 1
