"""K-step PGD with trajectory recording and resumption at an intermediate step."""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import torch

from src.attack.config import AttackConfig
from src.common.errors import (
    AttackConfigMismatchError,
    NonFiniteGradientError,
    ShapeMismatchError,
)
from src.core.functional import cross_entropy, input_gradient
from src.core.models import Classifier, forward, predict

# crossing_step value of an example that was never misclassified
NEVER = -1

_FEASIBILITY_TOL = 1e-6


@dataclass
class AttackTrajectory:
    """
    Batched record of a PGD run; row i belongs to example i.

    Attributes:
        final_adversarial: (N, C, H, W) last iterate
        last_logits: (N, num_classes) logits at the last iterate
        crossing_step: (N,) first step j >= 1 whose prediction differs from the
            label, or NEVER
        max_logits_delta: (N,) largest L1 change of logits between adjacent steps
        steps_executed: number of PGD iterations run so far
        config: the attack config the run was started with
        per_step_logits: logits for steps 0..steps_executed when recorded
        iterates: images for steps 0..steps_executed when recorded
    """

    final_adversarial: torch.Tensor
    last_logits: torch.Tensor
    crossing_step: torch.Tensor
    max_logits_delta: torch.Tensor
    steps_executed: int
    config: AttackConfig
    per_step_logits: Optional[List[torch.Tensor]] = None
    iterates: Optional[List[torch.Tensor]] = None

    def __len__(self) -> int:
        return int(self.final_adversarial.shape[0])

    @property
    def recorded(self) -> bool:
        return self.per_step_logits is not None

    @property
    def crossed(self) -> torch.Tensor:
        return self.crossing_step != NEVER

    @property
    def attack_steps(self) -> int:
        """PGD iterations spent on the whole batch."""
        return len(self) * self.steps_executed

    def select(self, index: torch.Tensor) -> "AttackTrajectory":
        """Sub-trajectory of the rows picked by ``index`` (indices or a mask)."""
        return replace(
            self,
            final_adversarial=self.final_adversarial[index],
            last_logits=self.last_logits[index],
            crossing_step=self.crossing_step[index],
            max_logits_delta=self.max_logits_delta[index],
            per_step_logits=(
                None
                if self.per_step_logits is None
                else [step[index] for step in self.per_step_logits]
            ),
            iterates=(
                None
                if self.iterates is None
                else [step[index] for step in self.iterates]
            ),
        )


def _check_pair(point: torch.Tensor, origin: torch.Tensor) -> None:
    if point.shape != origin.shape:
        raise ShapeMismatchError(
            f"point shape {tuple(point.shape)} does not match origin shape "
            f"{tuple(origin.shape)}"
        )


def _flat_norm(delta: torch.Tensor) -> torch.Tensor:
    """Per-example 2-norm, broadcastable against ``delta``."""
    norms = delta.flatten(1).norm(p=2, dim=1)
    return norms.view(-1, *([1] * (delta.dim() - 1)))


def project(
    point: torch.Tensor, origin: torch.Tensor, config: AttackConfig
) -> torch.Tensor:
    """
    Project onto the epsilon-ball around ``origin`` intersected with [0, 1].

    For the infinity norm this is the exact nearest point. For the 2-norm the
    perturbation is scaled radially onto the ball, then clamped to the box;
    the clamp moves every pixel toward ``origin`` so the result stays in the ball.
    Points already inside both sets are returned unchanged.

    Args:
        point (torch.Tensor): (N, C, H, W) candidate images
        origin (torch.Tensor): (N, C, H, W) clean images
        config (AttackConfig): supplies epsilon and the norm
    Returns:
        torch.Tensor
    """
    _check_pair(point, origin)
    eps = config.epsilon
    if config.norm == "inf":
        inside = torch.max(torch.min(point, origin + eps), origin - eps)
    else:
        delta = point - origin
        norms = _flat_norm(delta)
        scale = eps / norms.clamp_min(torch.finfo(point.dtype).tiny)
        inside = torch.where(norms > eps, origin + delta * scale, point)
    return inside.clamp(0.0, 1.0)


def _ascend(
    current: torch.Tensor,
    grad: torch.Tensor,
    origin: torch.Tensor,
    config: AttackConfig,
) -> torch.Tensor:
    if not bool(torch.isfinite(grad).all()):
        raise NonFiniteGradientError("input gradient holds NaN or Inf")
    if config.norm == "inf":
        direction = grad.sign()
    else:
        norms = _flat_norm(grad)
        direction = grad / norms.clamp_min(torch.finfo(grad.dtype).tiny)
    nxt = project(current + config.step_size * direction, origin, config)
    if __debug__:
        _assert_feasible(nxt, origin, config)
    return nxt


def _assert_feasible(
    point: torch.Tensor, origin: torch.Tensor, config: AttackConfig
) -> None:
    delta = (point - origin).flatten(1)
    dist = delta.abs().max(dim=1).values if config.norm == "inf" else delta.norm(dim=1)
    assert bool((dist <= config.epsilon + _FEASIBILITY_TOL).all()), "left the ball"
    assert bool((point >= 0).all()) and bool((point <= 1).all()), "left the box"


def pgd_step(
    model: Classifier,
    current: torch.Tensor,
    origin: torch.Tensor,
    labels: torch.Tensor,
    config: AttackConfig,
) -> torch.Tensor:
    """
    One ascent step of size ``step_size`` followed by projection.

    The infinity norm steps along sign(grad), with sign(0) = 0; the 2-norm
    steps along grad / ||grad||.
    """
    _check_pair(current, origin)
    grad = input_gradient(model, current, labels)
    return _ascend(current, grad, origin, config)


def random_start(
    origin: torch.Tensor, config: AttackConfig, generator: Optional[torch.Generator]
) -> torch.Tensor:
    """Uniform point of the epsilon-ball around ``origin``, projected into [0, 1]."""
    eps = config.epsilon
    shape = origin.shape
    if config.norm == "inf":
        noise = torch.rand(shape, generator=generator, dtype=origin.dtype)
        delta = (2 * noise - 1) * eps
    else:
        direction = torch.randn(shape, generator=generator, dtype=origin.dtype)
        direction = direction / _flat_norm(direction).clamp_min(
            torch.finfo(origin.dtype).tiny
        )
        dims = origin[0].numel()
        radius = torch.rand(shape[0], generator=generator, dtype=origin.dtype)
        radius = eps * radius.pow(1.0 / dims)
        delta = direction * radius.view(-1, *([1] * (origin.dim() - 1)))
    return project(origin + delta.to(origin.device), origin, config)


def _forward_with_graph(
    model: Classifier, images: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    x = images.detach().clone().requires_grad_(True)
    with torch.enable_grad():
        logits = forward(model, x, "eval")
    return x, logits


def _advance(
    model: Classifier,
    trajectory: AttackTrajectory,
    origin: torch.Tensor,
    labels: torch.Tensor,
    n_steps: int,
) -> AttackTrajectory:
    config = trajectory.config
    current = trajectory.final_adversarial
    x, logits = _forward_with_graph(model, current)
    previous = logits.detach()
    crossing = trajectory.crossing_step.clone()
    max_delta = trajectory.max_logits_delta.clone()
    per_step = (
        None
        if trajectory.per_step_logits is None
        else list(trajectory.per_step_logits)
    )
    iterates = None if trajectory.iterates is None else list(trajectory.iterates)
    step = trajectory.steps_executed
    for _ in range(n_steps):
        with torch.enable_grad():
            loss = cross_entropy(logits, labels).sum()
        (grad,) = torch.autograd.grad(loss, x)
        current = _ascend(current, grad.detach(), origin, config)
        step += 1
        x, logits = _forward_with_graph(model, current)
        now = logits.detach()
        newly = (predict(now) != labels) & (crossing == NEVER)
        crossing[newly] = step
        max_delta = torch.maximum(max_delta, (now - previous).abs().sum(dim=1))
        if per_step is not None:
            per_step.append(now)
        if iterates is not None:
            iterates.append(current)
        previous = now
    return replace(
        trajectory,
        final_adversarial=current.detach(),
        last_logits=previous,
        crossing_step=crossing,
        max_logits_delta=max_delta,
        steps_executed=step,
        per_step_logits=per_step,
        iterates=iterates,
    )


def run_pgd(
    model: Classifier,
    images: torch.Tensor,
    labels: torch.Tensor,
    config: AttackConfig,
    record_trajectory: bool = False,
    stop_at: Optional[int] = None,
    generator: Optional[torch.Generator] = None,
) -> AttackTrajectory:
    """
    Run ``min(stop_at, K)`` PGD steps against a fixed eval-mode model.

    Args:
        model (Classifier): attacked model, held fixed for the whole run
        images (torch.Tensor): (N, C, H, W) clean images in [0, 1]
        labels (torch.Tensor): (N,) true classes
        config (AttackConfig): attack parameters
        record_trajectory (bool): keep logits and iterates of every step
        stop_at (Optional[int]): truncate after this many steps; None runs K
        generator (Optional[torch.Generator]): random-start stream
    Returns:
        AttackTrajectory
    Raises:
        ValueError if ``stop_at`` is outside [0, K]
    """
    steps = config.steps if stop_at is None else stop_at
    if not 0 <= steps <= config.steps:
        raise ValueError(f"stop_at must lie in [0, {config.steps}] not {stop_at}")
    if images.shape[0] != labels.shape[0]:
        raise ShapeMismatchError(
            f"{images.shape[0]} images but {labels.shape[0]} labels"
        )
    origin = images.detach()
    start = random_start(origin, config, generator) if config.random_init else origin
    _, start_logits = _forward_with_graph(model, start)
    start_logits = start_logits.detach()
    n = origin.shape[0]
    trajectory = AttackTrajectory(
        final_adversarial=start,
        last_logits=start_logits,
        crossing_step=torch.full((n,), NEVER, dtype=torch.long, device=origin.device),
        max_logits_delta=torch.zeros(n, dtype=start_logits.dtype, device=origin.device),
        steps_executed=0,
        config=config,
        per_step_logits=[start_logits] if record_trajectory else None,
        iterates=[start] if record_trajectory else None,
    )
    if steps == 0:
        return trajectory
    return _advance(model, trajectory, origin, labels, steps)


def resume_pgd(
    model: Classifier,
    trajectory: AttackTrajectory,
    images: torch.Tensor,
    labels: torch.Tensor,
    config: AttackConfig,
) -> AttackTrajectory:
    """
    Continue a truncated run for the remaining ``K - steps_executed`` steps.

    Running ``run_pgd(stop_at=M)`` and then ``resume_pgd`` reproduces
    ``run_pgd(stop_at=K)`` bit for bit: the random start is drawn only once
    and every step recomputes the same eval-mode forward.

    Raises:
        AttackConfigMismatchError if ``config`` differs from the original run's
    """
    if config != trajectory.config:
        raise AttackConfigMismatchError(
            f"resume config {config} differs from original {trajectory.config}"
        )
    _check_pair(trajectory.final_adversarial, images)
    remaining = config.steps - trajectory.steps_executed
    if remaining <= 0:
        return trajectory
    return _advance(model, trajectory, images.detach(), labels, remaining)
