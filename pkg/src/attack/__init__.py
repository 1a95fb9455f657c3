"""PGD adversarial example generation."""

from src.attack.config import AttackConfig
from src.attack.pgd import (
    NEVER,
    AttackTrajectory,
    pgd_step,
    project,
    random_start,
    resume_pgd,
    run_pgd,
)

__all__ = [
    "NEVER",
    "AttackConfig",
    "AttackTrajectory",
    "pgd_step",
    "project",
    "random_start",
    "resume_pgd",
    "run_pgd",
]
