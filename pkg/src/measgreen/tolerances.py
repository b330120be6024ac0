"""Numerical tolerances shared by all modules."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Tolerance settings.

    Attributes
    ----------
    sym : float
        Hermiticity / PSD checks, relative to the matrix norm.
    det : float
        Singularity of jump matrices, as ``sigma_min / sigma_max``.
    rank : float
        Numerical rank cut-off relative to the largest singular value.
    gap : float
        Minimal distance of a sampled spectral parameter from bad points.
    max_tries : int
        Rejection-sampling budget for :func:`~measgreen.model.generic_lambda`.
    exp : float
        Accuracy target for matrix exponentials.
    lin : float
        Relative residual accepted for consistent linear systems.
    supp : float
        Support detection / orthogonality threshold for conditions (k).
    """

    sym: float = 1e-12
    det: float = 1e-10
    rank: float = 1e-10
    gap: float = 1e-6
    max_tries: int = 1000
    exp: float = 1e-12
    lin: float = 1e-9
    supp: float = 1e-10

    def with_rank(self, rank: float) -> "Tolerances":
        return replace(self, rank=rank)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol
