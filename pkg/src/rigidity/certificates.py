"""Certificate and witness payload types shared by the solver and the verifier.

Kept free of any solver logic so the re-verification code path never touches
the optimizer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COORDINATE = "coordinate"  # single-coordinate targets, vectors in R^n
VELOCITY = "velocity"      # R^d velocity targets, vectors in R^{n d}


@dataclass(frozen=True)
class TargetSubspace:
    """Subspace the stress energy must dominate.

    kind == "coordinate": columns live in R^n and stand for velocity fields
    along one fresh coordinate axis (the C(1, G0) setting).
    kind == "velocity": columns are flattened (n, d) velocity assignments.
    """

    kind: str
    vectors: np.ndarray  # orthonormal columns
    dimension: int       # d for velocity targets, 1 for coordinate targets
    pin_set: frozenset[int] = frozenset()
    tag: str = ""

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class PDStressCertificate:
    """Equilibrium stress whose energy form is PD on a target subspace."""

    stress: np.ndarray
    target: TargetSubspace
    lambda_min: float
    equilibrium_residual: float
    vacuous: bool = False


@dataclass(frozen=True)
class SuperStabilityCertificate:
    stress: np.ndarray
    omega_eigenvalues: np.ndarray
    rank: int
    lambda_min: float
    equilibrium_residual: float


@dataclass(frozen=True)
class FarkasWitness:
    """Nonzero PSD Gram matrix supported on unpinned vertices whose edge
    image lies in the column span of the rigidity matrix."""

    gram: np.ndarray         # (n, n)
    edge_image: np.ndarray   # (e,)
    flex_factor: np.ndarray  # (n, r), gram = flex_factor @ flex_factor.T
    colspan_residual: float  # relative
    psd_defect: float        # relative most-negative eigenvalue before clipping
    pin_set: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Undecided:
    reason: str
    best_lambda: float
    best_witness_residual: float


@dataclass(frozen=True)
class RefutationReport:
    """Explanation of why no single PD stress exists for the request."""

    reason: str
    witness: FarkasWitness | None = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SecondOrderFlex:
    """(p', p'') with R(p,p') = 0 and R(p,p'') + R(p',p') = 0."""

    first: np.ndarray   # (n, D)
    second: np.ndarray  # (n, D)
    first_residual: float
    second_residual: float
