"""Matrix-valued data model for closed linear quantum systems.

A closed linear quantum system is described by a canonical commutation
matrix ``Theta`` (block diagonal in 2x2 symplectic units ``J``), a real
symmetric Hamiltonian matrix ``R`` and an output selector ``C``.  The
Heisenberg dynamics matrix is never stored; it is always derived as
``A = 2 Theta R``, which guarantees the commutation relations are
preserved for all time (physical realizability).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "J",
    "SYMMETRY_TOL",
    "CONDITION_TOL",
    "RANK_TOL_SCALE",
    "QuantumLinearSystem",
    "ConditionReport",
    "make_commutation_matrix",
    "dynamics_from_hamiltonian",
    "check_plant_conditions",
    "numerical_rank",
]

# 2x2 symplectic unit: one oscillator mode (position/momentum pair).
J = np.array([[0.0, 1.0], [-1.0, 0.0]])
J.setflags(write=False)

# Absolute element-wise tolerance for symmetry of Hamiltonian matrices.
SYMMETRY_TOL = 1e-12
# Absolute max-norm tolerance for the structural plant conditions.
CONDITION_TOL = 1e-9
# Numerical rank: singular values below max_dim * sigma_max * RANK_TOL_SCALE
# count as zero.
RANK_TOL_SCALE = 1e-12


def make_commutation_matrix(n_modes: int) -> np.ndarray:
    """Build the canonical commutation matrix diag(J, ..., J).

    Parameters
    ----------
    n_modes : int
        Number of oscillator modes; the result is 2*n_modes square.

    Returns
    -------
    ndarray
        Read-only skew-symmetric matrix satisfying ``Theta @ Theta == -I``
        exactly.
    """
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    theta = np.kron(np.eye(n_modes), J)
    theta.setflags(write=False)
    return theta


def numerical_rank(a: np.ndarray) -> int:
    """Rank of `a` counting singular values above max_dim*sigma_max*1e-12."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    tol = max(a.shape) * s[0] * RANK_TOL_SCALE
    return int(np.count_nonzero(s > tol))


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _check_commutation(theta: np.ndarray, name: str = "theta") -> None:
    """Require an exactly canonical commutation matrix (block-J form)."""
    n = theta.shape[0]
    if theta.shape[1] != n or n % 2 != 0 or n == 0:
        raise ValueError(f"{name} must be square with even dimension, got {theta.shape}")
    if not np.array_equal(theta.T, -theta):
        raise ValueError(f"{name} must be exactly skew-symmetric")
    if not np.array_equal(theta @ theta, -np.eye(n)):
        raise ValueError(f"{name} must square to -I (canonical block-J form)")


@dataclass(frozen=True)
class QuantumLinearSystem:
    """A closed linear quantum plant (commutation matrix, Hamiltonian, output).

    Attributes
    ----------
    theta : ndarray
        n x n canonical commutation matrix, block diag(J, ..., J).
    r : ndarray
        n x n real symmetric Hamiltonian matrix (energy = 0.5 x^T R x).
    c : ndarray
        m x n output selector; the estimated variables are z = C x.
    """

    theta: np.ndarray
    r: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        theta = _as_matrix(self.theta, "theta")
        r = _as_matrix(self.r, "r")
        c = _as_matrix(self.c, "c")
        _check_commutation(theta, "theta")
        n = theta.shape[0]
        if r.shape != (n, n):
            raise ValueError(f"r must be {n}x{n}, got {r.shape}")
        if np.abs(r - r.T).max() > SYMMETRY_TOL:
            raise ValueError("r must be symmetric to within 1e-12")
        if c.shape[1] != n or c.shape[0] < 1:
            raise ValueError(f"c must have {n} columns and at least one row, got {c.shape}")
        for name, arr in (("theta", theta), ("r", r), ("c", c)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        """Number of system variables (even)."""
        return self.theta.shape[0]

    @property
    def n_modes(self) -> int:
        return self.n // 2

    @property
    def m(self) -> int:
        """Number of output variables."""
        return self.c.shape[0]

    @property
    def a(self) -> np.ndarray:
        """Heisenberg dynamics matrix 2*Theta*R (derived, never stored)."""
        return dynamics_from_hamiltonian(self.theta, self.r)


def dynamics_from_hamiltonian(theta: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Dynamics matrix ``A = 2 Theta R`` of a quadratic Hamiltonian.

    `theta` may be any skew block of a commutation matrix (it is not
    required to be in canonical form here); `r` must be symmetric to
    within ``SYMMETRY_TOL``.
    """
    theta = _as_matrix(theta, "theta")
    r = _as_matrix(r, "r")
    if theta.shape[0] != theta.shape[1]:
        raise ValueError(f"theta must be square, got {theta.shape}")
    if r.shape != theta.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape}, r {r.shape}")
    if r.size and np.abs(r - r.T).max() > SYMMETRY_TOL:
        raise ValueError("r must be symmetric to within 1e-12")
    return 2.0 * theta @ r


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the structural checks a plant must pass for observer design.

    All flags are derived from the residuals against the stated tolerances;
    the report is pure data and a failing flag is not an error.
    """

    tf_cond_ok: bool
    cjc_ok: bool
    rank_ok: bool
    bound_ok: bool
    rank_cr: int
    n_p2: int
    residuals: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return self.tf_cond_ok and self.cjc_ok and self.rank_ok and self.bound_ok


def check_plant_conditions(plant: QuantumLinearSystem,
                           tol: float = CONDITION_TOL) -> ConditionReport:
    """Check the structural conditions for estimability of the plant outputs.

    The checks, with residuals measured in the element-wise max norm:

    * the outputs are decoupled from the plant dynamics for all time,
      checked through the finite equivalent ``C [R, Theta R] = 0``
      (because ``Theta^2 = -I``, vanishing of ``C Theta^k R`` for k = 0, 1
      implies it for every k, which is the transfer-function identity);
    * ``C Theta C^T = 0``, i.e. the output variables commute;
    * ``C`` has full row rank m (numerical rank via SVD);
    * ``m <= n_p2 / 2`` where ``n_p2 = n - rank [R, Theta R]`` counts the
      variables that stay constant under the free plant dynamics.
    """
    theta, r, c = plant.theta, plant.r, plant.c
    cr = np.hstack([r, theta @ r])
    rank_cr = numerical_rank(cr)
    n_p2 = plant.n - rank_cr

    tf_residual = float(np.abs(c @ cr).max())
    cjc_residual = float(np.abs(c @ theta @ c.T).max())
    rank_c = numerical_rank(c)

    return ConditionReport(
        tf_cond_ok=tf_residual <= tol,
        cjc_ok=cjc_residual <= tol,
        rank_ok=rank_c == plant.m,
        bound_ok=2 * plant.m <= n_p2,
        rank_cr=rank_cr,
        n_p2=n_p2,
        residuals={
            "tf_cond": tf_residual,
            "cjc": cjc_residual,
            "rank_defect": float(plant.m - rank_c),
            "bound_excess": float(max(0.0, plant.m - n_p2 / 2)),
        },
    )
