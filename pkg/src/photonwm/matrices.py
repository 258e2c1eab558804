"""Fixed matrices of the 6-spinor Maxwell formalism and the Dirac algebra.

Everything here is a small dense complex array built deterministically from
the Levi-Civita tensor, so repeated calls return bitwise-identical matrices.
Conventions used throughout the package:

* metric signature (+, -, -, -)
* plane waves carry exp(-i*omega*t + i*k.x), so d/dt -> -i*omega and
  grad -> +i*k
* the raised spatial first-order matrices are the negatives of the printed
  lower-index triple, which is what makes the commutator identities in
  the Lorentz module close with plain (omega, k) components
"""

from __future__ import annotations

import numpy as np

from . import _mutation

# Absolute entrywise tolerance for identities that are exact in exact
# arithmetic; covers float roundoff only.
MAT_TOL = 1e-13

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


def levi_civita() -> np.ndarray:
    """Totally antisymmetric rank-3 tensor with eps[0,1,2] = +1."""
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


def build_tau() -> np.ndarray:
    """Spin-1 matrix triple, (tau_i)_jk = -i eps_ijk, shape (3, 3, 3)."""
    tau = -1j * levi_civita().astype(complex)
    for i in range(3):
        if _mutation.is_active(f"tau{i + 1}"):
            tau[i] = -tau[i]
    return tau


def build_beta_chi() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First-order system matrices.

    Returns (beta0, beta, chi): beta0 is the 6x6 block signature matrix
    diag(I3, -I3); beta[i] has blocks [[0, tau_i], [-tau_i, 0]]; and
    chi[i] = beta0 @ beta[i].
    """
    tau = build_tau()
    eye3 = np.eye(3, dtype=complex)
    zero3 = np.zeros((3, 3), dtype=complex)
    beta0 = np.block([[eye3, zero3], [zero3, -eye3]])
    if _mutation.is_active("beta0"):
        beta0 = -beta0
    beta = np.stack(
        [np.block([[zero3, tau[i]], [-tau[i], zero3]]) for i in range(3)]
    )
    for i in range(3):
        if _mutation.is_active(f"beta{i + 1}"):
            beta[i] = -beta[i]
    chi = np.stack([beta0 @ beta[i] for i in range(3)])
    return beta0, beta, chi


def build_spin() -> np.ndarray:
    """6x6 spin triple S_i = diag(tau_i, tau_i), shape (3, 6, 6)."""
    tau = build_tau()
    zero3 = np.zeros((3, 3), dtype=complex)
    return np.stack(
        [np.block([[tau[i], zero3], [zero3, tau[i]]]) for i in range(3)]
    )


def mat_dot(triple: np.ndarray, vec) -> np.ndarray:
    """Contract a stacked matrix triple with a 3-vector: sum_i vec[i]*M[i]."""
    vec = np.asarray(vec)
    return np.tensordot(vec, triple, axes=(0, 0))


def second_order_identity_residual(k, omega: float) -> float:
    """Max-entry residual of the squared first-order symbol identity.

    The symbol M = (beta0*omega - beta.k) squared must equal
    (omega^2 - |k|^2) I6 plus the longitudinal block I2 (x) (k k^T).
    """
    k = np.asarray(k, dtype=float)
    beta0, beta, _ = build_beta_chi()
    symbol = beta0 * omega - mat_dot(beta, k)
    longitudinal = np.kron(np.eye(2), np.outer(k, k).astype(complex))
    expected = (omega**2 - k @ k) * np.eye(6, dtype=complex) + longitudinal
    return float(np.max(np.abs(symbol @ symbol - expected)))


def build_dirac_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Gamma matrices in the Dirac representation plus the Pauli triple.

    Returns (gamma, sigma) with gamma shape (4, 4, 4) indexed by mu = 0..3
    and sigma shape (3, 2, 2).
    """
    sigma = np.stack(
        [
            np.array([[0, 1], [1, 0]], dtype=complex),
            np.array([[0, -1j], [1j, 0]], dtype=complex),
            np.array([[1, 0], [0, -1]], dtype=complex),
        ]
    )
    eye2 = np.eye(2, dtype=complex)
    zero2 = np.zeros((2, 2), dtype=complex)
    gamma0 = np.block([[eye2, zero2], [zero2, -eye2]])
    gammas = [gamma0]
    for i in range(3):
        gammas.append(np.block([[zero2, sigma[i]], [-sigma[i], zero2]]))
    return np.stack(gammas), sigma


def rotation_matrix(theta) -> np.ndarray:
    """Proper rotation by |theta| about theta-hat as a real 3x3 matrix.

    Computed as exp(-i theta.tau), the matrix exponential of the
    cross-product matrix of theta, hence real orthogonal.
    """
    from scipy.linalg import expm

    theta = np.asarray(theta, dtype=float)
    return np.real(expm(-1j * mat_dot(build_tau(), theta)))


def spinor_rotation(theta) -> np.ndarray:
    """6x6 rotation representative exp(-i theta.S) = diag(R, R)."""
    r = rotation_matrix(theta).astype(complex)
    zero3 = np.zeros((3, 3), dtype=complex)
    return np.block([[r, zero3], [zero3, r]])
