"""Plane-wave mode structure: polarization vectors, 6-spinor fundamental
solutions, the momentum-space Hamiltonian symbol, and the discrete
orthonormality / completeness checks.

Branch conventions (fixed once here, used everywhere):

* positive branch   sqrt(omega/V) f(k, lam) exp(-i omega t + i k.x)
* negative branch   sqrt(omega/V) g(k, lam) exp(+i omega t - i k.x)
* omega = |k| for lam = +-1 and omega = 0 for lam = 0, so the
  longitudinal/scalar mode is retained in the basis but carries zero
  amplitude in any field, energy or momentum.

f and g are block-swaps of each other; for lam = +-1 they satisfy
(chi.k) f = +|k| f and (chi.k) g = +|k| g, while the eigenvectors of
chi.k with eigenvalue -|k| are f(-k, +-1).  The reality partner of the
positive-branch mode (k, lam) is f(k, -lam) on the conjugate phase, which
is what keeps synthesized E and B fields real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _mutation
from .matrices import build_beta_chi, build_spin, mat_dot

# Unit-norm checks on polarization vectors and spinors.
NORM_TOL = 1e-12

# Below this transverse fraction the azimuth-zero pole limit is used.
_POLE_FRACTION = 1e-12


def mode_frequency(k, lam: int) -> float:
    """Dispersion: |k| for the transverse helicities, 0 for lam = 0."""
    if lam == 0:
        return 0.0
    return float(np.linalg.norm(np.asarray(k, dtype=float)))


def polarization(k, lam: int):
    """Polarization 3-vector for helicity lam in {-1, 0, +1}.

    lam = 0 returns k/|k|.  lam = +1 is the right-circular vector; at the
    k_perp = 0 pole the azimuth-zero limit (sign(kz), i, 0)/sqrt(2) is
    used.  lam = -1 is the complex conjugate of lam = +1.
    """
    k = np.asarray(k, dtype=float)
    if np.linalg.norm(k) == 0.0:
        raise ValueError("undefined polarization at k = 0")
    if lam not in (-1, 0, 1):
        raise ValueError(f"helicity must be -1, 0 or +1, got {lam}")
    if lam == 0:
        return (k / np.linalg.norm(k)).astype(complex)
    eps = _circular(k[None, :])[0]
    return eps if lam == 1 else np.conj(eps)


def _circular(kpts: np.ndarray) -> np.ndarray:
    """Right-circular polarization for an (N, 3) array of wave vectors.

    Rows with k = 0 come back as zero; callers mask them.
    """
    kx, ky, kz = kpts[:, 0], kpts[:, 1], kpts[:, 2]
    kmag = np.sqrt(kx**2 + ky**2 + kz**2)
    kperp2 = kx**2 + ky**2
    eps = np.zeros((len(kpts), 3), dtype=complex)

    sy = -1.0 if _mutation.is_active("eps-y") else 1.0
    sz = -1.0 if _mutation.is_active("eps-z") else 1.0

    general = (kperp2 > (_POLE_FRACTION * kmag) ** 2) & (kmag > 0)
    if np.any(general):
        gx, gy, gz = kx[general], ky[general], kz[general]
        gmag, gperp2 = kmag[general], kperp2[general]
        # The printed form divides by (kx - i ky); multiply through by the
        # conjugate so the denominator is the real k_perp^2.
        rat = (gx + 1j * gy) / (gperp2 * np.sqrt(2.0) * gmag)
        eps[general, 0] = (gx * gz - sy * 1j * gy * gmag) * rat
        eps[general, 1] = (gy * gz + sy * 1j * gx * gmag) * rat
        eps[general, 2] = -sz * (gx + 1j * gy) / (np.sqrt(2.0) * gmag)

    pole = (~general) & (kmag > 0)
    if np.any(pole):
        eps[pole, 0] = np.sign(kz[pole]) / np.sqrt(2.0)
        eps[pole, 1] = sy * 1j / np.sqrt(2.0)
    return eps


def polarization_bins(kpts: np.ndarray, lam: int) -> np.ndarray:
    """Vectorized circular polarization over (..., 3) wave vectors."""
    shape = kpts.shape[:-1]
    eps = _circular(kpts.reshape(-1, 3)).reshape(*shape, 3)
    return eps if lam == 1 else np.conj(eps)


def spinor_f(k, lam: int) -> np.ndarray:
    """Positive-branch unit spinor (eps; lam*eps)/sqrt(1 + lam^2)."""
    eps = polarization(k, lam)
    return np.concatenate([eps, lam * eps]) / np.sqrt(1.0 + lam * lam)


def spinor_g(k, lam: int) -> np.ndarray:
    """Negative-branch unit spinor (lam*eps; eps)/sqrt(1 + lam^2)."""
    eps = polarization(k, lam)
    return np.concatenate([lam * eps, eps]) / np.sqrt(1.0 + lam * lam)


def block_swap(spinor: np.ndarray) -> np.ndarray:
    """Exchange the upper and lower 3-blocks (the duality map on spinors)."""
    return np.concatenate([spinor[..., 3:6], spinor[..., 0:3]], axis=-1)


def hamiltonian_symbol(k) -> np.ndarray:
    """Momentum-space Hamiltonian chi.k (grad -> ik applied to -i chi.grad)."""
    _, _, chi = build_beta_chi()
    return mat_dot(chi, np.asarray(k, dtype=float))


def helicity_operator(k) -> np.ndarray:
    """S.k-hat, whose eigenvalue on f(k, lam) and g(k, lam) is lam."""
    k = np.asarray(k, dtype=float)
    return mat_dot(build_spin(), k / np.linalg.norm(k))


@dataclass(frozen=True)
class PlaneWaveMode:
    """One labelled fundamental solution on a box of volume `volume`."""

    k: tuple[float, float, float]
    lam: int
    branch: str = "positive"
    volume: float = 1.0

    def __post_init__(self):
        if self.branch not in ("positive", "negative"):
            raise ValueError(f"branch must be positive/negative, got {self.branch}")
        if self.lam not in (-1, 0, 1):
            raise ValueError(f"helicity must be -1, 0 or +1, got {self.lam}")

    @property
    def omega(self) -> float:
        return mode_frequency(self.k, self.lam)


def mode_field(mode: PlaneWaveMode, x, t: float) -> np.ndarray:
    """Evaluate one fundamental solution at points x (shape (..., 3)).

    The lam = 0 mode carries frequency zero, so its amplitude factor
    sqrt(omega/V) vanishes and the returned field is identically zero.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(mode.k, dtype=float)
    omega = mode.omega
    amp = np.sqrt(omega / mode.volume)
    if amp == 0.0:
        return np.zeros(x.shape[:-1] + (6,), dtype=complex)
    if mode.branch == "positive":
        spinor = spinor_f(k, mode.lam)
        phase = np.exp(-1j * omega * t + 1j * (x @ k))
    else:
        spinor = spinor_g(k, mode.lam)
        phase = np.exp(1j * omega * t - 1j * (x @ k))
    return amp * phase[..., None] * spinor


def conjugate_partner_spinor(k, lam: int) -> np.ndarray:
    """Spinor multiplying the conjugate amplitude in a real field.

    For the positive-branch mode (k, lam) the reality partner rides the
    conjugate phase exp(+i omega t - i k.x) with spinor f(k, -lam), which
    equals -lam * g(k, -lam): the partner lives on the negative branch.
    """
    return spinor_f(k, -lam)


@dataclass(frozen=True)
class OrthonormalityReport:
    max_violation: float
    same_branch_entries: int
    cross_branch_entries: int


def orthonormality_check(k_indices, n, box) -> OrthonormalityReport:
    """Discrete quadrature check of the mode inner products on a lattice.

    `k_indices` is a sequence of integer triples m, standing for the wave
    vectors 2*pi*m/L.  Same-branch inner products must equal
    omega * delta_lambda * delta_k and every positive/negative cross
    product must vanish; the Riemann sum is exact at this commensurability.
    """
    n = tuple(int(v) for v in np.broadcast_to(n, (3,)))
    box = tuple(float(v) for v in np.broadcast_to(box, (3,)))
    volume = float(np.prod(box))
    dv = volume / float(np.prod(n))
    pts = _lattice_points(n, box)

    fields_pos, fields_neg, omegas = [], [], []
    for m in k_indices:
        m = np.asarray(m, dtype=float)
        if np.max(np.abs(m - np.round(m))) > 1e-9:
            raise ValueError(f"wave vector index {m} is not commensurate with the box")
        k = 2.0 * np.pi * np.round(m) / np.asarray(box)
        for lam in (-1, 0, 1):
            omega = mode_frequency(k, lam)
            pos = mode_field(PlaneWaveMode(tuple(k), lam, "positive", volume), pts, 0.0)
            neg = mode_field(PlaneWaveMode(tuple(k), lam, "negative", volume), pts, 0.0)
            fields_pos.append(pos)
            fields_neg.append(neg)
            omegas.append(omega)

    def inner(a, b):
        return dv * np.sum(np.conj(a) * b)

    worst = 0.0
    same = cross = 0
    for i, fi in enumerate(fields_pos):
        for j, fj in enumerate(fields_pos):
            expected = omegas[i] if i == j else 0.0
            worst = max(worst, abs(inner(fi, fj) - expected))
            same += 1
    for i, gi in enumerate(fields_neg):
        for j, gj in enumerate(fields_neg):
            expected = omegas[i] if i == j else 0.0
            worst = max(worst, abs(inner(gi, gj) - expected))
            same += 1
    for fi in fields_pos:
        for gj in fields_neg:
            worst = max(worst, abs(inner(fi, gj)))
            cross += 1
    return OrthonormalityReport(float(worst), same, cross)


@dataclass(frozen=True)
class CompletenessReport:
    paired_residual: float
    single_k_residual: float
    single_k_sum: np.ndarray


def completeness_check(k) -> CompletenessReport:
    """Outer-product completeness of the fundamental spinors.

    The sum C(k) = sum_lam (f f+ + g g+) taken alone equals
    I6 + chi.k-hat; pairing k with -k cancels the chi part and gives
    exactly 2*I6.  Both residuals are reported; the paired one is the
    assertable statement, the single-k identity is logged to document it.
    """
    k = np.asarray(k, dtype=float)

    def single(kv):
        c = np.zeros((6, 6), dtype=complex)
        for lam in (-1, 0, 1):
            f = spinor_f(kv, lam)
            g = spinor_g(kv, lam)
            c += np.outer(f, np.conj(f)) + np.outer(g, np.conj(g))
        return c

    c_plus, c_minus = single(k), single(-k)
    paired = float(np.max(np.abs(c_plus + c_minus - 2.0 * np.eye(6))))
    _, _, chi = build_beta_chi()
    khat = k / np.linalg.norm(k)
    single_res = float(np.max(np.abs(c_plus - np.eye(6) - mat_dot(chi, khat))))
    return CompletenessReport(paired, single_res, c_plus)


def _lattice_points(n, box) -> np.ndarray:
    axes = [np.arange(n[i]) * (box[i] / n[i]) for i in range(3)]
    xg, yg, zg = np.meshgrid(*axes, indexing="ij")
    return np.stack([xg, yg, zg], axis=-1)
