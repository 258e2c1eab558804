"""Sampled 6-spinor fields on periodic lattices.

A FieldGrid stores one time slice of the spinor field (E; iB)/sqrt(2) on an
even N1 x N2 x N3 lattice, either in real space or as its unitary DFT.  This
module converts between E/B pairs and spinors, synthesizes fields from mode
amplitudes, projects out longitudinal content, extracts amplitudes back, and
evaluates energy and momentum.  It also owns the two file formats: the PWM1
binary snapshot and the ASCII mode-amplitude list.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft

from .modes import (
    conjugate_partner_spinor,
    mode_frequency,
    polarization_bins,
    spinor_f,
)

_PWM1_MAGIC = b"PWM1"


def _fft_workers() -> int:
    """Worker cap for the FFT backend, from the PWM_THREADS env var."""
    try:
        return max(1, int(os.environ.get("PWM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FieldGrid:
    """Immutable lattice snapshot; all transforms return new grids.

    data has shape (n1, n2, n3, 6) complex; `spectral` marks whether it
    holds real-space samples or unitary DFT coefficients.
    """

    n: tuple[int, int, int]
    box: tuple[float, float, float]
    t: float
    data: np.ndarray
    spectral: bool = False

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        box = tuple(float(v) for v in self.box)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "box", box)
        for v in n:
            if v < 2 or v % 2:
                raise ValueError(f"lattice counts must be even and >= 2, got {n}")
        if self.data.shape != n + (6,):
            raise ValueError(
                f"data shape {self.data.shape} does not match lattice {n} x 6"
            )

    @property
    def volume(self) -> float:
        return self.box[0] * self.box[1] * self.box[2]

    @property
    def cell_volume(self) -> float:
        return self.volume / (self.n[0] * self.n[1] * self.n[2])

    @property
    def points(self) -> int:
        return self.n[0] * self.n[1] * self.n[2]


def zero_grid(n, box, t: float = 0.0) -> FieldGrid:
    n = tuple(int(v) for v in np.broadcast_to(n, (3,)))
    box = tuple(float(v) for v in np.broadcast_to(box, (3,)))
    return FieldGrid(n, box, t, np.zeros(n + (6,), dtype=complex))


def wave_vectors(grid: FieldGrid) -> np.ndarray:
    """Physical wave vector of each DFT bin, shape (n1, n2, n3, 3)."""
    axes = [
        2.0 * np.pi * np.fft.fftfreq(grid.n[i], d=grid.box[i] / grid.n[i])
        for i in range(3)
    ]
    kx, ky, kz = np.meshgrid(*axes, indexing="ij")
    return np.stack([kx, ky, kz], axis=-1)


def from_eb(e: np.ndarray, b: np.ndarray, box, t: float = 0.0) -> FieldGrid:
    """Pack E and B sample arrays (n1, n2, n3, 3) into a spinor grid."""
    e = np.asarray(e)
    b = np.asarray(b)
    if e.shape != b.shape:
        raise ValueError(f"E shape {e.shape} != B shape {b.shape}")
    data = np.concatenate([e, 1j * b], axis=-1) / np.sqrt(2.0)
    return FieldGrid(e.shape[:3], tuple(np.broadcast_to(box, (3,))), t, data)


def to_eb(grid: FieldGrid) -> tuple[np.ndarray, np.ndarray]:
    """Unpack a real-space grid into (E, B); exact inverse of from_eb."""
    if grid.spectral:
        grid = to_real(grid)
    e = grid.data[..., 0:3] * np.sqrt(2.0)
    b = grid.data[..., 3:6] * np.sqrt(2.0) / 1j
    return e, b


def to_spectral(grid: FieldGrid) -> FieldGrid:
    if grid.spectral:
        return grid
    spec = scipy.fft.fftn(
        grid.data, axes=(0, 1, 2), norm="ortho", workers=_fft_workers()
    )
    return replace(grid, data=spec, spectral=True)


def to_real(grid: FieldGrid) -> FieldGrid:
    if not grid.spectral:
        return grid
    real = scipy.fft.ifftn(
        grid.data, axes=(0, 1, 2), norm="ortho", workers=_fft_workers()
    )
    return replace(grid, data=real, spectral=False)


def _negated_bins(arr: np.ndarray) -> np.ndarray:
    """View of a spectral array with every bin index negated mod n."""
    out = np.flip(arr, axis=(0, 1, 2))
    return np.roll(out, shift=(1, 1, 1), axis=(0, 1, 2))


def reality_residual(grid: FieldGrid) -> float:
    """Deviation from the real-E/B condition psi~(-k) = beta0 conj(psi~(k))."""
    spec = to_spectral(grid).data
    mapped = np.conj(_negated_bins(spec))
    mapped = np.concatenate([mapped[..., 0:3], -mapped[..., 3:6]], axis=-1)
    scale = max(float(np.max(np.abs(spec))), 1e-300)
    return float(np.max(np.abs(spec - mapped)) / scale)


def transverse_project(grid: FieldGrid) -> FieldGrid:
    """Remove longitudinal content: v(k) -> v(k) - khat (khat.v) per 3-block.

    The k = 0 bin has no longitudinal direction and passes through
    unchanged (a uniform static field is a legitimate solution); use
    zero_mode_magnitude to inspect it.
    """
    was_real = not grid.spectral
    spec = to_spectral(grid)
    kv = wave_vectors(spec)
    kmag2 = np.sum(kv * kv, axis=-1)
    safe = np.where(kmag2 > 0.0, kmag2, 1.0)
    data = spec.data.copy()
    for block in (slice(0, 3), slice(3, 6)):
        v = data[..., block]
        kdotv = np.sum(kv * v, axis=-1)
        v -= np.where(kmag2[..., None] > 0.0, kv * (kdotv / safe)[..., None], 0.0)
    out = replace(spec, data=data)
    return to_real(out) if was_real else out


def zero_mode_magnitude(grid: FieldGrid) -> float:
    """Norm of the k = 0 spectral block (uniform field content)."""
    spec = to_spectral(grid)
    return float(np.linalg.norm(spec.data[0, 0, 0, :]))


def duality(grid: FieldGrid) -> FieldGrid:
    """Swap the two 3-blocks of every spinor (E <-> B exchange, an involution)."""
    return replace(grid, data=grid.data[..., [3, 4, 5, 0, 1, 2]])


def divergence_residual(grid: FieldGrid) -> float:
    """Worst relative longitudinal fraction max_k |khat.v(k)| / |v(k)|.

    Bins whose content is below 1e-13 of the spectral peak are ignored;
    their ratio is pure roundoff noise.
    """
    spec = to_spectral(grid)
    kv = wave_vectors(spec)
    kmag = np.sqrt(np.sum(kv * kv, axis=-1))
    worst = 0.0
    for block in (slice(0, 3), slice(3, 6)):
        v = spec.data[..., block]
        vnorm = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        floor = 1e-13 * max(float(vnorm.max()), 1e-300)
        mask = (kmag > 0.0) & (vnorm > floor)
        if not np.any(mask):
            continue
        khat = kv[mask] / kmag[mask][..., None]
        proj = np.abs(np.sum(khat * v[mask], axis=-1)) / vnorm[mask]
        worst = max(worst, float(proj.max()))
    return worst


def energy(grid: FieldGrid) -> float:
    """Total field energy, the quadrature of psi+ psi = (E^2 + B^2)/2."""
    g = to_real(grid)
    return float(g.cell_volume * np.sum(np.abs(g.data) ** 2))


def momentum(grid: FieldGrid) -> np.ndarray:
    """Field momentum from the spectral branch decomposition.

    Each bin contributes khat times the difference between its positive-
    and negative-frequency energy content, so a single travelling mode of
    amplitude a gives k |a|^2 and standing waves cancel to zero.
    """
    spec = to_spectral(grid)
    kv = wave_vectors(spec)
    kmag = np.sqrt(np.sum(kv * kv, axis=-1))
    safe = np.where(kmag > 0.0, kmag, 1.0)
    khat = kv / safe[..., None]
    u = spec.data[..., 0:3]
    v = spec.data[..., 3:6]

    def transverse(w):
        return w - khat * np.sum(khat * w, axis=-1)[..., None]

    def spin_dot(w):
        # (tau.khat) w = i khat x w
        return 1j * np.cross(khat, w)

    tu, tv = transverse(u), transverse(v)
    du, dv = spin_dot(u), spin_dot(v)
    weight = np.real(np.sum(np.conj(tu) * dv + np.conj(du) * tv, axis=-1))
    weight = np.where(kmag > 0.0, weight, 0.0)
    return grid.cell_volume * np.einsum("xyz,xyzi->i", weight, khat)


class ModeAmplitudes:
    """Sparse map (k-index triple, helicity) -> complex amplitude.

    Entries with helicity 0 are allowed but non-dynamical: they carry zero
    frequency and never contribute to fields, energy or momentum.
    """

    def __init__(self, entries: dict | None = None):
        self._entries: dict[tuple[int, int, int, int], complex] = {}
        if entries:
            for key, value in entries.items():
                self[key] = value

    @staticmethod
    def _check_key(key):
        ix, iy, iz, lam = key
        if lam not in (-1, 0, 1):
            raise ValueError(f"helicity must be -1, 0 or +1, got {lam}")
        return (int(ix), int(iy), int(iz), int(lam))

    def __setitem__(self, key, value):
        self._entries[self._check_key(key)] = complex(value)

    def __getitem__(self, key):
        return self._entries.get(self._check_key(key), 0j)

    def __iter__(self):
        return iter(sorted(self._entries))

    def __len__(self):
        return len(self._entries)

    def items(self):
        return [(k, self._entries[k]) for k in sorted(self._entries)]

    def nondynamical_keys(self):
        return [k for k in self if k[3] == 0]

    def max_difference(self, other: "ModeAmplitudes") -> float:
        keys = set(self._entries) | set(other._entries)
        if not keys:
            return 0.0
        return max(abs(self[k] - other[k]) for k in keys)

    def helicity_power(self, lam: int) -> float:
        return sum(abs(a) ** 2 for k, a in self.items() if k[3] == lam)

    def mode_energy(self, box) -> float:
        box = np.broadcast_to(box, (3,))
        total = 0.0
        for (ix, iy, iz, lam), a in self.items():
            k = 2.0 * np.pi * np.array([ix, iy, iz]) / box
            total += mode_frequency(k, lam) * abs(a) ** 2
        return total

    def mode_momentum(self, box) -> np.ndarray:
        box = np.broadcast_to(box, (3,))
        total = np.zeros(3)
        for (ix, iy, iz, lam), a in self.items():
            if lam == 0:
                continue
            total += 2.0 * np.pi * np.array([ix, iy, iz]) / box * abs(a) ** 2
        return total


def _mode_k(index, box) -> np.ndarray:
    return 2.0 * np.pi * np.asarray(index, dtype=float) / np.asarray(box)


def _check_commensurate(index, n):
    for i, v in enumerate(index):
        if abs(v) >= n[i] // 2:
            raise ValueError(
                f"mode index {tuple(index)} does not fit lattice {n} "
                "(indices must satisfy |m| < n/2)"
            )


def synthesize(modes: ModeAmplitudes, n, box, t: float = 0.0) -> FieldGrid:
    """Build the real-field mode expansion on a lattice at time t.

    Each amplitude a(k, lam) rides the positive branch and its complex
    conjugate rides the partner spinor f(k, -lam) on the conjugate phase,
    which makes the resulting E and B exactly real.  Helicity-0 entries
    carry zero frequency and contribute nothing.
    """
    n = tuple(int(v) for v in np.broadcast_to(n, (3,)))
    box = tuple(float(v) for v in np.broadcast_to(box, (3,)))
    volume = float(np.prod(box))
    root_points = np.sqrt(float(np.prod(n)))
    spec = np.zeros(n + (6,), dtype=complex)
    for (ix, iy, iz, lam), a in modes.items():
        if lam == 0 or a == 0:
            continue
        index = (ix, iy, iz)
        _check_commensurate(index, n)
        k = _mode_k(index, box)
        omega = mode_frequency(k, lam)
        scale = root_points * np.sqrt(omega / volume) / np.sqrt(2.0)
        pos_bin = tuple(v % n[i] for i, v in enumerate(index))
        neg_bin = tuple((-v) % n[i] for i, v in enumerate(index))
        spec[pos_bin] += scale * a * np.exp(-1j * omega * t) * spinor_f(k, lam)
        spec[neg_bin] += (
            scale
            * np.conj(a)
            * np.exp(1j * omega * t)
            * conjugate_partner_spinor(k, lam)
        )
    return to_real(FieldGrid(n, box, t, spec, spectral=True))


def synthesize_rate(
    modes: ModeAmplitudes, n, box, t: float = 0.0, freq_scale: float = 1.0
) -> FieldGrid:
    """Time derivative of the synthesized field.

    freq_scale multiplies every mode frequency in both the phase and the
    -i*omega factor; values other than 1 detune the field off shell for
    the pseudo-Lagrangian checks.
    """
    n = tuple(int(v) for v in np.broadcast_to(n, (3,)))
    box = tuple(float(v) for v in np.broadcast_to(box, (3,)))
    volume = float(np.prod(box))
    root_points = np.sqrt(float(np.prod(n)))
    spec = np.zeros(n + (6,), dtype=complex)
    for (ix, iy, iz, lam), a in modes.items():
        if lam == 0 or a == 0:
            continue
        index = (ix, iy, iz)
        _check_commensurate(index, n)
        k = _mode_k(index, box)
        omega = mode_frequency(k, lam) * freq_scale
        scale = root_points * np.sqrt(mode_frequency(k, lam) / volume) / np.sqrt(2.0)
        pos_bin = tuple(v % n[i] for i, v in enumerate(index))
        neg_bin = tuple((-v) % n[i] for i, v in enumerate(index))
        spec[pos_bin] += (
            scale * a * (-1j * omega) * np.exp(-1j * omega * t) * spinor_f(k, lam)
        )
        spec[neg_bin] += (
            scale
            * np.conj(a)
            * (1j * omega)
            * np.exp(1j * omega * t)
            * conjugate_partner_spinor(k, lam)
        )
    return to_real(FieldGrid(n, box, t, spec, spectral=True))


def synthesize_detuned(
    modes: ModeAmplitudes, n, box, t: float, freq_scale: float
) -> FieldGrid:
    """Field synthesized with every frequency scaled (off shell for t != 0)."""
    n = tuple(int(v) for v in np.broadcast_to(n, (3,)))
    box = tuple(float(v) for v in np.broadcast_to(box, (3,)))
    volume = float(np.prod(box))
    root_points = np.sqrt(float(np.prod(n)))
    spec = np.zeros(n + (6,), dtype=complex)
    for (ix, iy, iz, lam), a in modes.items():
        if lam == 0 or a == 0:
            continue
        index = (ix, iy, iz)
        _check_commensurate(index, n)
        k = _mode_k(index, box)
        omega = mode_frequency(k, lam) * freq_scale
        scale = root_points * np.sqrt(mode_frequency(k, lam) / volume) / np.sqrt(2.0)
        pos_bin = tuple(v % n[i] for i, v in enumerate(index))
        neg_bin = tuple((-v) % n[i] for i, v in enumerate(index))
        spec[pos_bin] += scale * a * np.exp(-1j * omega * t) * spinor_f(k, lam)
        spec[neg_bin] += (
            scale
            * np.conj(a)
            * np.exp(1j * omega * t)
            * conjugate_partner_spinor(k, lam)
        )
    return to_real(FieldGrid(n, box, t, spec, spectral=True))


def analyze(grid: FieldGrid) -> ModeAmplitudes:
    """Project a field onto the positive-branch modes.

    a(k, lam) = sqrt(2/omega) * quadrature of phi+ psi, evaluated
    spectrally for every non-Nyquist bin.  Helicity-0 amplitudes are
    indeterminate (their basis field vanishes) and are reported as zero.
    On synthesized real fields this inverts synthesize exactly.
    """
    spec = to_spectral(grid)
    kv = wave_vectors(spec)
    kmag = np.sqrt(np.sum(kv * kv, axis=-1))
    safe = np.where(kmag > 0.0, kmag, 1.0)
    u = spec.data[..., 0:3]
    v = spec.data[..., 3:6]
    eps_plus = polarization_bins(kv, +1)
    root_points = np.sqrt(float(spec.points))
    volume = spec.volume

    out = ModeAmplitudes()
    n = spec.n
    half = [n[i] // 2 for i in range(3)]
    for lam in (1, -1):
        eps = eps_plus if lam == 1 else np.conj(eps_plus)
        overlap = (
            np.sum(np.conj(eps) * u, axis=-1)
            + lam * np.sum(np.conj(eps) * v, axis=-1)
        ) / np.sqrt(2.0)
        amps = (
            np.sqrt(2.0 * volume / safe)
            / root_points
            * np.exp(1j * safe * spec.t)
            * overlap
        )
        it = np.nditer(amps, flags=["multi_index"])
        for val in it:
            ix, iy, iz = it.multi_index
            mx = ix - n[0] if ix >= half[0] else ix
            my = iy - n[1] if iy >= half[1] else iy
            mz = iz - n[2] if iz >= half[2] else iz
            if (ix, iy, iz) == (0, 0, 0):
                continue
            if abs(mx) >= half[0] or abs(my) >= half[1] or abs(mz) >= half[2]:
                continue  # Nyquist rows have no +-k partner
            a = complex(val)
            if abs(a) > 0.0:
                out[(mx, my, mz, lam)] = a
    return out


def helicity_powers(grid: FieldGrid) -> tuple[float, float]:
    """Summed |a(k, lam)|^2 for lam = +1 and -1 without building the dict."""
    spec = to_spectral(grid)
    kv = wave_vectors(spec)
    kmag = np.sqrt(np.sum(kv * kv, axis=-1))
    safe = np.where(kmag > 0.0, kmag, 1.0)
    u = spec.data[..., 0:3]
    v = spec.data[..., 3:6]
    eps_plus = polarization_bins(kv, +1)
    powers = []
    mask = _partnered_bins_mask(spec.n) & (kmag > 0.0)
    for lam in (1, -1):
        eps = eps_plus if lam == 1 else np.conj(eps_plus)
        overlap = (
            np.sum(np.conj(eps) * u, axis=-1)
            + lam * np.sum(np.conj(eps) * v, axis=-1)
        ) / np.sqrt(2.0)
        weight = 2.0 * spec.volume / safe / float(spec.points)
        powers.append(float(np.sum(weight[mask] * np.abs(overlap[mask]) ** 2)))
    return powers[0], powers[1]


def _partnered_bins_mask(n) -> np.ndarray:
    masks = []
    for i in range(3):
        idx = np.fft.fftfreq(n[i]) * n[i]
        masks.append(np.abs(idx) < n[i] // 2)
    mx, my, mz = np.meshgrid(*masks, indexing="ij")
    return mx & my & mz


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def save_pwm1(grid: FieldGrid, path) -> None:
    """Write a real-space snapshot in the PWM1 binary layout.

    Layout, all little-endian: magic "PWM1", u32 x3 lattice counts,
    f64 x3 box lengths, f64 time, then n1*n2*n3*6 complex values as
    (f64 re, f64 im) pairs, point-major with x fastest.
    """
    g = to_real(grid)
    with open(path, "wb") as fh:
        fh.write(_PWM1_MAGIC)
        fh.write(struct.pack("<3I", *g.n))
        fh.write(struct.pack("<3d", *g.box))
        fh.write(struct.pack("<d", g.t))
        ordered = np.transpose(g.data, (2, 1, 0, 3))  # z, y, x, component
        fh.write(np.ascontiguousarray(ordered, dtype="<c16").tobytes())


def load_pwm1(path) -> FieldGrid:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _PWM1_MAGIC:
            raise ValueError(f"not a PWM1 snapshot: bad magic {magic!r}")
        n = struct.unpack("<3I", fh.read(12))
        box = struct.unpack("<3d", fh.read(24))
        (t,) = struct.unpack("<d", fh.read(8))
        count = n[0] * n[1] * n[2] * 6
        raw = np.frombuffer(fh.read(count * 16), dtype="<c16")
        if raw.size != count:
            raise ValueError("truncated PWM1 snapshot")
    data = raw.reshape(n[2], n[1], n[0], 6).transpose(2, 1, 0, 3)
    return FieldGrid(n, box, t, np.ascontiguousarray(data))


def save_amplitudes(modes: ModeAmplitudes, path, header: str | None = None) -> None:
    """Write 'kx_index ky_index kz_index lambda re im' records."""
    with open(path, "w", encoding="ascii") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for (ix, iy, iz, lam), a in modes.items():
            fh.write(f"{ix} {iy} {iz} {lam} {a.real!r} {a.imag!r}\n")


def load_amplitudes(path) -> ModeAmplitudes:
    out = ModeAmplitudes()
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 6:
                raise ValueError(
                    f"{path}:{lineno}: expected 6 fields "
                    f"'kx ky kz lambda re im', got {len(parts)}"
                )
            ix, iy, iz, lam = (int(p) for p in parts[:4])
            out[(ix, iy, iz, lam)] = complex(float(parts[4]), float(parts[5]))
    return out
