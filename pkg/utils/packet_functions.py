import warnings
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from utils.errors import QstLabWarning, ValidationError

NORM_TOLERANCE = 1e-10
RENORMALIZE_TOLERANCE = 1e-8

# Initial packets of the reference scenarios, supported on sites 1 and 2.
PACKET_PRESETS: Dict[str, tuple] = {
    "real_packet": (5 / 6, np.sqrt(11 / 36)),
    "complex_packet": ((1 + 1j) / 2, 1 / 5 + 1j * np.sqrt(23 / 50)),
}


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Single-particle amplitudes c_j on sites 1..N (stored 0-based)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size < 2:
            raise ValidationError("a wave packet needs at least two sites")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"wave packet is not normalized (norm^2 = {norm:.12g})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.size

    def amplitude(self, site: int) -> complex:
        """Amplitude on a 1-based site."""
        if not 1 <= site <= self.n_sites:
            raise ValidationError(f"site {site} outside 1..{self.n_sites}")
        return complex(self.amplitudes[site - 1])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def normalized_packet(values: Sequence[complex], tolerance: float = RENORMALIZE_TOLERANCE) -> WavePacket:
    """
    Build a packet, renormalizing small drifts with a warning.

    Args:
        values: Raw amplitudes
        tolerance: Largest |norm^2 - 1| that is silently corrected

    Returns:
        WavePacket

    Raises:
        ValidationError: If the drift exceeds the tolerance
    """
    values = np.asarray(values, dtype=complex).reshape(-1)
    norm = float(np.vdot(values, values).real)
    drift = abs(norm - 1.0)
    if drift > tolerance:
        raise ValidationError(f"psi0 does not normalize (norm^2 = {norm:.12g})")
    if drift > NORM_TOLERANCE:
        warnings.warn(f"psi0 renormalized (norm^2 was {norm:.12g})", QstLabWarning)
        values = values / np.sqrt(norm)
    return WavePacket(values)


def localized_packet(n_sites: int, site: int = 1) -> WavePacket:
    """|site> on a chain of n_sites."""
    if not 1 <= site <= n_sites:
        raise ValidationError(f"site {site} outside 1..{n_sites}")
    values = np.zeros(n_sites, dtype=complex)
    values[site - 1] = 1.0
    return WavePacket(values)


def preset_packet(name: str, n_sites: int) -> WavePacket:
    """
    Named initial packet padded with zeros to n_sites.

    Presets: site1, real_packet (5/6, sqrt(11/36)), complex_packet
    ((1+i)/2, 1/5 + i sqrt(23/50)) and mirror_pair (|1> + |N>)/sqrt(2).
    """
    if name == "site1":
        return localized_packet(n_sites, 1)
    if name == "mirror_pair":
        values = np.zeros(n_sites, dtype=complex)
        values[0] = values[-1] = 1 / np.sqrt(2)
        return WavePacket(values)
    if name not in PACKET_PRESETS:
        raise ValidationError(f"unknown packet preset '{name}'")
    head = PACKET_PRESETS[name]
    if n_sites < len(head):
        raise ValidationError(f"preset '{name}' needs at least {len(head)} sites")
    values = np.zeros(n_sites, dtype=complex)
    values[: len(head)] = head
    return normalized_packet(values)


def is_real_up_to_phase(psi: WavePacket, tol: float = 1e-12) -> bool:
    """True when dividing out the phase of the largest amplitude leaves a real vector."""
    amplitudes = psi.amplitudes
    pivot = amplitudes[np.argmax(np.abs(amplitudes))]
    rotated = amplitudes * np.conj(pivot) / abs(pivot)
    return bool(np.max(np.abs(rotated.imag)) <= tol)
