"""Receiver-side DSP: dispersion compensation, matched filtering, phase recovery.

The front end is deliberately format-blind: it uses only the four-point
grid for phase search, never the true constellation, so identification can
run after it without circularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mfikit.sim import SampleFrame, apply_cd, _rrc_filter_spectrum


@dataclass
class BpsConfig:
    """Blind phase search settings.

    Attributes
    ----------
    num_test_phases : int
        Test rotations spanning one quadrant, at least 2.
    window_half : int
        Half-width of the sliding cost window, at least 1; the window holds
        ``2*window_half + 1`` symbols away from the frame edges.
    """

    num_test_phases: int = 32
    window_half: int = 32

    def __post_init__(self) -> None:
        if self.num_test_phases < 2:
            raise ValueError("num_test_phases must be >= 2")
        if self.window_half < 1:
            raise ValueError("window_half must be >= 1")


def compensate_cd(frame: SampleFrame, cd_ps_nm: float) -> SampleFrame:
    """Remove `cd_ps_nm` of accumulated dispersion (inverse all-pass filter)."""
    return apply_cd(frame, -cd_ps_nm)


def to_symbol_rate(frame: SampleFrame, rolloff: float = 0.1) -> np.ndarray:
    """Matched-filter a shaped frame and decimate to one sample per symbol.

    The root-raised-cosine receive filter complements the transmit shaping
    (same rolloff), giving an overall raised-cosine response that is
    Nyquist on the frame's circular grid: absent impairments the original
    symbol sequence is recovered to rounding error.

    Parameters
    ----------
    frame : SampleFrame
        Frame produced by compatible root-raised-cosine shaping.
    rolloff : float
        Rolloff used at the transmitter.

    Returns
    -------
    np.ndarray
        Complex symbol sequence of length ``frame.n_symbols``.
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must lie in [0, 1]")
    sps = frame.samples_per_symbol
    g = _rrc_filter_spectrum(frame.samples.size, sps, rolloff)
    filtered = np.fft.ifft(np.fft.fft(frame.samples) * g)
    return filtered[::sps]


def power_normalize(symbols: np.ndarray) -> np.ndarray:
    """Scale a symbol sequence to unit average power.

    An all-zero sequence is returned unchanged rather than dividing by zero.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    p = float(np.mean(np.abs(symbols) ** 2))
    if p == 0.0:
        return symbols.copy()
    return symbols / np.sqrt(p)


def bps_4qam(symbols: np.ndarray, config: BpsConfig = BpsConfig()) -> np.ndarray:
    """Track and remove carrier phase by blind search against a 4-point grid.

    Every symbol is tested under ``num_test_phases`` rotations spanning one
    quadrant; the squared distance to the nearest unit-energy four-point
    constellation symbol is summed over a sliding window (shrunk at the
    frame edges), and the per-symbol minimizing rotation is selected, then
    unwrapped modulo pi/2 so the applied phase is continuous. Decisions are
    made on a power-normalized copy; the returned symbols are the inputs
    rotated in place, so magnitudes are preserved. The quadrant ambiguity
    inherent to a blind search is left unresolved.

    Parameters
    ----------
    symbols : np.ndarray
        Complex symbol sequence, non-empty.
    config : BpsConfig
        Search settings.

    Returns
    -------
    np.ndarray
        Phase-corrected symbols, same length as the input.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.size == 0:
        raise ValueError("symbols must be a non-empty 1-D array")
    n = symbols.size
    b = config.num_test_phases
    w = config.window_half

    u = power_normalize(symbols)
    phases = np.arange(b) * (np.pi / 2.0) / b
    rotated = u[:, None] * np.exp(1j * phases)[None, :]
    # |z - q|^2 to the nearest point of {(+-1 +-1j)/sqrt(2)} collapses to this closed form
    cost = (np.abs(u) ** 2)[:, None] + 1.0 - np.sqrt(2.0) * (np.abs(rotated.real) + np.abs(rotated.imag))

    csum = np.vstack([np.zeros((1, b)), np.cumsum(cost, axis=0)])
    idx = np.arange(n)
    lo = np.maximum(idx - w, 0)
    hi = np.minimum(idx + w + 1, n)
    windowed = csum[hi] - csum[lo]

    best = np.argmin(windowed, axis=1)
    theta = np.unwrap(phases[best], period=np.pi / 2.0)
    return symbols * np.exp(1j * theta)
