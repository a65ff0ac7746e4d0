"""Desk-scale coherent link simulator.

Single-polarization, single-channel model: map bits to one of five
constellations, root-raised-cosine shape at a small oversampling factor,
then apply chromatic dispersion, laser phase noise, and ASE-equivalent
additive noise. All randomness flows through explicit seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

C_MPS = 299_792_458.0
CARRIER_WAVELENGTH_M = 1550e-9
OSNR_REF_BANDWIDTH_HZ = 12.5e9  # 0.1 nm at 1550 nm
DEFAULT_SYMBOL_RATE_HZ = 28e9
DEFAULT_LINEWIDTH_HZ = 200e3  # transmitter plus local oscillator


class ModFormat(Enum):
    """Modulation formats the link can carry."""

    QPSK = "QPSK"
    PSK8 = "8PSK"
    QAM16 = "16QAM"
    QAM32 = "32QAM"
    QAM64 = "64QAM"

    @property
    def cardinality(self) -> int:
        return _CARDINALITY[self]

    @classmethod
    def from_label(cls, label: str) -> "ModFormat":
        for fmt in cls:
            if fmt.value.lower() == label.lower():
                return fmt
        raise ValueError(f"unknown modulation format label: {label!r}")


_CARDINALITY = {
    ModFormat.QPSK: 4,
    ModFormat.PSK8: 8,
    ModFormat.QAM16: 16,
    ModFormat.QAM32: 32,
    ModFormat.QAM64: 64,
}


def constellation_points(fmt: ModFormat) -> np.ndarray:
    """Return the constellation of `fmt`, normalized to unit mean energy.

    Parameters
    ----------
    fmt : ModFormat
        Modulation format.

    Returns
    -------
    np.ndarray
        Complex array of length ``fmt.cardinality`` with
        ``mean(abs(points)**2) == 1`` exactly (analytic normalization).
    """
    if fmt is ModFormat.QPSK:
        re, im = np.meshgrid([-1.0, 1.0], [-1.0, 1.0], indexing="ij")
        pts = (re + 1j * im).ravel() / np.sqrt(2.0)
    elif fmt is ModFormat.PSK8:
        pts = np.exp(1j * np.arange(8) * (np.pi / 4.0))
    elif fmt is ModFormat.QAM16:
        lv = np.array([-3.0, -1.0, 1.0, 3.0])
        re, im = np.meshgrid(lv, lv, indexing="ij")
        pts = (re + 1j * im).ravel() / np.sqrt(10.0)
    elif fmt is ModFormat.QAM32:
        # 6x6 grid minus the four corners (cross constellation)
        lv = np.array([-5.0, -3.0, -1.0, 1.0, 3.0, 5.0])
        re, im = np.meshgrid(lv, lv, indexing="ij")
        grid = (re + 1j * im).ravel()
        keep = ~((np.abs(grid.real) == 5.0) & (np.abs(grid.imag) == 5.0))
        pts = grid[keep] / np.sqrt(20.0)
    elif fmt is ModFormat.QAM64:
        lv = np.array([-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0])
        re, im = np.meshgrid(lv, lv, indexing="ij")
        pts = (re + 1j * im).ravel() / np.sqrt(42.0)
    else:
        raise ValueError(f"unsupported format: {fmt}")
    return pts.astype(np.complex128)


@dataclass
class SampleFrame:
    """A contiguous block of complex baseband samples.

    Attributes
    ----------
    samples : np.ndarray
        Complex128 array, length an exact multiple of ``samples_per_symbol``.
    sample_rate : float
        Samples per second.
    symbol_rate : float
        Symbols per second.
    """

    samples: np.ndarray
    sample_rate: float
    symbol_rate: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if self.sample_rate <= 0 or self.symbol_rate <= 0:
            raise ValueError("sample_rate and symbol_rate must be positive")
        ratio = self.sample_rate / self.symbol_rate
        sps = int(round(ratio))
        if sps < 1 or abs(ratio - sps) > 1e-9:
            raise ValueError("sample_rate must be an integer multiple of symbol_rate")
        if self.samples.size % sps != 0:
            raise ValueError("frame length must be a whole number of symbols")

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate / self.symbol_rate))

    @property
    def n_symbols(self) -> int:
        return self.samples.size // self.samples_per_symbol

    def copy_with(self, samples: np.ndarray) -> "SampleFrame":
        return SampleFrame(samples=samples, sample_rate=self.sample_rate, symbol_rate=self.symbol_rate)


@dataclass
class ImpairmentSpec:
    """Channel impairment settings for one simulated frame.

    ``osnr_db`` may be ``math.inf`` to disable additive noise. ``seed``
    controls every random draw made while applying the impairments.
    """

    osnr_db: float = math.inf
    linewidth_hz: float = DEFAULT_LINEWIDTH_HZ
    applied_cd_ps_nm: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.linewidth_hz < 0:
            raise ValueError("linewidth_hz must be >= 0")


def generate_symbols(fmt: ModFormat, n: int, seed) -> np.ndarray:
    """Draw `n` i.i.d. uniform symbols from the constellation of `fmt`.

    Parameters
    ----------
    fmt : ModFormat
        Modulation format.
    n : int
        Number of symbols, at least 1.
    seed : int, SeedSequence or Generator
        Source of randomness.

    Returns
    -------
    np.ndarray
        Complex128 array of length `n`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    points = constellation_points(fmt)
    return points[rng.integers(0, points.size, size=n)]


def _raised_cosine_spectrum(n_samples: int, sps: int, rolloff: float) -> np.ndarray:
    """Raised-cosine power spectrum sampled on the length-`n_samples` FFT grid.

    Frequencies are normalized to the symbol rate (``f=0.5`` is the Nyquist
    edge of the symbol stream). The taper is exactly complementary about
    ``|f| = 0.5``, so the aliases of the spectrum sum to one on every bin.
    """
    f = np.abs(np.fft.fftfreq(n_samples) * sps)
    lo = (1.0 - rolloff) / 2.0
    hi = (1.0 + rolloff) / 2.0
    s = np.zeros(n_samples)
    s[f <= lo] = 1.0
    if rolloff > 0:
        taper = (f > lo) & (f < hi)
        s[taper] = 0.5 * (1.0 + np.cos(np.pi * (f[taper] - lo) / rolloff))
    s[np.isclose(f, hi)] = 0.0 if rolloff > 0 else 0.5
    return s


def _rrc_filter_spectrum(n_samples: int, sps: int, rolloff: float) -> np.ndarray:
    """Root-raised-cosine amplitude response on the FFT grid."""
    return np.sqrt(_raised_cosine_spectrum(n_samples, sps, rolloff))


def upsample_shape(
    symbols: np.ndarray,
    samples_per_symbol: int = 2,
    rolloff: float = 0.1,
    symbol_rate: float = DEFAULT_SYMBOL_RATE_HZ,
) -> SampleFrame:
    """Upsample a symbol sequence and apply root-raised-cosine shaping.

    The shaping is applied in the frequency domain over the whole frame
    (circular convolution), so a matched receiver recovers the symbol
    sequence without edge transients. The filter gain is chosen so the
    frame average power equals the symbol-sequence average power.

    Parameters
    ----------
    symbols : np.ndarray
        Complex symbol sequence, non-empty.
    samples_per_symbol : int
        Integer oversampling factor, at least 1.
    rolloff : float
        Root-raised-cosine rolloff in [0, 1].
    symbol_rate : float
        Symbols per second; sets the frame sample rate.

    Returns
    -------
    SampleFrame
        Frame of ``len(symbols) * samples_per_symbol`` samples.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.size == 0:
        raise ValueError("symbols must be a non-empty 1-D array")
    sps = int(samples_per_symbol)
    if sps < 1 or sps != samples_per_symbol:
        raise ValueError("samples_per_symbol must be a positive integer")
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must lie in [0, 1]")
    n = symbols.size * sps
    up = np.zeros(n, dtype=np.complex128)
    up[::sps] = symbols
    # gain sps makes sum(|h|^2) == sps, i.e. unit average-power transfer
    h = sps * _rrc_filter_spectrum(n, sps, rolloff)
    shaped = np.fft.ifft(np.fft.fft(up) * h)
    return SampleFrame(samples=shaped, sample_rate=symbol_rate * sps, symbol_rate=symbol_rate)


def osnr_to_snr_db(osnr_db: float, symbol_rate: float) -> float:
    """Map OSNR in the 12.5 GHz reference bandwidth to per-symbol SNR in dB."""
    return osnr_db + 10.0 * math.log10(OSNR_REF_BANDWIDTH_HZ / symbol_rate)


def apply_awgn(frame: SampleFrame, osnr_db: float, seed) -> SampleFrame:
    """Add circular complex Gaussian noise at the requested OSNR.

    The OSNR is referred to the standard 12.5 GHz optical bandwidth; it is
    converted to a per-symbol SNR via ``SNR = OSNR * (12.5e9 / symbol_rate)``.
    Noise is white over the sampled band, so the per-sample variance is
    ``samples_per_symbol * P_sig / SNR``; after matched filtering the
    symbol-domain SNR equals the mapped value.

    Parameters
    ----------
    frame : SampleFrame
        Input frame.
    osnr_db : float
        OSNR in dB over 12.5 GHz, or ``math.inf`` for a noiseless copy.
    seed : int, SeedSequence or Generator
        Source of randomness.

    Returns
    -------
    SampleFrame
        New frame; the input is left untouched.
    """
    if math.isinf(osnr_db) and osnr_db > 0:
        return frame.copy_with(frame.samples.copy())
    snr = 10.0 ** (osnr_to_snr_db(osnr_db, frame.symbol_rate) / 10.0)
    p_sig = float(np.mean(np.abs(frame.samples) ** 2))
    var = frame.samples_per_symbol * p_sig / snr
    rng = np.random.default_rng(seed)
    noise = rng.normal(scale=math.sqrt(var / 2.0), size=(frame.samples.size, 2))
    return frame.copy_with(frame.samples + noise[:, 0] + 1j * noise[:, 1])


def apply_phase_noise(frame: SampleFrame, linewidth_hz: float, seed) -> SampleFrame:
    """Impose Wiener laser phase noise of the given combined linewidth.

    The phase random walk has increment variance
    ``2 * pi * linewidth_hz * T_sample`` per sample and starts at zero, so
    a zero linewidth returns the frame bit-exactly. Only the phase of each
    sample changes; magnitudes are preserved.

    Parameters
    ----------
    frame : SampleFrame
        Input frame.
    linewidth_hz : float
        Sum of transmitter and local-oscillator linewidths, >= 0.
    seed : int, SeedSequence or Generator
        Source of randomness.

    Returns
    -------
    SampleFrame
        New frame with the phase walk applied.
    """
    if linewidth_hz < 0:
        raise ValueError("linewidth_hz must be >= 0")
    if linewidth_hz == 0:
        return frame.copy_with(frame.samples.copy())
    var = 2.0 * math.pi * linewidth_hz / frame.sample_rate
    rng = np.random.default_rng(seed)
    theta = np.cumsum(rng.normal(scale=math.sqrt(var), size=frame.samples.size))
    return frame.copy_with(frame.samples * np.exp(1j * theta))


def _cd_transfer(n_samples: int, sample_rate: float, cd_ps_nm: float) -> np.ndarray:
    """All-pass chromatic dispersion transfer function on the FFT grid."""
    d_si = cd_ps_nm * 1e-3  # ps/nm -> s/m
    f = np.fft.fftfreq(n_samples, d=1.0 / sample_rate)
    phase = -np.pi * CARRIER_WAVELENGTH_M**2 * d_si * f**2 / C_MPS
    return np.exp(1j * phase)


def cd_spread_samples(sample_rate: float, cd_ps_nm: float) -> float:
    """Temporal spread of the dispersed impulse response, in samples."""
    d_si = abs(cd_ps_nm) * 1e-3
    delay = d_si * CARRIER_WAVELENGTH_M**2 * sample_rate / C_MPS  # group-delay span over the band
    return delay * sample_rate


def apply_cd(frame: SampleFrame, cd_ps_nm: float) -> SampleFrame:
    """Apply accumulated chromatic dispersion as an all-pass spectral phase.

    The transfer function is ``exp(-1j*pi*lambda^2*D*f^2/c)`` at 1550 nm,
    applied over the whole frame with an FFT. Inverting the sign of
    ``cd_ps_nm`` undoes the operation exactly up to rounding.

    Parameters
    ----------
    frame : SampleFrame
        Input frame, at least 2 samples per symbol.
    cd_ps_nm : float
        Accumulated dispersion in ps/nm (may be negative).

    Returns
    -------
    SampleFrame
        New frame with the dispersion applied.
    """
    if cd_ps_nm == 0.0:
        return frame.copy_with(frame.samples.copy())
    if frame.samples_per_symbol < 2:
        raise ValueError("chromatic dispersion needs >= 2 samples per symbol")
    if cd_spread_samples(frame.sample_rate, cd_ps_nm) >= frame.samples.size:
        raise ValueError("frame too short for the requested dispersion")
    h = _cd_transfer(frame.samples.size, frame.sample_rate, cd_ps_nm)
    return frame.copy_with(np.fft.ifft(np.fft.fft(frame.samples) * h))


def _stage_seeds(seed: int, n: int) -> list:
    # independent, order-stable substreams; re-derivable without mutation
    return [np.random.SeedSequence(entropy=seed, spawn_key=(i,)) for i in range(n)]


def simulate_link(
    fmt: ModFormat,
    n_symbols: int,
    impairments: ImpairmentSpec,
    samples_per_symbol: int = 2,
    rolloff: float = 0.1,
    symbol_rate: float = DEFAULT_SYMBOL_RATE_HZ,
) -> SampleFrame:
    """Generate one impaired frame: symbols, shaping, CD, phase noise, noise.

    Stage order matches the physical link: dispersion accumulates in the
    fiber, the local-oscillator beat adds phase noise at the receiver, and
    amplified-spontaneous-emission noise is lumped at the end. Each stage
    draws from an independent substream of ``impairments.seed``.

    Parameters
    ----------
    fmt : ModFormat
        Modulation format.
    n_symbols : int
        Number of transmitted symbols, at least 1.
    impairments : ImpairmentSpec
        Channel settings.
    samples_per_symbol : int
        Oversampling factor of the emitted frame.
    rolloff : float
        Transmit root-raised-cosine rolloff.
    symbol_rate : float
        Symbols per second.

    Returns
    -------
    SampleFrame
        The received frame.
    """
    s_sym, s_pn, s_awgn = _stage_seeds(impairments.seed, 3)
    symbols = generate_symbols(fmt, n_symbols, s_sym)
    frame = upsample_shape(symbols, samples_per_symbol, rolloff, symbol_rate)
    frame = apply_cd(frame, impairments.applied_cd_ps_nm)
    frame = apply_phase_noise(frame, impairments.linewidth_hz, s_pn)
    frame = apply_awgn(frame, impairments.osnr_db, s_awgn)
    return frame
