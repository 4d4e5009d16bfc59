"""Frame-level spectral measurements: LPC formants and autocorrelation F0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateFrame, InsufficientFormants, RegionTooShort,
                     WrongLength)
from .segmentation import CONSONANT_FRAMES, FRAME_LENGTH, FRAME_NAMES

PREEMPHASIS = 0.95
LPC_ORDER = 12
MAX_FORMANT_BANDWIDTH = 400.0
MIN_FORMANT_FREQ = 90.0
F0_BAND = (60.0, 400.0)
VOICING_THRESHOLD = 0.3


def preemphasize(signal, alpha: float = PREEMPHASIS) -> np.ndarray:
    """y[n] = x[n] - alpha * x[n-1], with y[0] = x[0]."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    x = np.asarray(signal, dtype=np.float64)
    y = x.copy()
    y[1:] -= alpha * x[:-1]
    return y


def hamming_window(frame, n: int = FRAME_LENGTH) -> np.ndarray:
    x = np.asarray(frame, dtype=np.float64)
    if x.shape != (n,):
        raise WrongLength(f"expected a frame of {n} samples, got shape {x.shape}")
    return x * np.hamming(n)


def dft_magnitude(frame) -> np.ndarray:
    """|X[k]| for k = 0..N/2; bin k sits at k * fs / N Hz."""
    return np.abs(np.fft.rfft(np.asarray(frame, dtype=np.float64)))


def bin_frequencies(n: int, sample_rate: float) -> np.ndarray:
    return np.fft.rfftfreq(n, d=1.0 / sample_rate)


def parseval_energy(magnitude, n: int) -> float:
    """Time-domain energy recovered from a one-sided magnitude spectrum."""
    m2 = np.asarray(magnitude, dtype=np.float64) ** 2
    # interior bins stand for two conjugate bins; DC (and Nyquist for even n) for one
    weights = np.full(m2.shape, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return float(np.dot(weights, m2) / n)


@dataclass(frozen=True)
class LpcModel:
    """All-pole model; prediction x[n] ~ sum_k a_k x[n-k], A(z) = 1 - sum_k a_k z^-k."""

    order: int
    coefficients: np.ndarray
    gain: float  # residual (prediction error) energy

    @property
    def polynomial(self) -> np.ndarray:
        return np.concatenate(([1.0], -np.asarray(self.coefficients, dtype=np.float64)))

    def roots(self) -> np.ndarray:
        if self.order == 0:
            return np.empty(0, dtype=complex)
        return np.roots(self.polynomial)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.roots()) < 1.0))


def autocorrelation(x, maxlag: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    return np.array([np.dot(x[: n - k], x[k:]) for k in range(maxlag + 1)])


def levinson_durbin(r, order: int) -> tuple[np.ndarray, float, np.ndarray]:
    """Solve the Toeplitz normal equations.

    Returns prediction coefficients a_1..a_p, final error energy and the
    reflection coefficients.
    """
    r = np.asarray(r, dtype=np.float64)
    a = np.zeros(order)
    k = np.zeros(order)
    err = r[0]
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        ki = acc / err
        k[i] = ki
        a[:i] = a[:i] - ki * a[:i][::-1]
        a[i] = ki
        err *= 1.0 - ki * ki
    return a, err, k


def lpc_fit(frame, order: int = LPC_ORDER) -> LpcModel:
    """Autocorrelation-method LPC of an (already windowed) frame."""
    x = np.asarray(frame, dtype=np.float64)
    if not 0 <= order < x.size:
        raise ValueError(f"order must be in [0, {x.size})")
    r = autocorrelation(x, order)
    if r[0] <= 0.0:
        raise DegenerateFrame("zero energy frame")
    a, err, _ = levinson_durbin(r, order)
    return LpcModel(order, a, float(err))


def pole_candidates(model: LpcModel, sample_rate: float) -> list[tuple[float, float]]:
    """(frequency, bandwidth) in Hz for every pole with positive imaginary part."""
    out = []
    for z in model.roots():
        if z.imag <= 0:
            continue
        freq = float(np.angle(z)) * sample_rate / (2 * np.pi)
        bw = -float(np.log(abs(z))) * sample_rate / np.pi
        out.append((freq, bw))
    return sorted(out)


def estimate_formants(model: LpcModel, sample_rate: float,
                      max_bandwidth: float = MAX_FORMANT_BANDWIDTH,
                      min_freq: float = MIN_FORMANT_FREQ) -> tuple[float, float, float]:
    hi = 0.95 * sample_rate / 2
    picked = [f for f, bw in pole_candidates(model, sample_rate)
              if bw <= max_bandwidth and min_freq <= f <= hi]
    if len(picked) < 3:
        raise InsufficientFormants(len(picked), picked)
    return tuple(picked[:3])


def lpc_from_resonances(resonances, sample_rate: float) -> LpcModel:
    """All-pole model with a conjugate pole pair per (frequency, bandwidth)."""
    poly = np.array([1.0])
    for freq, bw in resonances:
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2 * np.pi * freq / sample_rate
        poly = np.convolve(poly, [1.0, -2 * r * np.cos(theta), r * r])
    return LpcModel(poly.size - 1, -poly[1:], 1.0)


def nccf(x, lags) -> np.ndarray:
    """Normalized cross-correlation of x with its own shifted copy."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    out = np.zeros(len(lags))
    for i, lag in enumerate(lags):
        a, b = x[: n - lag], x[lag:]
        den = np.sqrt(np.dot(a, a) * np.dot(b, b))
        out[i] = np.dot(a, b) / den if den > 0 else 0.0
    return out


def estimate_f0(signal, sample_rate: float, region=None, band=F0_BAND,
                threshold: float = VOICING_THRESHOLD) -> float | None:
    """Autocorrelation pitch with parabolic peak refinement; None when unvoiced.

    ``region`` is a (start, stop) sample interval; it must span two periods
    of the lowest frequency in ``band``.
    """
    x = np.asarray(signal, dtype=np.float64)
    start, stop = (0, x.size) if region is None else region
    seg = x[start:stop]
    fmin, fmax = band
    lag_min = max(1, int(np.floor(sample_rate / fmax)))
    lag_max = int(np.ceil(sample_rate / fmin))
    if seg.size < 2 * sample_rate / fmin:
        raise RegionTooShort(f"{seg.size} samples < two periods at {fmin} Hz")
    seg = seg - seg.mean()
    if not np.any(seg):
        return None
    lags = np.arange(lag_min - 1, lag_max + 2)
    c = nccf(seg, lags)
    inner = np.arange(1, lags.size - 1)
    peaks = inner[(c[inner] > c[inner - 1]) & (c[inner] >= c[inner + 1])]
    if peaks.size == 0:
        return None
    best = c[peaks].max()
    if best < threshold:
        return None
    # smallest lag close to the best peak avoids locking onto a multiple of the period
    i = peaks[c[peaks] >= 0.95 * best][0]
    y0, y1, y2 = c[i - 1], c[i], c[i + 1]
    den = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
    return float(sample_rate / (lags[i] + shift))


@dataclass(frozen=True)
class FrameSpectrum:
    """F0/F1/F2/F3 for one frame; None marks a value that was not measured."""

    f0: float | None = None
    f1: float | None = None
    f2: float | None = None
    f3: float | None = None


def formant_frames(family: str) -> tuple[str, ...]:
    """Frames in which formants are read: consonant frames for liquids only."""
    if family == "liquids":
        return FRAME_NAMES
    return tuple(f for f in FRAME_NAMES if f not in CONSONANT_FRAMES)


def measure_frames(signal, frames, sample_rate: float, family: str,
                   order: int = LPC_ORDER, alpha: float = PREEMPHASIS,
                   f0_band=(80.0, 400.0)) -> dict[str, FrameSpectrum]:
    """F0 and formants per reference frame following the measurement schedule.

    The default F0 band starts at 80 Hz so that two periods fit in a
    256-sample frame at 10 kHz.
    """
    x = np.asarray(signal, dtype=np.float64)
    emph = preemphasize(x, alpha)
    with_formants = formant_frames(family)
    out = {}
    for name, frame in frames.items():
        try:
            f0 = estimate_f0(x, sample_rate, (frame.start, frame.stop), band=f0_band)
        except RegionTooShort:
            f0 = None
        f1 = f2 = f3 = None
        if name in with_formants:
            try:
                model = lpc_fit(hamming_window(emph[frame.slice], frame.length), order)
                f1, f2, f3 = estimate_formants(model, sample_rate)
            except InsufficientFormants as exc:
                got = list(exc.formants) + [None] * 3
                f1, f2, f3 = got[:3]
            except DegenerateFrame:
                pass
        out[name] = FrameSpectrum(f0, f1, f2, f3)
    return out
