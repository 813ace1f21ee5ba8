"""Frequency-domain diagnostics for velocity series.

Two transforms: a one-sided DFT magnitude spectrum (unnormalized forward
transform, 1/n on the inverse, so Parseval reads sum|x|^2 = (1/n) sum|X|^2
over the full two-sided transform) and a continuous wavelet transform with
the real second-derivative-of-Gaussian mother wavelet.

The mother wavelet is L2-normalized:

    psi(u) = C * (1 - u^2) * exp(-u^2 / 2),  C = 2 / (sqrt(3) * pi**(1/4))

and the transform uses 1/sqrt(a) scale normalization. Scales are in frames
(sample spacing), translations in milliseconds. The sampled wavelet row is
truncated at +/-5a and recentred to zero mean, which (with its odd-moment
symmetry) makes the discrete transform annihilate constant and linear
trends exactly away from the boundaries. Boundary-affected coefficients
are flagged, never extended.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadScales, NonUniformSampling
from .kinematics import VelocitySeries

GAUS2_NORM = 2.0 / (np.sqrt(3.0) * np.pi**0.25)
WAVELET_TAG = "gaussian-2nd-order"
SUPPORT_RADIUS = 5.0  # wavelet support truncated at +/- 5 scales
# scale maximizing |W| for a Gaussian pulse of width sigma is sqrt(5)*sigma
PULSE_SIGMA_TO_SCALE = np.sqrt(5.0)

_UNIFORM_RTOL = 1e-6


def _check_uniform(t_ms: np.ndarray) -> float:
    deltas = np.diff(t_ms)
    dt = float(np.median(deltas))
    if np.any(np.abs(deltas - dt) > _UNIFORM_RTOL * dt):
        raise NonUniformSampling("series timestamps are not uniformly spaced")
    return dt


@dataclass
class MagnitudeSpectrum:
    """One-sided DFT magnitudes; frequencies cover 0..fps/2 at fps/n spacing."""

    freq_hz: np.ndarray
    magnitude: np.ndarray
    fps: float
    n: int

    @property
    def bins(self) -> list[tuple[float, float]]:
        return [(float(f), float(m)) for f, m in zip(self.freq_hz, self.magnitude)]

    def dominant_hz(self, skip_dc: bool = True) -> float:
        mags = self.magnitude[1:] if skip_dc else self.magnitude
        off = 1 if skip_dc else 0
        return float(self.freq_hz[off + int(np.argmax(mags))])

    def total_energy(self) -> float:
        """(1/n) sum |X_k|^2 over the full two-sided transform."""
        m2 = self.magnitude**2
        two_sided = 2.0 * m2.sum() - m2[0]
        if self.n % 2 == 0:
            two_sided -= m2[-1]  # Nyquist bin appears once
        return float(two_sided / self.n)


def fft_magnitude(series: VelocitySeries, remove_mean: bool = False) -> MagnitudeSpectrum:
    """Magnitude of the one-sided discrete Fourier transform of the series."""
    if len(series) < 2:
        raise ValueError("series too short for a spectrum")
    _check_uniform(series.t_ms)
    x = np.asarray(series.v, dtype=float)
    if remove_mean:
        x = x - x.mean()
    n = len(x)
    mags = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(n, d=1.0 / series.fps)
    return MagnitudeSpectrum(freq_hz=freqs, magnitude=mags, fps=series.fps, n=n)


def gaus2_wavelet(u) -> np.ndarray:
    """L2-normalized second-derivative-of-Gaussian mother wavelet."""
    u = np.asarray(u, dtype=float)
    return GAUS2_NORM * (1.0 - u**2) * np.exp(-(u**2) / 2.0)


@dataclass
class CwtResult:
    """CWT coefficients W(a, b): rows are scales, columns translations."""

    scales: np.ndarray  # in frames
    translations_ms: np.ndarray
    coefficients: np.ndarray
    boundary_mask: np.ndarray  # True where the support crosses a series edge
    wavelet: str = WAVELET_TAG
    norm_constant: float = GAUS2_NORM

    def interior(self) -> np.ndarray:
        """Coefficients with boundary-affected entries replaced by NaN."""
        out = self.coefficients.copy()
        out[self.boundary_mask] = np.nan
        return out


def cwt_gaus2(series: VelocitySeries, scales) -> CwtResult:
    """Continuous wavelet transform of the series over the given scales.

    Direct inner-product evaluation: for each scale the sampled, zero-mean
    wavelet row is correlated with the signal (zero padding at the edges;
    those columns are flagged in ``boundary_mask``).
    """
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0 or np.any(scales <= 0) or np.any(np.diff(scales) <= 0):
        raise BadScales("scales must be a positive, strictly ascending 1-D sequence")
    _check_uniform(series.t_ms)
    x = np.asarray(series.v, dtype=float)
    n = len(x)
    coeffs = np.empty((len(scales), n), dtype=float)
    boundary = np.zeros((len(scales), n), dtype=bool)
    for i, a in enumerate(scales):
        half = int(np.floor(SUPPORT_RADIUS * a))
        offsets = np.arange(-half, half + 1)
        row = gaus2_wavelet(offsets / a)
        row -= row.mean()  # exact discrete zero mean; odd moment is zero by symmetry
        # symmetric row: convolution == correlation
        full = np.convolve(x, row, mode="full")
        coeffs[i] = full[half : half + n] / np.sqrt(a)
        edge = min(half, n)
        boundary[i, :edge] = True
        boundary[i, n - edge :] = True
    return CwtResult(
        scales=scales.copy(),
        translations_ms=series.t_ms.copy(),
        coefficients=coeffs,
        boundary_mask=boundary,
    )


def default_scales(window_frames: int = 30, count: int = 32, min_scale: float = 2.0) -> np.ndarray:
    """Log-spaced scale grid from 2 frames up to the search-window length."""
    if window_frames <= min_scale:
        raise BadScales(f"window of {window_frames} frames leaves no scale range")
    return np.geomspace(min_scale, float(window_frames), count)


def peak_scale_map(cwt: CwtResult) -> np.ndarray:
    """Dominant scale per translation: argmax over scales of |W(a, b)|.

    Translations whose coefficient column is entirely zero have no defined
    dominant scale and are returned as NaN.
    """
    mags = np.abs(cwt.coefficients)
    out = cwt.scales[np.argmax(mags, axis=0)].astype(float)
    out[mags.max(axis=0) == 0.0] = np.nan
    return out


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def write_spectrum_csv(spectrum: MagnitudeSpectrum, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("freq_hz,magnitude\n")
        for f, m in zip(spectrum.freq_hz, spectrum.magnitude):
            fh.write(f"{float(f)!r},{float(m)!r}\n")


def write_cwt(cwt: CwtResult, matrix_path: str | Path, sidecar_path: str | Path) -> None:
    """Binary coefficient matrix plus a JSON sidecar with the grid metadata."""
    np.save(matrix_path, cwt.coefficients)
    sidecar = {
        "wavelet": cwt.wavelet,
        "norm_constant": cwt.norm_constant,
        "support_radius_scales": SUPPORT_RADIUS,
        "scales_frames": [float(a) for a in cwt.scales],
        "translations_ms": [float(b) for b in cwt.translations_ms],
        "matrix_file": Path(matrix_path).name,
        "matrix_shape": list(cwt.coefficients.shape),
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
