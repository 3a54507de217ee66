"""FSK-family communication waveforms and their delay-Doppler machinery.

Two generator families are provided, parameter-compatible with the hop-coded
and symbol-mapped FSK configurations used for robust underwater links:

* ``spfsk_like``:   one tone per frame, hopping through a seeded permutation
  of a large tone alphabet (a permutation never revisits a tone).
* ``pcmfsk_like``:  one tone per frame drawn i.i.d. from a small alphabet.

The exact production codecs (permutation codebooks, channel coding) live in
external modems; the bounds computed downstream depend only on the sample
sequence, so a seeded stand-in with matching frame length, guard fraction,
alphabet, band and energy is generated here, and true modem output can be
imported through :func:`load_waveform`.

Each frame carries a smoothly tapered chip (sine-to-the-fourth envelope,
three continuous derivatives at the edges) surrounded by silent guard
samples, so the signal starts and ends at zero, stays inside its
null-to-null band, and its band-limited extension is quiet between the
guard samples.  Scaled/delayed evaluation uses band-limited (FFT
oversampled) interpolation of the sample sequence; arguments outside the
recorded support return zero, i.e. the pulse is finite, never periodic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FAMILY_SPFSK_LIKE = "spfsk_like"
FAMILY_PCMFSK_LIKE = "pcmfsk_like"
FAMILIES = (FAMILY_SPFSK_LIKE, FAMILY_PCMFSK_LIKE)

_OVERSAMPLE = 16
_TAPS_OFFSETS = np.arange(-2, 4)  # 6-point local Lagrange stencil
_TABLE_PAD = 4


@dataclass(frozen=True)
class WaveformConfig:
    """Generator knobs for one communication waveform.

    ``tones`` is the hop alphabet of the permutation family, ``mary`` the
    symbol alphabet of the mapped family; the inactive one is metadata.
    ``num_bits`` sets how many frames are emitted (bits per frame is the log2
    of the active alphabet).  ``codec_notes`` carries opaque modem settings
    that do not influence generation.
    """

    family: str
    mary: int
    frame_length: int
    guard_fraction: float
    tones: int
    num_bits: int
    center_frequency: float = 6000.0
    bandwidth: float = 4000.0
    energy: float = 40.0
    seed: int = 0
    sample_rate: float = 24000.0
    name: str | None = None
    codec_notes: str = ""

    @property
    def alphabet_size(self) -> int:
        return self.tones if self.family == FAMILY_SPFSK_LIKE else self.mary

    @property
    def num_frames(self) -> int:
        bits_per_symbol = max(1, int(math.log2(self.alphabet_size)))
        return max(1, math.ceil(self.num_bits / bits_per_symbol))

    @property
    def label(self) -> str:
        return self.name if self.name else self.family


def spfsk_like_config(**overrides) -> WaveformConfig:
    """Long-frame permutation-hopped preset (frame 2048, 256 tones)."""
    base = dict(family=FAMILY_SPFSK_LIKE, mary=1, frame_length=2048,
                guard_fraction=0.2, tones=256, num_bits=1024,
                codec_notes="G_void=2")
    base.update(overrides)
    return WaveformConfig(**base)


def pcmfsk_like_config(**overrides) -> WaveformConfig:
    """Short-frame symbol-mapped preset (frame 128, 16 tones)."""
    base = dict(family=FAMILY_PCMFSK_LIKE, mary=16, frame_length=128,
                guard_fraction=0.01, tones=16, num_bits=64,
                codec_notes="R2-S")
    base.update(overrides)
    return WaveformConfig(**base)


def _validate_config(config: WaveformConfig) -> None:
    problems = []
    if config.family not in FAMILIES:
        problems.append(f"family must be one of {FAMILIES}")
    if config.tones < 2:
        problems.append("tones must be >= 2")
    if config.family == FAMILY_PCMFSK_LIKE and config.mary < 2:
        problems.append("mary must be >= 2 for the symbol-mapped family")
    if config.mary < 1:
        problems.append("mary must be >= 1")
    if config.frame_length < 16:
        problems.append("frame_length must be >= 16")
    if not 0.0 <= config.guard_fraction < 1.0:
        problems.append("guard_fraction must be in [0, 1)")
    if config.num_bits < 1:
        problems.append("num_bits must be >= 1")
    if config.energy <= 0.0:
        problems.append("energy must be positive")
    if config.bandwidth <= 0.0 or config.center_frequency <= 0.0:
        problems.append("bandwidth and center_frequency must be positive")
    elif config.center_frequency - config.bandwidth / 2.0 <= 0.0:
        problems.append("band extends to or below 0 Hz")
    elif config.sample_rate <= 2.0 * (config.center_frequency + config.bandwidth / 2.0):
        problems.append("sample_rate must exceed twice the upper band edge")
    if problems:
        raise ValueError("invalid waveform config: " + "; ".join(problems))


def _frame_layout(config: WaveformConfig) -> tuple[int, int]:
    """(guard lead samples, active chip samples) for one frame."""
    guard = round(config.guard_fraction * config.frame_length)
    active = config.frame_length - guard
    if active < 8:
        raise ValueError("guard_fraction leaves fewer than 8 active samples per frame")
    return guard // 2, active


def _tone_frequencies(config: WaveformConfig) -> np.ndarray:
    """Alphabet tone frequencies, kept far enough from the band edges that
    the chip spectrum stays inside the null-to-null band."""
    _, active = _frame_layout(config)
    margin = max(0.02 * config.bandwidth, 4.0 * config.sample_rate / active)
    if 2.0 * margin >= config.bandwidth:
        raise ValueError(
            "tone spacing exceeds bandwidth: chips are too short for the configured band")
    lo = config.center_frequency - config.bandwidth / 2.0 + margin
    hi = config.center_frequency + config.bandwidth / 2.0 - margin
    return np.linspace(lo, hi, config.alphabet_size)


def _tone_sequence(config: WaveformConfig, rng: np.random.Generator) -> np.ndarray:
    n = config.num_frames
    if config.family == FAMILY_SPFSK_LIKE:
        order = rng.permutation(config.tones)
        return order[np.arange(n) % config.tones]
    return rng.integers(0, config.mary, size=n)


def _synthesize(config: WaveformConfig, tone_indices: np.ndarray,
                oversample: int = 1) -> np.ndarray:
    """Sample the continuous-time chip train at ``oversample`` times the
    configured rate.  The same continuous signal underlies every rate, so an
    oversampled synthesis is an exact refinement of the base one."""
    lead, active = _frame_layout(config)
    freqs = _tone_frequencies(config)
    fs = config.sample_rate * oversample
    frame_n = config.frame_length * oversample
    active_t = active / config.sample_rate

    t_local = np.arange(active * oversample) / fs
    # The quartic sine taper keeps the out-of-band skirt and the ringing of
    # the band-limited extension inside the guard samples at the 1e-6 level.
    window = np.sin(np.pi * t_local / active_t) ** 4

    out = np.zeros(len(tone_indices) * frame_n)
    for i, tone in enumerate(tone_indices):
        chip = window * np.cos(2.0 * np.pi * freqs[tone] * t_local)
        start = i * frame_n + lead * oversample
        out[start:start + chip.size] = chip
    return out


def generate(config: WaveformConfig) -> "SampledWaveform":
    """Generate the configured waveform, normalized to the configured energy.

    Deterministic: the same config (including seed) yields bit-identical
    samples.
    """
    _validate_config(config)
    rng = np.random.default_rng(config.seed)
    samples = _synthesize(config, _tone_sequence(config, rng))
    samples *= math.sqrt(config.energy / float(samples @ samples))
    return SampledWaveform(samples, config.sample_rate, family=config.family,
                           config=config)


def _fft_oversample(samples: np.ndarray, factor: int) -> np.ndarray:
    """Band-limited resampling onto a grid ``factor`` times finer.  Original
    sample instants are reproduced exactly."""
    n = samples.size
    spectrum = np.fft.rfft(samples)
    if n % 2 == 0:
        spectrum = spectrum.copy()
        spectrum[-1] *= 0.5  # split the Nyquist bin between +/- frequencies
    return np.fft.irfft(spectrum, n=factor * n) * factor


_LAGRANGE_DENOM = np.array(
    [np.prod([j - k for k in _TAPS_OFFSETS if k != j]) for j in _TAPS_OFFSETS],
    dtype=float)


def _lagrange_weights(frac: np.ndarray) -> list[np.ndarray]:
    """Weights of the 6-tap Lagrange stencil at fractional offset ``frac``."""
    diffs = [frac - off for off in _TAPS_OFFSETS]
    weights = []
    for j in range(len(_TAPS_OFFSETS)):
        w = np.ones_like(frac)
        for k in range(len(_TAPS_OFFSETS)):
            if k != j:
                w = w * diffs[k]
        weights.append(w / _LAGRANGE_DENOM[j])
    return weights


class _Interpolant:
    """Evaluate the band-limited extension of a sample sequence at arbitrary
    times.  Exact at the original sample instants; zero outside the support
    [0, (n-1) / rate]."""

    def __init__(self, samples: np.ndarray, sample_rate: float):
        n = samples.size
        fine = _fft_oversample(samples, _OVERSAMPLE)
        self._table = np.concatenate([np.zeros(_TABLE_PAD), fine, np.zeros(_TABLE_PAD)])
        self._fine_rate = sample_rate * _OVERSAMPLE
        self._support_end = (n - 1) / sample_rate
        self._max_index = fine.size - 1

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self._support_end)
        u = np.where(inside, t, 0.0) * self._fine_rate
        base = np.floor(u)
        frac = u - base
        idx = base.astype(np.int64) + _TABLE_PAD
        out = np.zeros_like(u)
        for off, w in zip(_TAPS_OFFSETS, _lagrange_weights(frac)):
            out += w * self._table[np.clip(idx + off, 0, self._table.size - 1)]
        return np.where(inside, out, 0.0)


class SampledWaveform:
    """Real passband sample sequence plus the metadata the bounds need."""

    def __init__(self, samples, sample_rate: float, family: str = "raw",
                 config: WaveformConfig | None = None):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("samples must be a 1-D sequence with at least 2 entries")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        self.samples = samples
        self.sample_rate = float(sample_rate)
        self.family = family
        self.config = config
        self._interp: _Interpolant | None = None
        self._deriv_samples: np.ndarray | None = None
        self._deriv_interp: _Interpolant | None = None

    @property
    def num_samples(self) -> int:
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(self.samples @ self.samples)

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    @property
    def sample_interval(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def label(self) -> str:
        return self.config.label if self.config is not None else self.family

    def _get_interp(self) -> _Interpolant:
        if self._interp is None:
            self._interp = _Interpolant(self.samples, self.sample_rate)
        return self._interp

    def _get_deriv_samples(self) -> np.ndarray:
        if self._deriv_samples is None:
            self._deriv_samples = derivative(self)
        return self._deriv_samples

    def _get_deriv_interp(self) -> _Interpolant:
        if self._deriv_interp is None:
            self._deriv_interp = _Interpolant(self._get_deriv_samples(), self.sample_rate)
        return self._deriv_interp

    def warmup(self) -> "SampledWaveform":
        """Build the interpolation tables now (useful before forking workers)."""
        self._get_interp()
        self._get_deriv_interp()
        return self

    def evaluate(self, eta: float, tau: float, times) -> np.ndarray:
        """Band-limited samples of s(eta (t - tau)) at the given times."""
        if eta <= 0.0:
            raise ValueError("eta must be positive")
        args = eta * (np.asarray(times, dtype=float) - tau)
        return self._get_interp()(args)

    def evaluate_derivative(self, eta: float, tau: float, times) -> np.ndarray:
        """Band-limited samples of s'(eta (t - tau)) at the given times."""
        if eta <= 0.0:
            raise ValueError("eta must be positive")
        args = eta * (np.asarray(times, dtype=float) - tau)
        return self._get_deriv_interp()(args)


def evaluate_scaled_delayed(waveform: SampledWaveform, eta: float, tau: float,
                            sample_times) -> np.ndarray:
    """Evaluate the time-scaled, delayed waveform at arbitrary times.

    Returns s(eta (t - tau)) for each t in ``sample_times``; arguments that
    fall outside the waveform support evaluate to zero.
    """
    return waveform.evaluate(eta, tau, sample_times)


def derivative(waveform: SampledWaveform) -> np.ndarray:
    """Samples of the time derivative via spectral differentiation."""
    n = waveform.num_samples
    freqs = np.fft.rfftfreq(n, d=waveform.sample_interval)
    spectrum = np.fft.rfft(waveform.samples) * (2j * np.pi * freqs)
    return np.fft.irfft(spectrum, n=n)


@dataclass(frozen=True)
class WbafResult:
    """Wideband ambiguity magnitudes over a delay/Doppler-scale grid, with
    the marginal cuts through the peak."""

    delays: np.ndarray
    etas: np.ndarray
    magnitude: np.ndarray  # shape (len(etas), len(delays))
    peak_value: float
    peak_delay: float
    peak_eta: float
    delay_cut: np.ndarray
    eta_cut: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return self.magnitude / self.peak_value


def wbaf(waveform: SampledWaveform, delay_grid, eta_grid) -> WbafResult:
    """Wideband ambiguity function magnitude over the given grids.

    chi(tau, eta) = sqrt(eta) * T_s * sum_n s(t_n) s(eta (t_n - tau)),
    summed over the waveform's own sample instants; the correlation is linear
    (out-of-support arguments contribute zero).  At tau = 0, eta = 1 this
    reduces to the signal energy times the sample interval, which is the
    global maximum by the Cauchy-Schwarz inequality.
    """
    delays = np.atleast_1d(np.asarray(delay_grid, dtype=float))
    etas = np.atleast_1d(np.asarray(eta_grid, dtype=float))
    if not (np.all(np.isfinite(delays)) and np.all(np.isfinite(etas))):
        raise ValueError("grids must be finite")
    if np.any(etas <= 0.0):
        raise ValueError("eta grid values must be positive")

    s = waveform.samples
    ts = waveform.sample_interval
    t = np.arange(waveform.num_samples) * ts
    interp = waveform._get_interp()

    magnitude = np.empty((etas.size, delays.size))
    # Chunk the delay axis so the argument matrix stays modest in memory.
    chunk = max(1, int(4_000_000 // max(1, waveform.num_samples)))
    for ie, eta in enumerate(etas):
        base = eta * t
        for start in range(0, delays.size, chunk):
            block = delays[start:start + chunk]
            args = base[:, None] - eta * block[None, :]
            vals = interp(args)
            magnitude[ie, start:start + block.size] = math.sqrt(eta) * ts * (s @ vals)
    magnitude = np.abs(magnitude)

    flat_peak = int(np.argmax(magnitude))
    ie, id_ = np.unravel_index(flat_peak, magnitude.shape)
    return WbafResult(
        delays=delays, etas=etas, magnitude=magnitude,
        peak_value=float(magnitude[ie, id_]),
        peak_delay=float(delays[id_]), peak_eta=float(etas[ie]),
        delay_cut=magnitude[ie, :].copy(), eta_cut=magnitude[:, id_].copy())


def _spectral_centroid_hz(waveform: SampledWaveform) -> float:
    freqs = np.fft.rfftfreq(waveform.num_samples, d=waveform.sample_interval)
    power = np.abs(np.fft.rfft(waveform.samples)) ** 2
    return float((freqs @ power) / np.sum(power))


def _rms_bandwidth_hz(waveform: SampledWaveform) -> float:
    freqs = np.fft.rfftfreq(waveform.num_samples, d=waveform.sample_interval)
    power = np.abs(np.fft.rfft(waveform.samples)) ** 2
    mean = (freqs @ power) / np.sum(power)
    return float(np.sqrt(((freqs - mean) ** 2 @ power) / np.sum(power)))


def _width_from_cut(axis: np.ndarray, cut: np.ndarray, level: float) -> float | None:
    """Width of the region around the cut's peak where the cut stays above
    ``level`` times the peak, with linear interpolation at the crossings.
    None when a crossing is not bracketed inside the grid."""
    peak = int(np.argmax(cut))
    threshold = level * cut[peak]

    right = None
    for i in range(peak + 1, cut.size):
        if cut[i] < threshold:
            frac = (cut[i - 1] - threshold) / (cut[i - 1] - cut[i])
            right = axis[i - 1] + frac * (axis[i] - axis[i - 1])
            break
    left = None
    for i in range(peak - 1, -1, -1):
        if cut[i] < threshold:
            frac = (cut[i + 1] - threshold) / (cut[i + 1] - cut[i])
            left = axis[i + 1] - frac * (axis[i + 1] - axis[i])
            break
    if left is None or right is None:
        return None
    return float(right - left)


_HALF_POWER_LEVEL = 10.0 ** (-3.0 / 20.0)


def doppler_mainlobe_width(waveform: SampledWaveform, points: int = 257) -> float:
    """-3 dB width (in Doppler scale units) of |chi(0, eta)| around eta = 1.

    The search span adapts to the signal duration: longer signals have
    proportionally narrower Doppler mainlobes.
    """
    fc = _spectral_centroid_hz(waveform)
    span = 3.0 / (fc * waveform.duration)
    for _ in range(4):
        etas = 1.0 + np.linspace(-span, span, points)
        etas = etas[etas > 0.0]
        cut = wbaf(waveform, [0.0], etas).magnitude[:, 0]
        width = _width_from_cut(etas, cut, _HALF_POWER_LEVEL)
        if width is not None:
            return width
        span *= 4.0
    raise RuntimeError("could not bracket the Doppler mainlobe within the search span")


def delay_mainlobe_width(waveform: SampledWaveform, points: int = 257) -> float:
    """-3 dB width in seconds of |chi(tau, 1)| around tau = 0."""
    bw = _rms_bandwidth_hz(waveform)
    span = 2.0 / bw
    for _ in range(4):
        delays = np.linspace(-span, span, points)
        cut = wbaf(waveform, delays, [1.0]).magnitude[0, :]
        width = _width_from_cut(delays, cut, _HALF_POWER_LEVEL)
        if width is not None:
            return width
        span *= 4.0
    raise RuntimeError("could not bracket the delay mainlobe within the search span")


_WAVEFORM_MAGIC = "UWISACWF1"
_HEADER_END = "---"


def save_waveform(path, waveform: SampledWaveform) -> None:
    """Write samples as little-endian float64 after a short text header."""
    header = "\n".join([
        _WAVEFORM_MAGIC,
        f"sample_rate={waveform.sample_rate!r}",
        f"energy={waveform.energy!r}",
        f"family={waveform.family}",
        f"num_samples={waveform.num_samples}",
        _HEADER_END,
    ]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(waveform.samples.astype("<f8").tobytes())


def load_waveform(path) -> SampledWaveform:
    """Read a waveform written by :func:`save_waveform` (or by any modem
    exporting the same layout)."""
    raw = Path(path).read_bytes()
    sep = (_HEADER_END + "\n").encode("ascii")
    pos = raw.find(sep)
    if not raw.startswith((_WAVEFORM_MAGIC + "\n").encode("ascii")) or pos < 0:
        raise ValueError(f"{path}: not a waveform file (bad magic or missing header end)")
    header = raw[:pos].decode("ascii").splitlines()[1:]
    fields = {}
    for line in header:
        m = re.fullmatch(r"([a-z_]+)=(.*)", line)
        if not m:
            raise ValueError(f"{path}: malformed header line {line!r}")
        fields[m.group(1)] = m.group(2)
    try:
        rate = float(fields["sample_rate"])
        energy = float(fields["energy"])
        family = fields["family"]
        count = int(fields["num_samples"])
    except KeyError as missing:
        raise ValueError(f"{path}: header missing field {missing}") from None
    samples = np.frombuffer(raw[pos + len(sep):], dtype="<f8")
    if samples.size != count:
        raise ValueError(
            f"{path}: header declares {count} samples, file holds {samples.size}")
    wf = SampledWaveform(samples.copy(), rate, family=family)
    if not math.isclose(wf.energy, energy, rel_tol=1e-6):
        raise ValueError(f"{path}: stored energy {energy} does not match samples")
    return wf
