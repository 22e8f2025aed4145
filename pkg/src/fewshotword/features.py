"""Audio front end and vector quantization.

MFCC extraction turns mono PCM into FeatureSequences; a K-means codebook
(trained with a pinned PRNG, see rng.py) turns FeatureSequences into
discrete CodeSequences.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.io.wavfile

from .errors import DataError, InvariantError
from .rng import Xoshiro256StarStar
from .seqdata import Codebook, CodeSequence, FeatureSequence, read_fseq, write_fseq

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class MfccConfig:
    """Standard ASR front-end settings: 25 ms Hamming window, 10 ms hop,
    26 HTK-mel filters over 0-8 kHz, 13 cepstra including c0, no deltas."""

    sample_rate_hz: int = 16000
    pre_emphasis: float = 0.97
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    mel_fmin_hz: float = 0.0
    mel_fmax_hz: float = 8000.0

    @property
    def window_samples(self):
        return int(round(self.window_ms * self.sample_rate_hz / 1000.0))

    @property
    def hop_samples(self):
        return int(round(self.hop_ms * self.sample_rate_hz / 1000.0))

    def __post_init__(self):
        if self.window_samples < 1 or self.hop_samples < 1:
            raise DataError("window and hop must be at least one sample")
        if self.fft_size < self.window_samples:
            raise DataError(f"fft_size {self.fft_size} < window of "
                            f"{self.window_samples} samples")
        if not (1 <= self.n_coeffs <= self.n_mels):
            raise DataError(f"need 1 <= n_coeffs <= n_mels, got "
                            f"{self.n_coeffs} vs {self.n_mels}")
        if not (0 <= self.mel_fmin_hz < self.mel_fmax_hz <= self.sample_rate_hz / 2):
            raise DataError(f"need fmin < fmax <= sample_rate/2, got "
                            f"[{self.mel_fmin_hz}, {self.mel_fmax_hz}] at "
                            f"{self.sample_rate_hz} Hz")


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 100
    max_iters: int = 100
    tolerance: float = 1e-6  # relative inertia change
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tolerance < 0:
            raise DataError(f"tolerance must be >= 0, got {self.tolerance}")


def load_wav(path):
    """Read a mono PCM-16 or float32 WAV. Returns (samples float64, rate)."""
    try:
        rate, data = scipy.io.wavfile.read(path)
    except Exception as e:
        raise DataError(f"{path}: unreadable WAV: {e}") from e
    if data.ndim != 1:
        raise DataError(f"{path}: mono required, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise DataError(f"{path}: PCM 16-bit or float32 required, got {data.dtype}")
    return samples, int(rate)


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg):
    """Triangular HTK-mel filterbank sampled at the rfft bin frequencies.

    Returns an (n_mels, fft_size//2 + 1) weight matrix.
    """
    n_bins = cfg.fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * (cfg.sample_rate_hz / cfg.fft_size)
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.mel_fmin_hz),
                                  hz_to_mel(cfg.mel_fmax_hz),
                                  cfg.n_mels + 2))
    weights = np.zeros((cfg.n_mels, n_bins), np.float64)
    for m in range(cfg.n_mels):
        left, centre, right = edges[m], edges[m + 1], edges[m + 2]
        up = (bin_hz - left) / (centre - left)
        down = (right - bin_hz) / (right - centre)
        weights[m] = np.maximum(0.0, np.minimum(up, down))
    return weights


def extract_mfcc(samples, sample_rate, cfg=None):
    """MFCCs of a mono signal.

    Pipeline: pre-emphasis -> Hamming window -> magnitude FFT -> triangular
    HTK-mel filterbank -> log with floor 1e-10 -> orthonormal DCT-II ->
    first n_coeffs.  Frame count is 1 + floor((N - window) / hop).
    """
    cfg = cfg or MfccConfig()
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise DataError(f"mono required, got shape {samples.shape}")
    if int(sample_rate) != cfg.sample_rate_hz:
        raise DataError(f"sample rate {sample_rate} does not match config "
                        f"{cfg.sample_rate_hz}")
    win = cfg.window_samples
    hop = cfg.hop_samples
    if samples.shape[0] < win:
        raise DataError(f"audio of {samples.shape[0]} samples is shorter than "
                        f"one {win}-sample window")
    emphasized = np.concatenate(([samples[0]],
                                 samples[1:] - cfg.pre_emphasis * samples[:-1]))
    n_frames = 1 + (samples.shape[0] - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = emphasized[idx] * np.hamming(win)[None, :]
    mag = np.abs(np.fft.rfft(frames, n=cfg.fft_size, axis=1))
    mel = mag @ mel_filterbank(cfg).T
    logmel = np.log(np.maximum(mel, LOG_FLOOR))
    ceps = scipy.fft.dct(logmel, type=2, norm="ortho", axis=1)[:, :cfg.n_coeffs]
    return FeatureSequence(ceps.astype(np.float32),
                           frame_rate_hz=cfg.sample_rate_hz / hop)


def mean_pool(seq):
    """Arithmetic mean over frames, per dimension, accumulated in float64."""
    return np.mean(seq.frames.astype(np.float64), axis=0)


def _nearest_centroid(frames, centroids):
    """Index of the nearest centroid per frame (squared Euclidean).

    Distances are compared via |c|^2 - 2 x.c (the |x|^2 term is constant per
    frame), so ties between bit-identical centroid rows resolve to the
    lowest index via argmin.
    """
    x = np.asarray(frames, dtype=np.float64)
    c = np.asarray(centroids, dtype=np.float64)
    scores = np.sum(c * c, axis=1)[None, :] - 2.0 * (x @ c.T)
    return np.argmin(scores, axis=1)


def _point_sq_dists(frames, centroids, assign):
    diff = np.asarray(frames, dtype=np.float64) - \
        np.asarray(centroids, dtype=np.float64)[assign]
    return np.einsum("ij,ij->i", diff, diff)


def _kmeans_pp_init(x, k, rng):
    """k-means++ seeding with the pinned generator.

    First centroid uniform; each next centroid sampled with probability
    proportional to the squared distance to the nearest chosen centroid
    (uniform fallback if all masses are zero, e.g. fewer distinct points
    than k).
    """
    n = x.shape[0]
    chosen = [rng.index(n)]
    diff = x - x[chosen[0]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    while len(chosen) < k:
        total = float(d2.sum())
        if total > 0.0:
            idx = rng.weighted_index(d2)
        else:
            idx = rng.index(n)
        chosen.append(idx)
        diff = x - x[idx]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    return x[np.array(chosen)].copy()


def train_codebook(data, cfg):
    """Lloyd's algorithm with k-means++ initialization.

    Deterministic given (data, cfg): seeding uses the splitmix64-seeded
    xoshiro256** generator, assignment and update steps are single-threaded
    float64 numpy.  Empty clusters are re-seeded to the point farthest from
    its assigned centroid.  Stops when the relative inertia change drops
    below cfg.tolerance or after cfg.max_iters iterations.
    """
    if not data:
        raise DataError("no feature sequences given")
    dims = {s.dim for s in data}
    if len(dims) > 1:
        raise DataError(f"mixed dimensionality: {sorted(dims)}")
    x = np.concatenate([s.frames for s in data]).astype(np.float64)
    n = x.shape[0]
    if n < cfg.k:
        raise DataError(f"{n} frames < k={cfg.k}")
    rng = Xoshiro256StarStar(cfg.seed)
    centroids = _kmeans_pp_init(x, cfg.k, rng)
    prev_inertia = None
    for it in range(cfg.max_iters):
        assign = _nearest_centroid(x, centroids)
        d2 = _point_sq_dists(x, centroids, assign)
        inertia = float(d2.sum())
        if prev_inertia is not None:
            if inertia > prev_inertia * (1 + 1e-12) + 1e-12:
                raise InvariantError(f"inertia increased at iteration {it}: "
                                     f"{prev_inertia} -> {inertia}")
            rel = 0.0 if prev_inertia == 0.0 else (prev_inertia - inertia) / prev_inertia
            if rel < cfg.tolerance:
                log.debug("kmeans converged at iteration %d, inertia %.6g", it, inertia)
                break
        prev_inertia = inertia
        new_centroids = centroids.copy()
        counts = np.bincount(assign, minlength=cfg.k)
        for j in range(cfg.k):
            if counts[j] > 0:
                new_centroids[j] = x[assign == j].mean(axis=0)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            order = np.argsort(-d2, kind="stable")  # farthest points first
            for slot, j in enumerate(empties):
                new_centroids[j] = x[order[slot]]
            log.debug("re-seeded %d empty clusters", empties.size)
        centroids = new_centroids
    return Codebook(centroids.astype(np.float32))


def quantize(seq, codebook, dedup=False):
    """Map each frame to its nearest centroid index.

    Ties break to the lowest index.  With dedup, runs of equal consecutive
    codes collapse to a single code.
    """
    if seq.dim != codebook.dim:
        raise DataError(f"dimension mismatch: sequence D={seq.dim}, "
                        f"codebook D={codebook.dim}")
    codes = _nearest_centroid(seq.frames, codebook.centroids)
    if dedup:
        keep = np.concatenate(([True], codes[1:] != codes[:-1]))
        codes = codes[keep]
    return CodeSequence(codes, alphabet_size=codebook.size)


def save_codebook(codebook, path):
    """Persist centroids in the .fseq container (K x D matrix)."""
    write_fseq(FeatureSequence(codebook.centroids), path)


def load_codebook(path):
    return Codebook(read_fseq(path).frames)
