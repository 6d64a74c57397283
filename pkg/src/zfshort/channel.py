"""System model: configuration, derived per-stream statistics, pilot-based
LS channel estimation, the equivalent channel decomposition, and the
post-detection per-stream SNR.

Frame layout: a block of frame_len = pilot_len + data_len channel uses;
orthogonal pilots occupy the first pilot_len uses.  Noise is unit variance
by normalization, so `power` is the dimensionless input SNR.  Stream
indices in public signatures are 1-based (matching the subscript range
1 <= i <= M); arrays are 0-based internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .linalg import RngHandle, qr_decompose, sample_complex_gaussian

__all__ = [
    "SystemConfig",
    "StreamStats",
    "ChannelRealization",
    "derive_stats",
    "pilot_matrix",
    "simulate_frame",
    "sample_stream_snr",
]


@dataclass(frozen=True)
class SystemConfig:
    """Full parameter set governing every computation.

    n_rx: receive antennas N; n_streams: simultaneously transmitted
    streams M (N >= M >= 1); power: linear input SNR p > 0; sigma_h_sq:
    per-stream large-scale fading variances; pilot_len: training channel
    uses (>= M for orthogonal pilots); data_len: data channel uses.

    data_len below 100 puts the normal-approximation error probability
    outside its stated validity and is rejected unless
    allow_short_data=True.
    """

    n_rx: int
    n_streams: int
    power: float
    sigma_h_sq: tuple[float, ...]
    pilot_len: int
    data_len: int
    allow_short_data: bool = False

    def __post_init__(self):
        if self.n_streams < 1 or self.n_rx < self.n_streams:
            raise ValueError(
                f"need N >= M >= 1, got N={self.n_rx}, M={self.n_streams}"
            )
        if not (self.power > 0):
            raise ValueError(f"power must be > 0, got {self.power}")
        object.__setattr__(self, "sigma_h_sq", tuple(float(v) for v in self.sigma_h_sq))
        if len(self.sigma_h_sq) != self.n_streams:
            raise ValueError(
                f"sigma_h_sq must have one entry per stream "
                f"({self.n_streams}), got {len(self.sigma_h_sq)}"
            )
        if any(v <= 0 for v in self.sigma_h_sq):
            raise ValueError("sigma_h_sq entries must be strictly positive")
        if self.pilot_len < self.n_streams:
            raise ValueError(
                f"orthogonal pilots require pilot_len >= n_streams, "
                f"got {self.pilot_len} < {self.n_streams}"
            )
        if self.data_len < 100 and not self.allow_short_data:
            raise ValueError(
                f"data_len={self.data_len} < 100 is outside the validity "
                f"range of the finite-blocklength approximation; pass "
                f"allow_short_data=True to override"
            )
        if self.data_len < 1:
            raise ValueError(f"data_len must be >= 1, got {self.data_len}")

    @property
    def frame_len(self) -> int:
        """Total channel uses per frame (pilot + data)."""
        return self.pilot_len + self.data_len

    @property
    def identical_stats(self) -> bool:
        return len(set(self.sigma_h_sq)) == 1

    @classmethod
    def identical(
        cls,
        n_rx: int,
        n_streams: int,
        power: float,
        sigma_h_sq: float,
        data_len: int,
        pilot_len: int | None = None,
        allow_short_data: bool = False,
    ) -> "SystemConfig":
        """Config with one common fading variance across streams and the
        default minimal pilot length (pilot_len = n_streams)."""
        return cls(
            n_rx=n_rx,
            n_streams=n_streams,
            power=power,
            sigma_h_sq=(float(sigma_h_sq),) * n_streams,
            pilot_len=n_streams if pilot_len is None else pilot_len,
            data_len=data_len,
            allow_short_data=allow_short_data,
        )


@dataclass(frozen=True)
class StreamStats:
    """Derived per-stream quantities.

    sigma_e_sq: LS estimation-error variance M/(pilot_len * p);
    sigma_hhat_sq[i]: estimate variance sigma_h_sq[i] + sigma_e_sq;
    sigma_z_sq[i]: equivalent-model residual variance;
    mu[i]: noncentrality scale of the conditional SNR law;
    sigma_dof_sq[i]: per-degree-of-freedom variance of the same law.
    """

    sigma_e_sq: float
    sigma_hhat_sq: tuple[float, ...]
    sigma_z_sq: tuple[float, ...]
    mu: tuple[float, ...]
    sigma_dof_sq: tuple[float, ...]


def derive_stats(cfg: SystemConfig) -> StreamStats:
    """Per-stream statistics implied by the configuration.

    sigma_e_sq = M/(m_T p) (= 1/p at the minimal pilot length);
    sigma_z_sq = sigma_h_sq * sigma_e_sq / sigma_hhat_sq;
    mu = p (sigma_h_sq / sigma_hhat_sq)^2;  sigma_dof_sq = p sigma_z_sq / 2.
    """
    p = cfg.power
    s2e = cfg.n_streams / (cfg.pilot_len * p)
    s2hh = tuple(v + s2e for v in cfg.sigma_h_sq)
    s2z = tuple(v * s2e / w for v, w in zip(cfg.sigma_h_sq, s2hh))
    mu = tuple(p * (v / w) ** 2 for v, w in zip(cfg.sigma_h_sq, s2hh))
    s2dof = tuple(p * z / 2.0 for z in s2z)
    return StreamStats(
        sigma_e_sq=s2e,
        sigma_hhat_sq=s2hh,
        sigma_z_sq=s2z,
        mu=mu,
        sigma_dof_sq=s2dof,
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One simulated frame: true channel h, LS estimate h_hat = h + err,
    equivalent-model residual z, and the per-stream post-detection SNRs."""

    h: np.ndarray
    h_hat: np.ndarray
    err: np.ndarray
    z: np.ndarray
    snr_per_stream: tuple[float, ...]


def pilot_matrix(cfg: SystemConfig) -> np.ndarray:
    """Orthogonal pilot block Psi (M x pilot_len).

    Rows are scaled so that Psi Psi^H = (pilot_len / M) I_M, which makes the
    LS error variance equal M/(pilot_len * p) for any pilot_len >= M; the
    minimal pilot_len = M gives exactly the identity.
    """
    m, mt = cfg.n_streams, cfg.pilot_len
    psi = np.zeros((m, mt), dtype=np.complex128)
    psi[:, :m] = np.eye(m) * math.sqrt(mt / m)
    return psi


def _check_stream(cfg: SystemConfig, i: int) -> int:
    if int(i) != i or not (1 <= i <= cfg.n_streams):
        raise ValueError(f"stream index must be in [1, {cfg.n_streams}], got {i}")
    return int(i) - 1


def _stream_snr_from_factors(r_last: complex, q_last: np.ndarray,
                             z_col: np.ndarray, coeff: float, p: float) -> float:
    # detected-signal coefficient of the stream placed last: sqrt(p) times
    # (R diag-coefficient + projection of the residual column on the last
    # nulling vector); estimation-error part counts as signal.
    t = r_last * coeff + np.vdot(q_last, z_col)
    return float(p * abs(t) ** 2)


def simulate_frame(cfg: SystemConfig, rng: RngHandle) -> ChannelRealization:
    """Draw one frame: channel, training phase, LS estimate, equivalent
    decomposition, and all M per-stream SNRs.

    Each stream's SNR comes from a QR factorization with that stream's
    column permuted last, so every stream sees the full N - M + 1 diversity
    order of its nulled subspace.
    """
    n, m, p = cfg.n_rx, cfg.n_streams, cfg.power
    stats = derive_stats(cfg)
    gen = rng.generator

    h = sample_complex_gaussian(rng, n, m, cfg.sigma_h_sq)
    psi = pilot_matrix(cfg)
    noise_tr = math.sqrt(0.5) * (
        gen.standard_normal((n, cfg.pilot_len))
        + 1j * gen.standard_normal((n, cfg.pilot_len))
    )
    y_tr = math.sqrt(p) * h @ psi + noise_tr
    # LS estimate: pseudo-inverse of the row-orthogonal pilot block
    psi_pinv = psi.conj().T * (m / cfg.pilot_len)
    h_hat = (y_tr @ psi_pinv) / math.sqrt(p)
    err = h_hat - h

    coeff = np.array(
        [v / w for v, w in zip(cfg.sigma_h_sq, stats.sigma_hhat_sq)]
    )
    z = h - h_hat * coeff[np.newaxis, :]

    snrs = []
    for i in range(m):
        order = [j for j in range(m) if j != i] + [i]
        fac = qr_decompose(h_hat[:, order])
        snrs.append(
            _stream_snr_from_factors(
                fac.r[m - 1, m - 1], fac.q[:, m - 1], z[:, i], coeff[i], p
            )
        )
    return ChannelRealization(
        h=h, h_hat=h_hat, err=err, z=z, snr_per_stream=tuple(snrs)
    )


def sample_stream_snr(
    cfg: SystemConfig, i: int, rng: RngHandle, n_frames: int
) -> np.ndarray:
    """Vectorized draw of stream i's SNR over n_frames independent frames.

    Runs the same pipeline as simulate_frame (training noise, LS estimate,
    equivalent decomposition, QR with stream i last) batched across frames;
    only the reduced factorization is formed since just the last diagonal
    entry of R and the last nulling vector enter the SNR.
    """
    idx = _check_stream(cfg, i)
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    n, m, p = cfg.n_rx, cfg.n_streams, cfg.power
    stats = derive_stats(cfg)
    gen = rng.generator

    half = np.sqrt(np.asarray(cfg.sigma_h_sq) / 2.0)
    h = (gen.standard_normal((n_frames, n, m))
         + 1j * gen.standard_normal((n_frames, n, m))) * half
    psi = pilot_matrix(cfg)
    noise_tr = math.sqrt(0.5) * (
        gen.standard_normal((n_frames, n, cfg.pilot_len))
        + 1j * gen.standard_normal((n_frames, n, cfg.pilot_len))
    )
    y_tr = math.sqrt(p) * h @ psi + noise_tr
    psi_pinv = psi.conj().T * (m / cfg.pilot_len)
    h_hat = (y_tr @ psi_pinv) / math.sqrt(p)

    coeff = np.array(
        [v / w for v, w in zip(cfg.sigma_h_sq, stats.sigma_hhat_sq)]
    )
    z_col = h[:, :, idx] - h_hat[:, :, idx] * coeff[idx]

    order = [j for j in range(m) if j != idx] + [idx]
    q, r = np.linalg.qr(h_hat[:, :, order], mode="reduced")
    r_last = r[:, m - 1, m - 1]
    q_last = q[:, :, m - 1]
    cross = np.einsum("bn,bn->b", q_last.conj(), z_col)
    return p * np.abs(r_last * coeff[idx] + cross) ** 2
