"""Desk-scale Monte Carlo of the prepare-and-measure protocol.

Modeling choices, fixed once for the whole package: heterodyne outcomes follow
the Husimi convention p(y|alpha) = exp(-|y - alpha|^2)/pi on a lossless link,
so the channel output is y = sqrt(tau) x + z with z circularly-symmetric
complex Gaussian of total variance sigma^2 = 1 + tau xi / 2 (vacuum plus
detection, plus the excess-noise contribution). Sifting assigns each round to
the test set by an independent Bernoulli(test_fraction) draw. All randomness
derives from one 64-bit seed through three named SeedSequence children
(symbols, channel, sifting), so runs are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bipartite import ChannelModel
from .constellation import Constellation, sample_indices
from .errors import InsufficientTestData, NonPhysicalInput

MIN_TEST_ROUNDS = 30


@dataclass(frozen=True)
class ProtocolRun:
    """Configuration of one simulated protocol execution.

    ``tau_min`` and ``xi_max`` are optional abort thresholds for parameter
    estimation; they have no defaults because the acceptance decision is a
    deployment policy, not a property of the channel model.
    """

    constellation: Constellation
    channel: ChannelModel
    rounds: int
    test_fraction: float
    seed: int
    constellation_id: str = ""
    tau_min: float | None = None
    xi_max: float | None = None

    def __post_init__(self):
        if self.rounds < 100:
            raise NonPhysicalInput(f"rounds must be >= 100, got {self.rounds}")
        if not 0.0 < self.test_fraction < 1.0:
            raise NonPhysicalInput(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if not isinstance(self.seed, (int, np.integer)):
            raise NonPhysicalInput("seed must be an integer")


@dataclass(frozen=True)
class EstimationResult:
    tau_hat: float
    xi_hat: float
    n_test: int
    ser_map: float
    ser_md: float
    xi_clamped: bool = False
    abort: bool | None = None

    def __post_init__(self):
        if self.tau_hat < 0.0:
            raise NonPhysicalInput(f"tau_hat must be >= 0, got {self.tau_hat}")
        for name in ("ser_map", "ser_md"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NonPhysicalInput(f"{name} = {v} outside [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat,
            "xi_hat": self.xi_hat,
            "n_test": self.n_test,
            "ser_map": self.ser_map,
            "ser_md": self.ser_md,
            "xi_clamped": self.xi_clamped,
            "abort": self.abort,
        }


def simulate_channel(x, ch: ChannelModel, seed) -> np.ndarray:
    """Thermal-loss channel plus heterodyne: y = sqrt(tau) x + z.

    z is drawn per quadrature with variance sigma^2 / 2 where
    sigma^2 = 1 + tau xi / 2; deterministic for a given seed.
    """
    x = np.asarray(x, dtype=complex)
    rng = np.random.default_rng(seed)
    sigma2 = 1.0 + ch.tau * ch.xi / 2.0
    scale = np.sqrt(sigma2 / 2.0)
    noise = rng.normal(0.0, scale, x.shape) + 1j * rng.normal(0.0, scale, x.shape)
    return np.sqrt(ch.tau) * x + noise


def _decision_metric(y, c: Constellation, ch: ChannelModel, use_priors: bool):
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    scaled = np.sqrt(ch.tau) * c.points
    sigma2 = 1.0 + ch.tau * ch.xi / 2.0
    d2 = np.abs(y[:, None] - scaled[None, :]) ** 2
    metric = -d2 / sigma2
    if use_priors:
        with np.errstate(divide="ignore"):
            metric = metric + np.log(c.probs)[None, :]
    return metric


def map_estimate(y, c: Constellation, ch: ChannelModel):
    """Posterior-maximizing point index; ties break to the lowest index.

    Accepts a scalar or an array of heterodyne outcomes.
    """
    metric = _decision_metric(y, c, ch, use_priors=True)
    idx = np.argmax(metric, axis=1)
    return int(idx[0]) if np.isscalar(y) or np.ndim(y) == 0 else idx


def md_estimate(y, c: Constellation, ch: ChannelModel):
    """Minimum-distance index over the channel-scaled points |y - sqrt(tau) x|^2."""
    metric = _decision_metric(y, c, ch, use_priors=False)
    idx = np.argmax(metric, axis=1)
    return int(idx[0]) if np.isscalar(y) or np.ndim(y) == 0 else idx


@dataclass(frozen=True)
class ParamEstimate:
    tau_hat: float
    xi_hat: float
    sigma2_hat: float
    xi_clamped: bool


def estimate_params(x_test, y_test) -> ParamEstimate:
    """Moment-based channel estimate from the announced test rounds.

    t_hat = sum Re(conj(x) y) / sum |x|^2, tau_hat = t_hat^2; the residual
    power sigma2_hat = mean |y - t_hat x|^2 gives xi_hat = 2 (sigma2_hat - 1)
    / tau_hat, clamped at zero with a flag (downstream formulas need xi >= 0).
    """
    x = np.asarray(x_test, dtype=complex).ravel()
    y = np.asarray(y_test, dtype=complex).ravel()
    if x.size != y.size:
        raise InsufficientTestData(f"{x.size} inputs vs {y.size} outputs")
    if x.size < MIN_TEST_ROUNDS:
        raise InsufficientTestData(f"need >= {MIN_TEST_ROUNDS} test rounds, got {x.size}")
    sx2 = float(np.vdot(x, x).real)
    if sx2 <= 0.0:
        raise InsufficientTestData("test symbols carry no energy")
    t_hat = float(np.sum((x.conj() * y).real)) / sx2
    tau_hat = t_hat**2
    sigma2_hat = float(np.mean(np.abs(y - t_hat * x) ** 2))
    if tau_hat > 0.0:
        xi_raw = 2.0 * (sigma2_hat - 1.0) / tau_hat
    else:
        xi_raw = 0.0
    clamped = xi_raw < 0.0
    return ParamEstimate(tau_hat, max(0.0, xi_raw), sigma2_hat, clamped)


@dataclass(frozen=True)
class RoundRecords:
    """Per-round arrays for the optional simulation CSV."""

    x: np.ndarray
    y: np.ndarray
    test_flag: np.ndarray
    decision_map: np.ndarray
    decision_md: np.ndarray


def run_protocol(run: ProtocolRun, with_rounds: bool = False):
    """Execute sampling, transmission, sifting, estimation and decoding.

    Decoding uses the estimated channel (tau_hat clipped into (0, 1] for the
    decision metric). Symbol error rates are measured on the key set only.
    Returns an EstimationResult, plus RoundRecords when ``with_rounds``.
    """
    symbols_seed, channel_seed, sifting_seed = np.random.SeedSequence(run.seed).spawn(3)
    c = run.constellation
    idx_true = sample_indices(c, symbols_seed, run.rounds)
    x = c.points[idx_true]
    y = simulate_channel(x, run.channel, channel_seed)
    test_flag = np.random.default_rng(sifting_seed).random(run.rounds) < run.test_fraction
    n_test = int(test_flag.sum())
    if n_test < MIN_TEST_ROUNDS or n_test == run.rounds:
        raise InsufficientTestData(
            f"sifting left {n_test} test rounds out of {run.rounds}"
        )
    est = estimate_params(x[test_flag], y[test_flag])
    decode_ch = ChannelModel(min(max(est.tau_hat, 1e-12), 1.0), est.xi_hat)
    dec_map = map_estimate(y, c, decode_ch)
    dec_md = md_estimate(y, c, decode_ch)
    key = ~test_flag
    ser_map = float(np.mean(dec_map[key] != idx_true[key]))
    ser_md = float(np.mean(dec_md[key] != idx_true[key]))
    abort = None
    if run.tau_min is not None or run.xi_max is not None:
        abort = bool(
            (run.tau_min is not None and est.tau_hat < run.tau_min)
            or (run.xi_max is not None and est.xi_hat > run.xi_max)
        )
    result = EstimationResult(
        tau_hat=est.tau_hat,
        xi_hat=est.xi_hat,
        n_test=n_test,
        ser_map=ser_map,
        ser_md=ser_md,
        xi_clamped=est.xi_clamped,
        abort=abort,
    )
    if with_rounds:
        return result, RoundRecords(x, y, test_flag, dec_map, dec_md)
    return result
