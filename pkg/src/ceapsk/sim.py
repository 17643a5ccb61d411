"""Monte Carlo engines: fixed-rate SER, CSIT sensitivity, variable rate.

Trials are processed in fixed-size chunks, each with its own counter-based
random stream keyed by (seed, scheme, chunk).  Chunk results are plain
counter sums reduced in chunk order, so the curves are bit-identical for
any worker count.  One data symbol is sent per channel realization.

Channel draws, symbols and unit noise are P-independent, and transmit
phases are invariant under a common power scaling, so each chunk maps its
symbols through the precoder once and replays the same realizations across
the whole SNR grid.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfcinv

from .channel import annulus_arrays
from .constellation import apsk_points, qam_family, qfunc, modulus_ratio
from .optimizer import RegionTable
from .precoder import phases_for_targets, reconstruct
from .rng import stream

SCHEMES = (
    "proposed-optimal",
    "proposed-suboptimal",
    "fixed-qam16",
    "adaptive-qam-psk",
    "egt-qam16",
    "variable-apsk",
    "variable-qam",
)
_SCHEME_ID = {name: i for i, name in enumerate(SCHEMES)}

DEFAULT_PATH_LOSS = 1e-9          # -90 dB
DEFAULT_NOISE_POWER = 10 ** (-12.4)  # -94 dBm in watts


@dataclass(frozen=True)
class SimConfig:
    m: int
    snr_db: tuple[float, ...]
    trials: int
    scheme: str
    n: int = 16
    sizes: tuple[int, ...] = (2, 4, 8, 16, 32, 64)
    target_ser: float = 1e-3
    path_loss: float = DEFAULT_PATH_LOSS
    noise_power: float = DEFAULT_NOISE_POWER
    seed: int = 0
    chunk_size: int = 100_000
    threads: int = 1
    debug_checks: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; valid: {SCHEMES}")
        if self.trials < 1000:
            raise ValueError("need at least 1e3 trials")
        if not (0.0 < self.target_ser < 1.0):
            raise ValueError("target_ser must lie in (0, 1)")
        snrs = tuple(float(s) for s in self.snr_db)
        if any(b <= a for a, b in zip(snrs, snrs[1:])) is True:
            raise ValueError("snr_db must be strictly increasing")
        object.__setattr__(self, "snr_db", snrs)

    def powers(self) -> np.ndarray:
        """Total transmit power per SNR grid point (SNR = P beta / sigma^2)."""
        snr_lin = 10.0 ** (np.asarray(self.snr_db) / 10.0)
        return snr_lin * self.noise_power / self.path_loss


@dataclass(frozen=True)
class SerCurve:
    snr_db: np.ndarray
    errors: np.ndarray
    trials: np.ndarray
    union_bound: np.ndarray | None = None

    @property
    def ser(self) -> np.ndarray:
        return self.errors / self.trials

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["snr_db", "ser", "errors", "trials"])
            for s, e, t in zip(self.snr_db, self.errors, self.trials):
                w.writerow([f"{s:g}", f"{e / t:.10e}", int(e), int(t)])


@dataclass(frozen=True)
class RateCurve:
    snr_db: np.ndarray
    avg_bits: np.ndarray
    no_tx_fraction: np.ndarray
    trials: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["snr_db", "avg_bits", "no_tx_fraction"])
            for s, b, q in zip(self.snr_db, self.avg_bits, self.no_tx_fraction):
                w.writerow([f"{s:g}", f"{b:.10e}", f"{q:.10e}"])


# ---------------------------------------------------------------------------
# Per-trial constellation assembly


def _apsk_point_matrix(n: int, n2: np.ndarray, omega2: np.ndarray,
                       rho2: np.ndarray, region_idx: np.ndarray) -> np.ndarray:
    """Per-trial two-ring point sets, shape (T, n); outer ring first."""
    T = n2.size
    pts = np.empty((T, n), dtype=complex)
    for reg in np.unique(region_idx):
        sel = region_idx == reg
        n2r = int(n2[sel][0])
        n1r = n - n2r
        om = float(omega2[sel][0])
        outer = np.exp(2j * np.pi * np.arange(n1r) / n1r)
        inner = np.exp(1j * (2.0 * np.pi * np.arange(n2r) / n2r + om))
        pts[sel, :n1r] = outer
        pts[sel, n1r:] = rho2[sel][:, None] * inner
    return pts


def _chunk_bounds(trials: int, chunk_size: int):
    n_chunks = (trials + chunk_size - 1) // chunk_size
    return [(c, min(chunk_size, trials - c * chunk_size)) for c in range(n_chunks)]


def _draw_channel(rng, m: int, t: int, path_loss: float) -> np.ndarray:
    re = rng.standard_normal((t, m))
    im = rng.standard_normal((t, m))
    return np.sqrt(path_loss / 2.0) * (re + 1j * im)


def _detect_errors(y: np.ndarray, scale, pts: np.ndarray,
                   u: np.ndarray) -> int:
    """ML detection against the scaled per-trial point sets."""
    dist = np.abs(y[:, None] - scale * pts)
    return int(np.count_nonzero(np.argmin(dist, axis=1) != u))


# ---------------------------------------------------------------------------
# Fixed-rate SER


def run_fixed_rate_ser(cfg: SimConfig, table: RegionTable | None) -> SerCurve:
    """Average SER over the SNR grid for one fixed-rate scheme."""
    if cfg.scheme.startswith("proposed") and table is None:
        raise ValueError(f"scheme {cfg.scheme} requires a region table")
    if cfg.scheme.startswith("variable"):
        raise ValueError("use run_variable_rate for variable-rate schemes")
    powers = cfg.powers()
    sigma = math.sqrt(cfg.noise_power)
    # all fixed-rate schemes share one stream key: common random numbers
    # make inter-scheme SNR-gap measurements far less noisy
    sid = 1
    qam16 = qam_family(16)
    psk16 = np.exp(2j * np.pi * np.arange(16) / 16)

    def one_chunk(chunk: int, t: int):
        rng = stream(cfg.seed, sid, chunk)
        h = _draw_channel(rng, cfg.m, t, cfg.path_loss)
        u = rng.integers(0, cfg.n, size=t)
        z = (rng.standard_normal(t) + 1j * rng.standard_normal(t)) / np.sqrt(2.0)
        r0, big_r0 = annulus_arrays(h, 1.0)
        ratio = r0 / big_r0
        dmin_trial = None
        if cfg.scheme in ("proposed-optimal", "proposed-suboptimal"):
            idx, n2, om, rho2 = table.params_at(ratio)
            pts = _apsk_point_matrix(cfg.n, n2, om, rho2, idx)
            dmin_trial = table.d_min_at(ratio)
        elif cfg.scheme == "adaptive-qam-psk":
            feas = ratio <= 1.0 / 3.0
            pts = np.where(feas[:, None], qam16[None, :], psk16[None, :])
        else:  # fixed-qam16, egt-qam16
            pts = np.broadcast_to(qam16, (t, 16)).copy()
        s = pts[np.arange(t), u]
        if cfg.scheme == "fixed-qam16":
            mod = np.abs(s)
            s_tx = s / mod * np.clip(mod, ratio, 1.0)
        else:
            s_tx = s
        target = big_r0 * s_tx
        if cfg.scheme == "egt-qam16":
            d0 = target  # linear precoding reaches R*s exactly
        else:
            theta = phases_for_targets(h, 1.0, target)
            d0 = reconstruct(h, 1.0, theta)
            if cfg.debug_checks:
                mods = np.abs(d0)
                assert np.all(mods <= big_r0 * (1 + 1e-9))
                assert np.all(mods >= r0 * (1 - 1e-9) - 1e-12 * big_r0)
        errors = np.zeros(powers.size, dtype=np.int64)
        bound = np.zeros(powers.size)
        for k, p in enumerate(powers):
            sp = math.sqrt(p)
            y = sp * d0 + sigma * z
            errors[k] = _detect_errors(y, sp * big_r0[:, None], pts, u)
            if dmin_trial is not None:
                raw = (cfg.n - 1) * qfunc(sp * big_r0 * dmin_trial
                                          / (sigma * np.sqrt(2.0)))
                bound[k] = np.minimum(raw, 1.0).sum()
        return errors, bound

    errors, bound = _reduce_chunks(cfg, one_chunk, powers.size)
    has_bound = cfg.scheme in ("proposed-optimal", "proposed-suboptimal")
    return SerCurve(snr_db=np.asarray(cfg.snr_db, dtype=float),
                    errors=errors,
                    trials=np.full(powers.size, cfg.trials, dtype=np.int64),
                    union_bound=bound / cfg.trials if has_bound else None)


def _reduce_chunks(cfg: SimConfig, one_chunk, width: int):
    bounds = _chunk_bounds(cfg.trials, cfg.chunk_size)
    errors = np.zeros(width, dtype=np.int64)
    extra = np.zeros(width)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(lambda ct: one_chunk(*ct), bounds))
    else:
        results = [one_chunk(*ct) for ct in bounds]
    for e, b in results:
        errors += e
        extra += b
    return errors, extra


# ---------------------------------------------------------------------------
# Imperfect-CSIT sweep


def run_csit_sweep(cfg: SimConfig, table: RegionTable | None,
                   training_snr_db: tuple[float, ...],
                   include_perfect: bool = True) -> SerCurve:
    """Average SER versus training SNR at a fixed data SNR (cfg.snr_db[0]).

    The transmitter designs everything (annulus, constellation choice,
    phases, scale) from its channel estimate; the true channel produces the
    received sample; the receiver detects against the transmitter-intended
    scaled constellation.  A shared unit estimation-error draw couples the
    sweep points, so the SER trend in training SNR is monotone up to
    binomial noise.
    """
    if len(cfg.snr_db) != 1:
        raise ValueError("csit sweep uses a single data SNR")
    if cfg.scheme not in ("proposed-optimal", "proposed-suboptimal", "egt-qam16"):
        raise ValueError(f"csit sweep not defined for scheme {cfg.scheme!r}")
    if cfg.scheme.startswith("proposed") and table is None:
        raise ValueError("proposed schemes require a region table")
    p = float(cfg.powers()[0])
    sigma = math.sqrt(cfg.noise_power)
    sp = math.sqrt(p)
    sid = 3  # shared across csit-swept schemes (common random numbers)
    tr_lin = [10.0 ** (s / 10.0) for s in training_snr_db]
    err_vars = [cfg.path_loss / (1.0 + s) for s in tr_lin]
    if include_perfect:
        err_vars = err_vars + [0.0]
    qam16 = qam_family(16)

    def one_chunk(chunk: int, t: int):
        rng = stream(cfg.seed, sid, chunk)
        h = _draw_channel(rng, cfg.m, t, cfg.path_loss)
        u = rng.integers(0, cfg.n, size=t)
        z = (rng.standard_normal(t) + 1j * rng.standard_normal(t)) / np.sqrt(2.0)
        dh_unit = (rng.standard_normal((t, cfg.m))
                   + 1j * rng.standard_normal((t, cfg.m))) / np.sqrt(2.0)
        errors = np.zeros(len(err_vars), dtype=np.int64)
        for k, var in enumerate(err_vars):
            h_hat = h - math.sqrt(var) * dh_unit
            r0, big_r0 = annulus_arrays(h_hat, 1.0)
            ratio = np.where(big_r0 > 0, r0 / np.where(big_r0 > 0, big_r0, 1.0), 0.0)
            if cfg.scheme == "egt-qam16":
                pts = np.broadcast_to(qam16, (t, 16)).copy()
                s = pts[np.arange(t), u]
                scale = np.sqrt(p / cfg.m)
                d0 = scale * np.sum(h * np.exp(-1j * np.angle(h_hat)), axis=1) * s
                y = d0 + sigma * z
            else:
                idx, n2, om, rho2 = table.params_at(ratio)
                pts = _apsk_point_matrix(cfg.n, n2, om, rho2, idx)
                s = pts[np.arange(t), u]
                theta = phases_for_targets(h_hat, 1.0, big_r0 * s)
                d0 = reconstruct(h, 1.0, theta)
                y = sp * d0 + sigma * z
            errors[k] = _detect_errors(y, sp * big_r0[:, None], pts, u)
        return errors, np.zeros(len(err_vars))

    errors, _ = _reduce_chunks(cfg, one_chunk, len(err_vars))
    axis = list(training_snr_db) + ([math.inf] if include_perfect else [])
    return SerCurve(snr_db=np.asarray(axis, dtype=float), errors=errors,
                    trials=np.full(len(err_vars), cfg.trials, dtype=np.int64))


# ---------------------------------------------------------------------------
# Variable rate


def _rate_thresholds(sizes, target_ser, noise_power) -> np.ndarray:
    """Required R * d_min per size from the union-bound constraint."""
    out = []
    for n in sizes:
        tail = target_ser / (n - 1)
        if tail >= 0.5:
            out.append(0.0)
        else:
            out.append(math.sqrt(2.0 * noise_power) * math.sqrt(2.0)
                       * erfcinv(2.0 * tail))
    return np.asarray(out)


def select_rate(inner: float, outer: float, noise_power: float,
                target_ser: float, sizes, dmin_lookup):
    """Largest size meeting the union-bound target; 1 means no transmission.

    dmin_lookup(n, ratio) returns the constellation MED for size n at the
    given annulus ratio, or 0 when the size is infeasible.
    """
    ratio = inner / outer if outer > 0 else 1.0
    for n in sorted(sizes, reverse=True):
        d = dmin_lookup(n, ratio)
        if d <= 0:
            continue
        bound = (n - 1) * qfunc(outer * d / math.sqrt(2.0 * noise_power))
        if bound <= target_ser:
            return n
    return 1


def apsk_dmin_lookup(tables: dict[int, RegionTable]):
    def lookup(n, ratio):
        return float(tables[n].d_min_at(np.array([ratio]))[0])
    return lookup


def qam_dmin_lookup():
    cache = {}
    def lookup(n, ratio):
        if n not in cache:
            pts = qam_family(n)
            diff = np.abs(pts[:, None] - pts[None, :])
            diff[np.diag_indices(n)] = np.inf
            cache[n] = (modulus_ratio(pts), float(diff.min()))
        feas_ratio, dmin = cache[n]
        return dmin if ratio <= feas_ratio else 0.0
    return lookup


def run_variable_rate(cfg: SimConfig,
                      tables: dict[int, RegionTable] | None) -> RateCurve:
    """Average spectral efficiency of the variable-rate scheme."""
    if cfg.scheme == "variable-apsk":
        if tables is None or any(n not in tables for n in cfg.sizes):
            raise ValueError("variable-apsk needs a region table per size")
    elif cfg.scheme != "variable-qam":
        raise ValueError(f"not a variable-rate scheme: {cfg.scheme!r}")
    powers = cfg.powers()
    sizes = np.asarray(sorted(cfg.sizes))
    bits = np.log2(sizes)
    thresholds = _rate_thresholds(sizes, cfg.target_ser, cfg.noise_power)
    sid = 2  # shared between variable-rate schemes (common random numbers)
    if cfg.scheme == "variable-qam":
        feas_ratio = np.empty(sizes.size)
        qam_dmin = np.empty(sizes.size)
        for j, n in enumerate(sizes):
            pts = qam_family(int(n))
            diff = np.abs(pts[:, None] - pts[None, :])
            diff[np.diag_indices(int(n))] = np.inf
            feas_ratio[j] = modulus_ratio(pts)
            qam_dmin[j] = float(diff.min())

    def one_chunk(chunk: int, t: int):
        rng = stream(cfg.seed, sid, chunk)
        h = _draw_channel(rng, cfg.m, t, cfg.path_loss)
        r0, big_r0 = annulus_arrays(h, 1.0)
        ratio = r0 / big_r0
        # per-trial R*d_min for every candidate size (0 = infeasible)
        x = np.empty((t, sizes.size))
        for j, n in enumerate(sizes):
            if cfg.scheme == "variable-apsk":
                x[:, j] = big_r0 * tables[int(n)].d_min_at(ratio)
            else:
                x[:, j] = np.where(ratio <= feas_ratio[j],
                                   big_r0 * qam_dmin[j], 0.0)
        bit_sum = np.zeros(powers.size)
        no_tx = np.zeros(powers.size, dtype=np.int64)
        for k, p in enumerate(powers):
            ok = math.sqrt(p) * x >= thresholds[None, :]
            best_bits = np.where(ok.any(axis=1),
                                 bits[np.where(ok, np.arange(sizes.size),
                                               -1).max(axis=1)], 0.0)
            bit_sum[k] = best_bits.sum()
            no_tx[k] = np.count_nonzero(~ok.any(axis=1))
        return no_tx, bit_sum

    no_tx, bit_sum = _reduce_chunks(cfg, one_chunk, powers.size)
    return RateCurve(snr_db=np.asarray(cfg.snr_db, dtype=float),
                     avg_bits=bit_sum / cfg.trials,
                     no_tx_fraction=no_tx / cfg.trials,
                     trials=cfg.trials)


# ---------------------------------------------------------------------------
# Curve post-processing


def snr_at_ser(curve: SerCurve, target: float) -> float:
    """SNR (dB) where the curve crosses the target SER, by log-linear
    interpolation between grid points."""
    ser = np.maximum(curve.ser, 1e-300)
    logs = np.log10(ser)
    lt = math.log10(target)
    for i in range(len(logs) - 1):
        a, b = logs[i], logs[i + 1]
        if (a - lt) * (b - lt) <= 0 and a != b:
            frac = (a - lt) / (a - b)
            return float(curve.snr_db[i]
                         + frac * (curve.snr_db[i + 1] - curve.snr_db[i]))
    raise ValueError(f"curve never crosses SER {target:g}")


def snr_at_bits(curve: RateCurve, target: float) -> float:
    """SNR (dB) where average spectral efficiency reaches the target."""
    b = curve.avg_bits
    for i in range(len(b) - 1):
        if (b[i] - target) * (b[i + 1] - target) <= 0 and b[i] != b[i + 1]:
            frac = (target - b[i]) / (b[i + 1] - b[i])
            return float(curve.snr_db[i]
                         + frac * (curve.snr_db[i + 1] - curve.snr_db[i]))
    raise ValueError(f"curve never reaches {target:g} bits")
