"""Phase synthesis: map a desired receive point to per-antenna phases.

Given channel gains h and equal per-antenna power P/M, any target d with
r <= |d| <= R is realized by a greedy phasor decomposition: antennas are
processed in descending gain magnitude, each step shrinking the residual
target as far as the annulus reachable by the remaining antennas allows.
The final two antennas close the residual exactly via the two-circle
intersection.  Everything is written on arrays so a million targets
vectorize cleanly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, compute_annulus

FEAS_SLACK = 1e-12  # absolute slack (times R) on annulus membership checks


@dataclass(frozen=True)
class PhaseSolution:
    phases: np.ndarray
    target: complex
    residual_error: float


class InfeasibleTargetError(ValueError):
    def __init__(self, target, annulus):
        super().__init__(
            f"target modulus {abs(target):.6g} outside annulus "
            f"[{annulus.inner:.6g}, {annulus.outer:.6g}]")
        self.annulus = annulus


def _angles_for_targets(amp: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Phasor angles psi with sum_i amp_i * exp(j psi_i) = d.

    amp: (T, M) nonnegative, d: (T,) complex.  Assumes each row's target is
    inside its annulus.  Angles for a row are assigned in descending-amp
    order; the returned array is in the original antenna order.
    """
    T, M = amp.shape
    order = np.argsort(-amp, axis=1, kind="stable")
    a = np.take_along_axis(amp, order, axis=1)
    psi_sorted = np.zeros((T, M))
    if M == 1:
        psi_sorted[:, 0] = np.angle(d)
    else:
        # suffix sums: outer radius reachable by antennas k..M-1
        suffix = np.cumsum(a[:, ::-1], axis=1)[:, ::-1]
        res = d.astype(complex).copy()
        for i in range(M - 2):
            big = suffix[:, i + 1]                 # sum of remaining amps
            r_rem = np.maximum(2.0 * a[:, i + 1] - big, 0.0)
            t = np.abs(res)
            lower = np.maximum(np.abs(t - a[:, i]), r_rem)
            upper = np.minimum(t + a[:, i], big)
            rho = np.minimum(lower, upper)         # greedy: shrink residual
            denom = 2.0 * t * a[:, i]
            cosd = np.where(denom > 0,
                            (t * t + a[:, i] ** 2 - rho * rho)
                            / np.where(denom > 0, denom, 1.0), -1.0)
            delta = np.arccos(np.clip(cosd, -1.0, 1.0))
            base = np.where(t > 0, np.angle(res), 0.0)
            psi_sorted[:, i] = base + delta
            res = res - a[:, i] * np.exp(1j * psi_sorted[:, i])
        # exact two-circle closure on the last pair
        t = np.abs(res)
        a1, a2 = a[:, M - 2], a[:, M - 1]
        denom = 2.0 * t * a1
        cosd = np.where(denom > 0,
                        (t * t + a1 * a1 - a2 * a2)
                        / np.where(denom > 0, denom, 1.0), 1.0)
        delta = np.arccos(np.clip(cosd, -1.0, 1.0))
        base = np.where(t > 0, np.angle(res), 0.0)
        psi_sorted[:, M - 2] = base + delta
        res = res - a1 * np.exp(1j * psi_sorted[:, M - 2])
        psi_sorted[:, M - 1] = np.where(np.abs(res) > 0, np.angle(res), 0.0)
    psi = np.empty_like(psi_sorted)
    np.put_along_axis(psi, order, psi_sorted, axis=1)
    return psi


def phases_for_targets(h: np.ndarray, total_power: float,
                       d: np.ndarray) -> np.ndarray:
    """Vectorized transmit phases theta, shape (T, M), for targets d (T,).

    The weighted phasor sum sqrt(P/M) sum_i h_i exp(j theta_i) reconstructs
    each row's target.  Targets are assumed feasible.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    d = np.atleast_1d(np.asarray(d, dtype=complex))
    amp = np.sqrt(total_power / h.shape[1]) * np.abs(h)
    psi = _angles_for_targets(amp, d)
    return np.mod(psi - np.angle(h), 2.0 * np.pi)


def reconstruct(h: np.ndarray, total_power: float,
                theta: np.ndarray) -> np.ndarray:
    """Noise-free receive points sqrt(P/M) sum_i h_i exp(j theta_i)."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    scale = np.sqrt(total_power / h.shape[1])
    return scale * np.sum(h * np.exp(1j * np.asarray(theta)), axis=1)


def map_point_to_phases(h: ChannelRealization, total_power: float,
                        d: complex) -> PhaseSolution:
    """Transmit phases realizing the noise-free receive point d."""
    ann = compute_annulus(h, total_power)
    slack = FEAS_SLACK * ann.outer
    if not (ann.inner - slack <= abs(d) <= ann.outer + slack):
        raise InfeasibleTargetError(d, ann)
    theta = phases_for_targets(h.gains[None, :], total_power,
                               np.array([d]))[0]
    got = reconstruct(h.gains[None, :], total_power, theta[None, :])[0]
    return PhaseSolution(phases=theta, target=complex(d),
                         residual_error=float(abs(got - d)))


def realize_symbol(h: ChannelRealization, total_power: float, s: complex,
                   alpha: float, clip: bool = False) -> PhaseSolution:
    """Phases for the scaled constellation point alpha*s.

    With clip enabled (fixed-constellation benchmark mode), an infeasible
    target is projected radially onto the nearest annulus boundary first.
    """
    target = alpha * s
    if clip:
        ann = compute_annulus(h, total_power)
        mod = abs(target)
        if mod > 0:
            target = target / mod * min(max(mod, ann.inner), ann.outer)
        elif ann.inner > 0:
            target = ann.inner + 0j
    return map_point_to_phases(h, total_power, target)


def egt_transmit(h: ChannelRealization, total_power: float, s: complex) -> complex:
    """Equal gain transmission (non-CE baseline): noise-free receive R*s."""
    g = h.gains
    scale = np.sqrt(total_power / h.num_antennas)
    x = scale * np.exp(-1j * np.angle(g)) * s
    return complex(np.sum(g * x))


def dump_phase_debug_csv(path, targets, phases, residuals) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        m = np.asarray(phases).shape[1]
        w.writerow(["target_re", "target_im", "residual"]
                   + [f"theta_{i}" for i in range(m)])
        for t, ph, r in zip(targets, phases, residuals):
            w.writerow([f"{t.real:.12g}", f"{t.imag:.12g}", f"{r:.3e}"]
                       + [f"{p:.12g}" for p in ph])
