"""MED-maximal two-ring APSK design under an annulus constraint.

For a given constellation size N and annulus radius ratio q = r/R, the
design problem splits per inner-ring count N2 into a phase-offset
subproblem (solved exactly by a gap search over the distinct inter-ring
angle differences) and an inner-radius subproblem (piecewise analysis of
the three distance terms).  The solution depends on the channel only
through q, so the whole design collapses to a small table of regions over
q in [0, 1] that can be built offline.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import ratio_cdf_m2, sample_rayleigh, annulus_arrays
from .constellation import ApskConstellation, Ring

TABLE_ALGO_VERSION = 1


# ---------------------------------------------------------------------------
# Phase offset subproblem


@dataclass(frozen=True)
class PhaseOffsetSolution:
    omega2_star: float
    c12_star: float
    breakpoints: tuple[float, ...]
    k_star: int


def solve_p21(n: int, n2: int) -> PhaseOffsetSolution:
    """Minimize the worst inter-ring cosine over the inner-ring offset.

    Candidate angles are the distinct values of 2 pi (n/N2 - m/N1) falling
    in (-2 pi/N1, 0], plus -2 pi/N1 itself; the optimum offset is the
    midpoint of the widest gap between consecutive candidates.  Ties are
    broken toward the first (widest-equal) gap, i.e. the smallest offset.
    """
    if not (1 <= n2 <= n - 1):
        raise ValueError(f"n2 must be in [1, {n - 1}]")
    n1 = n - n2
    # integer grid: angle = 2 pi t / (n1 * n2), t = n*n1 - m*n2
    ts = {-n2}
    for m in range(n1):
        for k in range(n2):
            t = k * n1 - m * n2
            if -n2 < t <= 0:
                ts.add(t)
    xs = sorted(ts, reverse=True)
    x = [2.0 * np.pi * t / (n1 * n2) for t in xs]
    # gaps compared on the exact integer grid so equal gaps tie cleanly
    gaps = [xs[k + 1] - xs[k] for k in range(len(xs) - 1)]
    k_star = int(np.argmin(gaps))
    omega2 = -(x[k_star] + x[k_star + 1]) / 2.0
    c12 = math.cos((x[k_star] - x[k_star + 1]) / 2.0)
    return PhaseOffsetSolution(omega2_star=omega2, c12_star=c12,
                               breakpoints=tuple(x), k_star=k_star)


# ---------------------------------------------------------------------------
# Inner radius subproblem (region-I local optimum)


@dataclass(frozen=True)
class RadiusSolution:
    rho2_star: float
    d_min_star: float
    case_tag: str
    rho_bar: float | None = None


def _b_coeff(count: int):
    """1 - cos(2 pi / count); None marks the absent single-point constraint."""
    if count == 1:
        return None
    return 1.0 - math.cos(2.0 * np.pi / count)


def _rho_bar(b2: float, c12: float) -> float:
    """Left crossing of rho*sqrt(2 B2) with the inter-ring distance curve."""
    if abs(b2 - 0.5) < 1e-15:
        return 1.0 / (2.0 * c12)
    disc = c12 * c12 + 2.0 * b2 - 1.0
    return (c12 - math.sqrt(disc)) / (1.0 - 2.0 * b2)


def find_rho2_region1(b1: float, b2, c12: float, ratio: float) -> RadiusSolution:
    """Local optimum of the radius subproblem on rho2 in [ratio, C*].

    Requires C* > ratio (otherwise the whole range is the non-decreasing
    branch and the caller must use the rho2 = 1 solution).  b2 may be None
    for a single-point inner ring, which removes its intra-ring constraint.
    """
    if c12 <= ratio:
        raise ValueError("region-I analysis needs C* > r/R")
    f_at_ratio = math.sqrt(max(ratio * ratio + 1.0 - 2.0 * ratio * c12, 0.0))
    d1 = math.sqrt(2.0 * b1)
    rho_cross = c12 - math.sqrt(max(c12 * c12 - 1.0 + 2.0 * b1, 0.0))
    if b2 is not None:
        rho_bar = _rho_bar(b2, c12)
        if ratio <= rho_bar <= c12:
            if rho_bar <= math.sqrt(b1 / b2):
                return RadiusSolution(rho_bar, math.sqrt(2.0 * b2) * rho_bar,
                                      "I-i", rho_bar)
            return RadiusSolution(rho_cross, d1, "I-ii", rho_bar)
    else:
        rho_bar = None
    if d1 >= f_at_ratio:
        return RadiusSolution(ratio, f_at_ratio, "I-iii", rho_bar)
    return RadiusSolution(rho_cross, d1, "I-iv", rho_bar)


# ---------------------------------------------------------------------------
# Full design for one (N, ratio)


@dataclass(frozen=True)
class DesignResult:
    constellation: ApskConstellation
    d_min: float
    n2: int
    omega2: float
    rho2: float
    c12: float
    case_tag: str


def _min3(a, b, c) -> float:
    """min of up to three terms, where a/b may be None (absent)."""
    vals = [v for v in (a, b, c) if v is not None]
    return min(vals)


def _solve_fixed_n2(n: int, n2: int, ratio: float,
                    pos: PhaseOffsetSolution) -> tuple[float, float, str]:
    """Best (d_min, rho2, case tag) for a fixed inner-ring count."""
    n1 = n - n2
    b1 = _b_coeff(n1)
    b2 = _b_coeff(n2)
    c12 = pos.c12_star
    d1 = math.sqrt(2.0 * b1) if b1 is not None else None
    d2_at1 = math.sqrt(2.0 * b2) if b2 is not None else None
    d_at1 = _min3(d1, d2_at1, math.sqrt(max(2.0 - 2.0 * c12, 0.0)))
    if c12 <= ratio:
        return d_at1, 1.0, "Case1"
    # Case 2: compare the region-I local optimum against rho2 = 1.
    if b1 is None:
        # single-point outer ring only occurs for n = 2 via n2 = 1, where
        # c12 = -1 <= ratio; defensive fallback
        return d_at1, 1.0, "Case1"
    loc = find_rho2_region1(b1, b2, c12, ratio)
    if loc.d_min_star >= d_at1:
        return loc.d_min_star, loc.rho2_star, loc.case_tag
    return d_at1, 1.0, "II"


def _offset_cache(n: int) -> list[PhaseOffsetSolution]:
    """Phase-offset solutions for n2 = 1 .. n//2 (index n2 - 1)."""
    return [solve_p21(n, n2) for n2 in range(1, n // 2 + 1)]


def solve_p2(n: int, ratio: float) -> DesignResult:
    """Optimal feasible two-ring N-APSK for annulus ratio r/R.

    Searches inner-ring counts 1 .. N/2 (more inner than outer points is
    never better); ties in the final argmax prefer the smaller count.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    if not (0.0 <= ratio <= 1.0):
        raise ValueError("ratio must lie in [0, 1]")
    if n % 2 != 0:
        raise ValueError("N must be even")
    if n & (n - 1) != 0:
        warnings.warn(f"N={n} is not a power of two; design is best-effort",
                      stacklevel=2)
    offsets = _offset_cache(n)
    best = None
    for n2 in range(1, n // 2 + 1):
        pos = offsets[n2 - 1]
        d, rho2, tag = _solve_fixed_n2(n, n2, ratio, pos)
        if best is None or d > best[0]:
            best = (d, n2, rho2, tag, pos)
    d, n2, rho2, tag, pos = best
    rho2 = max(rho2, ratio)  # feasibility: inner ring never below r/R
    cons = ApskConstellation((Ring(n - n2, 1.0, 0.0),
                              Ring(n2, rho2, pos.omega2_star % (2.0 * np.pi))))
    return DesignResult(constellation=cons, d_min=d, n2=n2,
                        omega2=pos.omega2_star, rho2=rho2,
                        c12=pos.c12_star, case_tag=tag)


def _solve_grid(n: int, ratios: np.ndarray,
                offsets: list[PhaseOffsetSolution]):
    """Vectorized design over a ratio grid.

    Returns (d_min, n2, rho2, tracking) arrays; `tracking` flags grid
    points where the optimum pins the inner ring to the annulus boundary
    (rho2 = r/R), which is what distinguishes formula-type regions.
    """
    ratios = np.asarray(ratios, dtype=float)
    n2_max = n // 2
    d_all = np.empty((n2_max, ratios.size))
    rho_all = np.empty_like(d_all)
    track_all = np.zeros(d_all.shape, dtype=bool)
    for n2 in range(1, n2_max + 1):
        pos = offsets[n2 - 1]
        c12 = pos.c12_star
        n1 = n - n2
        b1 = _b_coeff(n1)
        b2 = _b_coeff(n2)
        d1 = math.sqrt(2.0 * b1) if b1 is not None else np.inf
        d2_at1 = math.sqrt(2.0 * b2) if b2 is not None else np.inf
        d_at1 = min(d1, d2_at1, math.sqrt(max(2.0 - 2.0 * c12, 0.0)))
        if b1 is None:
            d_all[n2 - 1] = d_at1
            rho_all[n2 - 1] = 1.0
            continue
        f_at_ratio = np.sqrt(np.maximum(ratios ** 2 + 1.0 - 2.0 * ratios * c12, 0.0))
        rho_cross = c12 - math.sqrt(max(c12 * c12 - 1.0 + 2.0 * b1, 0.0))
        if b2 is not None:
            rho_bar = _rho_bar(b2, c12)
            in_bar = (ratios <= rho_bar) & (rho_bar <= c12)
            case_i = in_bar & (rho_bar <= math.sqrt(b1 / b2))
            case_ii = in_bar & ~case_i
        else:
            case_i = np.zeros(ratios.shape, dtype=bool)
            case_ii = case_i
            rho_bar = 0.0
        case_iii = ~(case_i | case_ii) & (d1 >= f_at_ratio)
        case_iv = ~(case_i | case_ii | case_iii)
        d_loc = np.where(case_i, math.sqrt(2.0 * b2) * rho_bar if b2 is not None else 0.0,
                         np.where(case_iii, f_at_ratio, d1))
        rho_loc = np.where(case_i, rho_bar,
                           np.where(case_iii, ratios, rho_cross))
        use_loc = d_loc >= d_at1
        case2 = c12 > ratios
        d = np.where(case2 & use_loc, d_loc, d_at1)
        rho = np.where(case2 & use_loc, rho_loc, 1.0)
        d_all[n2 - 1] = d
        rho_all[n2 - 1] = rho
        track_all[n2 - 1] = case2 & use_loc & case_iii
    best = np.argmax(d_all, axis=0)  # first max -> smaller n2 on ties
    cols = np.arange(ratios.size)
    return (d_all[best, cols], best + 1, rho_all[best, cols],
            track_all[best, cols])


# ---------------------------------------------------------------------------
# Region tables


@dataclass(frozen=True)
class Region:
    lo: float
    hi: float
    n2: int
    omega2: float
    c12: float
    rho2_rule: str          # "constant" or "track_ratio"
    rho2: float | None      # constant value, None when tracking r/R
    d_min_rule: str         # "constant" or "formula"
    d_min: float | None     # constant value, None for the formula rule


@dataclass(frozen=True)
class RegionTable:
    size: int
    regions: tuple[Region, ...]
    grid_step: float

    def lookup(self, ratio: float) -> Region:
        for reg in self.regions:
            if reg.lo <= ratio < reg.hi:
                return reg
        return self.regions[-1]

    def d_min_at(self, ratios) -> np.ndarray:
        """Vectorized optimal MED as a function of r/R."""
        ratios = np.asarray(ratios, dtype=float)
        lows = np.array([reg.lo for reg in self.regions])
        idx = np.clip(np.searchsorted(lows, ratios, side="right") - 1,
                      0, len(self.regions) - 1)
        const = np.array([reg.d_min if reg.d_min is not None else np.nan
                          for reg in self.regions])[idx]
        c12 = np.array([reg.c12 for reg in self.regions])[idx]
        formula = np.sqrt(np.maximum(ratios ** 2 - 2.0 * ratios * c12 + 1.0, 0.0))
        is_const = np.array([reg.d_min_rule == "constant"
                             for reg in self.regions])[idx]
        return np.where(is_const, const, formula)

    def params_at(self, ratios):
        """Vectorized (region index, n2, omega2, rho2) per ratio."""
        ratios = np.asarray(ratios, dtype=float)
        lows = np.array([reg.lo for reg in self.regions])
        idx = np.clip(np.searchsorted(lows, ratios, side="right") - 1,
                      0, len(self.regions) - 1)
        n2 = np.array([reg.n2 for reg in self.regions])[idx]
        om = np.array([reg.omega2 for reg in self.regions])[idx]
        rho_c = np.array([reg.rho2 if reg.rho2 is not None else np.nan
                          for reg in self.regions])[idx]
        track = np.array([reg.rho2_rule == "track_ratio"
                          for reg in self.regions])[idx]
        rho2 = np.where(track, ratios, rho_c)
        return idx, n2, om, rho2

    def to_json(self) -> str:
        return json.dumps({
            "size": self.size,
            "grid_step": self.grid_step,
            "algorithm_version": TABLE_ALGO_VERSION,
            "regions": [{
                "lo": reg.lo, "hi": reg.hi, "n2": reg.n2,
                "omega2": reg.omega2, "c12": reg.c12,
                "rho2_rule": reg.rho2_rule, "rho2": reg.rho2,
                "d_min_rule": reg.d_min_rule, "d_min": reg.d_min,
            } for reg in self.regions],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RegionTable":
        data = json.loads(text)
        regs = tuple(Region(**{k: r[k] for k in (
            "lo", "hi", "n2", "omega2", "c12", "rho2_rule", "rho2",
            "d_min_rule", "d_min")}) for r in data["regions"])
        return cls(size=data["size"], regions=regs, grid_step=data["grid_step"])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["region", "ratio_lo", "ratio_hi", "rho2", "N2",
                        "omega2_over_pi", "dmin_rule", "dmin"])
            for i, reg in enumerate(self.regions, start=1):
                rho = "r/R" if reg.rho2_rule == "track_ratio" else f"{reg.rho2:.6f}"
                dmin = "" if reg.d_min is None else f"{reg.d_min:.6f}"
                w.writerow([i, f"{reg.lo:.6f}", f"{reg.hi:.6f}", rho, reg.n2,
                            f"{reg.omega2 / np.pi:.6f}", reg.d_min_rule, dmin])


def _structural_key(n, ratio, offsets):
    d, n2, rho, track = _solve_grid(n, np.array([ratio]), offsets)
    return (int(n2[0]), bool(track[0]))


def build_region_table(n: int, grid_step: float = 1e-4) -> RegionTable:
    """Partition r/R in [0, 1] into regions of constant design structure.

    Grid points sharing (N2*, rho2 rule) are merged; each boundary is then
    refined by bisection to 1e-6.  Regions where rho2 tracks r/R carry the
    formula d_min rule; all others carry a constant d_min.
    """
    if grid_step > 1e-4:
        raise ValueError("grid_step must be <= 1e-4")
    if n < 2 or n % 2 != 0:
        raise ValueError("N must be even and >= 2")
    if n & (n - 1) != 0:
        warnings.warn(f"N={n} is not a power of two; table is best-effort",
                      stacklevel=2)
    offsets = _offset_cache(n)
    ratios = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    ratios[-1] = 1.0
    d, n2, rho, track = _solve_grid(n, ratios, offsets)
    keys = list(zip(n2.tolist(), track.tolist()))
    # maximal runs of identical structure
    bounds = [0.0]
    run_keys = [keys[0]]
    for i in range(1, len(keys)):
        if keys[i] != keys[i - 1]:
            lo, hi = ratios[i - 1], ratios[i]
            ka = keys[i - 1]
            while hi - lo > 1e-6:
                mid = 0.5 * (lo + hi)
                if _structural_key(n, mid, offsets) == ka:
                    lo = mid
                else:
                    hi = mid
            bounds.append(0.5 * (lo + hi))
            run_keys.append(keys[i])
    bounds.append(1.0)
    regions = []
    for j, key in enumerate(run_keys):
        lo, hi = bounds[j], bounds[j + 1]
        n2_j, tracking = key
        pos = offsets[n2_j - 1]
        probe = min(lo + grid_step, 0.5 * (lo + hi))
        dj, _, rhoj, _ = _solve_grid(n, np.array([probe]), offsets)
        if tracking:
            regions.append(Region(lo, hi, n2_j, pos.omega2_star % (2 * np.pi),
                                  pos.c12_star, "track_ratio", None,
                                  "formula", None))
        else:
            regions.append(Region(lo, hi, n2_j, pos.omega2_star % (2 * np.pi),
                                  pos.c12_star, "constant", float(rhoj[0]),
                                  "constant", float(dj[0])))
    return RegionTable(size=n, regions=tuple(regions), grid_step=grid_step)


def build_suboptimal_table(optimal: RegionTable) -> RegionTable:
    """Two-region memory-saving variant: region 1 kept, rest uses the last
    region's constellation (always feasible over the remaining range)."""
    regs = optimal.regions
    if len(regs) <= 1:
        return optimal
    first = regs[0]
    last = regs[-1]
    if last.rho2_rule != "constant":
        raise ValueError("last region must carry a constant design")
    rest = Region(lo=first.hi, hi=1.0, n2=last.n2, omega2=last.omega2,
                  c12=last.c12, rho2_rule="constant", rho2=last.rho2,
                  d_min_rule="constant", d_min=last.d_min)
    return RegionTable(size=optimal.size,
                       regions=(first, rest), grid_step=optimal.grid_step)


def region_probabilities(table: RegionTable, num_antennas: int, trials: int,
                         rng_seed: int) -> np.ndarray:
    """Empirical probability of r/R landing in each region (i.i.d. Rayleigh)."""
    if trials < 10 ** 5:
        raise ValueError("need at least 1e5 trials")
    h = sample_rayleigh(num_antennas, 1.0, rng_seed, trials=trials)
    inner, outer = annulus_arrays(h, 1.0)
    ratio = inner / outer
    lows = np.array([reg.lo for reg in table.regions])
    idx = np.clip(np.searchsorted(lows, ratio, side="right") - 1,
                  0, len(table.regions) - 1)
    counts = np.bincount(idx, minlength=len(table.regions))
    return counts / trials
