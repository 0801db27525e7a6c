from typing import List, Sequence

from app.core.config import settings
from app.core.constants import GAMMA_BAND, GAP_OVER_S_BAND, GAP_R2_BAND
from app.framework.checks import Check, CheckResult, register_check
from app.services.spectral.variational import (
    ScalingBand,
    band_ratio,
    diagonal_scaling_band,
    gamma_band,
    gamma_tilde,
    k_decay_trend,
    k_w,
    xxz_scaling_band,
)

TREND_Q = 0.5
GAMMA_L = (2, 3, 4)
GAMMA_H = (2, 3)
K_DECAY_L = tuple(range(3, 11))
K_DECAY_H = 2
ITERATION_L = (4, 5)
ITERATION_H = 2

# near the isotropic point; at Delta = 1 every sector gap is a single random-walk gap
SCALING_DELTA = 1.01
SCALING_SPINS = (1, 2, 3)
SCALING_H = (2, 3)
SCALING_R = (1, 2, 3)
SCALING_R_H = 2


class TrendCheck(Check):
    """ Size trends over a small grid; `corrupt` inflates the first value by ten."""

    def values(self, band: ScalingBand) -> List[float]:
        values = [row[band.key] for row in band.rows]
        if self.corrupt and values:
            values[0] *= 10.0
        return values

    def band_result(self, band: ScalingBand) -> CheckResult:
        detail = f"growing along {band.growing}" if band.growing else None
        return self.result(band.name, band_ratio(self.values(band)), band.factor, detail)


def _largest_increase(values: Sequence[float]) -> float:
    return max([b - a for a, b in zip(values, values[1:])], default=0.0)



# --------------------------------------------------------------------------------
#       Gamma Start
# --------------------------------------------------------------------------------


@register_check
class GammaBandCheck(TrendCheck):
    name: str = "gamma-band"
    description: str = f"sup_N gamma(L, H) at q={TREND_Q} stays within a factor {GAMMA_BAND:g} over the grid."
    tags: list[str] = ["trend"]

    def run(self) -> List[CheckResult]:
        return [self.band_result(gamma_band(TREND_Q, GAMMA_L, GAMMA_H))]


@register_check
class GammaTildeIterationCheck(TrendCheck):
    name: str = "gamma-tilde-iteration"
    description: str = "gamma-tilde(L, H) <= max(1, w(L, H)) gamma-tilde(L-1, H)."
    tags: list[str] = ["trend", "recursion"]

    def run(self) -> List[CheckResult]:
        results = []
        for L in ITERATION_L:
            previous = gamma_tilde(TREND_Q, L - 1, ITERATION_H)
            if self.corrupt:
                previous *= 0.1
            current = gamma_tilde(TREND_Q, L, ITERATION_H)
            w = k_w(TREND_Q, L, ITERATION_H)
            deviation = current - max(1.0, w) * previous
            results.append(self.result(f"q={TREND_Q},L={L},H={ITERATION_H}", deviation, 1e-9))
        return results


# --------------------------------------------------------------------------------
#       Gamma End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Operator K Start
# --------------------------------------------------------------------------------


@register_check
class KDecayCheck(TrendCheck):
    name: str = "k-decay"
    description: str = "The third K eigenvalue decreases in L and L times it stays below its value at L = 3."
    tags: list[str] = ["trend", "k-spectrum"]

    def run(self) -> List[CheckResult]:
        trend = k_decay_trend(TREND_Q, K_DECAY_H, K_DECAY_L)
        thirds = [row["third_modulus"] for row in trend.rows]
        scaled = [row["scaled"] for row in trend.rows]
        if self.corrupt:
            thirds, scaled = thirds[::-1], scaled[::-1]
        instance = f"q={TREND_Q},H={K_DECAY_H},L={K_DECAY_L[0]}..{K_DECAY_L[-1]}"
        return [
            self.result(f"{instance} monotone", _largest_increase(thirds), settings.EIGEN_TOL),
            self.result(f"{instance} scaled", max(scaled) - scaled[0], settings.EIGEN_TOL),
        ]


# --------------------------------------------------------------------------------
#       Operator K End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Quantum Start
# --------------------------------------------------------------------------------


@register_check
class GapScalingCheck(TrendCheck):
    name: str = "gap-scaling"
    description: str = (
        f"gap/S of the kink chain within a factor {GAP_OVER_S_BAND:g} over S, "
        f"gap R^2/S of the diagonal interface within a factor {GAP_R2_BAND:g} over R."
    )
    tags: list[str] = ["trend", "xxz-equivalence"]

    def run(self) -> List[CheckResult]:
        results = [self.band_result(xxz_scaling_band(SCALING_DELTA, SCALING_SPINS, H)) for H in SCALING_H]
        results.append(self.band_result(diagonal_scaling_band(SCALING_DELTA, SCALING_R, SCALING_R_H)))
        return results


# --------------------------------------------------------------------------------
#       Quantum End
# --------------------------------------------------------------------------------
