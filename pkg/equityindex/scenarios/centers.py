"""
Scenario with shifted score centers and unchanged error rates.
"""
from logging import getLogger
from typing import Tuple

import scipy.optimize

from ..errors import InvalidSpecError
from . import Scenario
from .laws import ScoreLaw, TruncatedNormal

_logger = getLogger(__name__)

GENUINE_SHIFT: float = -0.05
"""Shift of the genuine location per unit strength"""

IMPOSTOR_SHIFT: float = 0.18
"""Shift of the impostor location per unit strength"""

ANCHOR_FMR: float = 1e-3
"""False match rate of the reference impostor law at the anchor threshold"""

SCALE_BRACKET: Tuple[float, float] = (1e-4, 1.0)
"""Search interval of the scale of shifted laws"""


def _matched_law(
    reference: TruncatedNormal, shift: float, anchor: float
) -> TruncatedNormal:
    if shift == 0:
        return reference
    loc = reference.loc + shift
    target = float(reference.cdf(anchor))

    def residual(scale: float) -> float:
        law = TruncatedNormal(loc, scale, reference.lo, reference.hi)
        return float(law.cdf(anchor)) - target

    try:
        scale = scipy.optimize.brentq(residual, *SCALE_BRACKET, xtol=1e-12)
    except ValueError:
        raise InvalidSpecError(
            "no scale keeps the error rate at {:.4f} after shifting {!r} by {}".format(
                anchor, reference, shift
            )
        )

    return TruncatedNormal(loc, scale, reference.lo, reference.hi)


class BiasedCenters(Scenario):
    """
    Score centers of the biased group move towards each other.

    The genuine location moves down and the impostor location moves up. Both scales
    are then chosen such that the laws put the same mass below the anchor threshold
    as the reference laws, the anchor being the threshold at which the reference
    impostor law has a false match rate of :data:`ANCHOR_FMR`. The biased group hence
    keeps the reference error rates around the operating region while the overall
    shape of its score distributions differs.
    """

    def _biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        if not isinstance(self.genuine, TruncatedNormal) or not isinstance(
            self.impostor, TruncatedNormal
        ):
            raise InvalidSpecError("shifting centers requires truncated normal laws")

        anchor = float(self.impostor.ppf(1 - ANCHOR_FMR))
        genuine = _matched_law(self.genuine, GENUINE_SHIFT * strength, anchor)
        impostor = _matched_law(self.impostor, IMPOSTOR_SHIFT * strength, anchor)
        _logger.debug("anchor threshold %.6f: %r, %r", anchor, genuine, impostor)

        return genuine, impostor
