"""
Scenarios with a heavier error tail in one kind of comparisons.

The biased group's law is a mixture of the reference law and a broad component placed
between the genuine and the impostor region. The mixture adds mass to the error tail
of one kind only, the other kind keeps its reference law.
"""
from typing import Tuple

from ..errors import InvalidSpecError
from . import Scenario
from .laws import ScoreLaw, TruncatedNormal, mix

TAIL_WEIGHT: float = 0.05
"""Weight of the tail component per unit strength"""


def _tail_weight(strength: float) -> float:
    weight = TAIL_WEIGHT * strength
    if weight > 1:
        raise InvalidSpecError(
            "strength {} puts a weight above 1 on the tail component".format(strength)
        )
    return weight


class BiasedGenuineTail(Scenario):
    """
    Genuine scores of the biased group reach further into the impostor region.

    This raises the false non-match rate of the biased group at low false match rate
    operating points while its impostor scores stay fair.
    """

    tail: ScoreLaw = TruncatedNormal(0.4, 0.1)
    """Component mixed into the genuine law"""

    def _biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        return mix(self.genuine, self.tail, _tail_weight(strength)), self.impostor


class BiasedImpostorTail(Scenario):
    """
    Impostor scores of the biased group reach further into the genuine region.

    This raises the false match rate of the biased group while its genuine scores stay
    fair.
    """

    tail: ScoreLaw = TruncatedNormal(0.5, 0.1)
    """Component mixed into the impostor law"""

    def _biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        return self.genuine, mix(self.impostor, self.tail, _tail_weight(strength))
