"""
Scenario without bias.
"""
from typing import Tuple

from . import Scenario
from .laws import ScoreLaw


class Clean(Scenario):
    """
    Every group, the biased one included, draws from the reference laws.
    """

    def _biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        return self.genuine, self.impostor
