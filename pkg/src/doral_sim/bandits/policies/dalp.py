"""
DALPPolicy - Allocation LP over every arm with every tau fixed to one
"""

from dataclasses import replace
from typing import Optional

from .config import PolicyConfig
from .doral import DoralPolicy


class DALPPolicy(DoralPolicy):
    """
    DORAL's allocation stage without identification: all arms compete, the
    cut-off is the configured one and responsiveness is ignored.
    """

    name = "D-ALP"

    def __init__(self, config: Optional[PolicyConfig] = None):
        config = config or PolicyConfig(kind="DALP")
        fixed = config.fixed_cutoff if config.fixed_cutoff is not None else config.cutoff
        super().__init__(replace(config, tau_mode="ones", fixed_cutoff=fixed))
