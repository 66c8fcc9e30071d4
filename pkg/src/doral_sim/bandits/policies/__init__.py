"""
Policies for budgeted contextual bandits with delayed feedback.

Available policies:
- DoralPolicy: Responsive-arm identification, then LP allocation
- DLinUCBPolicy: Greedy delayed LinUCB
- RandomLinUCBPolicy: Delayed LinUCB pulling with probability b_t / B
- DALPPolicy: LP allocation over every arm with tau fixed to one
"""

from .base import PolicyBase
from .config import POLICY_KINDS, PolicyConfig
from .dalp import DALPPolicy
from .dlinucb import DLinUCBPolicy
from .doral import DoralPolicy
from .random_linucb import RandomLinUCBPolicy
from .utils import (
    dalp_run,
    dlinucb_run,
    doral_run,
    make_policy,
    oracle_and_regret,
    random_run,
)

__all__ = [
    "PolicyBase",
    "PolicyConfig",
    "POLICY_KINDS",
    "DoralPolicy",
    "DLinUCBPolicy",
    "RandomLinUCBPolicy",
    "DALPPolicy",
    "make_policy",
    "doral_run",
    "dlinucb_run",
    "random_run",
    "dalp_run",
    "oracle_and_regret",
]
