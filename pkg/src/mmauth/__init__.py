"""Desk-scale lab for SIM-bound mobile-money authentication.

A deterministic simulation of the full approval flow (USSD push, PIN entry,
SIM-bound token issuance) next to a password/OTP single sign-on baseline, an
impaired-network model, an attack suite, and a statistics harness, plus an
HTTP facade for live demos.
"""

__version__ = "0.1.0"

from .domain import (AuthSession, FailureReason, OutcomeRecord, SessionEvent,
                     SessionState, SimCard, advance_session)
from .harness import (LoadSpec, ScenarioSpec, build_world, compare_methods,
                      mma_journey, run_load, run_scenario,
                      run_session_integrity, sso_journey)
from .netsim import (GSM_PROFILES, PROFILES, GsmProfile, NetworkProfile,
                     Simulator)

__all__ = [
    "AuthSession", "FailureReason", "OutcomeRecord", "SessionEvent",
    "SessionState", "SimCard", "advance_session",
    "LoadSpec", "ScenarioSpec", "build_world", "compare_methods",
    "mma_journey", "run_load", "run_scenario", "run_session_integrity",
    "sso_journey",
    "GSM_PROFILES", "PROFILES", "GsmProfile", "NetworkProfile", "Simulator",
    "__version__",
]
