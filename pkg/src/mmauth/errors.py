"""Exception types shared across the package.

Kept in one module so domain, operator, gateway and server code can raise the
same errors without importing each other.
"""


class MobileAuthError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MobileAuthError):
    """A run or scenario configuration is out of range or inconsistent."""


class MalformedMsisdn(MobileAuthError):
    """Phone number does not match the E.164-style +digits form."""


class MalformedPin(MobileAuthError):
    """PIN is not exactly four digits."""


class DuplicateMsisdn(MobileAuthError):
    """A SIM is already registered for this number."""


class UnknownMsisdn(MobileAuthError):
    """No SIM registered for this number."""


class UnknownUser(MobileAuthError):
    """No account enrolled for this number."""


class UnknownSession(MobileAuthError):
    """Session id does not match any known session."""


class StaleSession(MobileAuthError):
    """Session exists but is already in a terminal state."""


class AlreadyIssued(MobileAuthError):
    """A token was already issued for this session."""


class NotLocked(MobileAuthError):
    """Unlock requested for a SIM that is not locked."""


class RateLimited(MobileAuthError):
    """Too many authentication initiations inside the sliding window."""


class TransitionError(MobileAuthError):
    """Illegal session state transition."""


class ChannelLost(MobileAuthError):
    """A transmission dropped mid-leg; the caller decides whether to retry."""


class SealOpenError(MobileAuthError):
    """Sealed payload failed authentication or could not be parsed."""


class BadCredentials(MobileAuthError):
    """Password or OTP check failed."""


class OtpExpired(MobileAuthError):
    """One-time code exists but its validity window has passed."""
