"""
Exception hierarchy for the eigenstate services.

Everything derives from ValueError so routers can keep mapping
ValueError to a 400 response and the CLI to exit code 2.
"""


class EigenstateError(ValueError):
    """Base class for invalid requests against the eigenstate services"""


class TruncationError(EigenstateError):
    """Truncation too small, mismatched, or leaving no interior to check"""


class SingularOperatorError(EigenstateError):
    """A diagonal map is non-finite or FF† has a zero entry"""


class PoleError(EigenstateError):
    """Gamma, Pochhammer or arctan argument sits on a pole"""


class ClosedFormDomainError(EigenstateError):
    """Closed form requested where it is undefined (beta = 0 or beta = -1)"""


class DecayError(EigenstateError):
    """Coefficients have not decayed before the truncation edge"""


class RankDeficiencyError(EigenstateError):
    """Pinned least-squares system does not determine the state"""

    def __init__(self, message: str, rank: int, unknowns: int):
        super().__init__(message)
        self.rank = rank
        self.unknowns = unknowns
