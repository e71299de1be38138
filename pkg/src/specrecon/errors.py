"""Exception hierarchy shared by all modules."""


class SpecreconError(Exception):
    """Base class for all package errors."""


class InvalidGrid(SpecreconError):
    """Grid is malformed (bad endpoint, node count or sample spacing)."""


class OverflowGuard(SpecreconError):
    """Intermediate solution magnitudes exceeded the overflow threshold."""


class QuadratureDivergence(SpecreconError):
    """Contour-derivative quadrature failed its self-consistency check."""


class RootCountMismatch(SpecreconError):
    """Argument-principle count disagrees with the refined roots."""


class NewtonStall(SpecreconError):
    """Newton refinement did not converge within the iteration budget."""


class AliasGuard(SpecreconError):
    """Requested mode count is too large for the sampling grid."""


class NearPole(SpecreconError):
    """Weyl function requested too close to a pole."""


class SeparationViolation(SpecreconError):
    """Both boundary functions vanish at an eigenvalue; it carries no data."""


class SingularNystrom(SpecreconError):
    """Discretized integral operator is numerically singular."""


class PoleClusterError(SpecreconError):
    """Two simple poles are closer than the residue contour radius."""


class FitUnstable(SpecreconError):
    """Asymptotic fit residual is too large to trust the fitted constant."""


class PairingAmbiguous(SpecreconError):
    """Nearest-pole pairing between two spectra is not one-to-one."""


class NotSupported(SpecreconError):
    """Requested a documented out-of-scope configuration."""


class ConditionCheckError(SpecreconError):
    """A reconstruction prerequisite (separation/asymptotics/...) failed.

    Carries the diagnostic record that triggered the abort.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(SpecreconError):
    """CLI configuration file is invalid."""


class IllConditionedWarning(UserWarning):
    """Gram system condition estimate exceeded the trust threshold."""
