"""Exception hierarchy shared by the algebra modules and the harness."""


class SforgeError(Exception):
    """Base class for every error raised by sforge"""


class ConfigError(SforgeError, ValueError):
    """Instance configuration could not be parsed or validated"""


class IndexOutOfRange(SforgeError, IndexError):
    """Idempotent index outside 1..n"""


class FamilyViolation(SforgeError, ValueError):
    """Idempotent family fails orthogonality, completeness or witness checks"""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v["check"] for v in self.violations) or "family violation")


class IdentityViolated(SforgeError, ValueError):
    """A bilinear map fails one of the identities needed to factor through the product"""

    def __init__(self, identity, witness):
        self.identity = identity
        self.witness = witness
        super().__init__(f"identity '{identity}' violated")


class NotQuasiInvertible(SforgeError, ArithmeticError):
    pass


class NotInvertible(SforgeError, ArithmeticError):
    pass


class NonInvertibleComponent(SforgeError, ArithmeticError):
    pass


class PayloadNotInComponent(SforgeError, ValueError):
    pass


class BetaParallelAlpha(SforgeError, ValueError):
    pass


class SideConditionViolated(SforgeError, ValueError):
    pass


class NotUnipotentSupport(SforgeError, ValueError):
    pass


class UnsupportedContext(SforgeError, ValueError):
    """Operation is not defined for the word's relation system"""


class RankTooSmall(SforgeError, ValueError):
    pass


class NoArrow(SforgeError, ValueError):
    """No structure map between the requested levels"""


class LevelMismatch(SforgeError, ValueError):
    pass


class BudgetExhausted(SforgeError, RuntimeError):
    """Level budget ran out before an equivalence was found"""


class LevelBudgetExceeded(SforgeError, RuntimeError):
    pass


class PivotSearchFailed(SforgeError, RuntimeError):
    pass
