"""
Domain errors raised by the forcing laboratory
"""


class ForcingLabError(Exception):
    """Base class for every error the laboratory raises on purpose"""

    @property
    def name(self) -> str:
        return type(self).__name__


class InvalidOrder(ForcingLabError, ValueError):
    """Order table is empty, decreasing or has an entry below 2"""


class BoundViolation(ForcingLabError, ValueError):
    """A string entry is not below the order bound at its position"""


class InvalidTree(ForcingLabError, ValueError):
    """Node set is not prefix-closed or not comparable with its stem"""


class DepthExceeded(ForcingLabError):
    """An operation needed h(n) beyond the declared working depth"""


class OrderMismatch(ForcingLabError):
    """Two operands were built over different orders"""


class NotANode(ForcingLabError):
    """The requested string is not a node of the tree"""


class InvalidK(ForcingLabError, ValueError):
    """Bushiness parameter must be a positive integer"""


class AdditivityViolation(ForcingLabError):
    """A union of small sets tested big for the summed parameter"""


class ConsistencyViolation(ForcingLabError):
    """A functional table disagrees with itself along a prefix chain"""


class RelationRejected(ForcingLabError):
    """A user relation failed its monotonicity probes"""


class BudgetExhausted(ForcingLabError):
    """The ground construction ran out of fresh vertices"""


class FrozenViolation(ForcingLabError):
    """An edge was decided after the stage that froze it"""


class EngineBug(ForcingLabError):
    """A certificate produced by the engine failed its own re-check"""


class InvalidCondition(ForcingLabError, ValueError):
    """A forcing condition failed its closure or smallness check"""


class SearchRefused(ForcingLabError, ValueError):
    """An exhaustive search was asked for beyond its supported size"""


class FormatError(ForcingLabError, ValueError):
    """A text record could not be parsed"""


class PreconditionFailed(ForcingLabError, ValueError):
    """A caller-asserted precondition did not hold when checked"""


class InvalidGraph(ForcingLabError, ValueError):
    """An edge is a self-loop or references an undeclared vertex"""
