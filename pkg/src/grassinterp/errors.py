"""Exception and warning types raised across the package.

Every numerical failure derives from :class:`NumericalError` so callers (and the
CLI, which maps it to exit code 3) can catch them in one place.
"""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class RankDeficient(NumericalError):
    pass


class NotSPD(NumericalError):
    pass


class SingularTriangular(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class ChartSingular(NumericalError):
    """The upper block of a transformed sample is (numerically) singular."""


class NotOrthonormal(NumericalError):
    pass


class NotHorizontal(NumericalError):
    pass


class DegreeTooHigh(NumericalError, ValueError):
    pass


class NodeCollision(NumericalError, ValueError):
    pass


class Breakdown(NumericalError):
    """Arnoldi produced a (numerically) vanishing subdiagonal entry."""


class DegenerateRange(NumericalError, ValueError):
    pass


class OutOfChart(NumericalError):
    """A sample lies outside the injectivity region of the normal-coordinate base."""


class NearResonance(NumericalError):
    pass


class StackedSystemIllConditioned(RuntimeWarning):
    """Issued (not raised) when the surrogate stacked system is poorly conditioned."""


class ExtrapolationWarning(UserWarning):
    pass
