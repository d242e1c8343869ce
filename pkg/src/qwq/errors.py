"""Exception types raised by :mod:`qwq`."""


class QWError(Exception):
    """Base class for all package errors."""


class ParameterOutOfRange(QWError, ValueError):
    pass


class NonUnitary(QWError, ValueError):
    pass


class InvalidDensity(QWError, ValueError):
    pass


class NonPureCoin(QWError, ValueError):
    pass


class IncompleteKraus(QWError, ValueError):
    pass


class DimensionMismatch(QWError, ValueError):
    pass


class UnsupportedTopology(QWError, ValueError):
    pass


class NonTerminating(QWError, ValueError):
    pass


class InvalidC(QWError, ValueError):
    pass


class SingularCoin(QWError, ArithmeticError):
    """The closed-form amplitude formula is ill-conditioned for this coin.

    Callers should fall back to :func:`qwq.engine.evolve_pure`.
    """


class MeanOutOfRange(QWError, ValueError):
    pass


class ConsistencyError(QWError, ArithmeticError):
    """Two independent computation paths disagreed beyond tolerance."""


class DivergentQWarning(UserWarning):
    """A relative entropy came out infinite because of a support mismatch."""
