class RendezvousError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(RendezvousError, ValueError):
    pass


class InvalidScore(InvalidInput):
    """A score function is not injective on the channels it was asked to rank."""


class InvalidScenario(InvalidInput):
    """The users share no common channel, so rendezvous is impossible."""


class ResourceLimit(RendezvousError):
    pass


class Unsupported(RendezvousError, NotImplementedError):
    pass


class DegenerateChain(RendezvousError, ArithmeticError):
    pass
