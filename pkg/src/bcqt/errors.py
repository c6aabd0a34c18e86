"""Exception types raised by the simulator."""


class InvalidArgumentError(ValueError):
    """An argument is malformed: unknown qubit, bad length, register mismatch."""


class DisentanglementError(ValueError):
    """A qubit asked to be discarded is not in the asserted product state."""


class ZeroProbabilityBranchError(ValueError):
    """A forced measurement outcome has zero probability."""


class UnsupportedInputsError(ValueError):
    """The closed-form evaluators only accept real amplitudes."""


class NoCrossingError(ValueError):
    """The difference of two fidelity curves does not change sign on the bracket."""
