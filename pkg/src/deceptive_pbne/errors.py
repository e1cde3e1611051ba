"""Exception hierarchy shared across the package."""


class DPPError(Exception):
    """Base class for all package errors."""


class InputError(DPPError, ValueError):
    """Malformed or out-of-range input."""


class ScenarioError(DPPError):
    """A scenario failed validation.

    ``diagnostics`` holds one human-readable string per violated invariant.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics) or "invalid scenario")


class GenerationError(DPPError):
    """Grid generation gave up after exhausting its attempt cap."""


class InfeasibleQueryError(DPPError):
    """No walk satisfies the requested horizon."""


class EnumerationOverflow(DPPError):
    """Brute-force enumeration exceeded its budget."""


class ContractError(DPPError):
    """A caller violated a documented precondition."""
