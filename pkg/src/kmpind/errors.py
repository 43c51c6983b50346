"""Exception types shared across the engine."""


class NotGCM(ValueError):
    """Input matrix is not a generalized Cartan matrix."""


class NotSymmetrizable(ValueError):
    """No positive integral symmetrizer exists."""


class BaseMismatch(ValueError):
    """Operation mixed weights that do not share a base."""


class TruncationOverflow(RuntimeError):
    """A computation needs data beyond the height cutoff or window."""


class BudgetExceeded(RuntimeError):
    """Construction would exceed the configured dimension budget."""


class NotActionClosed(RuntimeError):
    """A claimed submodule is not closed under the generator actions."""


class NegativeMultiplicity(RuntimeError):
    """Character bookkeeping produced a negative factor multiplicity."""


class CharacterMismatch(RuntimeError):
    """A certified character identity failed; retry with a deeper window."""


class HypothesisFailed(ValueError):
    """A checker's stated hypothesis does not hold for the given input."""
