"""Exception hierarchy shared by all modules."""


class LolabError(Exception):
    """Base class; ``stage`` names the pipeline step that raised, when known."""

    stage = None

    def __init__(self, message="", stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class BudgetExceeded(LolabError):
    """A table, scan or enumeration would exceed its configured size."""

    def __init__(self, message="", projected=None, stage=None):
        super().__init__(message, stage)
        self.projected = projected


class CapExceeded(BudgetExceeded):
    """GAP volume exceeds the enumeration cap."""


class RankTooLarge(LolabError):
    pass


class PreconditionFailed(LolabError):
    """A stated hypothesis of an operation does not hold for the input."""


class SearchBudgetExceeded(LolabError):
    pass


class NoHeavyLevel(LolabError):
    pass


class FitFailed(LolabError):
    pass


class GrowthHypothesisFailed(LolabError):
    pass


class NoWindow(LolabError):
    pass


class MCTooNoisy(LolabError):
    pass


class HypothesisViolated(LolabError):
    pass
