"""Exception types shared by every module."""


class PtforceError(Exception):
    pass


class InputError(PtforceError):
    """Malformed or invalid input (CLI exit code 2)."""


class ResourceError(PtforceError):
    """A search or budget limit was hit (CLI exit code 3)."""


class StringNotInTree(InputError):
    pass


class EmptyInput(InputError):
    pass


class DepthExceeded(PtforceError):
    def __init__(self, needed, available):
        super().__init__(f"depth {needed} exceeds exactness {available}")
        self.needed = needed
        self.available = available


class ChainNotDecreasing(InputError):
    def __init__(self, index, reason=""):
        super().__init__(f"chain not decreasing at {index}: {reason}")
        self.index = index


class TaskUnmet(InputError):
    def __init__(self, task):
        super().__init__(f"task unmet: {task!r}")
        self.task = task


class PreconditionError(InputError):
    pass


class RegularityViolated(PtforceError):
    pass


class SearchBudgetExceeded(ResourceError):
    def __init__(self, what, budget):
        super().__init__(f"search budget {budget} exceeded in {what}")
        self.what = what
        self.budget = budget


class BudgetRejected(ResourceError):
    pass


class TaskStuck(ResourceError):
    def __init__(self, task_id):
        super().__init__(f"task stuck: {task_id}")
        self.task_id = task_id


class NoSplitLevel(PtforceError):
    pass


class NotPreDense(PtforceError):
    def __init__(self, set_id):
        super().__init__(f"set not pre-dense: {set_id}")
        self.set_id = set_id


class NotDecided(PtforceError):
    pass


class AmbiguousValue(PtforceError):
    pass


class DomainNotSuperset(InputError):
    pass
