"""Exception hierarchy shared by every mbdag module."""


class MbdagError(Exception):
    """Base class; the CLI maps these to exit code 1 unless noted."""


class DagError(MbdagError):
    pass


class DuplicateNode(DagError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node!r} is already declared")


class UnknownNode(DagError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"unknown node {node!r}")


class DuplicateEdge(DagError):
    def __init__(self, src, dst):
        self.edge = (src, dst)
        super().__init__(f"edge {src} -> {dst} is already present")


class CycleError(DagError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("edge would create the cycle " + " -> ".join(self.cycle))


class SameNode(DagError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"path endpoints must differ (both are {node!r})")


class TooManyPaths(DagError):
    def __init__(self, src, dst, limit):
        self.limit = limit
        super().__init__(f"more than {limit} paths between {src} and {dst}")


class InvalidPath(DagError):
    pass


class NotAProxy(DagError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"{node!r} does not have the measured role")


class InvalidQuery(DagError):
    pass


class PathNotOpen(DagError):
    pass


class WrongEndpoints(DagError):
    pass


class SimulationError(MbdagError):
    pass


class TooManyNodes(SimulationError):
    pass


class ZeroMassCondition(SimulationError):
    pass


class EmptyStratum(SimulationError):
    pass


class DegenerateTable(SimulationError):
    pass


class ParamsError(SimulationError):
    """Malformed CPT parameter file or CPTs inconsistent with the graph."""


class UnknownScenario(MbdagError):
    def __init__(self, name, valid):
        self.name = name
        self.valid = list(valid)
        super().__init__(f"unknown scenario {name!r}; valid names: {', '.join(self.valid)}")
