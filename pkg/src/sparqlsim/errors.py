"""Exception types shared across the engine, mapped to CLI exit codes."""


class EngineError(Exception):
    """Base class for engine errors."""


class ParseError(EngineError):
    """Malformed input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class UnsupportedFeatureError(EngineError):
    """A query uses a SPARQL feature outside the basic-graph-pattern subset."""

    def __init__(self, feature: str, line: int | None = None):
        self.feature = feature
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"unsupported SPARQL feature: {feature}{where} "
                         "(only SELECT over a basic graph pattern is supported)")


class CartesianProductError(EngineError):
    """The pattern set is disconnected; evaluating it requires a cross
    product, which is opt-in."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(
            f"query patterns form {components} disconnected groups; "
            "evaluating them requires a cartesian product "
            "(pass --allow-cross-product to permit it)")


class ResultSizeLimitError(EngineError):
    """The reference evaluator exceeded its intermediate-result budget."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"reference evaluation exceeded {limit} intermediate rows")
