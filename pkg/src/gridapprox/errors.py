"""Exception hierarchy shared by all modules."""


class GridApproxError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class MeasureError(GridApproxError, ValueError):
    pass


class GeometryError(GridApproxError, ValueError):
    pass


class DegenerateGridError(GridApproxError):
    """Adjacent distinct coordinates are too close for a strict midpoint."""


class SizeGuardError(GridApproxError, ValueError):
    """An exhaustive search was requested beyond its feasibility cap."""


class ConfigError(GridApproxError):
    def __init__(self, message, path=None, field=None):
        self.path = path
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
