from typing import Any, Dict, Optional, Sequence, Tuple


class LaxkitError(Exception):
    """Base error; `detail` is what the CLI prints, `exit_code` what it returns."""

    exit_code: int = 1

    def __init__(self, detail: str, *, context: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.context = dict(context or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "detail": self.detail, "context": self.context}


class ConfigError(LaxkitError):
    exit_code = 2

    def __init__(self, detail: str, *, field_path: Sequence[Any] = (), context: Optional[Dict[str, Any]] = None):
        path = ".".join(str(p) for p in field_path)
        super().__init__(f"{path}: {detail}" if path else detail, context=context)
        self.field_path = tuple(field_path)


class ExactMathError(LaxkitError):
    pass


class MembershipError(LaxkitError):
    pass


class FamilyError(LaxkitError):
    pass


class PrescriptionError(LaxkitError):
    pass


class NonGenericError(LaxkitError):
    def __init__(self, detail: str, failing: Sequence[Tuple[int, ...]] = ()):
        super().__init__(detail, context={"failing": [list(f) for f in failing]})
        self.failing = [tuple(f) for f in failing]


class WindowError(LaxkitError):
    def __init__(self, detail: str, *, needed: Optional[int] = None, context: Optional[Dict[str, Any]] = None):
        ctx = dict(context or {})
        if needed is not None:
            ctx["needed_degree"] = needed
        super().__init__(detail, context=ctx)
        self.needed = needed


class ConnectionFormError(LaxkitError):
    pass


class ChevalleyError(LaxkitError):
    pass


class CocycleError(LaxkitError):
    pass
