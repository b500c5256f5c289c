from __future__ import annotations

from typing import Any


class ShadowTorusError(Exception):
    pass


# Input / precondition errors.


class InvalidProfile(ShadowTorusError, ValueError):
    def __init__(self, message: str, *, clause: str) -> None:
        super().__init__(message)
        self.clause = clause


class SupportTooLarge(ShadowTorusError, ValueError):
    pass


class NotInvertible(ShadowTorusError, ValueError):
    pass


class NotDifferentiable(ShadowTorusError, ValueError):
    pass


class OutOfChart(ShadowTorusError, ValueError):
    pass


class OnCore(ShadowTorusError, ValueError):
    pass


class OutOfRect(ShadowTorusError, ValueError):
    pass


class ChartOverflow(ShadowTorusError, ValueError):
    pass


class EmptySample(ShadowTorusError, ValueError):
    pass


class InvalidParameters(ShadowTorusError, ValueError):
    pass


class PreconditionRho(ShadowTorusError, ValueError):
    def __init__(self, message: str, *, rho: float, d: float) -> None:
        super().__init__(message)
        self.rho = rho
        self.d = d


class ConfigError(ShadowTorusError, ValueError):
    def __init__(self, message: str, *, field: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class MissingArtifacts(ShadowTorusError, FileNotFoundError):
    pass


# Numerical failures.


class NonConvergence(ShadowTorusError, RuntimeError):
    pass


class NoPositiveD(ShadowTorusError, RuntimeError):
    pass


class ChainFailed(ShadowTorusError, RuntimeError):
    def __init__(self, message: str, *, condition: str) -> None:
        super().__init__(message)
        self.condition = condition


class Exhausted(ShadowTorusError, RuntimeError):
    def __init__(
        self,
        message: str,
        *,
        failing_step: int,
        reason: str,
        certificate: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.failing_step = failing_step
        self.reason = reason
        self.certificate = dict(certificate or {})


class ShadowFailed(ShadowTorusError, RuntimeError):
    def __init__(self, message: str, *, point: tuple[float, float]) -> None:
        super().__init__(message)
        self.point = point


class UsageError(ShadowTorusError, ValueError):
    pass
