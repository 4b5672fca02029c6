from typing import Any, Dict, List, Optional


class QtelError(Exception):
    """Base class for every error raised by the computational core"""

    status_code = 500

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class PoleError(QtelError, ZeroDivisionError):
    """A denominator vanishes at the requested point"""

    status_code = 400


class AlreadyHomogeneousError(QtelError):
    status_code = 400


class NormalizationError(QtelError):
    status_code = 400


class AnsatzError(QtelError):
    status_code = 400


class SearchExhaustedError(QtelError):
    """Raised by the escalation drivers when every configured bound failed"""

    status_code = 422

    def __init__(self, message: str, attempts: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message, {"attempts": attempts or []})
        self.attempts = attempts or []


class BoundaryError(QtelError):
    status_code = 422


class ConventionError(QtelError):
    status_code = 422


class AJCheckError(QtelError):
    status_code = 422

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class FixtureError(QtelError):
    status_code = 404


class UnsupportedKnotError(QtelError):
    status_code = 400


class DomainError(QtelError):
    status_code = 400


class ParseError(QtelError):
    status_code = 400


def http_error(e: QtelError):
    """The HTTPException a router raises for a core error"""
    from fastapi import HTTPException

    detail = {"error": type(e).__name__, "message": e.message}
    if e.details:
        detail["details"] = e.details
    return HTTPException(status_code=e.status_code, detail=detail)
