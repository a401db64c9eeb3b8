# errors.py - Exception types shared across genodyn
#
# Every error can render itself as the status-dict shape used on the CLI:
#   {"status": "error", "kind": ..., "detail": ...}

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Diagnostic:
    """One problem found in a network definition."""

    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.code}: {self.message}"
        return f"{self.line}:{self.column}: {self.code}: {self.message}"

    def as_dict(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out


class GenodynError(Exception):
    """Base class; `kind` names the failure in status dicts."""

    kind = "error"
    # input problems exit 2 on the CLI, computation problems exit 1
    user_error = False

    def to_status(self) -> dict:
        return {"status": "error", "kind": self.kind, "detail": str(self)}


class DiagnosticError(GenodynError):
    user_error = True

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))

    def to_status(self) -> dict:
        status = super().to_status()
        status["diagnostics"] = [d.as_dict() for d in self.diagnostics]
        return status


class NetworkSyntaxError(DiagnosticError):
    kind = "syntax"


class NetworkValidationError(DiagnosticError):
    kind = "validation"


class UnboundParameterError(GenodynError):
    kind = "unbound-parameter"
    user_error = True


class NotCyclicChainError(GenodynError):
    kind = "not-cyclic-chain"
    user_error = True


class SingularMatrixError(GenodynError):
    kind = "singular-matrix"

    def __init__(self, pivot: float, column: int):
        self.pivot = pivot
        self.column = column
        super().__init__(f"matrix is singular to working precision "
                         f"(pivot {pivot:.3e} in column {column})")


class EigenvalueConvergenceError(GenodynError):
    kind = "eigen-nonconvergence"

    def __init__(self, matrix, iterations: int):
        self.matrix = matrix
        self.iterations = iterations
        super().__init__(f"QR iteration did not converge after {iterations} "
                         f"sweeps for matrix {matrix.tolist()!r}")


class NewtonError(GenodynError):
    kind = "newton-divergence"

    def __init__(self, reason: str, trace):
        self.reason = reason
        self.trace = list(trace)
        last = self.trace[-1] if self.trace else float("nan")
        super().__init__(f"{reason} after {len(self.trace)} iterates "
                         f"(last residual {last:.3e})")


class StepUnderflowError(GenodynError):
    kind = "step-underflow"

    def __init__(self, t: float, h: float):
        self.t = t
        self.h = h
        super().__init__(f"step size {h:.3e} underflowed at t={t!r} (stiff problem?)")


class InducedStateError(GenodynError):
    kind = "induced-state"
    user_error = True


class DegenerateCrossingError(GenodynError):
    kind = "degenerate-crossing"


class ContinuationError(GenodynError):
    """The branch could not be started (no stable equilibrium at the first parameter value)."""

    kind = "continuation"
