# config.py - Runtime configuration for genodyn
#
# Defaults live here as module constants; a .env file (or the process
# environment) can override the worker count and integrator tolerances.

import os
import warnings
from dataclasses import asdict, dataclass, replace

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# --- Configuration ---
TOOL_NAME = "genodyn"
VERSION = "0.4.0"
DEFAULT_THREADS = min(4, os.cpu_count() or 1)

ENV_THREADS = "GENODYN_THREADS"
ENV_RTOL = "GENODYN_RTOL"
ENV_ATOL = "GENODYN_ATOL"


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared by every analysis."""

    newton_tol: float = 1e-12      # ||F||_inf accepted as a root
    residual_check: float = 1e-10  # independent re-check of returned roots
    margin: float = 1e-8           # |Re lambda| below this is marginal
    dedup: float = 1e-6            # relative to max(k_i)
    rtol: float = 1e-8
    atol: float = 1e-10
    mu_tol: float = 1e-9           # bisection width on the crossing
    degenerate: float = 1e-7       # separation of real vs pair crossings
    orbit_closure: float = 1e-6    # section return mismatch, relative to amplitude

    def with_overrides(self, **changes) -> "Tolerances":
        return replace(self, **{k: float(v) for k, v in changes.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


def _env_float(name: str, fallback: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return fallback
    try:
        value = float(raw)
    except ValueError:
        warnings.warn(f"{name}={raw!r} is not a number; using {fallback}")
        return fallback
    if value <= 0.0:
        warnings.warn(f"{name} must be positive; using {fallback}")
        return fallback
    return value


def default_tolerances() -> Tolerances:
    """Tolerances with GENODYN_RTOL / GENODYN_ATOL applied."""
    base = Tolerances()
    return base.with_overrides(
        rtol=_env_float(ENV_RTOL, base.rtol),
        atol=_env_float(ENV_ATOL, base.atol),
    )


def worker_count() -> int:
    """Upper bound on worker threads, from GENODYN_THREADS."""
    raw = os.getenv(ENV_THREADS)
    if raw is None or raw.strip() == "":
        return DEFAULT_THREADS
    try:
        value = int(raw)
    except ValueError:
        warnings.warn(f"{ENV_THREADS}={raw!r} is not an integer; using {DEFAULT_THREADS}")
        return DEFAULT_THREADS
    return max(1, value)
