"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration; carries every violated condition, not just the first."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = [str(d) for d in diagnostics]
        super().__init__("; ".join(self.diagnostics))


class IntegrationDiverged(RuntimeError):
    """A state component became non-finite during time stepping.

    Attributes:
        t: time at which the non-finite state was produced.
        state: the offending state vector.
        trace: partial trace recorded up to the last finite step, if available.
    """

    def __init__(self, t, state, trace=None):
        self.t = float(t)
        self.state = state
        self.trace = trace
        super().__init__(f"integration diverged at t={self.t:.6g}: state={list(state)}")
