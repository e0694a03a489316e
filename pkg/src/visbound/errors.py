"""Error type shared by the whole package.

Every failure mode that callers are expected to branch on carries a stable
string code (e.g. ``"degenerate-space"``); message text is free-form.
"""

from __future__ import annotations


class VisboundError(Exception):
    """Exception with a stable machine-readable ``code``."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


def require(condition: bool, code: str, message: str = "") -> None:
    if not condition:
        raise VisboundError(code, message)
