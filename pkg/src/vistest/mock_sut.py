"""Standalone executable serving the built-in mock detector over the wire
protocol.  Installed as ``vistest-mock-sut``; also runnable as
``python -m vistest.mock_sut``."""

from __future__ import annotations

from . import protocol
from .sut import mock_handler


def main() -> None:
    protocol.serve(mock_handler)


if __name__ == "__main__":
    main()
