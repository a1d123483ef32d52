"""Favor-exchange platform: requests, volunteers, doorstep keyword checks,
reputation, and emergency dispatch, behind one JSON HTTP API."""

__version__ = "0.1.0"
