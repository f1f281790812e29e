import socket

import pytest


@pytest.fixture
def no_network(monkeypatch):
    """Fail the test if anything opens a network connection."""

    def _blocked(*args, **kwargs):
        raise AssertionError("network access attempted during a hermetic test")

    monkeypatch.setattr(socket.socket, "connect", _blocked)
    monkeypatch.setattr(socket, "create_connection", _blocked)
    yield
