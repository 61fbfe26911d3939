# -*- coding: utf-8 -*-
#
# Tests for the ffwd metrics plugin.

import asyncio
from unittest import mock

import pytest

from gordon.metrics import ffwd


@pytest.fixture
def transport():
    return mock.Mock()


@pytest.fixture
def message():
    return {'metric': 'cpu', 'value': 0.5}


def test_ffwd_protocol_connection_made(transport, message):
    """Datagram is written and the transport closed on connect."""
    on_done = asyncio.Future(loop=asyncio.new_event_loop())
    protocol = ffwd.UDPClientProtocol(message, on_done=on_done)

    protocol.connection_made(transport)

    transport.sendto.assert_called_once_with(ffwd._encode(message))
    transport.close.assert_called_once_with()
    assert on_done.result() is True
