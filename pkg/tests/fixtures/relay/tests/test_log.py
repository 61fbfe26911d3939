import unittest

from relaylib.log import LogRelay


class TestLogRelay(unittest.TestCase):
    def setUp(self):
        self.relay = LogRelay({'time_unit': 1})

    def test_create_metric(self):
        metric = self.relay._create_metric('hits', 2, None)
        self.assertEqual(metric['value'], 2)

    def test_incr(self):
        self.relay.incr('hits')
        self.assertEqual(self.relay.counters['hits'], 1)

    def test_cleanup_resets(self):
        self.relay.incr('hits')
        self.relay.cleanup()
        self.assertEqual(len(self.relay.counters), 0)

    def helper(self):
        return self.relay
