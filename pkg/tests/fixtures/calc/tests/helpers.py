import pytest


def make_pair():
    return (1, 2)
