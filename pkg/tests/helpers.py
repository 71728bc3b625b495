"""Shared test utilities."""


class ScriptedRandom:
    """random.Random stand-in yielding a fixed script of draws."""

    def __init__(self, uniforms=(), bits=()):
        self._uniforms = list(uniforms)
        self._bits = list(bits)

    def random(self):
        return self._uniforms.pop(0)

    def getrandbits(self, k):
        assert k == 1
        return self._bits.pop(0)
