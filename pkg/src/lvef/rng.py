"""Portable 64-bit generator so bootstrap draws are reproducible in any language.

Generator: xorshift64* (Vigna 2014)::

    x ^= x >> 12; x ^= x << 25; x ^= x >> 27      (mod 2**64)
    output = x * 0x2545F4914F6CDD1D               (mod 2**64)

Seeding: the state is ``splitmix64(seed)``. Independent substreams for
resample ``i`` use ``splitmix64(seed + 0x9E3779B97F4A7C15 * (i + 1))``. A
zero state is replaced by ``0x9E3779B97F4A7C15``.

Bounded integers: ``below(n) = ((next() >> 11) * n) >> 53``, i.e.
``floor(u * n)`` with ``u`` the top 53 bits as a fraction.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MULT = 0x2545F4914F6CDD1D


def splitmix64(x):
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = splitmix64(int(seed) & MASK64) or GOLDEN

    @classmethod
    def substream(cls, seed, index):
        return cls((int(seed) + GOLDEN * (index + 1)) & MASK64)

    def next(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & MASK64

    def random(self):
        """Uniform float in [0, 1) with 53 bits of resolution."""
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def below(self, n):
        return ((self.next() >> 11) * n) >> 53
