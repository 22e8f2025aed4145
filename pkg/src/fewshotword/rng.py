"""Self-contained PRNG for codebook seeding.

Codebooks trained from the same data and seed must be reproducible across
machines and library versions, so the generator is pinned here instead of
relying on whatever numpy ships: a xoshiro256** generator whose 256-bit
state is expanded from the 64-bit seed with splitmix64 (the initialisation
recommended by the xoshiro authors).  Reference: Blackman & Vigna,
"Scrambled linear pseudorandom number generators".
"""

_MASK64 = (1 << 64) - 1


def _splitmix64(state):
    """One splitmix64 step. Returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded via splitmix64.

    Draw conventions used by the k-means seeding (fixed so that a given
    seed always produces the same codebook):

    * ``random()`` maps the top 53 bits of the next 64-bit output to a
      float in [0, 1).
    * ``index(n)`` is ``floor(random() * n)`` clamped to ``n - 1``.
    * ``weighted_index(w)`` draws ``r = random() * sum(w)`` and returns the
      first index whose running cumulative weight exceeds ``r``.
    """

    def __init__(self, seed):
        seed = int(seed) & _MASK64
        s = []
        for _ in range(4):
            seed, out = _splitmix64(seed)
            s.append(out)
        self._s = s

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self):
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def index(self, n):
        if n <= 0:
            raise ValueError("n must be positive")
        i = int(self.random() * n)
        return min(i, n - 1)

    def weighted_index(self, weights):
        total = float(sum(weights))
        if not total > 0.0:
            raise ValueError("weights must have positive total")
        r = self.random() * total
        cum = 0.0
        last = 0
        for i, w in enumerate(weights):
            if w > 0.0:
                last = i
                cum += float(w)
                if r < cum:
                    return i
        return last
