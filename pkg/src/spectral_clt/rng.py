"""SplitMix64 stream and the normal/uniform draws built on it.

The generator is counter based: the k-th output (k = 0, 1, ...) of the stream
seeded with ``s`` is ``mix(s + (k + 1) * GOLDEN_GAMMA)``, so blocks of outputs
can be produced with vectorised uint64 arithmetic and still match the
sequential definition exactly.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL1 = 0xBF58476D1CE4E5B9
MIX_MUL2 = 0x94D049BB133111EB

_GAMMA = np.uint64(GOLDEN_GAMMA)
_MUL1 = np.uint64(MIX_MUL1)
_MUL2 = np.uint64(MIX_MUL2)
_TWO_M53 = 2.0 ** -53


def _mix_int(z):
    z = ((z ^ (z >> 30)) * MIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MUL2) & MASK64
    return z ^ (z >> 31)


def _mix_array(z):
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def derive_seed(master, replicate_id):
    """Seed of replicate ``replicate_id`` under ``master``.

    Equal to output number ``replicate_id`` of the SplitMix64 stream seeded
    with ``master``; in particular ``derive_seed(0, 0)`` is the first output
    of SplitMix64 seeded with 0.
    """
    if replicate_id < 0:
        raise ValueError("replicate_id must be non-negative")
    z = (int(master) + (int(replicate_id) + 1) * GOLDEN_GAMMA) & MASK64
    return _mix_int(z)


class SplitMix64:
    """Mutable cursor over a SplitMix64 stream.

    ``state`` is the 64-bit counter; each output advances it by the golden
    gamma. Two instances built from the same seed produce identical draws.
    """

    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_uint64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix_int(self.state)

    def uint64s(self, count):
        """Next ``count`` raw outputs as a uint64 array."""
        count = int(count)
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        steps = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * _GAMMA
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return _mix_array(z)

    def uniforms(self, count):
        """Uniform draws on [0, 1) with 53 random bits each."""
        return (self.uint64s(count) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def rademachers(self, count):
        """Fair +/-1 signs taken from the top bit of each output."""
        top = (self.uint64s(count) >> np.uint64(63)).astype(np.float64)
        return 2.0 * top - 1.0

    def standard_normals(self, count):
        """``count`` N(0, 1) draws by the Marsaglia polar method.

        Each candidate pair consumes two consecutive uniforms; accepted pairs
        yield two normals in order. The stream is left positioned just after
        the last pair that was used, exactly as a draw-by-draw loop would.
        """
        count = int(count)
        out = np.empty(max(count, 0), dtype=np.float64)
        filled = 0
        while filled < count:
            pairs_needed = (count - filled + 1) // 2
            batch = int(pairs_needed * 1.3) + 16
            start_state = self.state
            u = 2.0 * self.uniforms(2 * batch) - 1.0
            a, b = u[0::2], u[1::2]
            s = a * a + b * b
            ok = (s > 0.0) & (s < 1.0)
            idx = np.flatnonzero(ok)
            if idx.size > pairs_needed:
                idx = idx[:pairs_needed]
                used_pairs = int(idx[-1]) + 1
                self.state = (start_state + 2 * used_pairs * GOLDEN_GAMMA) & MASK64
            s_ok = s[idx]
            factor = np.sqrt(-2.0 * np.log(s_ok) / s_ok)
            normals = np.empty(2 * idx.size)
            normals[0::2] = a[idx] * factor
            normals[1::2] = b[idx] * factor
            take = min(normals.size, count - filled)
            out[filled:filled + take] = normals[:take]
            filled += take
        return out


def sample_standard_normals(seed, count):
    """``count`` i.i.d. standard normal draws from the stream seeded by ``seed``."""
    return SplitMix64(seed).standard_normals(count)


def sample_uniforms(seed, count):
    return SplitMix64(seed).uniforms(count)
