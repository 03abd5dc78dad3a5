"""Independent replay of the staircase schedule (shuffle+1(fin(1))).

Rules replayed:
  * one source, SplitMix64 seeded with the presentation seed;
  * each stage draws a lane with rng.below(3): 0 creates a block; 1 grows the
    oldest pending block; 2 grows the pending block at the round-robin cursor
    (cursor advances past it); with nothing pending a block is created;
  * new block keys walk depth d = 1, 2, ... ; at each depth the odd numerators
    2r+1 over 2^d are visited in a Fisher-Yates permutation of r drawn from rng;
  * a block at depth d has size d; it starts at intra 0 and picks left/right
    with rng.below(2) while both sides are open (always, for finite blocks).

Prints one line per element: id, block numerator/2^exp, intra.
"""
import sys
from fractions import Fraction

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def below(self, bound):
        return self.next() % bound


def replay(seed, count):
    rng = SplitMix64(seed)
    depth, perm, pos = 0, [], 0
    blocks = []  # dicts: key, size, lo, hi, count
    pending, cursor = [], 0
    out = []

    def create():
        nonlocal depth, perm, pos
        if pos == len(perm):
            depth += 1
            perm = list(range(1 << (depth - 1)))
            for i in range(len(perm), 1, -1):
                j = rng.below(i)
                perm[i - 1], perm[j] = perm[j], perm[i - 1]
            pos = 0
        r = perm[pos]
        pos += 1
        b = {"key": Fraction(2 * r + 1, 1 << depth), "size": depth, "lo": 0, "hi": 0, "count": 1}
        blocks.append(b)
        if b["count"] < b["size"]:
            pending.append(b)
        return b["key"], 0

    def grow(b):
        if rng.below(2) == 1:
            b["hi"] += 1
            intra = b["hi"]
        else:
            b["lo"] -= 1
            intra = b["lo"]
        b["count"] += 1
        return b["key"], intra

    for _ in range(count):
        lane = rng.below(3)
        if lane == 0 or not pending:
            out.append(create())
            continue
        if lane == 1:
            at = 0
        else:
            if cursor >= len(pending):
                cursor = 0
            at = cursor
            cursor += 1
        b = pending[at]
        out.append(grow(b))
        if b["count"] == b["size"]:
            pending.pop(at)
            if at < cursor:
                cursor -= 1
    return out


if __name__ == "__main__":
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    count = int(sys.argv[2]) if len(sys.argv) > 2 else 10
    for e, (key, intra) in enumerate(replay(seed, count), start=1):
        print(e, key.numerator, key.denominator, intra)
