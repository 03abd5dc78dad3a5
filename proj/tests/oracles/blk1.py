"""BLK1: scripted 30-element order, scripted on-history, and the expected
values of the block rules and of the intrinsic counter rule.

Writes tests/fixtures/blk1.order and tests/fixtures/blk1.on when run with
--write; always prints the expectations.
"""
import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
N = 30


def build():
    rng = random.Random(16)
    order = []
    lines = []
    for e in range(1, N + 1):
        at = rng.randint(0, len(order))
        left = order[at - 1] if at > 0 else "MIN"
        right = order[at] if at < len(order) else "MAX"
        lines.append(f"insert {e} {left} {right}")
        order.insert(at, e)
    on = {}
    for s in range(1, N + 1):
        on[s] = sorted(n for n in range(1, s + 1) if n == 1 or rng.random() < 0.35)
    return lines, on


def order_at(lines, s):
    order = []
    for line in lines[:s]:
        _, e, left, right = line.split()
        e = int(e)
        at = 0 if left == "MIN" else order.index(int(left)) + 1
        order.insert(at, e)
    return order


def block(lines, on, n, s):
    ls = order_at(lines, s)
    earlier = [t for t in range(1, s) if n in on[t]]
    last_on = max(earlier) if earlier else 1

    def ok(m):
        if m == n:
            return True
        if m < n or m >= last_on:
            return False
        return not any(m in on[t] for t in range(last_on, s + 1))

    i = ls.index(n)
    lo = i
    while lo > 0 and ok(ls[lo - 1]):
        lo -= 1
    hi = i
    while hi + 1 < len(ls) and ok(ls[hi + 1]):
        hi += 1
    return ls[lo:hi + 1]


def intrinsic(lines, n_target, s_max):
    counters = {}
    stages = []
    for s in range(1, s_max + 1):
        ls = order_at(lines, s)
        pos = {e: i for i, e in enumerate(ls)}
        for n in range(1, s + 1):
            c = counters.get(n, 0)
            if all(abs(pos[y] - pos[n]) - 1 >= c + 1 for y in range(1, n)):
                counters[n] = c + 1
                if n == n_target:
                    stages.append(s)
    return stages


if __name__ == "__main__":
    lines, on = build()
    if "--write" in sys.argv:
        (HERE.parent / "fixtures" / "blk1.order").write_text(
            "# BLK1: 30 elements\n" + "\n".join(lines) + "\n")
        (HERE.parent / "fixtures" / "blk1.on").write_text(
            "# stage: on elements\n" + "".join(
                f"{s}:{' '.join(map(str, on[s]))}\n" for s in range(1, N + 1)))
    print("order@12", order_at(lines, 12))
    print("block n=4 s=12", block(lines, on, 4, 12))
    print("intrinsic n=3 s<=30", intrinsic(lines, 3, 30))
