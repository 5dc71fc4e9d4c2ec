"""Tabulate tilde Kloosterman sums and compare the CRT path with brute force."""
import time

from kzlab.kloosterman import KloostermanQuery, evaluate

rows = []
for D1, D2 in [(1, 2), (2, 4), (3, 9), (4, 12), (5, 25), (6, 36)]:
    q = KloostermanQuery("tilde", (1, 1, 1), D1, D2)
    t0 = time.perf_counter()
    fast = evaluate(q)
    t1 = time.perf_counter()
    slow = evaluate(q, method="brute")
    t2 = time.perf_counter()
    rows.append((D1, D2, fast.value, abs(fast.value - slow.value), t1 - t0, t2 - t1))

print(f"{'D1':>3} {'D2':>3} {'value':>26} {'|crt-brute|':>12} {'crt s':>8} {'brute s':>8}")
for D1, D2, v, dev, tf, tb in rows:
    print(f"{D1:3d} {D2:3d} {v.real:12.6f}{v.imag:+12.6f}j {dev:12.1e} {tf:8.4f} {tb:8.4f}")
