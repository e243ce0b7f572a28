#!/usr/bin/env python3
"""Independent Bark band-edge construction used to freeze expected plans in tests."""
import math
import sys


def bark(f):
    return 13.0 * math.atan(0.00076 * f) + 3.5 * math.atan((f / 7500.0) ** 2)


def plan(fft_len, fs, m):
    nbins = fft_len // 2 + 1
    z = [bark(i * fs / fft_len) for i in range(nbins)]
    total = z[-1] - z[0]
    edges = [0]
    for j in range(1, m):
        target = z[0] + total * j / m
        e = next((i for i in range(nbins) if z[i] >= target), nbins)
        edges.append(e)
    edges.append(nbins)
    for j in range(1, m):
        edges[j] = max(edges[j], edges[j - 1] + 1)
    for j in range(m - 1, 0, -1):
        edges[j] = min(edges[j], edges[j + 1] - 1)
    # Quantization leaves neighbouring widths out of order by a bin; reorder
    # widths ascending so band width never shrinks with frequency.
    widths = sorted(b - a for a, b in zip(edges, edges[1:]))
    out = [0]
    for w in widths:
        out.append(out[-1] + w)
    return out


if __name__ == "__main__":
    n, fs, m = (int(a) for a in sys.argv[1:4])
    e = plan(n, fs, m)
    print("edges", e)
    print("widths", [b - a for a, b in zip(e, e[1:])])
