#!/usr/bin/env python3
"""Gaussian-blur denoiser for the cdpsr external-denoiser protocol.

Reads in.f64 and req.txt from the current directory and writes out.f64.
sigma = strength, in pixels; the kernel is truncated at ceil(3 sigma) and
borders are replicated. strength 0 copies the input.
"""
import math
import sys

import numpy as np


def read_request(path="req.txt"):
    req = {}
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if "=" in line:
                k, v = line.split("=", 1)
                req[k.strip()] = v.strip()
    return req


def blur_axis(x, k, axis):
    r = len(k) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    p = np.pad(x, pad, mode="edge")
    n = x.shape[axis]
    out = np.zeros_like(x)
    for i, w in enumerate(k):
        out += w * (p[i:i + n, :] if axis == 0 else p[:, i:i + n])
    return out


def main():
    req = read_request()
    if req.get("version") != "1":
        print(f"unsupported protocol version {req.get('version')}", file=sys.stderr)
        return 2
    w, h = int(req["width"]), int(req["height"])
    sigma = float(req["strength"])
    x = np.fromfile("in.f64", dtype="<f8").reshape(h, w)
    if sigma > 0:
        r = max(1, math.ceil(3 * sigma))
        t = np.arange(-r, r + 1, dtype=float)
        k = np.exp(-t * t / (2 * sigma * sigma))
        k /= k.sum()
        x = blur_axis(blur_axis(x, k, 1), k, 0)
    x.astype("<f8").tofile("out.f64")
    return 0


if __name__ == "__main__":
    sys.exit(main())
