"""Reference values of k_n, k_n/k_n' and D_n = z k_n' + k_n computed with mpmath
at 60 digits, written to hankel_reference.json.

k_n(z) = sqrt(2 / (pi z)) K_{n+1/2}(z). The derivative uses
k_n' = -k_{n-1} - (n + 1) k_n / z and is checked against numerical
differentiation. Run: python3 make_hankel_reference.py
"""
import json
import random

import mpmath as mp

mp.mp.dps = 60


def kn(n, z):
    return mp.sqrt(2 / (mp.pi * z)) * mp.besselk(n + mp.mpf(1) / 2, z)


def kn_poly(n, z):
    # p_{n+1} = (2n+1) p_n + z^2 p_{n-1}, p_0 = 1, p_1 = z + 1
    p0, p1 = mp.mpc(1), z + 1
    if n == 0:
        p1 = p0
    else:
        for j in range(1, n):
            p0, p1 = p1, (2 * j + 1) * p1 + z * z * p0
    return p1 * mp.exp(-z) / z ** (n + 1)


def dkn(n, z):
    if n == 0:
        return -kn(0, z) * (1 + 1 / z)
    return -kn(n - 1, z) - (n + 1) * kn(n, z) / z


def check(n, z):
    a, b = kn(n, z), kn_poly(n, z)
    assert abs(a - b) <= mp.mpf(10) ** -25 * abs(a), (n, z)
    d = mp.diff(lambda w: kn(n, w), z)
    assert abs(d - dkn(n, z)) <= mp.mpf(10) ** -20 * abs(d), (n, z)


def c(v):
    return [float(mp.re(v)), float(mp.im(v))]


def main():
    out = {"k": [], "ratio": [], "d": []}
    named = [("k", 5, mp.mpc(2, 3)), ("ratio", 40, mp.mpc(-30, 20)), ("d", 10, mp.mpc(-5, 5)),
             ("k", 0, mp.mpc(1, 0)), ("d", 0, mp.mpc(2, 0))]
    rng = random.Random(20240611)
    sample = []
    while len(sample) < 100:
        n = rng.randint(0, 60)
        rad = rng.uniform(0.5, 40.0)
        ang = rng.uniform(-3.0, 3.0)
        z = mp.mpc(rad * mp.cos(ang), rad * mp.sin(ang))
        v = kn(n, z)
        if mp.mpf(10) ** -280 < abs(v) < mp.mpf(10) ** 280:
            sample.append(("k", n, z))
    for kind, n, z in named + sample:
        check(n, z)
        k, dk = kn(n, z), dkn(n, z)
        value = {"k": k, "ratio": k / dk, "d": z * dk + k}[kind]
        out[kind].append({"n": n, "z": c(z), "value": c(value)})
    with open("hankel_reference.json", "w") as f:
        json.dump(out, f, indent=1)


if __name__ == "__main__":
    main()
