"""Naive reference expansions kept independent of the package.

Series are plain lists of Fractions indexed by integer exponent 0..N-1.
"""

from fractions import Fraction


def mul(a, b, N):
    out = [Fraction(0)] * N
    for i, x in enumerate(a[:N]):
        if x:
            for j in range(N - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def inv(a, N):
    out = [Fraction(0)] * N
    out[0] = 1 / Fraction(a[0])
    for k in range(1, N):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s / a[0]
    return out


def binom(c, e, N):
    """1 - c*q^e with e >= 0."""
    p = [Fraction(0)] * N
    p[0] += 1
    if e < N:
        p[e] -= c
    return p


def pochhammer(c, e, step, n, N):
    """(c q^e; q^step)_n for n >= 0 and e >= 0."""
    p = [Fraction(1)] + [Fraction(0)] * (N - 1)
    for j in range(n):
        p = mul(p, binom(c, e + j * step, N), N)
    return p


def mono(c, e, N):
    p = [Fraction(0)] * N
    if 0 <= e < N:
        p[e] = Fraction(c)
    return p


def add(a, b):
    return [x + y for x, y in zip(a, b)]


def term(sign, e, numer, denom, N):
    t = mono(sign, e, N)
    for c, e0, s, n in numer:
        t = mul(t, pochhammer(c, e0, s, n, N), N)
    for c, e0, s, n in denom:
        t = mul(t, inv(pochhammer(c, e0, s, n, N), N), N)
    return t


# (sign(n), exponent(n), numer(n), denom(n), start); factors are (c, e0, step, length)
DEFS = {
    "f3": (lambda n: 1, lambda n: n * n, lambda n: [], lambda n: [(-1, 1, 1, n), (-1, 1, 1, n)], 0),
    "phi3": (lambda n: 1, lambda n: n * n, lambda n: [], lambda n: [(-1, 2, 2, n)], 0),
    "chi3": (lambda n: 1, lambda n: n * n, lambda n: [(-1, 1, 1, n)], lambda n: [(-1, 3, 3, n)], 0),
    "psi3": (lambda n: 1, lambda n: n * n, lambda n: [], lambda n: [(1, 1, 2, n)], 1),
    "nu3": (lambda n: 1, lambda n: n * n + n, lambda n: [], lambda n: [(-1, 1, 2, n + 1)], 0),
    "f0": (lambda n: 1, lambda n: n * n, lambda n: [], lambda n: [(-1, 1, 1, n)], 0),
    "f1": (lambda n: 1, lambda n: n * n + n, lambda n: [], lambda n: [(-1, 1, 1, n)], 0),
    "F0": (lambda n: 1, lambda n: 2 * n * n, lambda n: [], lambda n: [(1, 1, 2, n)], 0),
    "F1": (lambda n: 1, lambda n: 2 * n * n + 2 * n, lambda n: [], lambda n: [(1, 1, 2, n + 1)], 0),
    "phi0": (lambda n: 1, lambda n: n * n, lambda n: [(-1, 1, 2, n)], lambda n: [], 0),
    "phi1": (lambda n: 1, lambda n: (n + 1) ** 2, lambda n: [(-1, 1, 2, n)], lambda n: [], 0),
    "psi0": (lambda n: 1, lambda n: (n + 1) * (n + 2) // 2, lambda n: [(-1, 1, 1, n)], lambda n: [], 0),
    "psi1": (lambda n: 1, lambda n: n * (n + 1) // 2, lambda n: [(-1, 1, 1, n)], lambda n: [], 0),
    "chi0": (lambda n: 1, lambda n: n, lambda n: [(1, 1, 1, n)], lambda n: [(1, 1, 1, 2 * n)], 0),
    "chi1": (lambda n: 1, lambda n: n, lambda n: [(1, 1, 1, n)], lambda n: [(1, 1, 1, 2 * n + 1)], 0),
    "phi6": (lambda n: (-1) ** n, lambda n: n * n, lambda n: [(1, 1, 2, n)], lambda n: [(-1, 1, 1, 2 * n)], 0),
    "psi6": (
        lambda n: (-1) ** n, lambda n: (n + 1) ** 2, lambda n: [(1, 1, 2, n)], lambda n: [(-1, 1, 1, 2 * n + 1)], 0,
    ),
    "rho6": (lambda n: 1, lambda n: n * (n + 1) // 2, lambda n: [(-1, 1, 1, n)], lambda n: [(1, 1, 2, n + 1)], 0),
    "sigma6": (
        lambda n: 1, lambda n: (n + 1) * (n + 2) // 2, lambda n: [(-1, 1, 1, n)], lambda n: [(1, 1, 2, n + 1)], 0,
    ),
    "lambda6": (lambda n: (-1) ** n, lambda n: n, lambda n: [(1, 1, 2, n)], lambda n: [(-1, 1, 1, n)], 0),
    "phi6minus": (lambda n: 1, lambda n: n, lambda n: [(-1, 1, 1, 2 * n - 1)], lambda n: [(1, 1, 2, n)], 1),
    "psi6minus": (lambda n: 1, lambda n: n, lambda n: [(-1, 1, 1, 2 * n - 2)], lambda n: [(1, 1, 2, n)], 1),
    "S0": (lambda n: 1, lambda n: n * n, lambda n: [(-1, 1, 2, n)], lambda n: [(-1, 2, 2, n)], 0),
    "S1": (lambda n: 1, lambda n: n * n + 2 * n, lambda n: [(-1, 1, 2, n)], lambda n: [(-1, 2, 2, n)], 0),
    "T0": (lambda n: 1, lambda n: (n + 1) * (n + 2), lambda n: [(-1, 2, 2, n)], lambda n: [(-1, 1, 2, n + 1)], 0),
    "T1": (lambda n: 1, lambda n: n * (n + 1), lambda n: [(-1, 2, 2, n)], lambda n: [(-1, 1, 2, n + 1)], 0),
}


def oracle(name, N):
    """Coefficients q^0..q^(N-1) by brute force: every term up to n = N."""
    if name == "mu6":
        return mu6(N)
    sign, ex, numer, denom, start = DEFS[name]
    total = [Fraction(0)] * N
    for n in range(start, N + 1):
        if ex(n) >= N:
            continue
        total = add(total, term(sign(n), ex(n), numer(n), denom(n), N))
    return total


def mu6(N):
    """Average of the partial sums S_M and S_{M+1} for a large even M."""
    M = 2 * N + 2
    partial = [Fraction(0)] * N
    sums = []
    for n in range(M + 2):
        t = term((-1) ** n, 0, [(1, 1, 2, n)], [(-1, 1, 1, n)], N)
        partial = add(partial, t)
        sums.append(partial)
    return [(x + y) / 2 for x, y in zip(sums[M], sums[M + 1])]
