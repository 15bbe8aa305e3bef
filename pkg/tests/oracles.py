"""Reference computations that share no code with the package.

Brute-force loops and 30-digit mpmath evaluation. Rotations use doubled
integer coordinates so they stay exact.
"""

from mpmath import mp, mpf, sqrt

mp.dps = 30


def brute_shells(r_max, box=10):
    """{4r^2: set of (k, l)} by a naive double loop."""
    out = {}
    limit = 4 * r_max * r_max
    for k in range(-box, box + 1):
        for l in range(-box, box + 1):
            n = (2 * k - 1) ** 2 + (2 * l - 1) ** 2
            if n <= limit + 1e-9:
                out.setdefault(n, set()).add((k, l))
    return out


def quadruple_points_mp(x, y, k, l):
    """Offsets from p of the four perturbed quadruple points, in 30 digits."""
    x, y = mpf(x), mpf(y)
    s = sqrt(y)
    half = mpf(1) / 2
    return [
        ((a + b * x) / s - half, b * s - half)
        for a, b in ((k, l), (1 - l, k), (1 - k, 1 - l), (l, 1 - k))
    ]


def shell_excess_mp(x, y, indices, g):
    """sum over the index set of g(|delta - p|) - g(r), in 30 digits."""
    total = mpf(0)
    for k, l in indices:
        r = sqrt(mpf((2 * k - 1) ** 2 + (2 * l - 1) ** 2)) / 2
        s = sqrt(mpf(y))
        px = (k + l * mpf(x)) / s - mpf(1) / 2
        py = l * s - mpf(1) / 2
        total += g(sqrt(px * px + py * py)) - g(r)
    return total


def rotate_doubled(k, l, i):
    """Quarter-turn images about p using doubled offsets (2k-1, 2l-1); exact."""
    a, b = 2 * k - 1, 2 * l - 1
    for _ in range(i):
        a, b = -b, a
    return (a + 1) // 2, (b + 1) // 2
