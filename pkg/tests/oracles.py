"""Independent reference computations used by the tests.

Everything here is written with plain Python loops and shares no code with
the package, so agreement is evidence rather than tautology.
"""

import math


def transform_scalar(X, delta, eps=1e-6, norm=None):
    """Element-by-element ratio-of-rates transform. Returns (A, B, C, m, Mx)."""
    M, N = len(X), len(X[0])
    dX = [[X[k + 1][j] - X[k][j] for j in range(N)] for k in range(M - 1)]
    if norm is None:
        m = min(min(r) for r in dX)
        mx = max(max(r) for r in dX)
    else:
        m, mx = norm
    A = []
    for r in dX:
        row = []
        for v in r:
            if mx == m:
                row.append(0.5)
            else:
                a = (v - m) / (mx - m)
                row.append(min(1.0, max(0.0, a)))
        A.append(row)
    B = [list(A[0])]
    for k in range(1, len(A)):
        B.append([delta * B[k - 1][j] + (1 - delta) * A[k][j] for j in range(N)])
    C = []
    for r in B:
        fl = [max(v, eps) for v in r]
        C.append([fl[j] / fl[(j + 1) % N] for j in range(N)])
    return A, B, C, m, mx


def stump_predict(x, threshold, polarity):
    return x <= threshold if polarity == "le" else x > threshold


def brute_force_min_error(X, y, w):
    """Exhaustive stump search: the minimum weighted error over all stumps.

    ``y`` holds booleans (True = infected). Thresholds: -inf and midpoints of
    consecutive distinct values.
    """
    n, d = len(X), len(X[0])
    best = math.inf
    for j in range(d):
        vals = sorted(set(X[i][j] for i in range(n)))
        thresholds = [-math.inf] + [(a + b) / 2 for a, b in zip(vals, vals[1:])]
        for thr in thresholds:
            for pol in ("le", "gt"):
                err = 0.0
                for i in range(n):
                    if stump_predict(X[i][j], thr, pol) != y[i]:
                        err += w[i]
                best = min(best, err)
    return best


def weighted_error(X, y, w, feature, threshold, polarity):
    return sum(w[i] for i in range(len(X)) if stump_predict(X[i][feature], threshold, polarity) != y[i])


def adaboost_replay_errors(X, y, stumps):
    """Replay the reweighting implied by a stump sequence.

    Yields ``(stump_error, oracle_min_error)`` for each round, with the
    sample weights each round would have seen.
    """
    n = len(X)
    w = [1.0 / n] * n
    for feature, threshold, polarity, alpha in stumps:
        err = weighted_error(X, y, w, feature, threshold, polarity)
        yield err, brute_force_min_error(X, y, w)
        new = []
        for i in range(n):
            h = 1.0 if stump_predict(X[i][feature], threshold, polarity) else -1.0
            s = 1.0 if y[i] else -1.0
            new.append(w[i] * math.exp(-alpha * s * h))
        tot = sum(new)
        w = [v / tot for v in new]
