"""Slow, literal reference computations used only by the tests.

None of these call into the FFT paths they check.
"""
import itertools

import numpy as np


def brute_dft3(v):
    P, Q, R = v.shape
    out = np.zeros(v.shape, dtype=complex)
    x = np.arange(P)[:, None, None]
    y = np.arange(Q)[None, :, None]
    t = np.arange(R)[None, None, :]
    for u1, u2, u3 in itertools.product(range(P), range(Q), range(R)):
        phase = np.exp(-2j * np.pi * (u1 * x / P + u2 * y / Q + u3 * t / R))
        out[u1, u2, u3] = np.sum(v * phase)
    return out


def brute_idft3(s):
    P, Q, R = s.shape
    return brute_dft3(np.conj(s)).conj() / (P * Q * R)


def direct_correlation(video, filt):
    """c(l,m,n) = sum_{x,y,t} s(l+x, m+y, n+t) H(x,y,t) by explicit loops."""
    P, Q, R = video.shape
    L, M, N = filt.shape
    out = np.zeros((P - L + 1, Q - M + 1, R - N + 1))
    for l, m, n in itertools.product(*map(range, out.shape)):
        acc = 0.0
        for x, y, t in itertools.product(range(L), range(M), range(N)):
            acc += video[l + x, m + y, n + t] * filt[x, y, t]
        out[l, m, n] = acc
    return out


def column_vector(frame):
    """Concatenate the columns of a frame (first column first)."""
    return np.concatenate([frame[:, j] for j in range(frame.shape[1])])


def literal_smashed(derivative_video, filt, phi):
    """sum_t <phi S_{n+t}, phi H^{l,m,t}> with every shifted, zero-padded filter frame compressed."""
    P, Q, R = derivative_video.shape
    L, M, N = filt.shape
    comp_frames = [phi @ column_vector(derivative_video[:, :, t]) for t in range(R)]
    out = np.zeros((P - L + 1, Q - M + 1, R - N + 1))
    for l in range(P - L + 1):
        for m in range(Q - M + 1):
            shifted = []
            for t in range(N):
                pad = np.zeros((P, Q))
                pad[l : l + L, m : m + M] = filt[:, :, t]
                shifted.append(phi @ column_vector(pad))
            for n in range(R - N + 1):
                out[l, m, n] = sum(comp_frames[n + t] @ shifted[t] for t in range(N))
    return out


def per_bin_mach(examples, alpha, beta, gamma):
    """MACH spectra and filter computed one frequency bin at a time."""
    X = []
    for e in examples:
        d = e[:, :, 1:] - e[:, :, :-1]
        X.append(brute_dft3(d))
    shape = X[0].shape
    M = np.zeros(shape, dtype=complex)
    D = np.zeros(shape)
    S = np.zeros(shape)
    h = np.zeros(shape, dtype=complex)
    n = len(X)
    for u in itertools.product(*map(range, shape)):
        vals = [x[u] for x in X]
        M[u] = sum(vals) / n
        D[u] = sum(abs(v) ** 2 for v in vals) / n
        S[u] = sum(abs(v - M[u]) ** 2 for v in vals) / n
        h[u] = M[u] / (alpha + beta * D[u] + gamma * S[u])
    return M, D, S, brute_idft3(h).real


def cell_max(data):
    """Brute-force 73 pooled maxima with explicit cell enumeration."""
    out = []
    for level in range(3):
        parts = 2**level
        for i, j, k in itertools.product(range(parts), repeat=3):
            sl = []
            for axis, idx in enumerate((i, j, k)):
                n = data.shape[axis]
                sl.append(slice(idx * n // parts, (idx + 1) * n // parts))
            out.append(max(data[tuple(sl)].ravel()))
    return np.array(out)


def sidelobe_stats(data, peak, outer=11, inner=5):
    vals = []
    ro, ri = outer // 2, inner // 2
    for idx in itertools.product(*map(range, data.shape)):
        d = [abs(a - b) for a, b in zip(idx, peak)]
        if max(d) <= ro and not max(d) <= ri:
            vals.append(data[idx])
    vals = np.array(vals)
    return vals.mean(), vals.std()
