"""Spectral helpers for 2pi-periodic samples on the uniform angle grid.

All routines assume an even number of samples f_j = f(2*pi*j/M) and work
through the real FFT; odd-order derivatives zero the Nyquist mode.
"""
import numpy as np


def angle_grid(m):
    return 2.0 * np.pi * np.arange(m) / m


def deriv(f, order=1):
    """Spectral d^order/dtheta^order of periodic samples."""
    f = np.asarray(f, dtype=float)
    m = f.shape[-1]
    k = np.fft.rfftfreq(m, 1.0 / m)
    fh = np.fft.rfft(f) * (1j * k) ** order
    if order % 2 == 1:
        fh[..., -1] = 0.0
    return np.fft.irfft(fh, m)


def resample(f, m_new):
    """Trigonometric interpolation of real samples onto a finer uniform grid."""
    f = np.asarray(f, dtype=float)
    m = f.shape[-1]
    if m_new == m:
        return f.copy()
    if m_new < m:
        raise ValueError("resample only refines")
    return np.fft.irfft(np.fft.rfft(f), m_new) * (m_new / m)


def resample_complex(z, m_new):
    """Trigonometric interpolation of complex periodic samples (two-sided pad)."""
    z = np.asarray(z, dtype=complex)
    m = z.shape[-1]
    if m_new == m:
        return z.copy()
    zh = np.fft.fft(z)
    out = np.zeros(m_new, dtype=complex)
    out[: m // 2] = zh[: m // 2]
    out[-(m // 2):] = zh[-(m // 2):]
    return np.fft.ifft(out) * (m_new / m)


def eval_at_angles(f, psi, chunk=65536):
    """Evaluate the trigonometric interpolant of samples f at arbitrary angles."""
    f = np.asarray(f, dtype=float)
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    m = f.shape[-1]
    fh = np.fft.rfft(f) / m
    a0 = fh[0].real
    ak = 2.0 * fh[1:-1].real
    bk = -2.0 * fh[1:-1].imag
    anyq = fh[-1].real
    ks = np.arange(1, m // 2)
    out = np.empty_like(psi)
    for lo in range(0, psi.size, chunk):
        p = psi[lo: lo + chunk, None]
        kp = ks[None, :] * p
        out[lo: lo + chunk] = (
            a0
            + np.cos(kp) @ ak
            + np.sin(kp) @ bk
            + anyq * np.cos((m // 2) * p[:, 0])
        )
    return out


def tail_fraction(f, frac=1.0 / 3.0):
    """Relative l2 weight of the top `frac` of modes (smoothness diagnostic)."""
    fh = np.fft.rfft(np.asarray(f, dtype=float))
    power = np.abs(fh) ** 2
    power[1:-1] *= 2.0
    kmax = len(fh) - 1
    kcut = int(np.floor((1.0 - frac) * kmax))
    total = power.sum()
    if total == 0.0:
        return 0.0
    return float(np.sqrt(power[kcut + 1:].sum() / total))


def exp_filter(f, frac=1.0 / 3.0, alpha=None, order=8):
    """Exponential low-pass keeping the bottom (1-frac) of modes untouched.

    Default alpha damps the top mode to machine epsilon.
    """
    f = np.asarray(f, dtype=float)
    m = f.shape[-1]
    if alpha is None:
        alpha = -np.log(np.finfo(float).eps)
    fh = np.fft.rfft(f)
    k = np.arange(len(fh))
    kmax = m // 2
    kcut = int(np.floor((1.0 - frac) * kmax))
    sigma = np.ones(len(fh))
    hi = k > kcut
    sigma[hi] = np.exp(-alpha * ((k[hi] - kcut) / (kmax - kcut)) ** order)
    return np.fft.irfft(fh * sigma, m)


def dealiased_power_sum(f, power):
    """(2pi/M)*sum of f(theta)^power with the product de-aliased by upsampling."""
    f = np.asarray(f, dtype=float)
    m = f.shape[-1]
    mq = int(power) * m
    fq = resample(f, mq)
    return (2.0 * np.pi / mq) * float(np.sum(fq ** power))
