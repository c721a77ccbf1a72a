"""Brute-force reference values for the Melnikov integrals M1, M2, M3 and alpha.

Trapezoid rule on a 4096 (x) by 8192 (tau) grid over tau in [-20, 20]. The
printed values are the constants in `pvnls_core::melnikov::oracle`.

    python3 scripts/melnikov_oracle.py [omega]
"""

import sys

import numpy as np


def profile(tau, x, omega):
    """Even homoclinic profile h and its second x-derivative."""
    sigma = np.sqrt(omega * omega - 1.0)
    th0 = np.arctan(sigma)
    c2, s2, s0 = np.cos(2 * th0), np.sin(2 * th0), np.sin(th0)
    t, s = np.tanh(2 * tau), 1.0 / np.cosh(2 * tau)
    c, cx = np.cos(x), -np.sin(x)
    num = c2 + 1j * s2 * t - s0 * s * c
    den = 1 + s0 * s * c
    a = 1 + c2 + 1j * s2 * t
    h = num / den
    hxx = s0 * s * a * (c * den + 2 * s0 * s * cx**2) / den**3
    return h, hxx


def integrals(omega, nx=4096, ntau=8192, cut=20.0, block=256):
    x = np.arange(nx) * 2 * np.pi / nx
    dx = 2 * np.pi / nx
    tau = np.linspace(-cut, cut, ntau)
    w = np.full(ntau, tau[1] - tau[0])
    w[0] = w[-1] = 0.5 * w[0]
    acc = np.zeros(3)
    w2 = omega * omega
    for k in range(0, ntau, block):
        tt, xx = np.meshgrid(tau[k : k + block], x, indexing="ij")
        h, hxx = profile(tt, xx, omega)
        a2 = np.abs(h) ** 2
        re = 2 * np.real(np.conj(h) * hxx)
        i1 = 0.5 * w2 * (w2 * (1 - a2) * re - 4 * np.abs(hxx) ** 2)
        i2 = w2 * (w2 * a2 * (1 - a2) - re)
        i3 = 0.5 * w2 * h.real * (1 - a2) - hxx.real
        ww = w[k : k + block][:, None] * dx
        acc += [(ww * i).sum() for i in (i1, i2, i3)]
    return acc


def main():
    omega = float(sys.argv[1]) if len(sys.argv) > 1 else 1.5
    m1, m2, m3 = integrals(omega)
    sigma = np.sqrt(omega * omega - 1.0)
    th0 = np.arctan(sigma)
    alpha = m1 / (m2 - 4 * omega**2 * th0 / np.sin(2 * th0) * m3)
    print(f"omega = {omega!r}")
    print(f"M1    = {float(m1)!r}")
    print(f"M2    = {float(m2)!r}")
    print(f"M3    = {float(m3)!r}")
    print(f"alpha = {float(alpha)!r}")


if __name__ == "__main__":
    main()
