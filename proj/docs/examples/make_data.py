"""Regenerate the example input files in this directory (seeded, deterministic)."""

import numpy as np

H = 6.62607015e-34
MU_B = 9.2740100783e-24

OMEGA_R = 5.534e9
KAPPA_INT = OMEGA_R / 2.30e4
KAPPA_EXT = 1.7e6 - KAPPA_INT
G_DPPH = 2.0036


def reflection(f, g=0.0, omega_s=OMEGA_R, gamma=9.6e6):
    denom = 1j * (f - OMEGA_R) + 0.5 * (KAPPA_INT + KAPPA_EXT)
    if g:
        denom = denom + g**2 / (1j * (f - omega_s) + 0.5 * gamma)
    return 0.4 * np.exp(0.9j) * (1.0 - KAPPA_EXT / denom)


def write_trace(name, s11, f, rng, sigma):
    s11 = s11 + sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    with open(name, "w") as out:
        out.write("# synthetic reflection trace, Q_int = 2.30e4, kappa_tot = 1.7 MHz\n")
        out.write("freq_ghz,re,im\n")
        for fi, si in zip(f, s11):
            out.write(f"{fi / 1e9:.9f},{si.real:.8e},{si.imag:.8e}\n")


def main():
    rng = np.random.default_rng(2024)

    f = np.linspace(OMEGA_R - 10e6, OMEGA_R + 10e6, 401)
    write_trace("trace.csv", reflection(f), f, rng, 2e-3)

    f = np.linspace(OMEGA_R - 60e6, OMEGA_R + 60e6, 1201)
    write_trace("coupled.csv", reflection(f, g=7.8e6), f, rng, 5e-4)

    fields = np.linspace(0.1955, 0.1992, 41)
    f = np.linspace(OMEGA_R - 40e6, OMEGA_R + 40e6, 401)
    with open("map.csv", "w") as out:
        out.write("," + ",".join(f"{x:.0f}" for x in f) + "\n")
        for b in fields:
            omega_s = G_DPPH * MU_B * b / H
            mag = np.abs(reflection(f, g=7.8e6, omega_s=omega_s)) + 2e-3 * rng.standard_normal(f.size)
            db = 20.0 * np.log10(np.abs(mag))
            out.write(f"{b:.6f}," + ",".join(f"{x:.5f}" for x in db) + "\n")

    t = 0.5e-3 * np.arange(1, 41)
    y = 1.0 - np.exp(-t / 5.54e-3) + 0.01 * rng.standard_normal(t.size)
    with open("recovery.csv", "w") as out:
        out.write("time_ms,signal,sigma\n")
        for ti, yi in zip(t, y):
            out.write(f"{ti * 1e3:.3f},{yi:.6f},0.01\n")

    t = 8e-6 * np.arange(1, 41)
    y = np.exp(-((t / 117.3e-6) ** 2.1)) + 0.01 * rng.standard_normal(t.size)
    with open("echo.csv", "w") as out:
        out.write("two_tau_us,echo\n")
        for ti, yi in zip(t, y):
            out.write(f"{ti * 1e6:.1f},{yi:.6f}\n")


if __name__ == "__main__":
    main()
