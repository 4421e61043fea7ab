#pragma once

// P1 Hamiltonian written out element by element from ladder operators:
// S.A.I = sum_ab A_ab S_a I_b with S_x = (S+ + S-)/2, S_y = (S+ - S-)/2i.
// Basis |m_S, m_I> with m_S in {+1/2, -1/2}, m_I in {+1, 0, -1}.

#include <array>
#include <cmath>
#include <complex>

namespace oracle
{
using cd = std::complex<double>;
using Mat6 = std::array<std::array<cd, 6>, 6>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Rotation taking z to n (Rodrigues about z x n).
inline Mat3 rotation_z_to(const std::array<double, 3> &n)
{
    Mat3 r{};
    const double c = n[2];
    const double kx = -n[1], ky = n[0]; // z x n
    const double s = std::sqrt(kx * kx + ky * ky);
    if (s < 1e-15)
    {
        const double sign = c >= 0 ? 1.0 : -1.0;
        r[0][0] = 1.0;
        r[1][1] = sign;
        r[2][2] = sign;
        return r;
    }
    const double ux = kx / s, uy = ky / s;
    const double v = 1.0 - c;
    r[0][0] = c + ux * ux * v;
    r[0][1] = ux * uy * v;
    r[0][2] = uy * s;
    r[1][0] = ux * uy * v;
    r[1][1] = c + uy * uy * v;
    r[1][2] = -ux * s;
    r[2][0] = -uy * s;
    r[2][1] = ux * s;
    r[2][2] = c;
    return r;
}

inline Mat3 axial_tensor(double a_perp, double a_par, const std::array<double, 3> &axis)
{
    const Mat3 r = rotation_z_to(axis);
    const double d[3] = {a_perp, a_perp, a_par};
    Mat3 a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                a[i][j] += r[i][k] * d[k] * r[j][k];
    return a;
}

inline Mat6 p1_hamiltonian(double gamma_hz_per_t, const std::array<double, 3> &b, double a_perp, double a_par,
                           const std::array<double, 3> &axis)
{
    const cd I(0.0, 1.0);
    // electron: index 0 -> +1/2, 1 -> -1/2
    cd sx[2][2] = {{0, 0.5}, {0.5, 0}};
    cd sy[2][2] = {{0, -0.5 * I}, {0.5 * I, 0}};
    cd sz[2][2] = {{0.5, 0}, {0, -0.5}};
    // nucleus I = 1: I+|m> = sqrt(2 - m(m+1))|m+1>, elements sqrt(2)
    const double r2 = std::sqrt(2.0);
    cd ip[3][3] = {{0, r2, 0}, {0, 0, r2}, {0, 0, 0}};
    cd im[3][3] = {{0, 0, 0}, {r2, 0, 0}, {0, r2, 0}};
    cd ix[3][3], iy[3][3], iz[3][3] = {{1, 0, 0}, {0, 0, 0}, {0, 0, -1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
        {
            ix[i][j] = 0.5 * (ip[i][j] + im[i][j]);
            iy[i][j] = (ip[i][j] - im[i][j]) / (2.0 * I);
        }
    const cd (*s[3])[2] = {sx, sy, sz};
    const cd (*n[3])[3] = {ix, iy, iz};
    const Mat3 a = axial_tensor(a_perp, a_par, axis);

    Mat6 h{};
    for (int ms = 0; ms < 2; ++ms)
        for (int ms2 = 0; ms2 < 2; ++ms2)
            for (int mi = 0; mi < 3; ++mi)
                for (int mi2 = 0; mi2 < 3; ++mi2)
                {
                    cd v = 0.0;
                    if (mi == mi2)
                        for (int k = 0; k < 3; ++k)
                            v += gamma_hz_per_t * b[k] * s[k][ms][ms2];
                    for (int p = 0; p < 3; ++p)
                        for (int q = 0; q < 3; ++q)
                            v += a[p][q] * s[p][ms][ms2] * n[q][mi][mi2];
                    h[3 * ms + mi][3 * ms2 + mi2] = v;
                }
    return h;
}

struct Mat6View
{
    const Mat6 &m;
    long rows() const { return 6; }
    cd operator()(std::size_t i, std::size_t j) const { return m[i][j]; }
};
} // namespace oracle
