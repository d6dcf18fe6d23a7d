// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_BESSEL_HPP
#define QSPECKLE_BESSEL_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

// Modified Bessel functions of the second kind for integer order.
//
// K0 and K1 combine the ascending series (x <= 2) with Chebyshev expansions
// of the exponentially scaled functions for x > 2; the Chebyshev coefficient
// sets are the classic ones from the SLATEC FNLIB collection (netlib, public
// domain).  Higher orders come from the three-term upward recurrence
// K_{n+1}(x) = K_{n-1}(x) + (2n/x) K_n(x), which is stable in this direction.
// A log-space variant never overflows, which matters for small arguments at
// large order where K_n(x) ~ (n-1)!/2 * (2/x)^n.

namespace qspeckle {

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

// Clenshaw evaluation of an n-term Chebyshev series on [-1, 1].
inline double chebyshev_eval(double x, const double* cs, int n)
{
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    const double twox = 2.0 * x;
    for (int i = n - 1; i >= 0; --i) {
        b2 = b1;
        b1 = b0;
        b0 = twox * b1 - b2 + cs[i];
    }
    return 0.5 * (b0 - b2);
}

// Series for e^x*K0(x)*sqrt(x) - 1.25 on 2 < x <= 8.
inline constexpr double kAk0[18] = {
    -0.07643947903327941424082978270088,
    -0.02235652605699819052023095550791,
    7.734181154693858235300618174047e-4,
    -4.281006688886099464452146435416e-5,
    3.08170017386297474365001482666e-6,
    -2.639367222009664974067448892723e-7,
    2.563713036403469206294088265742e-8,
    -2.742705549900201263857211915244e-9,
    3.169429658097499592080832873403e-10,
    -3.902353286962184141601065717962e-11,
    5.068040698188575402050092127286e-12,
    -6.889574741007870679541713557984e-13,
    9.744978497825917691388201336831e-14,
    -1.427332841884548505389855340122e-14,
    2.156412571021463039558062976527e-15,
    -3.34965425514956277218878205853e-16,
    5.335260216952911692145280392601e-17,
    -8.693669980890753807639622378837e-18,
};

// Series for e^x*K0(x)*sqrt(x) - 1.25 on x > 8.
inline constexpr double kAk02[14] = {
    -0.01201869826307592239839346212452,
    -0.009174852691025695310652561075713,
    1.444550931775005821048843878057e-4,
    -4.013614175435709728671021077879e-6,
    1.567831810852310672590348990333e-7,
    -7.77011043852173771031579975446e-9,
    4.611182576179717882533130529586e-10,
    -3.158592997860565770526665803309e-11,
    2.435018039365041127835887814329e-12,
    -2.074331387398347897709853373506e-13,
    1.925787280589917084742736504693e-14,
    -1.927554805838956103600347182218e-15,
    2.062198029197818278285237869644e-16,
    -2.341685117579242402603640195071e-17,
};

// Series for e^x*K1(x)*sqrt(x) - 1.25 on 2 < x <= 8.
inline constexpr double kAk1[18] = {
    0.27443134069738829695257666227266,
    0.07571989953199367817089237814929,
    -0.0014410515564754061229853116175625,
    6.6501169551257479394251385477036e-5,
    -4.3699847095201407660580845089167e-6,
    3.5402774997630526799417139008534e-7,
    -3.3111637792932920208982688245704e-8,
    3.4459775819010534532311499770992e-9,
    -3.8989323474754271048981937492758e-10,
    4.7208197504658356400947449339005e-11,
    -6.047835662875356234537359156289e-12,
    8.1284948748658747888193837985663e-13,
    -1.1386945747147891428923915951042e-13,
    1.654035840846228232597294820509e-14,
    -2.4809025677068848221516010440533e-15,
    3.8292378907024096948429227299157e-16,
    -6.0647341040012418187768210377386e-17,
    9.8324256232648616038194004650666e-18,
};

// Series for e^x*K1(x)*sqrt(x) - 1.25 on x > 8.
inline constexpr double kAk12[14] = {
    0.06379308343739001036600488534102,
    0.02832887813049720935835030284708,
    -2.475370673905250345414545566732e-4,
    5.771972451607248820470976625763e-6,
    -2.068939219536548302745533196552e-7,
    9.739983441381804180309213097887e-9,
    -5.585336140380624984688895511129e-10,
    3.732996634046185240221212854731e-11,
    -2.825051961023225445135065754928e-12,
    2.372019002484144173643496955486e-13,
    -2.176677387991753979268301667938e-14,
    2.157914161616032453939562689706e-15,
    -2.290196930718269275991551338154e-16,
    2.582885729823274961919939565226e-17,
};

// Ascending series of I0 and I1, adequate for x <= 2.
inline double bessel_i0_series(double x)
{
    const double t = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= t / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

inline double bessel_i1_series(double x)
{
    const double t = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= t / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return 0.5 * x * sum;
}

// K0(x) for 0 < x <= 2 via the ascending series
// K0 = -(log(x/2) + gamma) I0(x) + sum_{k>=1} H_k (x^2/4)^k / (k!)^2.
inline double bessel_k0_small(double x)
{
    const double t = 0.25 * x * x;
    double term = 1.0, harmonic = 0.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
        term *= t / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        sum += harmonic * term;
        if (harmonic * term < 1e-20) break;
    }
    return -(std::log(0.5 * x) + kEulerGamma) * bessel_i0_series(x) + sum;
}

// K1(x) for 0 < x <= 2:
// K1 = 1/x + (log(x/2) + gamma) I1(x)
//      - (x/4) sum_{k>=0} (H_k + H_{k+1}) (x^2/4)^k / (k!(k+1)!).
inline double bessel_k1_small(double x)
{
    const double t = 0.25 * x * x;
    double term = 1.0, hk = 0.0, hk1 = 1.0;
    double sum = 1.0;  // k = 0 contributes (H_0 + H_1) = 1
    for (int k = 1; k < 40; ++k) {
        term *= t / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
        hk1 += 1.0 / (k + 1);
        sum += (hk + hk1) * term;
        if (term < 1e-20) break;
    }
    return 1.0 / x + (std::log(0.5 * x) + kEulerGamma) * bessel_i1_series(x) -
           0.25 * x * sum;
}

}  // namespace detail

// e^x K0(x).
inline double bessel_k0_scaled(double x)
{
    if (!(x > 0.0)) throw std::domain_error("bessel: argument must be positive");
    if (x <= 2.0) return std::exp(x) * detail::bessel_k0_small(x);
    if (x <= 8.0)
        return (1.25 + detail::chebyshev_eval((16.0 / x - 5.0) / 3.0, detail::kAk0, 18)) /
               std::sqrt(x);
    return (1.25 + detail::chebyshev_eval(16.0 / x - 1.0, detail::kAk02, 14)) / std::sqrt(x);
}

// e^x K1(x).
inline double bessel_k1_scaled(double x)
{
    if (!(x > 0.0)) throw std::domain_error("bessel: argument must be positive");
    if (x <= 2.0) return std::exp(x) * detail::bessel_k1_small(x);
    if (x <= 8.0)
        return (1.25 + detail::chebyshev_eval((16.0 / x - 5.0) / 3.0, detail::kAk1, 18)) /
               std::sqrt(x);
    return (1.25 + detail::chebyshev_eval(16.0 / x - 1.0, detail::kAk12, 14)) / std::sqrt(x);
}

// log K_n(x); never overflows.  The recurrence runs on e^x K_j(x) with
// periodic renormalization.
inline double log_bessel_k_int(int n, double x)
{
    if (n < 0) throw std::domain_error("bessel: order must be nonnegative");
    if (!(x > 0.0)) throw std::domain_error("bessel: argument must be positive");
    if (n == 0) return std::log(bessel_k0_scaled(x)) - x;
    double below = bessel_k0_scaled(x);
    double here = bessel_k1_scaled(x);
    double logscale = 0.0;
    for (int j = 1; j < n; ++j) {
        const double next = below + (2.0 * j / x) * here;
        below = here;
        here = next;
        if (here > 1e280) {
            below *= 1e-280;
            here *= 1e-280;
            logscale += 280.0 * std::numbers::ln10;
        }
    }
    return std::log(here) + logscale - x;
}

// K_n(x) for integer n >= 0.  Overflows to +inf only where the value itself
// exceeds the double range; use log_bessel_k_int there.
inline double bessel_k_int(int n, double x)
{
    if (n < 0) throw std::domain_error("bessel: order must be nonnegative");
    if (!(x > 0.0)) throw std::domain_error("bessel: argument must be positive");
    if (n == 0) {
        if (x <= 2.0) return detail::bessel_k0_small(x);
        return std::exp(-x) * bessel_k0_scaled(x);
    }
    if (n == 1) {
        if (x <= 2.0) return detail::bessel_k1_small(x);
        return std::exp(-x) * bessel_k1_scaled(x);
    }
    return std::exp(log_bessel_k_int(n, x));
}

}  // namespace qspeckle

#endif  // QSPECKLE_BESSEL_HPP
