#include "dnode/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dnode {
namespace {

using cplx = std::complex<double>;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Chirp factor exp(sign * i * pi * k^2 / n) with the k^2 phase reduced
// mod 2n in integer arithmetic, keeping trig arguments small.
cplx chirp(std::size_t k, std::size_t n, double sign) {
    const auto r = static_cast<double>((k * k) % (2 * n));
    const double ang = sign * std::numbers::pi * r / static_cast<double>(n);
    return {std::cos(ang), std::sin(ang)};
}

std::vector<cplx> bluestein(std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cplx> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = x[k] * chirp(k, n, -1.0);
        b[k] = chirp(k, n, 1.0);
    }
    for (std::size_t k = 1; k < n; ++k) b[m - k] = b[k];
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp(k, n, -1.0);
    return out;
}

} // namespace

void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: size must be 2^k");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) v /= static_cast<double>(n);
    }
}

std::vector<cplx> dft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if ((n & (n - 1)) == 0) {
        std::vector<cplx> a(x.begin(), x.end());
        fft_pow2(a, false);
        return a;
    }
    return bluestein(x);
}

std::vector<double> power_spectrum(std::span<const double> x) {
    const auto spec = dft(x);
    const std::size_t k_max = x.size() / 2;
    std::vector<double> power(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) power[k - 1] = std::norm(spec[k]);
    return power;
}

} // namespace dnode
