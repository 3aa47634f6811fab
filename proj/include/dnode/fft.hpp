#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dnode {

// In-place radix-2 Cooley-Tukey; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// Forward DFT of arbitrary length (Bluestein's chirp-z for non powers of
// two). X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).
std::vector<std::complex<double>> dft(std::span<const double> x);

// |X[k]|^2 for the positive-frequency bins k = 1..floor(N/2).
std::vector<double> power_spectrum(std::span<const double> x);

} // namespace dnode
