#pragma once

#include <complex>
#include <vector>

namespace nlh::fft {

// Real-to-half-complex transform, unnormalized.
std::vector<std::complex<double>> forward(const std::vector<double>& v);
// Inverse of forward, normalized by 1/n.
std::vector<double> inverse(std::vector<std::complex<double>> spec, int n);

}  // namespace nlh::fft
