#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace nlh::fft {

namespace {

// FFTW planning is not thread-safe; execution on plan-private buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<std::complex<double>> forward(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> in(v);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> inverse(std::vector<std::complex<double>> spec, int n) {
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (double& x : out) x /= n;
  return out;
}

}  // namespace nlh::fft
