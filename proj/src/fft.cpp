#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace ostrovsky::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT;

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  std::vector<double> r(n);
  std::vector<std::complex<double>> c(n / 2 + 1);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(n, r.data(), as_fftw(c.data()), kFlags);
  backward_plan_ = fftw_plan_dft_c2r_1d(n, as_fftw(c.data()), r.data(), kFlags);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void RealFft::backward(std::span<std::complex<double>> in, std::span<double> out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_plan_), as_fftw(in.data()),
                       out.data());
}

void RealFft::forward(std::span<double> in, std::span<std::complex<double>> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       as_fftw(out.data()));
}

ComplexFft::ComplexFft(int n) : n_(n) {
  std::vector<std::complex<double>> c(n);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_1d(n, as_fftw(c.data()), as_fftw(c.data()),
                                   FFTW_FORWARD, kFlags);
  backward_plan_ = fftw_plan_dft_1d(n, as_fftw(c.data()), as_fftw(c.data()),
                                    FFTW_BACKWARD, kFlags);
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void ComplexFft::forward(std::span<std::complex<double>> data) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()),
                   as_fftw(data.data()));
}

void ComplexFft::backward(std::span<std::complex<double>> data) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data.data()),
                   as_fftw(data.data()));
}

namespace {

template <class Fft>
const Fft& shared(int n) {
  static std::mutex cache_mutex;
  static std::map<int, std::unique_ptr<Fft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

// Per-thread front for the shared cache, so hot loops skip the lock.
template <class Fft>
const Fft& cached(int n) {
  thread_local std::map<int, const Fft*> local;
  auto it = local.find(n);
  if (it != local.end()) return *it->second;
  const Fft& fft = shared<Fft>(n);
  local.emplace(n, &fft);
  return fft;
}

}  // namespace

const RealFft& real_fft(int n) { return cached<RealFft>(n); }
const ComplexFft& complex_fft(int n) { return cached<ComplexFft>(n); }

}  // namespace ostrovsky::detail
