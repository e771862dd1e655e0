#pragma once

// Thin FFTW wrapper. Plans are created once per size under a lock and then
// executed through the new-array interface, which is safe to call from many
// threads at once. FFTW_ESTIMATE keeps the chosen algorithm, and therefore
// every rounding, independent of machine load.

#include <complex>
#include <span>

namespace ostrovsky::detail {

/// Real <-> half-complex transform of length n (unnormalized).
class RealFft {
 public:
  explicit RealFft(int n);
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

  int size() const { return n_; }
  /// out[j] = sum_k in[k] exp(+2 pi i j k / n); `in` has n/2+1 entries and
  /// is clobbered.
  void backward(std::span<std::complex<double>> in, std::span<double> out) const;
  /// out[k] = sum_j in[j] exp(-2 pi i j k / n); `in` is clobbered.
  void forward(std::span<double> in, std::span<std::complex<double>> out) const;

 private:
  int n_;
  void* forward_plan_;
  void* backward_plan_;
};

/// Complex transform of length n, in place.
class ComplexFft {
 public:
  explicit ComplexFft(int n);
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ~ComplexFft();

  int size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  int n_;
  void* forward_plan_;
  void* backward_plan_;
};

const RealFft& real_fft(int n);
const ComplexFft& complex_fft(int n);

}  // namespace ostrovsky::detail
