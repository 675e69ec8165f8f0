// Real orthonormal 2-D Fourier basis restricted to low frequencies, applied
// with FFTW on each channel plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "uis/measurement.hpp"

namespace uis::detail {
namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long signed_index(std::size_t k, std::size_t n) {
  return 2 * k <= n ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

enum class Kind { kSelfConjugate, kCosine, kSine };

struct BasisVector {
  std::size_t k;
  std::size_t l;
  Kind kind;
};

class FourierImpl final : public MeasurementImpl {
 public:
  FourierImpl(const ImageShape& shape, std::size_t per_channel) : shape_(shape) {
    const auto freqs = lowpass_frequencies(shape.height, shape.width);
    for (const auto& [k, l] : freqs) {
      if (basis_.size() == per_channel) break;
      const std::size_t pk = (shape.height - k) % shape.height;
      const std::size_t pl = (shape.width - l) % shape.width;
      if (pk == k && pl == l) {
        basis_.push_back({k, l, Kind::kSelfConjugate});
      } else {
        basis_.push_back({k, l, Kind::kCosine});
        if (basis_.size() < per_channel) basis_.push_back({k, l, Kind::kSine});
      }
    }

    std::vector<std::complex<double>> a(shape.plane_size()), b(shape.plane_size());
    std::lock_guard lock(planner_mutex());
    const int h = static_cast<int>(shape.height);
    const int w = static_cast<int>(shape.width);
    forward_ = fftw_plan_dft_2d(h, w, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft_2d(h, w, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  ~FourierImpl() override {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  FourierImpl(const FourierImpl&) = delete;
  FourierImpl& operator=(const FourierImpl&) = delete;

  std::size_t rank() const override { return basis_.size() * shape_.channels; }

  void measure(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> out) const override {
    const std::size_t plane = shape_.plane_size();
    const double unit = 1.0 / std::sqrt(static_cast<double>(plane));
    const double pair = std::sqrt(2.0 / static_cast<double>(plane));
    std::vector<std::complex<double>> in(plane), spectrum(plane);
    Eigen::Index k_out = 0;
    for (std::size_t c = 0; c < shape_.channels; ++c) {
      for (std::size_t i = 0; i < plane; ++i) in[i] = x[static_cast<Eigen::Index>(c * plane + i)];
      fftw_execute_dft(forward_, as_fftw(in.data()), as_fftw(spectrum.data()));
      for (const BasisVector& v : basis_) {
        const std::complex<double> f = spectrum[v.k * shape_.width + v.l];
        switch (v.kind) {
          case Kind::kSelfConjugate: out[k_out++] = unit * f.real(); break;
          case Kind::kCosine: out[k_out++] = pair * f.real(); break;
          case Kind::kSine: out[k_out++] = -pair * f.imag(); break;
        }
      }
    }
  }

  void embed(const Eigen::Ref<const Eigen::VectorXd>& coeffs, Eigen::Ref<Eigen::VectorXd> out) const override {
    const std::size_t plane = shape_.plane_size();
    const double unit = 1.0 / std::sqrt(static_cast<double>(plane));
    const double half_pair = 0.5 * std::sqrt(2.0 / static_cast<double>(plane));
    std::vector<std::complex<double>> spectrum(plane), image(plane);
    Eigen::Index k_in = 0;
    for (std::size_t c = 0; c < shape_.channels; ++c) {
      std::fill(spectrum.begin(), spectrum.end(), std::complex<double>{});
      for (const BasisVector& v : basis_) {
        const double a = coeffs[k_in++];
        const std::size_t here = v.k * shape_.width + v.l;
        const std::size_t partner = ((shape_.height - v.k) % shape_.height) * shape_.width +
                                    (shape_.width - v.l) % shape_.width;
        // Cosine a -> a/2 on both members; sine b -> -i b/2 and +i b/2.
        std::complex<double> alpha;
        switch (v.kind) {
          case Kind::kSelfConjugate: spectrum[here] += unit * a; continue;
          case Kind::kCosine: alpha = {half_pair * a, 0.0}; break;
          case Kind::kSine: alpha = {0.0, -half_pair * a}; break;
        }
        spectrum[here] += alpha;
        spectrum[partner] += std::conj(alpha);
      }
      fftw_execute_dft(backward_, as_fftw(spectrum.data()), as_fftw(image.data()));
      for (std::size_t i = 0; i < plane; ++i) out[static_cast<Eigen::Index>(c * plane + i)] = image[i].real();
    }
  }

 private:
  static fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

  ImageShape shape_;
  std::vector<BasisVector> basis_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> lowpass_frequencies(std::size_t height, std::size_t width) {
  struct Entry {
    long radius2, sk, sl;
    std::size_t k, l;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < height; ++k) {
    for (std::size_t l = 0; l < width; ++l) {
      const long sk = signed_index(k, height);
      const long sl = signed_index(l, width);
      const long pk = signed_index((height - k) % height, height);
      const long pl = signed_index((width - l) % width, width);
      // Keep the lexicographically larger member of each conjugate pair.
      if (std::tie(sk, sl) < std::tie(pk, pl)) continue;
      entries.push_back({sk * sk + sl * sl, sk, sl, k, l});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.radius2, a.sk, a.sl) < std::tie(b.radius2, b.sk, b.sl);
  });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) out.emplace_back(e.k, e.l);
  return out;
}

std::shared_ptr<const MeasurementImpl> make_fourier_impl(const ImageShape& shape, std::size_t per_channel) {
  return std::make_shared<FourierImpl>(shape, per_channel);
}

}  // namespace uis::detail
