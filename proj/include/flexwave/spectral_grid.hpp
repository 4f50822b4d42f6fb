#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flexwave/dispersion.hpp"

namespace flexwave {

using Complex = std::complex<double>;

namespace detail {
struct FftPlans;
}

// Periodic domain [-l, l) sampled at N equispaced points (N a power of two,
// N >= 16). Real transforms keep the N/2+1 non-negative wavenumbers
// k_j = pi j / l; the transform is unitary (scaled by 1/sqrt(N)).
class Grid {
 public:
  Grid(double half_length, std::size_t n_points);

  double half_length() const noexcept { return half_length_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t spectral_size() const noexcept { return n_ / 2 + 1; }
  double dx() const noexcept { return 2.0 * half_length_ / static_cast<double>(n_); }
  double x(std::size_t i) const noexcept { return -half_length_ + static_cast<double>(i) * dx(); }
  double wavenumber(std::size_t j) const noexcept;
  // Signed wavenumber of full-length (complex) transform index j.
  double signed_wavenumber(std::size_t j) const noexcept;
  const std::vector<double>& wavenumbers() const noexcept { return k_; }

  void forward(std::span<const double> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<double> out) const;
  void forward_complex(std::span<const Complex> in, std::span<Complex> out) const;
  void inverse_complex(std::span<const Complex> in, std::span<Complex> out) const;

  bool operator==(const Grid& other) const noexcept {
    return n_ == other.n_ && half_length_ == other.half_length_;
  }

 private:
  double half_length_;
  std::size_t n_;
  std::vector<double> k_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

// Real surface elevation with cached spectral coefficients.
class PeriodicProfile {
 public:
  // Zero profile on the 16-point grid over [-pi, pi).
  PeriodicProfile();
  PeriodicProfile(Grid grid, std::vector<double> values);
  static PeriodicProfile zeros(const Grid& grid);
  static PeriodicProfile from_coeffs(const Grid& grid, std::vector<Complex> coeffs);
  static PeriodicProfile sample(const Grid& grid, const std::function<double(double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  // All N coefficients, negative wavenumbers filled by conjugate symmetry.
  std::vector<Complex> full_coeffs() const;
  double min() const;
  double max_abs() const;

  PeriodicProfile operator+(const PeriodicProfile& other) const;
  PeriodicProfile operator-(const PeriodicProfile& other) const;
  PeriodicProfile operator*(double s) const;

 private:
  PeriodicProfile(Grid grid, std::vector<double> values, std::vector<Complex> coeffs);

  Grid grid_;
  std::vector<double> values_;
  std::vector<Complex> coeffs_;
};

// Complex samples on a grid, e.g. the positive-band part eta_1^+ or the
// demodulated envelope.
struct ComplexProfile {
  Grid grid;
  std::vector<Complex> values;
  bool band_limited = false;
};

// Symbols act on non-negative wavenumbers; real operators need
// symbol(-k) = conj(symbol(k)), so odd real symbols such as i k are
// supplied as their k >= 0 branch and the Nyquist entry is zeroed.
using RealSymbol = std::function<double(double)>;

PeriodicProfile apply_multiplier(const PeriodicProfile& p, const RealSymbol& symbol);
PeriodicProfile apply_complex_multiplier(const PeriodicProfile& p,
                                         const std::function<Complex(double)>& symbol);
PeriodicProfile derivative(const PeriodicProfile& p, int order);
// p(x + s) by spectral phase shift.
PeriodicProfile shift(const PeriodicProfile& p, double s);
// p(-x) on the symmetric grid.
PeriodicProfile reflect(const PeriodicProfile& p);

double inner(const PeriodicProfile& a, const PeriodicProfile& b);
double integrate(std::span<const double> values, double dx);

// eta = eta1 + eta2 with eta1 carrying the spectrum in
// S = [-k0-delta0, -k0+delta0] u [k0-delta0, k0+delta0]. Requires 0 < delta0 < k0/3.
std::pair<PeriodicProfile, PeriodicProfile> split_eta1(const PeriodicProfile& p,
                                                       const WaveContext& ctx, double delta0);
double default_delta0(const WaveContext& ctx);

// eta_1^+ = F^{-1}[chi_{[k0-delta0, k0+delta0]} eta^] on the original grid.
ComplexProfile positive_band(const PeriodicProfile& p, const WaveContext& ctx, double delta0);

// zeta_eta(X) = (2/mu) eta_1^+(X/mu) exp(-i k0 X/mu) on the slow grid X = mu x.
ComplexProfile demodulate_zeta(const PeriodicProfile& p, double mu, const WaveContext& ctx,
                               double delta0);

struct Norms {
  double h0 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double w1inf = 0.0;
  double triple_alpha = 0.0;
};

Norms norms(const PeriodicProfile& p, const WaveContext& ctx, double alpha, double mu);
double sobolev_norm(const PeriodicProfile& p, double s);
double sobolev_norm(const ComplexProfile& p, double s);

// <a, b>_1 = int (1 + K^2) conj(a^) b^ dK, the H^1 inner product on the profile's grid.
Complex h1_inner(const ComplexProfile& a, const ComplexProfile& b);

// Smallest admissible grid for a soliton of impulse parameter mu:
// l = c_ell * 2 pi / (k0 mu), dx <= (2 pi / k0) / points_per_carrier.
struct GridPolicy {
  double c_ell = 12.0;
  int points_per_carrier = 16;
};
Grid make_grid(const WaveContext& ctx, double mu, const GridPolicy& policy);

// CSV serialisation. The header comment line is written verbatim when non-empty.
void write_profile_csv(const std::string& path, const PeriodicProfile& p,
                       const std::string& header_comment = {});
void write_spectrum_csv(const std::string& path, const PeriodicProfile& p,
                        const std::string& header_comment = {});
PeriodicProfile read_profile_csv(const std::string& path);

}  // namespace flexwave
