#include "flexwave/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"

namespace flexwave {

namespace detail {

// FFTW planning is not thread safe; execution on caller-owned arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  explicit FftPlans(std::size_t n) : n(n) {
    const int ni = static_cast<int>(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n);
    fftw_complex* c2 = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c = fftw_plan_dft_r2c_1d(ni, r, c, flags);
    c2r = fftw_plan_dft_c2r_1d(ni, c, r, flags);
    c2c_fwd = fftw_plan_dft_1d(ni, c, c2, FFTW_FORWARD, flags);
    c2c_bwd = fftw_plan_dft_1d(ni, c, c2, FFTW_BACKWARD, flags);
    fftw_free(r);
    fftw_free(c);
    fftw_free(c2);
  }
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
    fftw_destroy_plan(c2c_fwd);
    fftw_destroy_plan(c2c_bwd);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  std::size_t n;
  fftw_plan r2c{};
  fftw_plan c2r{};
  fftw_plan c2c_fwd{};
  fftw_plan c2c_bwd{};
};

namespace {

std::shared_ptr<const FftPlans> plans_for(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plans = std::make_shared<const FftPlans>(n);
  cache.emplace(n, plans);
  return plans;
}

}  // namespace
}  // namespace detail

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

// Weight of half-spectrum entry j in a full-spectrum sum.
double half_weight(std::size_t j, std::size_t n) { return (j == 0 || 2 * j == n) ? 1.0 : 2.0; }

}  // namespace

Grid::Grid(double half_length, std::size_t n_points) : half_length_(half_length), n_(n_points) {
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw ConfigError("Grid: half_length must be positive and finite");
  }
  if (n_points < 16 || !is_power_of_two(n_points)) {
    std::ostringstream msg;
    msg << "Grid: n_points must be a power of two >= 16, got " << n_points;
    throw ConfigError(msg.str());
  }
  k_.resize(spectral_size());
  for (std::size_t j = 0; j < k_.size(); ++j) k_[j] = wavenumber(j);
  plans_ = detail::plans_for(n_);
}

double Grid::wavenumber(std::size_t j) const noexcept {
  return std::numbers::pi * static_cast<double>(j) / half_length_;
}

double Grid::signed_wavenumber(std::size_t j) const noexcept {
  const double jj = j < n_ / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n_);
  return std::numbers::pi * jj / half_length_;
}

void Grid::forward(std::span<const double> in, std::span<Complex> out) const {
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()), as_fftw(out.data()));
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (std::size_t j = 0; j < spectral_size(); ++j) out[j] *= s;
}

void Grid::inverse(std::span<const Complex> in, std::span<double> out) const {
  std::vector<Complex> scratch(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(spectral_size()));
  fftw_execute_dft_c2r(plans_->c2r, as_fftw(scratch.data()), out.data());
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (std::size_t i = 0; i < n_; ++i) out[i] *= s;
}

void Grid::forward_complex(std::span<const Complex> in, std::span<Complex> out) const {
  fftw_execute_dft(plans_->c2c_fwd, as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (std::size_t j = 0; j < n_; ++j) out[j] *= s;
}

void Grid::inverse_complex(std::span<const Complex> in, std::span<Complex> out) const {
  fftw_execute_dft(plans_->c2c_bwd, as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (std::size_t j = 0; j < n_; ++j) out[j] *= s;
}

// ---------------------------------------------------------------------------

PeriodicProfile::PeriodicProfile()
    : grid_(std::numbers::pi, 16), values_(16, 0.0), coeffs_(9, Complex{}) {}

PeriodicProfile::PeriodicProfile(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("PeriodicProfile: value count does not match grid size");
  }
  coeffs_.resize(grid_.spectral_size());
  grid_.forward(values_, coeffs_);
}

PeriodicProfile::PeriodicProfile(Grid grid, std::vector<double> values, std::vector<Complex> coeffs)
    : grid_(std::move(grid)), values_(std::move(values)), coeffs_(std::move(coeffs)) {}

PeriodicProfile PeriodicProfile::zeros(const Grid& grid) {
  return PeriodicProfile(grid, std::vector<double>(grid.size(), 0.0),
                         std::vector<Complex>(grid.spectral_size(), Complex{}));
}

PeriodicProfile PeriodicProfile::from_coeffs(const Grid& grid, std::vector<Complex> coeffs) {
  if (coeffs.size() != grid.spectral_size()) {
    throw DomainError("PeriodicProfile::from_coeffs: coefficient count does not match grid");
  }
  coeffs.front() = Complex(coeffs.front().real(), 0.0);
  coeffs.back() = Complex(coeffs.back().real(), 0.0);
  std::vector<double> values(grid.size());
  grid.inverse(coeffs, values);
  return PeriodicProfile(grid, std::move(values), std::move(coeffs));
}

PeriodicProfile PeriodicProfile::sample(const Grid& grid, const std::function<double(double)>& fn) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = fn(grid.x(i));
  return PeriodicProfile(grid, std::move(values));
}

std::vector<Complex> PeriodicProfile::full_coeffs() const {
  const std::size_t n = grid_.size();
  std::vector<Complex> full(n);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) full[j] = coeffs_[j];
  for (std::size_t j = 1; j < n / 2; ++j) full[n - j] = std::conj(coeffs_[j]);
  return full;
}

double PeriodicProfile::min() const { return *std::min_element(values_.begin(), values_.end()); }

double PeriodicProfile::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

PeriodicProfile PeriodicProfile::operator+(const PeriodicProfile& other) const {
  std::vector<double> v(values_);
  std::vector<Complex> c(coeffs_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  for (std::size_t j = 0; j < c.size(); ++j) c[j] += other.coeffs_[j];
  return PeriodicProfile(grid_, std::move(v), std::move(c));
}

PeriodicProfile PeriodicProfile::operator-(const PeriodicProfile& other) const {
  std::vector<double> v(values_);
  std::vector<Complex> c(coeffs_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
  for (std::size_t j = 0; j < c.size(); ++j) c[j] -= other.coeffs_[j];
  return PeriodicProfile(grid_, std::move(v), std::move(c));
}

PeriodicProfile PeriodicProfile::operator*(double s) const {
  std::vector<double> v(values_);
  std::vector<Complex> c(coeffs_);
  for (auto& x : v) x *= s;
  for (auto& x : c) x *= s;
  return PeriodicProfile(grid_, std::move(v), std::move(c));
}

// ---------------------------------------------------------------------------

PeriodicProfile apply_multiplier(const PeriodicProfile& p, const RealSymbol& symbol) {
  const Grid& g = p.grid();
  std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double s = symbol(g.wavenumber(j));
    if (!std::isfinite(s)) {
      std::ostringstream msg;
      msg << "apply_multiplier: symbol is not finite at k=" << g.wavenumber(j);
      throw DomainError(msg.str());
    }
    c[j] *= s;
  }
  return PeriodicProfile::from_coeffs(g, std::move(c));
}

PeriodicProfile apply_complex_multiplier(const PeriodicProfile& p,
                                         const std::function<Complex(double)>& symbol) {
  const Grid& g = p.grid();
  std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
  for (std::size_t j = 0; j < c.size(); ++j) {
    Complex s = symbol(g.wavenumber(j));
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      std::ostringstream msg;
      msg << "apply_complex_multiplier: symbol is not finite at k=" << g.wavenumber(j);
      throw DomainError(msg.str());
    }
    if (j == 0 || j + 1 == c.size()) s = Complex(s.real(), 0.0);
    c[j] *= s;
  }
  return PeriodicProfile::from_coeffs(g, std::move(c));
}

PeriodicProfile derivative(const PeriodicProfile& p, int order) {
  return apply_complex_multiplier(p, [order](double k) { return std::pow(Complex(0.0, k), order); });
}

PeriodicProfile shift(const PeriodicProfile& p, double s) {
  return apply_complex_multiplier(p, [s](double k) { return std::exp(Complex(0.0, k * s)); });
}

PeriodicProfile reflect(const PeriodicProfile& p) {
  const std::size_t n = p.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = p[(n - i) % n];
  return PeriodicProfile(p.grid(), std::move(v));
}

double integrate(std::span<const double> values, double dx) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * dx;
}

double inner(const PeriodicProfile& a, const PeriodicProfile& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().dx();
}

double default_delta0(const WaveContext& ctx) { return 0.25 * ctx.k0; }

namespace {

void check_delta0(const WaveContext& ctx, double delta0) {
  if (!(delta0 > 0.0) || !(delta0 < ctx.k0 / 3.0)) {
    std::ostringstream msg;
    msg << "delta0 must lie in (0, k0/3) = (0, " << ctx.k0 / 3.0 << "), got " << delta0;
    throw DomainError(msg.str());
  }
}

bool in_band(double k, const WaveContext& ctx, double delta0) {
  return std::abs(k - ctx.k0) <= delta0;
}

}  // namespace

std::pair<PeriodicProfile, PeriodicProfile> split_eta1(const PeriodicProfile& p,
                                                       const WaveContext& ctx, double delta0) {
  check_delta0(ctx, delta0);
  const Grid& g = p.grid();
  std::vector<Complex> c1(g.spectral_size());
  std::vector<Complex> c2(p.coeffs().begin(), p.coeffs().end());
  for (std::size_t j = 0; j < c1.size(); ++j) {
    if (in_band(g.wavenumber(j), ctx, delta0)) {
      c1[j] = c2[j];
      c2[j] = Complex{};
    }
  }
  return {PeriodicProfile::from_coeffs(g, std::move(c1)),
          PeriodicProfile::from_coeffs(g, std::move(c2))};
}

ComplexProfile positive_band(const PeriodicProfile& p, const WaveContext& ctx, double delta0) {
  check_delta0(ctx, delta0);
  const Grid& g = p.grid();
  std::vector<Complex> full(g.size());
  std::size_t count = 0;
  for (std::size_t j = 1; j + 1 < g.spectral_size(); ++j) {
    if (in_band(g.wavenumber(j), ctx, delta0)) {
      full[j] = p.coeffs()[j];
      ++count;
    }
  }
  if (count == 0) {
    throw DomainError("positive_band: no grid wavenumber falls in [k0-delta0, k0+delta0] (resolution)");
  }
  ComplexProfile out{g, std::vector<Complex>(g.size()), true};
  g.inverse_complex(full, out.values);
  return out;
}

ComplexProfile demodulate_zeta(const PeriodicProfile& p, double mu, const WaveContext& ctx,
                               double delta0) {
  if (!(mu > 0.0)) throw DomainError("demodulate_zeta: mu must be positive");
  const ComplexProfile band = positive_band(p, ctx, delta0);
  const Grid& g = p.grid();
  Grid slow(mu * g.half_length(), g.size());
  ComplexProfile out{slow, std::vector<Complex>(g.size()), true};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    out.values[i] = (2.0 / mu) * band.values[i] * std::exp(Complex(0.0, -ctx.k0 * x));
  }
  return out;
}

double sobolev_weight(double k, double s) {
  const double w = 1.0 + k * k;
  if (s == 0.0) return 1.0;
  if (s == 1.0) return w;
  if (s == 2.0) return w * w;
  return std::pow(w, s);
}

double sobolev_norm(const PeriodicProfile& p, double s) {
  const Grid& g = p.grid();
  double acc = 0.0;
  for (std::size_t j = 0; j < g.spectral_size(); ++j) {
    acc += half_weight(j, g.size()) * sobolev_weight(g.wavenumber(j), s) * std::norm(p.coeffs()[j]);
  }
  return std::sqrt(acc * g.dx());
}

double sobolev_norm(const ComplexProfile& p, double s) {
  const Grid& g = p.grid;
  std::vector<Complex> c(g.size());
  g.forward_complex(p.values, c);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    acc += sobolev_weight(g.signed_wavenumber(j), s) * std::norm(c[j]);
  }
  return std::sqrt(acc * g.dx());
}

Complex h1_inner(const ComplexProfile& a, const ComplexProfile& b) {
  const Grid& g = a.grid;
  std::vector<Complex> ca(g.size());
  std::vector<Complex> cb(g.size());
  g.forward_complex(a.values, ca);
  g.forward_complex(b.values, cb);
  Complex acc{};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double k = g.signed_wavenumber(j);
    acc += (1.0 + k * k) * std::conj(ca[j]) * cb[j];
  }
  return acc * g.dx();
}

Norms norms(const PeriodicProfile& p, const WaveContext& ctx, double alpha, double mu) {
  Norms out;
  out.h0 = sobolev_norm(p, 0.0);
  out.h1 = sobolev_norm(p, 1.0);
  out.h2 = sobolev_norm(p, 2.0);
  const PeriodicProfile px = derivative(p, 1);
  out.w1inf = std::max(p.max_abs(), px.max_abs());
  const Grid& g = p.grid();
  const double scale = std::pow(mu, -4.0 * alpha);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.spectral_size(); ++j) {
    const double d = g.wavenumber(j) - ctx.k0;
    acc += half_weight(j, g.size()) * (1.0 + scale * d * d * d * d) * std::norm(p.coeffs()[j]);
  }
  out.triple_alpha = std::sqrt(acc * g.dx());
  return out;
}

Grid make_grid(const WaveContext& ctx, double mu, const GridPolicy& policy) {
  if (!(mu > 0.0)) throw DomainError("make_grid: mu must be positive");
  if (!(policy.c_ell > 0.0) || policy.points_per_carrier < 4) {
    throw ConfigError("make_grid: c_ell must be positive and points_per_carrier >= 4");
  }
  const double half_length = policy.c_ell * 2.0 * std::numbers::pi / (ctx.k0 * mu);
  const double max_dx = (2.0 * std::numbers::pi / ctx.k0) / policy.points_per_carrier;
  const double needed = 2.0 * half_length / max_dx;
  std::size_t n = 16;
  while (static_cast<double>(n) < needed) {
    n *= 2;
    if (n > (std::size_t{1} << 26)) throw ConfigError("make_grid: grid exceeds 2^26 points");
  }
  return Grid(half_length, n);
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_profile_csv(const std::string& path, const PeriodicProfile& p,
                       const std::string& header_comment) {
  std::ofstream out = open_out(path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "x,eta\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << fmt17(p.grid().x(i)) << "," << fmt17(p[i]) << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_spectrum_csv(const std::string& path, const PeriodicProfile& p,
                        const std::string& header_comment) {
  std::ofstream out = open_out(path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "k,re,im\n";
  for (std::size_t j = 0; j < p.coeffs().size(); ++j) {
    out << fmt17(p.grid().wavenumber(j)) << "," << fmt17(p.coeffs()[j].real()) << ","
        << fmt17(p.coeffs()[j].imag()) << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

PeriodicProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> xs;
  std::vector<double> vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed profile row in '" + path + "'");
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 16) throw IoError("profile '" + path + "' has fewer than 16 rows");
  const double dx = xs[1] - xs[0];
  const double half_length = 0.5 * dx * static_cast<double>(xs.size());
  if (std::abs(xs[0] + half_length) > 1e-9 * half_length) {
    throw IoError("profile '" + path + "' does not start at -l");
  }
  return PeriodicProfile(Grid(half_length, xs.size()), std::move(vs));
}

}  // namespace flexwave
