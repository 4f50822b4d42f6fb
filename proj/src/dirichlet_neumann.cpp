#include "flexwave/dirichlet_neumann.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"

namespace flexwave {

namespace {

using Vec = std::vector<double>;
using CVec = std::vector<Complex>;

bool kept_by_dealias(std::size_t j, std::size_t n) { return 3 * j <= n; }

CVec fwd(const Grid& g, const Vec& v) {
  CVec c(g.spectral_size());
  g.forward(v, c);
  return c;
}

Vec inv(const Grid& g, const CVec& c) {
  Vec v(g.size());
  g.inverse(c, v);
  return v;
}

template <typename S>
Vec apply_symbol(const Grid& g, const CVec& hat, const std::vector<S>& sym) {
  CVec c(hat.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = sym[j] * hat[j];
  return inv(g, c);
}

Vec times(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// Symbols of the recursion
//   V_0 = G_0 phi,
//   V_m = beta_m(D)(eta^m phi_x) - sum_{j<m} c_{m-j}(D)(eta^{m-j} V_j),
// with beta_m(k) = -i k^m x_{m-1}(k)/m!, c_n(k) = k^n x_n(k)/n!,
// x_n = 1 for even n and tanh k for odd n. All symbols carry the 2/3 mask.
struct Expansion {
  Expansion(const Grid& grid, int order) : g(grid), m(order) {
    const std::size_t ns = g.spectral_size();
    g0.assign(ns, 0.0);
    ddx.assign(ns, Complex{});
    beta.assign(m + 1, CVec(ns));
    c.assign(m + 1, Vec(ns, 0.0));
    for (std::size_t j = 0; j < ns; ++j) {
      if (!kept_by_dealias(j, g.size())) continue;
      const double k = g.wavenumber(j);
      const double t = std::tanh(k);
      g0[j] = k * t;
      ddx[j] = Complex(0.0, k);
      double kp = 1.0;
      double fact = 1.0;
      for (int n = 1; n <= m; ++n) {
        kp *= k;
        fact *= n;
        const double x_n = (n % 2 == 0) ? 1.0 : t;
        const double x_prev = ((n - 1) % 2 == 0) ? 1.0 : t;
        c[n][j] = kp * x_n / fact;
        beta[n][j] = Complex(0.0, -kp * x_prev / fact);
      }
    }
  }

  Grid g;
  int m;
  Vec g0;
  CVec ddx;
  std::vector<CVec> beta;
  std::vector<Vec> c;
};

// Symbol tables are reused across calls on the same grid; the cache is per
// thread so concurrent callers never share it.
std::shared_ptr<const Expansion> expansion_for(const Grid& g, int order) {
  thread_local std::vector<std::shared_ptr<const Expansion>> cache;
  for (const auto& e : cache) {
    if (e->g == g && e->m == order) return e;
  }
  auto e = std::make_shared<const Expansion>(g, order);
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.push_back(e);
  return e;
}

std::vector<Vec> powers(const Vec& eta, int m) {
  std::vector<Vec> p(m + 1, Vec(eta.size(), 1.0));
  for (int q = 1; q <= m; ++q) p[q] = times(p[q - 1], eta);
  return p;
}

struct Forward {
  Vec phix;
  std::vector<Vec> v;  // V_0..V_M
};

Forward run_forward(const Expansion& ex, const std::vector<Vec>& ep, const Vec& phi) {
  const Grid& g = ex.g;
  const CVec phi_hat = fwd(g, phi);
  Forward f;
  f.phix = apply_symbol(g, phi_hat, ex.ddx);
  f.v.push_back(apply_symbol(g, phi_hat, ex.g0));
  for (int m = 1; m <= ex.m; ++m) {
    CVec acc = fwd(g, times(ep[m], f.phix));
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] *= ex.beta[m][j];
    for (int j = 0; j < m; ++j) {
      const CVec t = fwd(g, times(ep[m - j], f.v[j]));
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] -= ex.c[m - j][q] * t[q];
    }
    f.v.push_back(inv(g, acc));
  }
  return f;
}

void check_same_grid(const PeriodicProfile& a, const PeriodicProfile& b, const char* who) {
  if (!(a.grid() == b.grid())) throw DomainError(std::string(who) + ": profiles live on different grids");
}

Vec to_vec(const PeriodicProfile& p) { return Vec(p.values().begin(), p.values().end()); }

PeriodicProfile sum_terms(const Grid& g, const std::vector<Vec>& terms) {
  Vec out(g.size(), 0.0);
  for (const Vec& t : terms) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  }
  return PeriodicProfile(g, std::move(out));
}

void validate_first_order_term();

void ensure_validated() {
  static std::once_flag flag;
  std::call_once(flag, validate_first_order_term);
}

std::vector<PeriodicProfile> expansion_terms_unchecked(const PeriodicProfile& eta,
                                                       const PeriodicProfile& phi, int order) {
  const Grid& g = eta.grid();
  const Expansion& ex = *expansion_for(g, order);
  const Forward f = run_forward(ex, powers(to_vec(eta), order), to_vec(phi));
  std::vector<PeriodicProfile> out;
  out.reserve(f.v.size());
  for (const Vec& v : f.v) out.emplace_back(g, v);
  return out;
}

// G_1 from the expansion against the Richardson-extrapolated central
// difference of the elliptic solver at eta = 0.
void validate_first_order_term() {
  const Grid g(std::numbers::pi, 32);
  const PeriodicProfile omega =
      PeriodicProfile::sample(g, [](double x) { return std::cos(x) + 0.4 * std::sin(2.0 * x) - 0.2 * std::cos(3.0 * x); });
  const PeriodicProfile phi =
      PeriodicProfile::sample(g, [](double x) { return std::cos(x) + 0.5 * std::sin(3.0 * x) + 0.3 * std::cos(2.0 * x); });
  DnConfig cfg;
  cfg.oracle_ny = 24;
  const PeriodicProfile g1 = expansion_terms_unchecked(omega, phi, 1)[1];
  auto central = [&](double eps) {
    return (dn_oracle(omega * eps, phi, cfg) - dn_oracle(omega * (-eps), phi, cfg)) * (0.5 / eps);
  };
  const double eps = 2e-3;
  const PeriodicProfile d1 = central(eps);
  const PeriodicProfile d2 = central(0.5 * eps);
  const PeriodicProfile rich = (d2 * 4.0 - d1) * (1.0 / 3.0);
  const double err = sobolev_norm(rich - g1, 0.0) / sobolev_norm(g1, 0.0);
  if (!(err < 1e-8)) {
    std::ostringstream msg;
    msg << "DN expansion: first-order term disagrees with the elliptic solver (relative error " << err
        << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

void DnConfig::validate() const {
  if (expansion_order < 0 || expansion_order > kMaxExpansionOrder) {
    std::ostringstream msg;
    msg << "expansion_order must lie in [0, " << kMaxExpansionOrder << "], got " << expansion_order;
    throw ConfigError(msg.str());
  }
  if (oracle_ny < 16) throw ConfigError("oracle_ny must be >= 16");
  if (!(cg_tol > 0.0) || cg_tol > 1e-6) throw ConfigError("cg_tol must lie in (0, 1e-6]");
  if (cg_max_iter < 1) throw ConfigError("cg_max_iter must be positive");
}

bool in_admissible_set(const PeriodicProfile& eta) {
  return 1.0 + eta.min() > kDepthFloor && sobolev_norm(eta, 2.0) < kBallRadius;
}

void require_admissible(const PeriodicProfile& eta, const std::string& who) {
  const double depth = 1.0 + eta.min();
  const double h2 = sobolev_norm(eta, 2.0);
  if (!(depth > kDepthFloor) || !(h2 < kBallRadius)) {
    std::ostringstream msg;
    msg << who << ": eta outside the admissible set (1 + min eta = " << depth << ", floor " << kDepthFloor
        << "; ||eta||_2 = " << h2 << ", radius " << kBallRadius << ")";
    throw DomainError(msg.str());
  }
}

PeriodicProfile dealias(const PeriodicProfile& p) {
  std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (!kept_by_dealias(j, p.size())) c[j] = Complex{};
  }
  return PeriodicProfile::from_coeffs(p.grid(), std::move(c));
}

PeriodicProfile dn_flat(const PeriodicProfile& phi) {
  return apply_multiplier(phi, [](double k) { return k * std::tanh(k); });
}

PeriodicProfile dn_flat_inverse(const PeriodicProfile& xi) {
  return apply_multiplier(xi, [](double k) { return k == 0.0 ? 0.0 : 1.0 / (k * std::tanh(k)); });
}

std::vector<PeriodicProfile> dn_expansion_terms(const PeriodicProfile& eta,
                                                const PeriodicProfile& phi, const DnConfig& cfg) {
  cfg.validate();
  check_same_grid(eta, phi, "dn_expansion_terms");
  require_admissible(eta, "dn_expansion_terms");
  ensure_validated();
  return expansion_terms_unchecked(eta, phi, cfg.expansion_order);
}

PeriodicProfile dn_apply(const PeriodicProfile& eta, const PeriodicProfile& phi, const DnConfig& cfg) {
  cfg.validate();
  check_same_grid(eta, phi, "dn_apply");
  require_admissible(eta, "dn_apply");
  ensure_validated();
  const Grid& g = eta.grid();
  const Expansion& ex = *expansion_for(g, cfg.expansion_order);
  const Forward f = run_forward(ex, powers(to_vec(eta), cfg.expansion_order), to_vec(phi));
  return sum_terms(g, f.v);
}

DnSolve dn_inverse(const PeriodicProfile& eta, const PeriodicProfile& xi, const DnConfig& cfg,
                   const PeriodicProfile* guess) {
  cfg.validate();
  check_same_grid(eta, xi, "dn_inverse");
  require_admissible(eta, "dn_inverse");
  const double xi_norm = sobolev_norm(xi, 0.0);
  const double mean = xi.coeffs()[0].real() / std::sqrt(static_cast<double>(xi.size()));
  if (std::abs(mean) * std::sqrt(2.0 * xi.grid().half_length()) > 1e-10 * xi_norm) {
    std::ostringstream msg;
    msg << "dn_inverse: right-hand side must have zero mean (mean = " << mean << ")";
    throw DomainError(msg.str());
  }
  const PeriodicProfile b = dealias(xi);
  const double b_norm = sobolev_norm(b, 0.0);
  if (b_norm == 0.0) return DnSolve{PeriodicProfile::zeros(xi.grid()), 0, 0.0};

  PeriodicProfile x = guess ? dealias(*guess) : dn_flat_inverse(b);
  if (guess) {
    check_same_grid(eta, *guess, "dn_inverse");
    std::vector<Complex> c(x.coeffs().begin(), x.coeffs().end());
    c[0] = Complex{};
    x = PeriodicProfile::from_coeffs(x.grid(), std::move(c));
  }
  PeriodicProfile r = b - dn_apply(eta, x, cfg);
  double res = sobolev_norm(r, 0.0) / b_norm;
  if (res <= cfg.cg_tol) return DnSolve{x, 0, res};
  PeriodicProfile z = dn_flat_inverse(r);
  PeriodicProfile p = z;
  double rz = inner(r, z);
  for (int it = 1; it <= cfg.cg_max_iter; ++it) {
    const PeriodicProfile ap = dn_apply(eta, p, cfg);
    const double pap = inner(p, ap);
    if (!(pap > 0.0)) {
      throw ConvergenceError("dn_inverse: operator lost positivity during conjugate gradients", res);
    }
    const double a = rz / pap;
    x = x + p * a;
    r = r - ap * a;
    res = sobolev_norm(r, 0.0) / b_norm;
    if (res <= cfg.cg_tol) return DnSolve{x, it, res};
    z = dn_flat_inverse(r);
    const double rz_new = inner(r, z);
    p = z + p * (rz_new / rz);
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "dn_inverse: no convergence in " << cfg.cg_max_iter << " iterations (relative residual " << res
      << ")";
  throw ConvergenceError(msg.str(), res);
}

PeriodicProfile dn_shape_derivative(const PeriodicProfile& eta, const PeriodicProfile& omega,
                                    const PeriodicProfile& phi, const DnConfig& cfg) {
  cfg.validate();
  check_same_grid(eta, omega, "dn_shape_derivative");
  check_same_grid(eta, phi, "dn_shape_derivative");
  require_admissible(eta, "dn_shape_derivative");
  ensure_validated();
  const Grid& g = eta.grid();
  const int order = cfg.expansion_order;
  const Expansion& ex = *expansion_for(g, order);
  const std::vector<Vec> ep = powers(to_vec(eta), order);
  const Forward f = run_forward(ex, ep, to_vec(phi));
  const Vec w = to_vec(omega);

  std::vector<Vec> vd(order + 1, Vec(g.size(), 0.0));
  for (int m = 1; m <= order; ++m) {
    Vec src(g.size());
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = m * ep[m - 1][i] * w[i] * f.phix[i];
    CVec acc = fwd(g, src);
    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] *= ex.beta[m][q];
    for (int j = 0; j < m; ++j) {
      const int n = m - j;
      for (std::size_t i = 0; i < src.size(); ++i) {
        src[i] = n * ep[n - 1][i] * w[i] * f.v[j][i] + ep[n][i] * vd[j][i];
      }
      const CVec t = fwd(g, src);
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] -= ex.c[n][q] * t[q];
    }
    vd[m] = inv(g, acc);
  }
  return sum_terms(g, vd);
}

PeriodicProfile dn_shape_derivative_identity(const PeriodicProfile& eta,
                                             const PeriodicProfile& omega,
                                             const PeriodicProfile& phi, const DnConfig& cfg) {
  const PeriodicProfile gphi = dn_apply(eta, phi, cfg);
  const PeriodicProfile ex = derivative(eta, 1);
  const PeriodicProfile px = derivative(phi, 1);
  const std::size_t n = eta.size();
  Vec wz(n);
  Vec wv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (gphi[i] + ex[i] * px[i]) / (1.0 + ex[i] * ex[i]);
    const double v = px[i] - ex[i] * z;
    wz[i] = omega[i] * z;
    wv[i] = omega[i] * v;
  }
  const PeriodicProfile term1 = dn_apply(eta, PeriodicProfile(eta.grid(), std::move(wz)), cfg);
  const PeriodicProfile term2 = derivative(PeriodicProfile(eta.grid(), std::move(wv)), 1);
  return (term1 + term2) * -1.0;
}

PeriodicProfile dn_pairing_gradient(const PeriodicProfile& eta, const PeriodicProfile& phi,
                                    const PeriodicProfile& psi, const DnConfig& cfg) {
  cfg.validate();
  check_same_grid(eta, phi, "dn_pairing_gradient");
  check_same_grid(eta, psi, "dn_pairing_gradient");
  require_admissible(eta, "dn_pairing_gradient");
  ensure_validated();
  const Grid& g = eta.grid();
  const int order = cfg.expansion_order;
  const std::size_t n = g.size();
  Vec grad(n, 0.0);
  if (order == 0) return PeriodicProfile(g, std::move(grad));
  const Expansion& ex = *expansion_for(g, order);
  const std::vector<Vec> ep = powers(to_vec(eta), order);
  const Forward f = run_forward(ex, ep, to_vec(phi));
  const Vec ps = to_vec(psi);

  // lambda_m = psi - sum_{m' > m} eta^{m'-m} c_{m'-m}(D) lambda_{m'}; cl[m][q] = c_q(D) lambda_m.
  std::vector<std::vector<Vec>> cl(order + 1);
  for (int m = order; m >= 1; --m) {
    Vec lam = ps;
    for (int mp = m + 1; mp <= order; ++mp) {
      const Vec& t = cl[mp][mp - m];
      for (std::size_t i = 0; i < n; ++i) lam[i] -= ep[mp - m][i] * t[i];
    }
    const CVec lam_hat = fwd(g, lam);
    cl[m].assign(m + 1, Vec());
    for (int q = 1; q <= m; ++q) cl[m][q] = apply_symbol(g, lam_hat, ex.c[q]);
    CVec bconj(ex.beta[m].size());
    for (std::size_t q = 0; q < bconj.size(); ++q) bconj[q] = std::conj(ex.beta[m][q]);
    const Vec bl = apply_symbol(g, lam_hat, bconj);
    for (std::size_t i = 0; i < n; ++i) grad[i] += m * ep[m - 1][i] * f.phix[i] * bl[i];
    for (int j = 0; j < m; ++j) {
      const int q = m - j;
      const Vec& t = cl[m][q];
      for (std::size_t i = 0; i < n; ++i) grad[i] -= q * ep[q - 1][i] * f.v[j][i] * t[i];
    }
  }
  return PeriodicProfile(g, std::move(grad));
}

}  // namespace flexwave
