#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/errors.hpp"

namespace flexwave {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Chebyshev differentiation matrix on t_j = cos(pi j / n), j = 0..n.
MatrixXd cheb_matrix(int n) {
  VectorXd t(n + 1);
  VectorXd c(n + 1);
  for (int j = 0; j <= n; ++j) {
    t(j) = std::cos(std::numbers::pi * j / n);
    c(j) = ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
  }
  MatrixXd d = MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i != j) d(i, j) = (c(i) / c(j)) / (t(i) - t(j));
    }
  }
  for (int i = 0; i <= n; ++i) d(i, i) = -d.row(i).sum();
  return d;
}

// Mapped Laplace problem for w = phi - Phi on levels s_0 = 0 .. s_{n-1};
// w = 0 at s_n = 1 and w_s = 0 at s = 0.
class MappedStrip {
 public:
  MappedStrip(const PeriodicProfile& eta, int ny)
      : g_(eta.grid()), n_(ny), nx_(eta.size()) {
    const MatrixXd d = cheb_matrix(ny);
    ds_ = -2.0 * d;
    dss_ = ds_ * ds_;
    s_.resize(ny + 1);
    for (int j = 0; j <= ny; ++j) s_(j) = 0.5 * (1.0 - std::cos(std::numbers::pi * j / ny));
    const PeriodicProfile ex = derivative(eta, 1);
    const PeriodicProfile exx = derivative(eta, 2);
    h_.resize(nx_);
    hx_.resize(nx_);
    hxx_.resize(nx_);
    double hbar = 0.0;
    for (std::size_t i = 0; i < nx_; ++i) {
      h_[i] = 1.0 + eta[i];
      hx_[i] = ex[i];
      hxx_[i] = exx[i];
      hbar += h_[i];
    }
    hbar /= static_cast<double>(nx_);
    // Flat operator per Fourier mode: Neumann row, then Dss - hbar^2 k^2.
    for (std::size_t q = 0; q < g_.spectral_size(); ++q) {
      const double k = g_.wavenumber(q);
      MatrixXd a = dss_.topLeftCorner(n_, n_);
      a.diagonal().array() -= hbar * hbar * k * k;
      a.row(0) = ds_.row(0).head(n_);
      lu_.emplace_back(a);
    }
  }

  std::size_t unknowns() const { return static_cast<std::size_t>(n_) * nx_; }

  VectorXd apply(const VectorXd& w) const {
    const std::size_t nx = nx_;
    MatrixXd wm = Eigen::Map<const MatrixXd>(w.data(), nx, n_);  // column j = level j
    MatrixXd wx(nx, n_);
    MatrixXd wxx(nx, n_);
    std::vector<Complex> hat(g_.spectral_size());
    std::vector<Complex> tmp(g_.spectral_size());
    std::vector<double> col(nx);
    for (int j = 0; j < n_; ++j) {
      g_.forward(std::span<const double>(wm.col(j).data(), nx), hat);
      for (std::size_t q = 0; q < hat.size(); ++q) {
        const double k = g_.wavenumber(q);
        tmp[q] = (q + 1 == hat.size()) ? Complex{} : Complex(0.0, k) * hat[q];
      }
      g_.inverse(tmp, col);
      wx.col(j) = Eigen::Map<VectorXd>(col.data(), nx);
      for (std::size_t q = 0; q < hat.size(); ++q) {
        const double k = g_.wavenumber(q);
        tmp[q] = -k * k * hat[q];
      }
      g_.inverse(tmp, col);
      wxx.col(j) = Eigen::Map<VectorXd>(col.data(), nx);
    }
    const MatrixXd dsn = ds_.leftCols(n_).transpose();
    const MatrixXd dssn = dss_.leftCols(n_).transpose();
    const MatrixXd ws = wm * dsn;
    const MatrixXd wss = wm * dssn;
    const MatrixXd wxs = wx * dsn;
    VectorXd out(unknowns());
    Eigen::Map<MatrixXd> om(out.data(), nx, n_);
    om.col(0) = ws.col(0);
    for (int j = 1; j < n_; ++j) {
      const double s = s_(j);
      for (std::size_t i = 0; i < nx; ++i) {
        const double h = h_[i];
        const double hx = hx_[i];
        om(i, j) = h * h * wxx(i, j) - 2.0 * s * h * hx * wxs(i, j) + (1.0 + s * s * hx * hx) * wss(i, j) -
                   s * (h * hxx_[i] - 2.0 * hx * hx) * ws(i, j);
      }
    }
    return out;
  }

  VectorXd precondition(const VectorXd& r) const {
    const std::size_t nx = nx_;
    const std::size_t ns = g_.spectral_size();
    Eigen::Map<const MatrixXd> rm(r.data(), nx, n_);
    Eigen::MatrixXcd hat(ns, n_);
    std::vector<Complex> buf(ns);
    for (int j = 0; j < n_; ++j) {
      g_.forward(std::span<const double>(rm.col(j).data(), nx), buf);
      for (std::size_t q = 0; q < ns; ++q) hat(static_cast<Eigen::Index>(q), j) = buf[q];
    }
    for (std::size_t q = 0; q < ns; ++q) {
      MatrixXd rhs(n_, 2);
      for (int j = 0; j < n_; ++j) {
        rhs(j, 0) = hat(static_cast<Eigen::Index>(q), j).real();
        rhs(j, 1) = hat(static_cast<Eigen::Index>(q), j).imag();
      }
      const MatrixXd sol = lu_[q].solve(rhs);
      for (int j = 0; j < n_; ++j) hat(static_cast<Eigen::Index>(q), j) = Complex(sol(j, 0), sol(j, 1));
    }
    VectorXd out(unknowns());
    std::vector<double> col(nx);
    for (int j = 0; j < n_; ++j) {
      for (std::size_t q = 0; q < ns; ++q) buf[q] = hat(static_cast<Eigen::Index>(q), j);
      g_.inverse(buf, col);
      out.segment(static_cast<Eigen::Index>(j * nx), static_cast<Eigen::Index>(nx)) =
          Eigen::Map<VectorXd>(col.data(), nx);
    }
    return out;
  }

  // w_s at s = 1.
  VectorXd surface_slope(const VectorXd& w) const {
    Eigen::Map<const MatrixXd> wm(w.data(), nx_, n_);
    return wm * ds_.row(n_).head(n_).transpose();
  }

  const std::vector<double>& h() const { return h_; }
  const std::vector<double>& hx() const { return hx_; }

 private:
  const Grid& g_;
  int n_;
  std::size_t nx_;
  MatrixXd ds_;
  MatrixXd dss_;
  VectorXd s_;
  std::vector<double> h_;
  std::vector<double> hx_;
  std::vector<double> hxx_;
  std::vector<Eigen::PartialPivLU<MatrixXd>> lu_;
};

// Right-preconditioned restarted GMRES. The true residual of the collocation
// system stalls near 1e-11 in double precision; a restart cycle that no longer
// halves it ends the solve once it is below `accept`.
VectorXd gmres(const MappedStrip& op, const VectorXd& b, double tol, double accept, int restart,
               int max_iter) {
  const double b_norm = b.norm();
  VectorXd x = VectorXd::Zero(b.size());
  if (b_norm == 0.0) return x;
  int total = 0;
  double res = 1.0;
  double prev = 2.0;
  while (total < max_iter) {
    const VectorXd r = b - op.apply(x);
    double beta = r.norm();
    res = beta / b_norm;
    if (res <= tol || (res <= accept && res > 0.5 * prev)) return x;
    prev = res;
    MatrixXd v(b.size(), restart + 1);
    MatrixXd hmat = MatrixXd::Zero(restart + 1, restart);
    VectorXd cs = VectorXd::Zero(restart);
    VectorXd sn = VectorXd::Zero(restart);
    VectorXd e = VectorXd::Zero(restart + 1);
    e(0) = beta;
    v.col(0) = r / beta;
    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      VectorXd w = op.apply(op.precondition(v.col(k)));
      for (int i = 0; i <= k; ++i) {
        hmat(i, k) = w.dot(v.col(i));
        w -= hmat(i, k) * v.col(i);
      }
      // second Gram-Schmidt pass for stability at tight tolerances
      for (int i = 0; i <= k; ++i) {
        const double corr = w.dot(v.col(i));
        hmat(i, k) += corr;
        w -= corr * v.col(i);
      }
      hmat(k + 1, k) = w.norm();
      if (hmat(k + 1, k) > 0.0) v.col(k + 1) = w / hmat(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * hmat(i, k) + sn(i) * hmat(i + 1, k);
        hmat(i + 1, k) = -sn(i) * hmat(i, k) + cs(i) * hmat(i + 1, k);
        hmat(i, k) = t;
      }
      const double denom = std::hypot(hmat(k, k), hmat(k + 1, k));
      cs(k) = hmat(k, k) / denom;
      sn(k) = hmat(k + 1, k) / denom;
      hmat(k, k) = denom;
      hmat(k + 1, k) = 0.0;
      e(k + 1) = -sn(k) * e(k);
      e(k) = cs(k) * e(k);
      res = std::abs(e(k + 1)) / b_norm;
      if (res <= tol) {
        ++k;
        break;
      }
    }
    const VectorXd y = hmat.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(e.head(k));
    x += op.precondition(v.leftCols(k) * y);
  }
  std::ostringstream msg;
  msg << "dn_oracle: GMRES did not converge in " << max_iter << " iterations (relative residual " << res
      << ")";
  throw ConvergenceError(msg.str(), res);
}

}  // namespace

PeriodicProfile dn_oracle(const PeriodicProfile& eta, const PeriodicProfile& phi, const DnConfig& cfg) {
  cfg.validate();
  if (!(eta.grid() == phi.grid())) throw DomainError("dn_oracle: profiles live on different grids");
  require_admissible(eta, "dn_oracle");
  const MappedStrip strip(eta, cfg.oracle_ny);
  const std::size_t nx = eta.size();
  const PeriodicProfile phix = derivative(phi, 1);
  const PeriodicProfile phixx = derivative(phi, 2);
  VectorXd b = VectorXd::Zero(static_cast<Eigen::Index>(strip.unknowns()));
  for (int j = 1; j < cfg.oracle_ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double h = strip.h()[i];
      b(static_cast<Eigen::Index>(j * nx + i)) = -h * h * phixx[i];
    }
  }
  const VectorXd w = gmres(strip, b, 1e-13, 1e-10, 60, 600);
  const VectorXd ws = strip.surface_slope(w);
  std::vector<double> out(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double hx = strip.hx()[i];
    out[i] = (1.0 + hx * hx) / strip.h()[i] * ws(static_cast<Eigen::Index>(i)) - hx * phix[i];
  }
  return PeriodicProfile(eta.grid(), std::move(out));
}

}  // namespace flexwave
