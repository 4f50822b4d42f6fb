#include "flexwave/minimizer.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/report_io.hpp"

namespace flexwave {

void MinimizeConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("minimize: mu must be positive");
  dn.validate();
  if (!(initial_step > 0.0)) throw ConfigError("minimize: initial_step must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("minimize: backtrack must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 0.5)) throw ConfigError("minimize: armijo must lie in (0, 1/2)");
  if (!(grad_tol > 0.0) || !(stall_tol > 0.0)) throw ConfigError("minimize: tolerances must be positive");
  if (stall_window < 1 || max_iter < 0 || lbfgs_memory < 0) {
    throw ConfigError("minimize: stall_window, max_iter and lbfgs_memory must be non-negative");
  }
  if (checkpoint_every < 1) throw ConfigError("minimize: checkpoint_every must be positive");
  if (carrier_phases.empty()) throw ConfigError("minimize: carrier_phases must not be empty");
}

namespace {

// Relative rounding level of J: FFTs and the DN recursion leave about 1e-14.
constexpr double kNoiseLevel = 1e-12;

PeriodicProfile symmetrize(const PeriodicProfile& p) { return (p + reflect(p)) * 0.5; }

struct Pair {
  PeriodicProfile s;
  PeriodicProfile y;
  double rho;
};

MinimizeResult descend(const WaveContext& ctx, const MinimizeConfig& cfg, const NlsCoefficients& coeffs,
                       PeriodicProfile eta, MinimizeResult res) {
  const double mu = cfg.mu;
  const bool focussing = coeffs.focussing() < 0.0;
  if (!in_admissible_set(eta)) {
    require_admissible(eta, "minimize: initial guess");
  }
  if (cfg.enforce_even) eta = symmetrize(eta);

  // Preconditioner: inverse of the quadratic Hessian symbol g(k) + sigma f(k),
  // sigma = 2 nu0 |nu - nu0| at the predicted speed.
  const double defect = focussing ? std::abs(coeffs.alpha_nls * coeffs.nu_nls) * mu * mu : mu * mu;
  const double sigma = std::max(2.0 * ctx.nu0 * defect, 1e-12);
  const RealSymbol psym = [&ctx, sigma](double k) {
    return 1.0 / (eval_g(k, ctx).value + sigma * eval_f(k).value);
  };
  auto precond = [&](const PeriodicProfile& v) { return apply_multiplier(v, psym); };
  auto project = [&](const PeriodicProfile& v) { return cfg.enforce_even ? symmetrize(v) : v; };

  JValue cur = eval_J_with_gradient(eta, mu, ctx, cfg.dn);
  PeriodicProfile grad = project(cur.gradient);
  res.history.push_back(cur.value);
  std::deque<Pair> memory;
  int it = 0;
  std::vector<double>& grad_history = res.grad_history;
  res.stop_reason = "iteration cap";
  for (; it < cfg.max_iter; ++it) {
    const PeriodicProfile pg = precond(grad);
    res.grad_norm = std::sqrt(std::max(0.0, inner(grad, pg)));
    grad_history.push_back(res.grad_norm);
    if (res.grad_norm <= cfg.grad_tol * std::max(1.0, std::abs(cur.value))) {
      res.stop_reason = "gradient tolerance";
      break;
    }
    // J stalls at rounding long before the gradient does, so a stall also
    // needs the gradient to have stopped shrinking over the window.
    const std::size_t h = res.history.size();
    const std::size_t w = static_cast<std::size_t>(cfg.stall_window);
    if (h > w &&
        std::abs(res.history[h - 1] - res.history[h - 1 - w]) <= cfg.stall_tol * std::abs(res.history[h - 1]) &&
        grad_history[h - 1] * 1.1 >= grad_history[h - 1 - w]) {
      res.stop_reason = "energy stall";
      break;
    }

    // Two-loop recursion with H0 = scale * P.
    PeriodicProfile q = grad;
    std::vector<double> a(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      a[i] = memory[i].rho * inner(memory[i].s, q);
      q = q - memory[i].y * a[i];
    }
    double scale = 1.0;
    if (!memory.empty()) {
      const Pair& last = memory.back();
      scale = 1.0 / (last.rho * inner(last.y, precond(last.y)));
    }
    PeriodicProfile d = precond(q) * scale;
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double b = memory[i].rho * inner(memory[i].y, d);
      d = d + memory[i].s * (a[i] - b);
    }
    d = project(d * -1.0);
    double slope = inner(grad, d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = project(pg * -1.0);
      slope = inner(grad, d);
    }

    double t = cfg.initial_step;
    if (memory.empty()) {
      // First or reset step: limit the move to a fraction of the profile size.
      const double dn = sobolev_norm(d, 0.0);
      const double en = sobolev_norm(eta, 0.0);
      if (dn > 0.0) t = std::min(t, 0.1 * en / dn);
    }
    bool accepted = false;
    PeriodicProfile trial;
    JValue tv;
    for (int ls = 0; ls < 60; ++ls, t *= cfg.backtrack) {
      trial = project(eta + d * t);
      if (!in_admissible_set(trial)) {
        res.constraint_active = true;
        continue;
      }
      try {
        tv = eval_J_with_gradient(trial, mu, ctx, cfg.dn, &cur.potential);
      } catch (const SolverError&) {
        continue;
      } catch (const DomainError&) {
        continue;
      }
      if (tv.value <= cur.value + cfg.armijo * t * slope) {
        accepted = true;
        break;
      }
      // Once the predicted decrease is below the rounding noise of J, values
      // cannot rank trial points; the directional derivative still can. Accept
      // when the step does not overshoot the line minimum of the local model.
      if (std::abs(t * slope) < kNoiseLevel * std::abs(cur.value) &&
          tv.value <= cur.value + kNoiseLevel * std::abs(cur.value)) {
        const double dd = inner(project(tv.gradient), d);
        if (dd <= -0.9 * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.stop_reason = "line search failed";
      break;
    }
    const PeriodicProfile new_grad = project(tv.gradient);
    PeriodicProfile s = trial - eta;
    PeriodicProfile y = new_grad - grad;
    const double sy = inner(s, y);
    if (cfg.lbfgs_memory > 0 && sy > 1e-14 * sobolev_norm(s, 0.0) * sobolev_norm(y, 0.0)) {
      memory.push_back(Pair{std::move(s), std::move(y), 1.0 / sy});
      if (memory.size() > static_cast<std::size_t>(cfg.lbfgs_memory)) memory.pop_front();
    }
    eta = trial;
    cur = std::move(tv);
    grad = new_grad;
    res.history.push_back(cur.value);
    if (!cfg.checkpoint_path.empty() && (it + 1) % cfg.checkpoint_every == 0) {
      Json header{{"mu", mu}, {"iteration", it + 1}, {"j_mu", cur.value}, {"context", to_json(ctx)},
                  {"dn", to_json(cfg.dn)}};
      write_checkpoint(cfg.checkpoint_path, eta, header);
    }
  }
  res.iterations = it;
  if (res.stop_reason == "iteration cap" && it == cfg.max_iter) {
    const PeriodicProfile pg = precond(grad);
    res.grad_norm = std::sqrt(std::max(0.0, inner(grad, pg)));
  }

  res.eta = normalize_translation(eta);
  res.report = eval_J(res.eta, mu, ctx, cfg.dn);
  res.nu_mu = mu / res.report.l_total;
  const bool below = res.report.j_mu < 2.0 * ctx.nu0 * mu;
  res.converged = res.grad_norm <= cfg.grad_tol * std::max(1.0, std::abs(cur.value)) && below;
  if (!below) res.warnings.push_back("J_mu >= 2 nu0 mu: no energy below the linear bound was found");
  if (res.constraint_active) {
    res.warnings.push_back("a trial step left the admissible set and was halved");
  }
  return res;
}

}  // namespace

MinimizeResult minimize(const WaveContext& ctx, const MinimizeConfig& cfg) {
  cfg.validate();
  const NlsCoefficients coeffs = nls_coefficients(ctx);
  MinimizeResult base;
  base.mu = cfg.mu;
  const bool focussing = coeffs.focussing() < 0.0;
  if (!focussing) {
    base.warnings.push_back("defocussing regime (1/2 A3 + A4 >= 0): no NLS solitary wave is predicted");
  }
  if (cfg.initial != InitialGuess::TestProfile) {
    if (!cfg.provided) throw ConfigError("minimize: initial guess selector requires a provided profile");
    return descend(ctx, cfg, coeffs, *cfg.provided, std::move(base));
  }
  if (!focussing) throw DomainError("minimize: the test-profile initial guess needs 1/2 A3 + A4 < 0");
  // One descent per carrier phase of the test profile; the lowest converged
  // energy wins, then the lowest energy.
  const Grid grid = make_grid(ctx, cfg.mu, cfg.grid);
  std::optional<MinimizeResult> best;
  std::vector<std::string> failures;
  for (double phase : cfg.carrier_phases) {
    MinimizeResult res = base;
    try {
      const AlphaSolve a = solve_alpha(cfg.mu, ctx, coeffs, grid, cfg.dn, phase);
      if (a.past_fold) {
        std::ostringstream msg;
        msg << "phase " << phase << ": mu exceeds the maximum " << a.fold_mu
            << " of nu0 L(eta*_alpha); seeded with the maximising alpha = " << a.alpha;
        res.warnings.push_back(msg.str());
      }
      res.alpha_seed = a.alpha;
      res.seed_phase = phase;
      res = descend(ctx, cfg, coeffs, test_profile(res.alpha_seed, ctx, coeffs, grid, phase), std::move(res));
    } catch (const Error& e) {
      if (cfg.carrier_phases.size() == 1) throw;
      std::ostringstream msg;
      msg << "phase " << phase << ": " << e.what();
      failures.push_back(msg.str());
      continue;
    }
    const bool better = !best || (res.converged && !best->converged) ||
                        (res.converged == best->converged && res.report.j_mu < best->report.j_mu);
    if (best) {
      std::ostringstream msg;
      msg << "carrier phase " << res.seed_phase << " reached J_mu = " << res.report.j_mu << ", phase "
          << best->seed_phase << " reached " << best->report.j_mu;
      res.warnings.push_back(msg.str());
      best->warnings.push_back(msg.str());
    }
    if (better) best = std::move(res);
  }
  if (!best) {
    std::string all = "minimize: every test-profile seed failed";
    for (const auto& f : failures) all += "; " + f;
    throw SolverError(all);
  }
  for (const auto& f : failures) best->warnings.push_back("seed failed: " + f);
  return *best;
}

PeriodicProfile normalize_translation(const PeriodicProfile& eta) {
  const Grid& g = eta.grid();
  Complex acc{};
  double mass = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double w = eta[i] * eta[i];
    mass += w;
    acc += w * std::exp(Complex(0.0, std::numbers::pi * g.x(i) / g.half_length()));
  }
  if (mass == 0.0) throw DomainError("normalize_translation: zero profile");
  if (std::abs(acc) <= 1e-300) return eta;
  const double xc = std::arg(acc) * g.half_length() / std::numbers::pi;
  return shift(eta, xc);
}

namespace {

// Continuous Fourier transform dx sqrt(N) (-1)^j c_j, linearly interpolated.
Complex spectrum_at_nonneg(const PeriodicProfile& eta, double k, double dk, double scale) {
  const double pos = k / dk;
  const std::size_t j = static_cast<std::size_t>(pos);
  if (j + 2 >= eta.coeffs().size()) return Complex{};
  const double w = pos - static_cast<double>(j);
  const Complex a = eta.coeffs()[j] * ((j % 2 == 0) ? 1.0 : -1.0);
  const Complex b = eta.coeffs()[j + 1] * (((j + 1) % 2 == 0) ? 1.0 : -1.0);
  return scale * ((1.0 - w) * a + w * b);
}

}  // namespace

PeriodicProfile rescale_envelope(const PeriodicProfile& eta, double r, const WaveContext& ctx,
                                 const Grid& target) {
  if (!(r > 0.0)) throw DomainError("rescale_envelope: ratio must be positive");
  const Grid& src = eta.grid();
  const double dk = src.wavenumber(1);
  const double scale_src = src.dx() * std::sqrt(static_cast<double>(src.size()));
  // Continuous transform of the source on its wavenumber lattice.
  auto spectrum = [&](double k) -> Complex {
    if (k < 0.0) return std::conj(spectrum_at_nonneg(eta, -k, dk, scale_src));
    return spectrum_at_nonneg(eta, k, dk, scale_src);
  };
  std::vector<Complex> out(target.spectral_size());
  const double scale_dst = target.dx() * std::sqrt(static_cast<double>(target.size()));
  for (std::size_t j = 0; j + 1 < out.size(); ++j) {
    const double k = target.wavenumber(j);
    const double n = std::round(k / ctx.k0);
    const double off = k - n * ctx.k0;
    const double weight = (n == 1.0) ? 1.0 : r;
    const Complex v = weight * spectrum(n * ctx.k0 + off / r);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out[j] = v * sign / scale_dst;
  }
  return PeriodicProfile::from_coeffs(target, std::move(out));
}


std::vector<SweepEntry> continuation_sweep(const WaveContext& ctx, const std::vector<double>& mu_list,
                                           const MinimizeConfig& base) {
  if (mu_list.empty()) throw DomainError("continuation_sweep: empty mu list");
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0)) throw DomainError("continuation_sweep: mu values must be positive");
    if (i > 0 && !(mu_list[i] < mu_list[i - 1])) {
      throw DomainError("continuation_sweep: mu list must be strictly descending");
    }
  }
  const NlsCoefficients coeffs = nls_coefficients(ctx);
  std::vector<SweepEntry> out;
  const MinimizeResult* prev = nullptr;
  for (double mu : mu_list) {
    SweepEntry entry;
    entry.mu = mu;
    MinimizeConfig cfg = base;
    cfg.mu = mu;
    try {
      if (prev != nullptr && prev->alpha_seed > 0.0) {
        const Grid grid = make_grid(ctx, mu, cfg.grid);
        const double alpha = solve_alpha(mu, ctx, coeffs, grid, cfg.dn, prev->seed_phase).alpha;
        cfg.initial = InitialGuess::Continuation;
        cfg.provided = rescale_envelope(prev->eta, alpha / prev->alpha_seed, ctx, grid);
        MinimizeResult r = minimize(ctx, cfg);
        r.alpha_seed = alpha;
        r.seed_phase = prev->seed_phase;
        entry.result = std::move(r);
      } else {
        entry.result = minimize(ctx, cfg);
      }
    } catch (const Error& e) {
      entry.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    out.push_back(std::move(entry));
    prev = out.back().result ? &*out.back().result : nullptr;
  }
  return out;
}

}  // namespace flexwave
