#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flexwave/dirichlet_neumann.hpp"
#include "flexwave/functionals.hpp"
#include "flexwave/nls_theory.hpp"
#include "flexwave/spectral_grid.hpp"

namespace flexwave {

enum class InitialGuess { TestProfile, Provided, Continuation };

struct MinimizeConfig {
  double mu = 0.02;
  GridPolicy grid;
  DnConfig dn;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  double grad_tol = 1e-9;    // relative to max(1, J)
  double stall_tol = 1e-13;  // relative change of J over stall_window iterations
  int stall_window = 20;
  int max_iter = 3000;
  int lbfgs_memory = 10;
  bool enforce_even = true;
  InitialGuess initial = InitialGuess::TestProfile;
  // Carrier phases tried for the test-profile seed (0: crest at x = 0, pi: trough).
  std::vector<double> carrier_phases{0.0, 3.141592653589793};
  std::optional<PeriodicProfile> provided;
  // Periodic checkpoint (JSON header + CSV profile) when non-empty.
  std::string checkpoint_path;
  int checkpoint_every = 100;

  void validate() const;
};

struct MinimizeResult {
  PeriodicProfile eta;
  double mu = 0.0;
  double nu_mu = 0.0;
  FunctionalReport report;
  int iterations = 0;
  bool converged = false;
  bool constraint_active = false;
  double grad_norm = 0.0;  // preconditioned gradient norm at exit
  double alpha_seed = 0.0;
  double seed_phase = 0.0;
  std::string stop_reason;
  std::vector<std::string> warnings;
  std::vector<double> history;       // J at accepted iterates
  std::vector<double> grad_history;  // preconditioned gradient norm per iteration
};

MinimizeResult minimize(const WaveContext& ctx, const MinimizeConfig& cfg);

// Shifts eta so the circular centroid of eta^2 sits at x = 0 (sub-grid, spectral shift).
PeriodicProfile normalize_translation(const PeriodicProfile& eta);

// Minimisers along a descending mu list, each seeded by the previous one with
// its envelope rescaled by the ratio of alpha(mu). Failures are recorded and
// the sweep continues.
struct SweepEntry {
  double mu = 0.0;
  std::optional<MinimizeResult> result;
  std::string error;
};
std::vector<SweepEntry> continuation_sweep(const WaveContext& ctx, const std::vector<double>& mu_list,
                                           const MinimizeConfig& base);

// Envelope rescaling used by the sweep: each harmonic n k0 keeps its carrier
// while its envelope is stretched by 1/r and scaled by r (n = 1) or r^2.
PeriodicProfile rescale_envelope(const PeriodicProfile& eta, double r, const WaveContext& ctx,
                                 const Grid& target);

}  // namespace flexwave
