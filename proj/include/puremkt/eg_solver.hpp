#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <functional>
#include <optional>
#include <span>

#include "puremkt/equilibrium.hpp"
#include "puremkt/errors.hpp"
#include "puremkt/market.hpp"

namespace puremkt {

enum class StepRule {
  /// Keep the last accepted step, grow it after each success, halve on failure.
  kBacktracking,
  /// Barzilai-Borwein trial step, then the same halving safeguard.
  kBarzilaiBorwein,
};

struct SolverConfig {
  std::size_t max_iters = 200000;
  /// Initial step; 0 picks 0.1 * n / (largest gradient entry at the start).
  double step_size = 0.0;
  double step_decay = 0.5;
  double step_growth = 1.5;
  StepRule step_rule = StepRule::kBarzilaiBorwein;
  /// Scale each good's column by the inverse squared price estimate.
  bool precondition = true;
  /// Stop once the worst equilibrium-condition violation is at or below this.
  double convergence_tol = 1e-11;
  /// When set, start from a random interior allocation instead of uniform.
  std::optional<std::uint64_t> seed;
  ToleranceConfig tol;
  /// Called after every accepted step with the iteration and new objective.
  std::function<void(std::size_t, double)> on_step;

  void validate() const;
};

struct Outcome {
  FractionalAllocation alloc;
  PriceVector prices;
  /// check_equilibrium(...).worst_violation() of (alloc, prices).
  double residual = 0.0;
  std::size_t iterations_used = 0;
};

class DidNotConverge : public Error {
 public:
  explicit DidNotConverge(Outcome best);
  Outcome best;
};

/// Sentinel returned by eg_objective when some agent's bundle is worthless.
inline constexpr double kNegativeInfinityObjective = -std::numeric_limits<double>::infinity();

/// sum_i e_i log v_i(x_i)
double eg_objective(const Market& market, const FractionalAllocation& alloc);

/// d/dx_ij of eg_objective: e_i v_ij / v_i(x_i). Throws ZeroBundleValue.
Matrix eg_gradient(const Market& market, const FractionalAllocation& alloc);

/// Euclidean projection of one column onto {y in [0,1]^n : sum y <= 1}.
void project_column(std::span<double> column);

/// Column-wise projection of an n x m matrix onto feasible allocations.
FractionalAllocation project_feasible(Matrix raw);

/// KKT prices p_j = max_i e_i v_ij / v_i(x_i).
PriceVector extract_prices(const Market& market, const FractionalAllocation& alloc);

/// Projected gradient ascent on the Eisenberg-Gale program. Once an iterate
/// is close, its support is turned into an equilibrium with exact budgets
/// (prices from a spanning forest of the support, spends from a max flow) and
/// returned if it meets convergence_tol. Throws DidNotConverge (carrying the
/// best iterate) when max_iters is exhausted or the ascent stalls first.
Outcome solve_equilibrium(const Market& market, const SolverConfig& config = {});

}  // namespace puremkt
