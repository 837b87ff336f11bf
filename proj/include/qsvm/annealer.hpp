#pragma once

#include "qsvm/qubo.hpp"

#include <cstdint>
#include <optional>

namespace qsvm {

/// Geometric cooling from t_start to t_end over `sweeps` full single-flip passes.
/// Unset temperatures default to t_start = max|Q_ij| * n and t_end = 1e-3 max|Q_ij|.
struct AnnealSchedule {
  std::size_t sweeps = 1000;
  std::optional<double> t_start;
  std::optional<double> t_end;
  std::size_t restarts = 100;
  std::uint64_t seed = 0;

  /// Copy with both temperatures filled in for `problem`.
  AnnealSchedule resolved_for(const QuboProblem& problem) const;
};

/// Final states of `restarts` independent Metropolis chains. Chain r draws from
/// its own generator keyed by (seed, r).
SolutionDistribution sa_solve(const QuboProblem& problem, const AnnealSchedule& schedule);

}  // namespace qsvm
