#include "qsvm/annealer.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <cmath>

namespace qsvm {

AnnealSchedule AnnealSchedule::resolved_for(const QuboProblem& problem) const {
  AnnealSchedule out = *this;
  double scale = problem.max_abs_entry();
  if (scale <= 0.0) scale = 1.0;
  if (!out.t_start) out.t_start = scale * static_cast<double>(problem.size());
  if (!out.t_end) out.t_end = 1e-3 * scale;
  return out;
}

namespace {

BitString run_chain(const Eigen::MatrixXd& q, std::size_t n, std::size_t sweeps, double t_start,
                    double t_end, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::uint8_t> a(n);
  for (auto& bit : a) bit = rng() & 1U;

  std::vector<double> field(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && a[j]) field[i] += q(i, j);
    }
  }

  const double ratio = t_end / t_start;
  for (std::size_t s = 0; s < sweeps; ++s) {
    const double frac = sweeps > 1 ? static_cast<double>(s) / static_cast<double>(sweeps - 1) : 1.0;
    const double beta = 1.0 / (t_start * std::pow(ratio, frac));
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] ? -1.0 : 1.0;
      const double delta = d * (q(i, i) + 2.0 * field[i]);
      if (delta > 0.0 && uniform(rng) >= std::exp(-delta * beta)) continue;
      a[i] ^= 1U;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) field[j] += d * q(j, i);
      }
    }
  }
  return BitString(std::move(a));
}

}  // namespace

SolutionDistribution sa_solve(const QuboProblem& problem, const AnnealSchedule& schedule) {
  require(schedule.sweeps >= 1, "sa_solve: sweeps must be positive");
  require(schedule.restarts >= 1, "sa_solve: restarts must be positive");
  const AnnealSchedule sched = schedule.resolved_for(problem);
  require(*sched.t_end > 0.0 && *sched.t_start >= *sched.t_end,
          "sa_solve: temperatures must satisfy t_start >= t_end > 0");

  std::vector<BitString> finals;
  finals.reserve(sched.restarts);
  for (std::size_t r = 0; r < sched.restarts; ++r) {
    Rng rng = make_rng(sched.seed, streams::kAnneal, r);
    finals.push_back(run_chain(problem.matrix(), problem.size(), sched.sweeps, *sched.t_start,
                               *sched.t_end, rng));
  }
  return SolutionDistribution::from_samples(finals);
}

}  // namespace qsvm
