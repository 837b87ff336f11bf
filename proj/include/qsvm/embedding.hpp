#pragma once

#include "qsvm/qubo.hpp"
#include "qsvm/rydberg.hpp"

#include <cstdint>
#include <vector>

namespace qsvm::embedding {

enum class Mode { continuous, triangular_lattice };

struct EmbeddingConfig {
  Mode mode = Mode::continuous;
  double lattice_constant = 5.0;  // um
  double min_distance = 4.0;      // um
  double max_radius = 35.0;       // um
  std::size_t max_iters = 3000;
  std::uint64_t seed = 0;
  double c6 = rydberg::kDefaultC6;

  void validate() const;
};

/// Interaction strengths the register should realize, one per pair i<j, and the
/// parts of Q that geometry cannot express.
struct CouplingTarget {
  Eigen::MatrixXd target;       // symmetric, zero diagonal
  double clipped_mass = 0.0;    // sum over i<j of max(-(q_ij + q_ji), 0)
  double diagonal_mass = 0.0;   // sum |q_ii|, not embedded
};

/// T_ij = max(q_ij + q_ji, 0): both symmetric entries of a^T Q a feed one
/// physical pair interaction, which can only be repulsive.
CouplingTarget coupling_target(const QuboProblem& q);

struct EmbeddingReport {
  rydberg::AtomRegister reg;
  double objective = 0.0;  // sum_{i<j} (U_ij - T_ij)^2
  CouplingTarget target;
  std::size_t evaluations = 0;
};

/// sum_{i<j} (c6 / r_ij^6 - T_ij)^2 for the given layout.
double embedding_objective(const std::vector<rydberg::Point>& coords, const Eigen::MatrixXd& target, double c6);

/// Derivative-free fit of free 2D coordinates (Nelder-Mead under hard
/// min-distance and radius constraints), started from a seeded ring.
EmbeddingReport embed_continuous(const QuboProblem& q, const EmbeddingConfig& cfg);

/// Site selection on a triangular lattice of fixed constant within max_radius,
/// by simulated annealing over placements.
EmbeddingReport embed_lattice(const QuboProblem& q, const EmbeddingConfig& cfg);

/// Dispatches on cfg.mode.
EmbeddingReport embed(const QuboProblem& q, const EmbeddingConfig& cfg);

/// Lattice sites within the radius, ordered by distance from the origin.
std::vector<rydberg::Point> triangular_sites(double lattice_constant, double max_radius);

}  // namespace qsvm::embedding
