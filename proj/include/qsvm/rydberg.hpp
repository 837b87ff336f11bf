#pragma once

#include "qsvm/qubo.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

// Units throughout: time in us, angular frequencies in rad/us (hbar = 1),
// distances in um.
namespace qsvm::rydberg {

inline constexpr double kDefaultC6 = 5420000.0;  // rad/us * um^6
inline constexpr double kDeviceOmegaMax = 15.71;  // rad/us
inline constexpr double kSimulationDuration = 10.0;
inline constexpr double kDeviceDuration = 5.0;
inline constexpr std::size_t kMaxAtoms = 16;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

class AtomRegister {
 public:
  AtomRegister(std::vector<Point> coords, double c6 = kDefaultC6, double min_distance = 0.0);

  std::size_t size() const { return coords_.size(); }
  const std::vector<Point>& coords() const { return coords_; }
  double c6() const { return c6_; }
  double min_distance() const { return min_distance_; }
  Point centroid() const;

 private:
  std::vector<Point> coords_;
  double c6_;
  double min_distance_;
};

/// U_ij = c6 / r_ij^6 off the diagonal, zero on it.
Eigen::MatrixXd interaction_matrix(const AtomRegister& reg);

/// Piecewise-linear waveform over sorted knots; constant outside the knot range.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> times, std::vector<double> values);
  static Waveform constant(double value, double duration);
  static Waveform ramp(double from, double to, double duration);

  double operator()(double t) const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double max_value() const;
  double min_value() const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct PulseSchedule {
  double duration = kSimulationDuration;
  Waveform omega;
  Waveform delta;
  double omega_max = kDeviceOmegaMax;

  void validate() const;
};

/// Plateau amplitude min(|median(Q)|, omega_max); a zero median uses omega_max.
double plateau_amplitude(const QuboProblem& q, double omega_max);

/// Smooth sin^2 rise to the plateau, hold, smooth fall, over `duration`; the
/// detuning ramps linearly from -10 to +10 rad/us over the same window.
PulseSchedule paper_schedule(const QuboProblem& q, double duration = kSimulationDuration,
                             double omega_max = kDeviceOmegaMax);

/// Baseline magnitudes correspond to scale_percent = 100; every channel scales
/// linearly with scale_percent / 100.
struct NoiseConfig {
  double spam_prep = 0.005;
  double spam_false_pos = 0.01;
  double spam_false_neg = 0.05;
  double amp_fluctuation_rel = 0.05;
  double doppler_sigma = 0.5;  // rad/us
  double laser_waist = 148.0;  // um
  double scale_percent = 100.0;
  std::size_t realizations = 5;

  static NoiseConfig ideal();
  void validate() const;

  double factor() const { return scale_percent / 100.0; }
  double prep() const;
  double false_pos() const;
  double false_neg() const;
  double amp_rel() const { return amp_fluctuation_rel * factor(); }
  double doppler() const { return doppler_sigma * factor(); }
  /// Exponent multiplier of the Gaussian beam profile exp(-s r^2 / w^2).
  double waist_strength() const;

  bool has_spam() const { return prep() > 0.0 || false_pos() > 0.0 || false_neg() > 0.0; }
  bool has_analog() const { return amp_rel() > 0.0 || doppler() > 0.0 || waist_strength() > 0.0; }
};

/// Per-run deviations from the global drive: a common amplitude factor, a
/// per-atom amplitude profile, and per-atom detuning offsets.
struct DrivePerturbation {
  double amplitude_factor = 1.0;
  std::vector<double> omega_scale;
  std::vector<double> detuning_offset;
};

struct EvolveOptions {
  double dt = 0.0;  // 0 picks a step from the schedule and interaction scale
  std::size_t min_steps = 500;
  std::size_t max_steps = 4000;
  std::size_t gap_samples = 21;
  std::size_t gap_max_atoms = 8;
  std::size_t max_atoms = kMaxAtoms;
};

using StateVector = Eigen::VectorXcd;

struct EvolutionResult {
  StateVector final_state;
  std::size_t atoms = 0;
  double norm_drift = 0.0;
  std::optional<double> min_gap;
  std::size_t steps = 0;

  /// |amplitude|^2 for basis index b, where bit i of b is atom i's excitation.
  std::vector<double> probabilities() const;
};

/// Time step used by `evolve` for these options (reported for diagnostics).
double choose_dt(const AtomRegister& reg, const PulseSchedule& sched, const EvolveOptions& options);

/// H(t) = sum_i Omega_i(t)/2 X_i - sum_i (delta(t)+d_i)/2 Z_i + sum_{i<j} U_ij n_i n_j,
/// with n_i = (1 + Z_i)/2 so Z = +1 is the Rydberg state. Starts from all-ground
/// and steps with the symmetric split exp(-iD dt/2) exp(-iX dt) exp(-iD dt/2)
/// evaluated at each step midpoint; every factor is exactly unitary.
EvolutionResult evolve(const AtomRegister& reg, const PulseSchedule& sched,
                       const EvolveOptions& options = {}, const DrivePerturbation& drive = {});

/// Dense real-symmetric Hamiltonian at time t (for diagnostics and tests).
Eigen::MatrixXd hamiltonian_matrix(const AtomRegister& reg, const PulseSchedule& sched, double t,
                                   const DrivePerturbation& drive = {});

/// Index -> bit string with bits[i] = excitation of atom i.
BitString basis_bitstring(std::uint64_t index, std::size_t atoms);

/// Draws computational-basis readouts from |amplitude|^2 and applies the SPAM
/// channels of `noise`. Analog channels need re-evolution and are handled by
/// `anneal_qubo`.
SolutionDistribution sample_shots(const EvolutionResult& result, std::size_t shots,
                                  const NoiseConfig& noise, std::uint64_t seed);

/// Evolutions for each noise realization (a single ideal one when no analog
/// channel is active). Realization g draws from a generator keyed by (seed, g).
std::vector<EvolutionResult> simulate_realizations(const AtomRegister& reg, const PulseSchedule& sched,
                                                   const NoiseConfig& noise, std::uint64_t seed,
                                                   const EvolveOptions& options = {});

/// Splits `shots` across the realizations and samples each with SPAM applied.
SolutionDistribution sample_realizations(const std::vector<EvolutionResult>& realizations,
                                         std::size_t shots, const NoiseConfig& noise,
                                         std::uint64_t seed);

/// evolve + sample. `q` must have one variable per atom.
SolutionDistribution anneal_qubo(const QuboProblem& q, const AtomRegister& reg,
                                 const PulseSchedule& sched, const NoiseConfig& noise,
                                 std::size_t shots, std::uint64_t seed,
                                 const EvolveOptions& options = {});

inline constexpr std::size_t kShotPresets[] = {1000, 500, 100};
inline constexpr std::size_t kDeviceAverageShots = 76;

}  // namespace qsvm::rydberg
