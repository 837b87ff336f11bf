#include "qsvm/rydberg.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace qsvm::rydberg {

using cplx = std::complex<double>;

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

AtomRegister::AtomRegister(std::vector<Point> coords, double c6, double min_distance)
    : coords_(std::move(coords)), c6_(c6), min_distance_(min_distance) {
  require(!coords_.empty(), "AtomRegister: at least one atom required");
  require(c6_ > 0.0 && std::isfinite(c6_), "AtomRegister: c6 must be positive");
  require(min_distance_ >= 0.0, "AtomRegister: min_distance must be nonnegative");
  for (const auto& p : coords_) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "AtomRegister: coordinates must be finite");
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    for (std::size_t j = i + 1; j < coords_.size(); ++j) {
      const double r = distance(coords_[i], coords_[j]);
      if (r <= 0.0) {
        throw ContractError("AtomRegister: atoms " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide");
      }
      if (r < min_distance_ * (1.0 - 1e-12)) {
        throw ContractError("AtomRegister: atoms " + std::to_string(i) + " and " + std::to_string(j) +
                            " are closer than the minimum distance");
      }
    }
  }
}

Point AtomRegister::centroid() const {
  Point c;
  for (const auto& p : coords_) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(coords_.size());
  c.y /= static_cast<double>(coords_.size());
  return c;
}

Eigen::MatrixXd interaction_matrix(const AtomRegister& reg) {
  const auto n = static_cast<Eigen::Index>(reg.size());
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = distance(reg.coords()[i], reg.coords()[j]);
      u(i, j) = u(j, i) = reg.c6() / std::pow(r, 6);
    }
  }
  return u;
}

Waveform::Waveform(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  require(!times_.empty() && times_.size() == values_.size(), "Waveform: knots and values must match");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    require(times_[i] >= times_[i - 1], "Waveform: knot times must be sorted");
  }
}

Waveform Waveform::constant(double value, double duration) { return Waveform({0.0, duration}, {value, value}); }

Waveform Waveform::ramp(double from, double to, double duration) { return Waveform({0.0, duration}, {from, to}); }

double Waveform::operator()(double t) const {
  if (times_.empty()) return 0.0;
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double span = times_[hi] - times_[lo];
  if (span <= 0.0) return values_[hi];
  const double w = (t - times_[lo]) / span;
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

double Waveform::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double Waveform::min_value() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

void PulseSchedule::validate() const {
  require(duration > 0.0 && std::isfinite(duration), "PulseSchedule: duration must be positive");
  require(omega.min_value() >= 0.0, "PulseSchedule: amplitude must be nonnegative");
  require(omega.max_value() <= omega_max * (1.0 + 1e-12), "PulseSchedule: amplitude exceeds omega_max");
}

double plateau_amplitude(const QuboProblem& q, double omega_max) {
  const auto& m = q.matrix();
  std::vector<double> entries(m.data(), m.data() + m.size());
  const std::size_t mid = entries.size() / 2;
  std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(mid), entries.end());
  double median = entries[mid];
  if (entries.size() % 2 == 0) {
    const double lower = *std::max_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  const double amplitude = std::abs(median);
  if (amplitude == 0.0) return omega_max;
  return std::min(amplitude, omega_max);
}

PulseSchedule paper_schedule(const QuboProblem& q, double duration, double omega_max) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ContractError("paper_schedule: duration must be positive");
  }
  require(omega_max > 0.0, "paper_schedule: omega_max must be positive");
  const double plateau = plateau_amplitude(q, omega_max);

  constexpr std::size_t kRampKnots = 32;
  const double ramp = 0.25 * duration;
  std::vector<double> times;
  std::vector<double> values;
  for (std::size_t k = 0; k <= kRampKnots; ++k) {
    const double s = static_cast<double>(k) / kRampKnots;
    times.push_back(s * ramp);
    values.push_back(plateau * std::pow(std::sin(0.5 * std::numbers::pi * s), 2));
  }
  for (std::size_t k = 0; k <= kRampKnots; ++k) {
    const double s = static_cast<double>(k) / kRampKnots;
    times.push_back(duration - ramp + s * ramp);
    values.push_back(plateau * std::pow(std::cos(0.5 * std::numbers::pi * s), 2));
  }
  PulseSchedule sched;
  sched.duration = duration;
  sched.omega = Waveform(std::move(times), std::move(values));
  sched.delta = Waveform::ramp(-10.0, 10.0, duration);
  sched.omega_max = omega_max;
  return sched;
}

NoiseConfig NoiseConfig::ideal() {
  NoiseConfig n;
  n.scale_percent = 0.0;
  return n;
}

void NoiseConfig::validate() const {
  for (double p : {spam_prep, spam_false_pos, spam_false_neg}) {
    require(p >= 0.0 && p <= 1.0, "NoiseConfig: probabilities must lie in [0, 1]");
  }
  require(amp_fluctuation_rel >= 0.0, "NoiseConfig: amplitude fluctuation must be nonnegative");
  require(doppler_sigma >= 0.0, "NoiseConfig: doppler sigma must be nonnegative");
  require(laser_waist > 0.0, "NoiseConfig: laser waist must be positive");
  require(scale_percent >= 0.0 && std::isfinite(scale_percent), "NoiseConfig: scale must be nonnegative");
  require(realizations >= 1, "NoiseConfig: at least one realization required");
}

double NoiseConfig::prep() const { return std::min(1.0, spam_prep * factor()); }
double NoiseConfig::false_pos() const { return std::min(1.0, spam_false_pos * factor()); }
double NoiseConfig::false_neg() const { return std::min(1.0, spam_false_neg * factor()); }
double NoiseConfig::waist_strength() const { return factor(); }

std::vector<double> EvolutionResult::probabilities() const {
  std::vector<double> p(static_cast<std::size_t>(final_state.size()));
  for (Eigen::Index i = 0; i < final_state.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(final_state[i]);
  return p;
}

namespace {

void check_drive(const AtomRegister& reg, const DrivePerturbation& drive) {
  require(drive.omega_scale.empty() || drive.omega_scale.size() == reg.size(),
          "DrivePerturbation: one amplitude scale per atom required");
  require(drive.detuning_offset.empty() || drive.detuning_offset.size() == reg.size(),
          "DrivePerturbation: one detuning offset per atom required");
}

// Complex product without the inf/nan recovery of std::complex operator*.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

double omega_scale_of(const DrivePerturbation& drive, std::size_t i) {
  return drive.amplitude_factor * (drive.omega_scale.empty() ? 1.0 : drive.omega_scale[i]);
}

double offset_of(const DrivePerturbation& drive, std::size_t i) {
  return drive.detuning_offset.empty() ? 0.0 : drive.detuning_offset[i];
}

// Time-independent diagonal part: interactions plus static per-atom detuning
// offsets, -sum_i d_i/2 z_i + sum_{i<j} U_ij b_i b_j.
std::vector<double> static_diagonal(const AtomRegister& reg, const DrivePerturbation& drive) {
  const std::size_t n = reg.size();
  const Eigen::MatrixXd u = interaction_matrix(reg);
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> diag(dim, 0.0);
  for (std::size_t b = 0; b < dim; ++b) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool bi = (b >> i) & 1U;
      e -= 0.5 * offset_of(drive, i) * (bi ? 1.0 : -1.0);
      if (!bi) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((b >> j) & 1U) e += u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    diag[b] = e;
  }
  return diag;
}

// Coefficient of delta(t) in the diagonal energy of a state with `ones`
// excitations: -sum_i z_i / 2.
double detuning_weight(std::size_t ones, std::size_t n) {
  return -0.5 * (2.0 * static_cast<double>(ones) - static_cast<double>(n));
}

void check_capacity(const AtomRegister& reg, const EvolveOptions& options) {
  const std::size_t bound = std::min<std::size_t>(options.max_atoms, 30);
  if (reg.size() > bound) {
    throw CapacityError("evolve: " + std::to_string(reg.size()) +
                        " atoms exceed the state-vector bound of " + std::to_string(bound) +
                        "; use the classical annealer backend for larger problems");
  }
}

}  // namespace

double choose_dt(const AtomRegister& reg, const PulseSchedule& sched, const EvolveOptions& options) {
  if (options.dt > 0.0) return options.dt;
  const Eigen::MatrixXd u = interaction_matrix(reg);
  const double rate = std::max({sched.omega.max_value(), std::abs(sched.delta.max_value()),
                                std::abs(sched.delta.min_value()), u.size() ? u.maxCoeff() : 0.0, 1.0});
  const auto wanted = static_cast<std::size_t>(std::ceil(sched.duration * rate / 0.5));
  const std::size_t steps = std::clamp(wanted, options.min_steps, std::max(options.min_steps, options.max_steps));
  return sched.duration / static_cast<double>(steps);
}

Eigen::MatrixXd hamiltonian_matrix(const AtomRegister& reg, const PulseSchedule& sched, double t,
                                   const DrivePerturbation& drive) {
  check_drive(reg, drive);
  const std::size_t n = reg.size();
  require(n <= 12, "hamiltonian_matrix: dense form limited to 12 atoms");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  const auto diag = static_diagonal(reg, drive);
  const double omega = sched.omega(t);
  const double delta = sched.delta(t);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const auto ones = static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(b)));
    h(b, b) = diag[static_cast<std::size_t>(b)] + detuning_weight(ones, n) * delta;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index flipped = b ^ (Eigen::Index{1} << i);
      h(b, flipped) = 0.5 * omega * omega_scale_of(drive, i);
    }
  }
  return h;
}

EvolutionResult evolve(const AtomRegister& reg, const PulseSchedule& sched, const EvolveOptions& options,
                       const DrivePerturbation& drive) {
  sched.validate();
  check_capacity(reg, options);
  check_drive(reg, drive);
  const std::size_t n = reg.size();
  const std::size_t dim = std::size_t{1} << n;

  double dt = choose_dt(reg, sched, options);
  auto steps = static_cast<std::size_t>(std::llround(sched.duration / dt));
  steps = std::max<std::size_t>(steps, 1);
  dt = sched.duration / static_cast<double>(steps);

  const auto diag = static_diagonal(reg, drive);
  std::vector<cplx> phase_half(dim);
  std::vector<cplx> phase_full(dim);
  std::vector<std::uint8_t> ones(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    phase_half[b] = std::polar(1.0, -0.5 * dt * diag[b]);
    phase_full[b] = std::polar(1.0, -dt * diag[b]);
    ones[b] = static_cast<std::uint8_t>(std::popcount(b));
  }

  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = omega_scale_of(drive, i);

  std::vector<cplx> psi(dim, cplx{0.0, 0.0});
  psi[0] = 1.0;
  std::vector<cplx> detuning_phase(n + 1);

  // Applies exp(-i tau (S + w(ones) delta_sum)) where `static_phase` is exp(-i tau S).
  auto apply_diagonal = [&](const std::vector<cplx>& static_phase, double detuning_area) {
    for (std::size_t k = 0; k <= n; ++k) detuning_phase[k] = std::polar(1.0, -detuning_weight(k, n) * detuning_area);
    for (std::size_t b = 0; b < dim; ++b) psi[b] = mul(psi[b], mul(static_phase[b], detuning_phase[ones[b]]));
  };

  auto apply_drive = [&](double omega) {
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = 0.5 * omega * scale[i] * dt;
      if (angle == 0.0) continue;
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      const std::size_t stride = std::size_t{1} << i;
      // [c, -is; -is, c] on each (b, b + stride) pair.
      for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t b = base; b < base + stride; ++b) {
          const cplx a0 = psi[b];
          const cplx a1 = psi[b + stride];
          psi[b] = {c * a0.real() + s * a1.imag(), c * a0.imag() - s * a1.real()};
          psi[b + stride] = {c * a1.real() + s * a0.imag(), c * a1.imag() - s * a0.real()};
        }
      }
    }
  };

  auto mid_time = [&](std::size_t k) { return (static_cast<double>(k) + 0.5) * dt; };

  apply_diagonal(phase_half, 0.5 * dt * sched.delta(mid_time(0)));
  for (std::size_t k = 0; k < steps; ++k) {
    apply_drive(sched.omega(mid_time(k)));
    if (k + 1 < steps) {
      // Closing half of step k fused with the opening half of step k+1.
      apply_diagonal(phase_full, 0.5 * dt * (sched.delta(mid_time(k)) + sched.delta(mid_time(k + 1))));
    } else {
      apply_diagonal(phase_half, 0.5 * dt * sched.delta(mid_time(k)));
    }
  }

  EvolutionResult result;
  result.atoms = n;
  result.steps = steps;
  result.final_state = Eigen::Map<StateVector>(psi.data(), static_cast<Eigen::Index>(dim));
  const double norm = result.final_state.norm();
  result.norm_drift = std::abs(norm - 1.0);
  result.final_state /= norm;

  if (n <= options.gap_max_atoms && options.gap_samples > 0) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < options.gap_samples; ++s) {
      const double t = options.gap_samples == 1
                           ? 0.5 * sched.duration
                           : sched.duration * static_cast<double>(s) / static_cast<double>(options.gap_samples - 1);
      if (dim < 2) break;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian_matrix(reg, sched, t, drive),
                                                            Eigen::EigenvaluesOnly);
      const auto& ev = solver.eigenvalues();
      min_gap = std::min(min_gap, ev[1] - ev[0]);
    }
    if (std::isfinite(min_gap)) result.min_gap = min_gap;
  }
  return result;
}

BitString basis_bitstring(std::uint64_t index, std::size_t atoms) {
  BitString bits(atoms);
  for (std::size_t i = 0; i < atoms; ++i) bits.set(i, (index >> i) & 1U);
  return bits;
}

namespace {

// Inverse-CDF draw of basis indices with SPAM corruption per atom.
void draw_shots(const EvolutionResult& result, std::size_t shots, const NoiseConfig& noise, Rng& rng,
                std::vector<std::pair<BitString, std::uint64_t>>& out) {
  const auto probs = result.probabilities();
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < probs.size(); ++b) {
    acc += probs[b];
    cdf[b] = acc;
  }
  const bool spam = noise.has_spam();
  const double prep = noise.prep();
  const double fp = noise.false_pos();
  const double fn = noise.false_neg();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = uniform(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto index = static_cast<std::uint64_t>(it - cdf.begin());
    BitString bits = basis_bitstring(index, result.atoms);
    if (spam) {
      for (std::size_t i = 0; i < bits.size(); ++i) {
        bool excited = bits[i];
        if (prep > 0.0 && uniform(rng) < prep) excited = false;
        if (excited) {
          if (fn > 0.0 && uniform(rng) < fn) excited = false;
        } else if (fp > 0.0 && uniform(rng) < fp) {
          excited = true;
        }
        bits.set(i, excited);
      }
    }
    out.emplace_back(std::move(bits), 1);
  }
}

}  // namespace

SolutionDistribution sample_shots(const EvolutionResult& result, std::size_t shots, const NoiseConfig& noise,
                                  std::uint64_t seed) {
  require(shots >= 1, "sample_shots: at least one shot required");
  noise.validate();
  Rng rng = make_rng(seed, streams::kShots, 0);
  std::vector<std::pair<BitString, std::uint64_t>> counts;
  counts.reserve(shots);
  draw_shots(result, shots, noise, rng, counts);
  return SolutionDistribution::from_counts(std::move(counts));
}

std::vector<EvolutionResult> simulate_realizations(const AtomRegister& reg, const PulseSchedule& sched,
                                                   const NoiseConfig& noise, std::uint64_t seed,
                                                   const EvolveOptions& options) {
  noise.validate();
  if (!noise.has_analog()) return {evolve(reg, sched, options)};

  const std::size_t n = reg.size();
  const Point center = reg.centroid();
  std::vector<double> profile(n, 1.0);
  const double strength = noise.waist_strength();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = distance(reg.coords()[i], center);
    profile[i] = std::exp(-strength * r * r / (noise.laser_waist * noise.laser_waist));
  }

  std::vector<EvolutionResult> out;
  out.reserve(noise.realizations);
  for (std::size_t g = 0; g < noise.realizations; ++g) {
    Rng rng = make_rng(seed, streams::kRealization, g);
    std::normal_distribution<double> normal(0.0, 1.0);
    DrivePerturbation drive;
    drive.amplitude_factor = std::max(0.0, 1.0 + noise.amp_rel() * normal(rng));
    drive.omega_scale = profile;
    drive.detuning_offset.resize(n);
    for (auto& d : drive.detuning_offset) d = noise.doppler() * normal(rng);
    out.push_back(evolve(reg, sched, options, drive));
  }
  return out;
}

SolutionDistribution sample_realizations(const std::vector<EvolutionResult>& realizations, std::size_t shots,
                                         const NoiseConfig& noise, std::uint64_t seed) {
  require(!realizations.empty(), "sample_realizations: no evolution results");
  require(shots >= 1, "sample_realizations: at least one shot required");
  noise.validate();
  const std::size_t groups = realizations.size();
  std::vector<std::pair<BitString, std::uint64_t>> counts;
  counts.reserve(shots);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t group_shots = shots / groups + (g < shots % groups ? 1 : 0);
    if (group_shots == 0) continue;
    Rng rng = make_rng(seed, streams::kShots, g);
    draw_shots(realizations[g], group_shots, noise, rng, counts);
  }
  return SolutionDistribution::from_counts(std::move(counts));
}

SolutionDistribution anneal_qubo(const QuboProblem& q, const AtomRegister& reg, const PulseSchedule& sched,
                                 const NoiseConfig& noise, std::size_t shots, std::uint64_t seed,
                                 const EvolveOptions& options) {
  if (q.size() != reg.size()) {
    throw ContractError("anneal_qubo: problem has " + std::to_string(q.size()) + " variables but register has " +
                        std::to_string(reg.size()) + " atoms");
  }
  return sample_realizations(simulate_realizations(reg, sched, noise, seed, options), shots, noise, seed);
}

}  // namespace qsvm::rydberg
