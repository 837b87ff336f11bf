#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsvm {

/// Ordered binary vector. Comparison is lexicographic over bits[0], bits[1], ...
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n) : bits_(n, 0) {}
  explicit BitString(std::vector<std::uint8_t> bits);
  BitString(std::initializer_list<int> bits);

  /// bits[0] is the most significant bit of `code`, so integer order of codes
  /// equals lexicographic order of bit strings of the same length.
  static BitString from_code(std::uint64_t code, std::size_t n);
  static BitString parse(std::string_view text);

  std::uint64_t code() const;
  std::string to_string() const;

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }
  std::size_t count_ones() const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  auto begin() const { return bits_.begin(); }
  auto end() const { return bits_.end(); }

  auto operator<=>(const BitString&) const = default;
  bool operator==(const BitString&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Dense QUBO weight matrix in symmetric storage. Any input is replaced by
/// (Q + Q^T) / 2, which leaves a^T Q a unchanged for every binary a.
class QuboProblem {
 public:
  explicit QuboProblem(const Eigen::MatrixXd& q);
  /// Takes `q` as is; the caller guarantees q == q^T.
  static QuboProblem from_symmetric(Eigen::MatrixXd q);

  std::size_t size() const { return static_cast<std::size_t>(q_.rows()); }
  const Eigen::MatrixXd& matrix() const { return q_; }
  double operator()(std::size_t i, std::size_t j) const {
    return q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double max_abs_entry() const;

 private:
  QuboProblem() = default;
  Eigen::MatrixXd q_;
};

/// E = sum_{i,j} a_i Q_ij a_j.
double energy(const QuboProblem& problem, const BitString& a);

struct ScoredBitString {
  BitString bits;
  double energy = 0.0;
};

struct BruteForceOptions {
  std::size_t max_variables = 26;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Exhaustive enumeration of all 2^n assignments. Returns the `top_k` lowest
/// energies ascending, ties broken by lexicographic bit order. The result does
/// not depend on the thread count.
std::vector<ScoredBitString> brute_force_solve(const QuboProblem& problem,
                                               std::size_t top_k,
                                               const BruteForceOptions& options = {});

struct DistributionEntry {
  BitString bits;
  std::uint64_t count = 0;
  double probability = 0.0;
};

/// Measured or sampled outcomes, sorted by descending probability and then by
/// ascending bit string.
class SolutionDistribution {
 public:
  SolutionDistribution() = default;

  static SolutionDistribution from_samples(std::span<const BitString> samples);
  /// Counts may contain zeros; those entries are dropped.
  static SolutionDistribution from_counts(
      std::vector<std::pair<BitString, std::uint64_t>> counts);

  const std::vector<DistributionEntry>& entries() const { return entries_; }
  std::uint64_t total_shots() const { return total_shots_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t bit_length() const;
  const DistributionEntry& modal() const;
  double probability_of(const BitString& bits) const;

 private:
  std::vector<DistributionEntry> entries_;
  std::uint64_t total_shots_ = 0;
};

SolutionDistribution distribution_from_samples(std::span<const BitString> samples);

}  // namespace qsvm
