#include "qsvm/qubo.hpp"

#include "qsvm/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <thread>
#include <utility>

namespace qsvm {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) require(b <= 1, "BitString: entries must be 0 or 1");
}

BitString::BitString(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) {
    require(b == 0 || b == 1, "BitString: entries must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }
}

BitString BitString::from_code(std::uint64_t code, std::size_t n) {
  require(n <= 64, "BitString::from_code: at most 64 bits");
  BitString out(n);
  for (std::size_t j = 0; j < n; ++j) out.bits_[j] = (code >> (n - 1 - j)) & 1U;
  return out;
}

BitString BitString::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != ',') {
      throw DataError("BitString::parse: unexpected character '" + std::string(1, c) + "'");
    }
  }
  return BitString(std::move(bits));
}

std::uint64_t BitString::code() const {
  require(bits_.size() <= 64, "BitString::code: at most 64 bits");
  std::uint64_t code = 0;
  for (auto b : bits_) code = (code << 1) | b;
  return code;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::size_t BitString::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

QuboProblem::QuboProblem(const Eigen::MatrixXd& q) {
  require(q.rows() == q.cols(), "QuboProblem: matrix must be square");
  require(q.rows() >= 1, "QuboProblem: at least one variable required");
  require(q.allFinite(), "QuboProblem: entries must be finite");
  q_ = 0.5 * (q + q.transpose());
}

QuboProblem QuboProblem::from_symmetric(Eigen::MatrixXd q) {
  require(q.rows() == q.cols(), "QuboProblem: matrix must be square");
  require(q.rows() >= 1, "QuboProblem: at least one variable required");
  require(q.allFinite(), "QuboProblem: entries must be finite");
  QuboProblem out;
  out.q_ = std::move(q);
  return out;
}

double QuboProblem::max_abs_entry() const { return q_.cwiseAbs().maxCoeff(); }

double energy(const QuboProblem& problem, const BitString& a) {
  const std::size_t n = problem.size();
  if (a.size() != n) {
    throw ContractError("energy: bit string length " + std::to_string(a.size()) +
                        " does not match problem size " + std::to_string(n));
  }
  const auto& q = problem.matrix();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (a[j]) e += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return e;
}

namespace {

struct Candidate {
  double energy;
  std::uint64_t code;
};

// Max-heap on (energy, code): the top is the worst kept candidate.
struct WorseFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.code < b.code;
  }
};

using CandidateHeap = std::priority_queue<Candidate, std::vector<Candidate>, WorseFirst>;

void offer(CandidateHeap& heap, std::size_t capacity, Candidate c) {
  if (heap.size() < capacity) {
    heap.push(c);
  } else if (WorseFirst{}(c, heap.top())) {
    heap.pop();
    heap.push(c);
  }
}

// Enumerates every assignment sharing the given prefix (variables
// 0..prefix_bits-1) with a Gray-code walk over the remaining variables.
void enumerate_chunk(const Eigen::MatrixXd& q, std::size_t n, std::size_t prefix_bits,
                     std::uint64_t prefix, std::size_t capacity, CandidateHeap& heap) {
  const std::size_t free_bits = n - prefix_bits;
  std::vector<std::uint8_t> a(n, 0);
  for (std::size_t j = 0; j < prefix_bits; ++j) {
    a[j] = (prefix >> (prefix_bits - 1 - j)) & 1U;
  }
  // field[i] = sum_{j != i} q_ij a_j
  std::vector<double> field(n, 0.0);
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && a[j]) field[i] += q(i, j);
    }
    if (a[i]) e += q(i, i) + field[i];
  }
  std::uint64_t code = prefix << free_bits;
  offer(heap, capacity, {e, code});

  const std::uint64_t steps = free_bits == 0 ? 0 : (std::uint64_t{1} << free_bits);
  for (std::uint64_t g = 1; g < steps; ++g) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(g));
    const std::size_t var = n - 1 - bit;
    const double d = a[var] ? -1.0 : 1.0;
    e += d * (q(var, var) + 2.0 * field[var]);
    a[var] ^= 1U;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != var) field[i] += d * q(i, var);
    }
    code ^= std::uint64_t{1} << bit;
    offer(heap, capacity, {e, code});
  }
}

}  // namespace

std::vector<ScoredBitString> brute_force_solve(const QuboProblem& problem, std::size_t top_k,
                                               const BruteForceOptions& options) {
  const std::size_t n = problem.size();
  require(top_k >= 1, "brute_force_solve: top_k must be positive");
  if (n > options.max_variables || n > 62) {
    throw CapacityError("brute_force_solve: " + std::to_string(n) +
                        " variables exceed the enumeration bound of " +
                        std::to_string(std::min<std::size_t>(options.max_variables, 62)));
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  top_k = static_cast<std::size_t>(std::min<std::uint64_t>(top_k, total));

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, threads);

  // Incremental energies carry rounding noise; keep a margin and re-rank exactly.
  const std::size_t capacity = static_cast<std::size_t>(
      std::min<std::uint64_t>(total, static_cast<std::uint64_t>(top_k) + 16));

  std::size_t prefix_bits = 0;
  while (prefix_bits < n && prefix_bits < 12 && (std::size_t{1} << prefix_bits) < 8 * threads) {
    ++prefix_bits;
  }
  if (threads == 1) prefix_bits = 0;
  const std::uint64_t chunks = std::uint64_t{1} << prefix_bits;

  const Eigen::MatrixXd& q = problem.matrix();
  std::vector<CandidateHeap> heaps(threads);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned t) {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      enumerate_chunk(q, n, prefix_bits, c, capacity, heaps[t]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }

  std::vector<ScoredBitString> ranked;
  for (auto& heap : heaps) {
    while (!heap.empty()) {
      BitString bits = BitString::from_code(heap.top().code, n);
      heap.pop();
      const double e = energy(problem, bits);
      ranked.push_back({std::move(bits), e});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredBitString& a, const ScoredBitString& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.bits < b.bits;
  });
  ranked.resize(top_k);
  return ranked;
}

SolutionDistribution SolutionDistribution::from_samples(std::span<const BitString> samples) {
  if (samples.empty()) throw ContractError("distribution_from_samples: no samples");
  const std::size_t n = samples.front().size();
  std::map<BitString, std::uint64_t> counts;
  for (const auto& s : samples) {
    if (s.size() != n) throw ContractError("distribution_from_samples: ragged bit string lengths");
    ++counts[s];
  }
  return from_counts({counts.begin(), counts.end()});
}

SolutionDistribution SolutionDistribution::from_counts(
    std::vector<std::pair<BitString, std::uint64_t>> counts) {
  SolutionDistribution out;
  std::map<BitString, std::uint64_t> merged;
  std::size_t n = 0;
  bool first = true;
  for (auto& [bits, count] : counts) {
    if (first) {
      n = bits.size();
      first = false;
    } else if (bits.size() != n) {
      throw ContractError("SolutionDistribution: ragged bit string lengths");
    }
    if (count == 0) continue;
    merged[bits] += count;
    out.total_shots_ += count;
  }
  if (out.total_shots_ == 0) throw ContractError("SolutionDistribution: no shots");
  for (auto& [bits, count] : merged) {
    out.entries_.push_back(
        {bits, count, static_cast<double>(count) / static_cast<double>(out.total_shots_)});
  }
  std::stable_sort(out.entries_.begin(), out.entries_.end(),
                   [](const DistributionEntry& a, const DistributionEntry& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return a.bits < b.bits;
                   });
  return out;
}

std::size_t SolutionDistribution::bit_length() const {
  return entries_.empty() ? 0 : entries_.front().bits.size();
}

const DistributionEntry& SolutionDistribution::modal() const {
  if (entries_.empty()) throw ContractError("SolutionDistribution::modal: empty distribution");
  return entries_.front();
}

double SolutionDistribution::probability_of(const BitString& bits) const {
  for (const auto& e : entries_) {
    if (e.bits == bits) return e.probability;
  }
  return 0.0;
}

SolutionDistribution distribution_from_samples(std::span<const BitString> samples) {
  return SolutionDistribution::from_samples(samples);
}

}  // namespace qsvm
