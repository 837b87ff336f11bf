#include "qsvm/embedding.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace qsvm::embedding {

using rydberg::Point;

void EmbeddingConfig::validate() const {
  require(min_distance > 0.0, "EmbeddingConfig: min_distance must be positive");
  require(lattice_constant >= min_distance, "EmbeddingConfig: lattice_constant must be >= min_distance");
  require(max_radius > 0.0, "EmbeddingConfig: max_radius must be positive");
  require(max_iters >= 1, "EmbeddingConfig: max_iters must be at least 1");
  require(c6 > 0.0, "EmbeddingConfig: c6 must be positive");
}

CouplingTarget coupling_target(const QuboProblem& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  const auto& m = q.matrix();
  CouplingTarget out;
  out.target = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.diagonal_mass += std::abs(m(i, i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double pair = m(i, j) + m(j, i);
      if (pair >= 0.0) {
        out.target(i, j) = out.target(j, i) = pair;
      } else {
        out.clipped_mass -= pair;
      }
    }
  }
  return out;
}

double embedding_objective(const std::vector<Point>& coords, const Eigen::MatrixXd& target, double c6) {
  double total = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      const double r = rydberg::distance(coords[i], coords[j]);
      const double u = c6 / std::pow(r, 6);
      const double d = u - target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      total += d * d;
    }
  }
  return total;
}

std::vector<Point> triangular_sites(double lattice_constant, double max_radius) {
  require(lattice_constant > 0.0 && max_radius >= 0.0, "triangular_sites: invalid geometry");
  const auto reach = static_cast<int>(std::ceil(2.0 * max_radius / lattice_constant)) + 1;
  const double h = std::sqrt(3.0) / 2.0;
  struct Site {
    Point p;
    long long dist_key;
    double angle;
  };
  std::vector<Site> sites;
  for (int j = -reach; j <= reach; ++j) {
    for (int i = -reach; i <= reach; ++i) {
      const Point p{lattice_constant * (i + 0.5 * j), lattice_constant * h * j};
      const double r = std::hypot(p.x, p.y);
      if (r > max_radius + 1e-9) continue;
      sites.push_back({p, std::llround(r * 1e6), std::atan2(p.y, p.x)});
    }
  }
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    if (a.dist_key != b.dist_key) return a.dist_key < b.dist_key;
    return a.angle < b.angle;
  });
  std::vector<Point> out;
  out.reserve(sites.size());
  for (const auto& s : sites) out.push_back(s.p);
  return out;
}

namespace {

bool feasible(const std::vector<double>& x, const EmbeddingConfig& cfg) {
  const std::size_t n = x.size() / 2;
  const double r2max = cfg.max_radius * cfg.max_radius;
  const double d2min = cfg.min_distance * cfg.min_distance;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1] > r2max) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      if (dx * dx + dy * dy < d2min) return false;
    }
  }
  return true;
}

std::vector<Point> to_points(const std::vector<double>& x) {
  std::vector<Point> pts(x.size() / 2);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {x[2 * i], x[2 * i + 1]};
  return pts;
}

std::vector<double> initial_layout(std::size_t n, const EmbeddingConfig& cfg) {
  Rng rng = make_rng(cfg.seed, streams::kEmbedding, 0);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  const double radius = std::min(cfg.max_radius, std::max(cfg.min_distance, 0.5 * static_cast<double>(n) * cfg.min_distance));
  const double phase = 2.0 * std::numbers::pi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double r = std::min(radius * (1.0 + jitter(rng)), cfg.max_radius);
    x[2 * i] = r * std::cos(angle);
    x[2 * i + 1] = r * std::sin(angle);
  }
  if (feasible(x, cfg)) return x;

  // Dense fallback: a hexagonal patch at the minimum spacing.
  const auto sites = triangular_sites(cfg.min_distance, cfg.max_radius);
  if (sites.size() < n) {
    throw CapacityError("embed_continuous: " + std::to_string(n) + " atoms cannot fit within radius " +
                        std::to_string(cfg.max_radius) + " at spacing " + std::to_string(cfg.min_distance));
  }
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = sites[i].x;
    x[2 * i + 1] = sites[i].y;
  }
  return x;
}

// Classical multidimensional scaling of the distances that realize the target
// exactly (pairs without a target sit at the far cutoff), centred and pulled
// inside the radius. Empty when the layout breaks the spacing constraint.
std::vector<double> scaling_layout(const Eigen::MatrixXd& target, const EmbeddingConfig& cfg) {
  const auto n = target.rows();
  const double far = 2.0 * cfg.max_radius;
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double r = 0.0;
      if (i != j) r = target(i, j) > 0.0 ? std::clamp(std::pow(cfg.c6 / target(i, j), 1.0 / 6.0), cfg.min_distance, far) : far;
      d2(i, j) = r * r;
    }
  }
  const Eigen::MatrixXd centre =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd gram = -0.5 * centre * d2 * centre;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  std::vector<double> x(2 * static_cast<std::size_t>(n));
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index col = n - 1 - axis;
    const double lambda = std::max(eig.eigenvalues()(col), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[2 * static_cast<std::size_t>(i) + static_cast<std::size_t>(axis)] = std::sqrt(lambda) * eig.eigenvectors()(i, col);
    }
  }
  double reach = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) reach = std::max(reach, std::hypot(x[2 * i], x[2 * i + 1]));
  if (reach > cfg.max_radius) {
    for (auto& v : x) v *= cfg.max_radius / reach;
  }
  if (!feasible(x, cfg)) return {};
  return x;
}

// Nelder-Mead with adaptive coefficients; infeasible points evaluate to +inf so
// the best vertex is always feasible. Restarts around the incumbent until the
// evaluation budget is spent or a restart stops improving.
struct SimplexResult {
  std::vector<double> x;
  double f;
  std::size_t evaluations;
};

template <class Objective>
SimplexResult nelder_mead(Objective&& objective, std::vector<double> x0, double step, std::size_t max_iters) {
  const std::size_t dim = x0.size();
  const double d = static_cast<double>(dim);
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / d;
  const double rho = 0.75 - 1.0 / (2.0 * d);
  const double sigma = 1.0 - 1.0 / d;

  std::size_t evaluations = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    return objective(x);
  };

  std::vector<double> best = x0;
  double best_f = eval(best);
  std::size_t iters = 0;

  for (int restart = 0; restart < 12 && iters < max_iters; ++restart) {
    std::vector<std::vector<double>> simplex(dim + 1, best);
    std::vector<double> f(dim + 1, best_f);
    for (std::size_t i = 0; i < dim; ++i) {
      simplex[i + 1][i] += step;
      f[i + 1] = eval(simplex[i + 1]);
      if (!std::isfinite(f[i + 1])) {
        simplex[i + 1][i] -= 2.0 * step;
        f[i + 1] = eval(simplex[i + 1]);
      }
    }
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), expanded(dim);

    for (; iters < max_iters; ++iters) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t lo = order.front();
      const std::size_t hi = order.back();
      const std::size_t second = order[dim - 1];

      double size = 0.0;
      for (std::size_t v = 0; v <= dim; ++v) {
        for (std::size_t k = 0; k < dim; ++k) size = std::max(size, std::abs(simplex[v][k] - simplex[lo][k]));
      }
      if (size < 1e-11 || (std::isfinite(f[hi]) && f[hi] - f[lo] <= 1e-16 * (1.0 + std::abs(f[lo])))) break;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == hi) continue;
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[v][k] / d;
      }
      for (std::size_t k = 0; k < dim; ++k) trial[k] = centroid[k] + alpha * (centroid[k] - simplex[hi][k]);
      const double fr = eval(trial);

      if (fr < f[lo]) {
        for (std::size_t k = 0; k < dim; ++k) expanded[k] = centroid[k] + gamma * (trial[k] - centroid[k]);
        const double fe = eval(expanded);
        if (fe < fr) {
          simplex[hi] = expanded;
          f[hi] = fe;
        } else {
          simplex[hi] = trial;
          f[hi] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        simplex[hi] = trial;
        f[hi] = fr;
        continue;
      }
      const bool outside = fr < f[hi];
      for (std::size_t k = 0; k < dim; ++k) {
        const double toward = outside ? trial[k] : simplex[hi][k];
        expanded[k] = centroid[k] + rho * (toward - centroid[k]);
      }
      const double fc = eval(expanded);
      if (fc < (outside ? fr : f[hi])) {
        simplex[hi] = expanded;
        f[hi] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == lo) continue;
        for (std::size_t k = 0; k < dim; ++k) simplex[v][k] = simplex[lo][k] + sigma * (simplex[v][k] - simplex[lo][k]);
        f[v] = eval(simplex[v]);
      }
    }

    const auto it = std::min_element(f.begin(), f.end());
    const double improvement = best_f - *it;
    if (*it < best_f) {
      best_f = *it;
      best = simplex[static_cast<std::size_t>(it - f.begin())];
    }
    if (restart > 0 && !(improvement > 1e-14 * (1.0 + std::abs(best_f)))) break;
    step = std::max(step * 0.25, 1e-6);
  }
  return {best, best_f, evaluations};
}

}  // namespace

EmbeddingReport embed_continuous(const QuboProblem& q, const EmbeddingConfig& cfg) {
  cfg.validate();
  auto target = coupling_target(q);
  const std::size_t n = q.size();
  if (n == 1) {
    rydberg::AtomRegister reg({{0.0, 0.0}}, cfg.c6, cfg.min_distance);
    return {std::move(reg), 0.0, std::move(target), 0};
  }

  auto objective = [&](const std::vector<double>& x) {
    if (!feasible(x, cfg)) return std::numeric_limits<double>::infinity();
    return embedding_objective(to_points(x), target.target, cfg.c6);
  };
  // Two starts, ring and scaling; the lower objective wins.
  auto result = nelder_mead(objective, initial_layout(n, cfg), 0.5 * cfg.min_distance, cfg.max_iters);
  if (auto x0 = scaling_layout(target.target, cfg); !x0.empty()) {
    auto second = nelder_mead(objective, std::move(x0), 0.1 * cfg.min_distance, cfg.max_iters);
    second.evaluations += result.evaluations;
    if (second.f < result.f) {
      result = std::move(second);
    } else {
      result.evaluations = second.evaluations;
    }
  }
  auto pts = to_points(result.x);
  const double objective_value = embedding_objective(pts, target.target, cfg.c6);
  rydberg::AtomRegister reg(std::move(pts), cfg.c6, cfg.min_distance);
  return {std::move(reg), objective_value, std::move(target), result.evaluations};
}

EmbeddingReport embed_lattice(const QuboProblem& q, const EmbeddingConfig& cfg) {
  cfg.validate();
  auto target = coupling_target(q);
  const std::size_t n = q.size();
  const auto sites = triangular_sites(cfg.lattice_constant, cfg.max_radius);
  if (sites.size() < n) {
    throw CapacityError("embed_lattice: lattice window holds " + std::to_string(sites.size()) + " sites but " +
                        std::to_string(n) + " atoms are required");
  }

  std::vector<std::size_t> placement(n);
  std::iota(placement.begin(), placement.end(), 0);
  std::vector<char> occupied(sites.size(), 0);
  for (auto s : placement) occupied[s] = 1;

  auto layout = [&](const std::vector<std::size_t>& p) {
    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = sites[p[i]];
    return pts;
  };
  auto cost = [&](const std::vector<std::size_t>& p) { return embedding_objective(layout(p), target.target, cfg.c6); };

  double current = cost(placement);
  std::vector<std::size_t> best = placement;
  double best_cost = current;
  std::size_t evaluations = 1;

  if (n >= 2) {
    Rng rng = make_rng(cfg.seed, streams::kEmbedding, 1);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_atom(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_site(0, sites.size() - 1);

    // Proposes a swap of two atoms or a move of one atom to a free site;
    // returns false when the proposal is a no-op.
    auto propose = [&](std::vector<std::size_t>& p) {
      if (uniform(rng) < 0.3) {
        const std::size_t a = pick_atom(rng);
        const std::size_t b = pick_atom(rng);
        if (a == b) return false;
        std::swap(p[a], p[b]);
        return true;
      }
      const std::size_t a = pick_atom(rng);
      const std::size_t s = pick_site(rng);
      if (occupied[s]) return false;
      p[a] = s;
      return true;
    };

    double scale = 0.0;
    std::size_t samples = 0;
    for (int k = 0; k < 200; ++k) {
      auto trial = placement;
      if (!propose(trial)) continue;
      scale += std::abs(cost(trial) - current);
      ++samples;
      ++evaluations;
    }
    const double t_start = samples && scale > 0.0 ? scale / static_cast<double>(samples) : 1.0;
    const double t_end = t_start * 1e-6;
    const std::size_t steps = cfg.max_iters * n;
    auto trial = placement;
    for (std::size_t step = 0; step < steps; ++step) {
      const double frac = steps > 1 ? static_cast<double>(step) / static_cast<double>(steps - 1) : 1.0;
      const double temperature = t_start * std::pow(t_end / t_start, frac);
      trial = placement;
      if (!propose(trial)) continue;
      const double c = cost(trial);
      ++evaluations;
      const double delta = c - current;
      if (delta <= 0.0 || uniform(rng) < std::exp(-delta / temperature)) {
        for (auto s : placement) occupied[s] = 0;
        placement = trial;
        for (auto s : placement) occupied[s] = 1;
        current = c;
        if (current < best_cost) {
          best_cost = current;
          best = placement;
        }
      }
    }
  }

  rydberg::AtomRegister reg(layout(best), cfg.c6, cfg.min_distance);
  return {std::move(reg), best_cost, std::move(target), evaluations};
}

EmbeddingReport embed(const QuboProblem& q, const EmbeddingConfig& cfg) {
  return cfg.mode == Mode::continuous ? embed_continuous(q, cfg) : embed_lattice(q, cfg);
}

}  // namespace qsvm::embedding
