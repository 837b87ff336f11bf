#include <doctest.h>

#include "qsvm/embedding.hpp"
#include "qsvm/error.hpp"

#include <cmath>

using namespace qsvm;
using namespace qsvm::embedding;
using rydberg::distance;
using rydberg::kDefaultC6;
using rydberg::Point;

namespace {

QuboProblem couplings(std::size_t n, std::vector<std::tuple<int, int, double>> pairs) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j, t] : pairs) m(i, j) = m(j, i) = 0.5 * t;  // q_ij + q_ji = t
  return QuboProblem(m);
}

double min_spacing(const rydberg::AtomRegister& reg) {
  double best = INFINITY;
  for (std::size_t i = 0; i < reg.size(); ++i)
    for (std::size_t j = i + 1; j < reg.size(); ++j) best = std::min(best, distance(reg.coords()[i], reg.coords()[j]));
  return best;
}

bool on_lattice(const Point& p, const std::vector<Point>& sites) {
  for (const auto& s : sites)
    if (distance(p, s) < 1e-9) return true;
  return false;
}

double coupling_at(double r) { return kDefaultC6 / std::pow(r, 6); }

}  // namespace

TEST_CASE("coupling target clip rule") {
  CHECK(coupling_target(QuboProblem(Eigen::MatrixXd::Zero(3, 3))).target.isZero());

  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(2, 2);
  pos(0, 1) = pos(1, 0) = 2.0;
  auto t = coupling_target(QuboProblem(pos));
  CHECK(t.target(0, 1) == doctest::Approx(4.0));
  CHECK(t.target(1, 0) == doctest::Approx(4.0));
  CHECK(t.clipped_mass == 0.0);

  Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2, 2);
  neg(0, 1) = neg(1, 0) = -3.0;
  neg(0, 0) = -1.5;
  auto c = coupling_target(QuboProblem(neg));
  CHECK(c.target(0, 1) == 0.0);
  CHECK(c.clipped_mass == doctest::Approx(6.0));
  CHECK(c.diagonal_mass == doctest::Approx(1.5));
}

TEST_CASE("continuous: unit coupling pair") {
  auto rep = embed_continuous(couplings(2, {{0, 1, 1.0}}), {});
  CHECK(rep.objective < 1e-8);
  CHECK(distance(rep.reg.coords()[0], rep.reg.coords()[1]) ==
        doctest::Approx(std::pow(kDefaultC6, 1.0 / 6.0)).epsilon(1e-4));
}

TEST_CASE("continuous: zero target spreads out") {
  EmbeddingConfig cfg;
  auto rep = embed_continuous(QuboProblem(Eigen::MatrixXd::Zero(3, 3)), cfg);
  CHECK(rep.objective == doctest::Approx(embedding_objective(rep.reg.coords(), rep.target.target, cfg.c6)));
  auto start = embed_continuous(QuboProblem(Eigen::MatrixXd::Zero(3, 3)), {.max_iters = 1});
  CHECK(rep.objective <= start.objective);
  CHECK(min_spacing(rep.reg) > 2 * cfg.min_distance);
}

TEST_CASE("continuous: equal targets give an equilateral triangle") {
  const double r0 = 10.0;
  const double t = coupling_at(r0);
  auto rep = embed_continuous(couplings(3, {{0, 1, t}, {0, 2, t}, {1, 2, t}}), {});
  CHECK(rep.objective < 1e-6);
  const auto& p = rep.reg.coords();
  CHECK(distance(p[0], p[1]) == doctest::Approx(r0).epsilon(1e-3));
  CHECK(distance(p[0], p[2]) == doctest::Approx(r0).epsilon(1e-3));
  CHECK(distance(p[1], p[2]) == doctest::Approx(r0).epsilon(1e-3));
}

TEST_CASE("continuous respects constraints and seed") {
  auto q = couplings(5, {{0, 1, 50.0}, {1, 2, 3.0}, {2, 3, 400.0}, {3, 4, 8.0}, {0, 4, 20.0}});
  EmbeddingConfig cfg{.seed = 4};
  auto a = embed_continuous(q, cfg);
  auto b = embed_continuous(q, cfg);
  CHECK(a.objective == b.objective);
  CHECK(min_spacing(a.reg) >= cfg.min_distance - 1e-12);
  for (const auto& pt : a.reg.coords()) CHECK(std::hypot(pt.x, pt.y) <= cfg.max_radius + 1e-9);
}

TEST_CASE("continuous: couplings of an actual register are reproduced") {
  // Irregular 7-atom layout; its own interactions are an exactly realizable target.
  const std::vector<Point> pts{{0, 0}, {7.5, 1}, {2, 8}, {-6, 5}, {-4, -7}, {9, -6}, {15, 3}};
  const Eigen::MatrixXd u = rydberg::interaction_matrix(rydberg::AtomRegister(pts));
  const QuboProblem q(0.5 * u);
  const auto report = embed_continuous(q, EmbeddingConfig{});
  CHECK(report.objective < 1e-12);
  const Eigen::MatrixXd got = rydberg::interaction_matrix(report.reg);
  CHECK((got - u).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lattice: single atom") {
  auto rep = embed_lattice(QuboProblem(Eigen::MatrixXd::Zero(1, 1)), {.mode = Mode::triangular_lattice});
  CHECK(rep.reg.size() == 1);
  CHECK(rep.objective == 0.0);
}

TEST_CASE("lattice: strongly coupled pair sits on neighbouring sites") {
  EmbeddingConfig cfg{.mode = Mode::triangular_lattice};
  auto rep = embed_lattice(couplings(2, {{0, 1, 1e6}}), cfg);
  CHECK(distance(rep.reg.coords()[0], rep.reg.coords()[1]) == doctest::Approx(cfg.lattice_constant));
}

TEST_CASE("lattice: strong pair adjacent, third atom away") {
  EmbeddingConfig cfg{.mode = Mode::triangular_lattice};
  const double strong = coupling_at(cfg.lattice_constant);
  auto q = couplings(3, {{0, 1, strong}, {0, 2, 1.0}, {1, 2, 1.0}});
  auto rep = embed_lattice(q, cfg);
  const auto& p = rep.reg.coords();
  CHECK(distance(p[0], p[1]) == doctest::Approx(cfg.lattice_constant));
  CHECK(distance(p[0], p[2]) > cfg.lattice_constant + 1e-9);
  CHECK(distance(p[1], p[2]) > cfg.lattice_constant + 1e-9);
  const double a = cfg.lattice_constant;
  std::vector<Point> cluster{{0, 0}, {a, 0}, {a / 2, a * std::sqrt(3.0) / 2}};
  CHECK(rep.objective <= embedding_objective(cluster, rep.target.target, cfg.c6));
}

TEST_CASE("lattice sites only, and never better than the continuous fit") {
  EmbeddingConfig cont{.seed = 2};
  EmbeddingConfig lat{.mode = Mode::triangular_lattice, .seed = 2};
  auto sites = triangular_sites(lat.lattice_constant, lat.max_radius);
  for (double scale : {1.0, 30.0, 900.0}) {
    auto q = couplings(3, {{0, 1, 2 * scale}, {1, 2, scale}, {0, 2, 0.5 * scale}});
    auto l = embed_lattice(q, lat);
    for (const auto& pt : l.reg.coords()) CHECK(on_lattice(pt, sites));
    CHECK(min_spacing(l.reg) >= lat.min_distance);
    CHECK(l.objective >= embed_continuous(q, cont).objective - 1e-9);
    CHECK(embed_lattice(q, lat).objective == l.objective);
  }
}

TEST_CASE("triangular sites") {
  auto sites = triangular_sites(5.0, 5.0);
  CHECK(sites.size() == 7);
  CHECK(std::hypot(sites[0].x, sites[0].y) == doctest::Approx(0.0));
}

TEST_CASE("capacity and config errors") {
  EmbeddingConfig tight{.mode = Mode::triangular_lattice, .lattice_constant = 5.0, .max_radius = 5.0};
  CHECK_THROWS_AS(embed_lattice(QuboProblem(Eigen::MatrixXd::Zero(8, 8)), tight), CapacityError);
  EmbeddingConfig tiny{.max_radius = 3.0};
  CHECK_THROWS_AS(embed_continuous(QuboProblem(Eigen::MatrixXd::Zero(6, 6)), tiny), CapacityError);
  EmbeddingConfig bad{.lattice_constant = 2.0, .min_distance = 4.0};
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("dispatch on mode") {
  auto q = couplings(2, {{0, 1, 1.0}});
  CHECK(embed(q, {}).objective == embed_continuous(q, {}).objective);
  EmbeddingConfig lat{.mode = Mode::triangular_lattice};
  CHECK(embed(q, lat).objective == embed_lattice(q, lat).objective);
}
