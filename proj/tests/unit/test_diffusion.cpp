#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "generators.hpp"
#include "oracles.hpp"
#include "pspace/diffusion.hpp"

using namespace pspace;
using namespace pspace::testing;

namespace {

SpecializationMatrix basket(std::size_t n, const std::vector<std::size_t>& held) {
  SpecializationMatrix s;
  s.countries = {"C00"};
  s.products = product_codes(n);
  s.bits = BoolMatrix::Zero(1, static_cast<Eigen::Index>(n));
  for (auto k : held) s.bits(0, static_cast<Eigen::Index>(k)) = true;
  return s;
}

}  // namespace

TEST_CASE("chain diffusion") {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(3, 3);
  phi(0, 1) = phi(1, 0) = 0.7;
  phi(1, 2) = phi(2, 1) = 0.7;
  auto p = make_proximity(phi);
  auto tr = diffuse(basket(3, {0}), p, {0.65, 2, 50, true}, "C00");
  CHECK(tr.step == std::vector<int>{0, 1, 2});
  CHECK(tr.rounds_used() == 2);
  CHECK(tr.reached_by(1) == std::vector<std::size_t>{0, 1});

  auto short_run = diffuse(basket(3, {0}), p, {0.65, 1, 50, true}, "C00");
  CHECK(short_run.step == std::vector<int>{0, 1, -1});
}

TEST_CASE("threshold above every proximity freezes the basket") {
  Rng rng(1);
  auto p = random_proximity(rng, 10);
  auto s = basket(10, {1, 4});
  auto tr = diffuse(s, p, {1.0, 20, 50, false}, "C00");
  CHECK(tr.acquired().size() == 2);
  CHECK(tr.rounds_used() == 0);
}

TEST_CASE("inclusive and strict thresholds differ only at equality") {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2, 2);
  phi(0, 1) = phi(1, 0) = 0.55;
  auto p = make_proximity(phi);
  CHECK(diffuse(basket(2, {0}), p, {0.55, 5, 50, true}, "C00").step[1] == 1);
  CHECK(diffuse(basket(2, {0}), p, {0.55, 5, 50, false}, "C00").step[1] == -1);
}

TEST_CASE("diffusion errors") {
  auto p = make_proximity(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(diffuse(basket(2, {0}), p, {}, "XXX"), UnknownCodeError);
  CHECK_THROWS(diffuse(basket(3, {0}), p, {}, "C00"));
}

TEST_CASE("diffusion equals breadth-first hop counts") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 30));
    auto p = trial % 2 ? random_proximity(rng, n, 10)
                       : proximity(random_specialization(rng, 12, n, 0.35));
    auto s = random_specialization(rng, 1, n, 0.1);
    const double phi0 = uniform_real(rng, 0.05, 1.0);
    const bool inclusive = trial % 3 != 0;
    const int rounds = uniform_int(rng, 0, 8);
    auto tr = diffuse(s, p, {phi0, rounds, 50, inclusive}, "C00");
    CHECK(tr.step == bfs_steps(p.phi, s.basket(0), phi0, inclusive, rounds));
  }
}

TEST_CASE("diffusion grows monotonically in rounds and as phi0 drops") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 25));
    auto p = random_proximity(rng, n, 20);
    auto s = random_specialization(rng, 1, n, 0.15);
    const double hi = uniform_real(rng, 0.3, 1.0);
    const double lo = hi - uniform_real(rng, 0.0, 0.3);
    const int m = uniform_int(rng, 0, 6);
    auto a = diffuse(s, p, {hi, m, 50, true}, "C00");
    auto b = diffuse(s, p, {lo, m, 50, true}, "C00");
    auto c = diffuse(s, p, {hi, m + 1, 50, true}, "C00");
    for (int k = 0; k <= m; ++k) {
      auto ra = a.reached_by(k), rb = b.reached_by(k);
      CHECK(std::includes(rb.begin(), rb.end(), ra.begin(), ra.end()));
    }
    auto ra = a.reached_by(m), rc = c.reached_by(m + 1);
    CHECK(std::includes(rc.begin(), rc.end(), ra.begin(), ra.end()));
    // nested across steps, and step 0 is the basket
    CHECK(a.reached_by(0) == s.basket(0));
    for (int k = 1; k <= m; ++k) {
      auto prev = a.reached_by(k - 1), cur = a.reached_by(k);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    }
  }
}

TEST_CASE("prody") {
  RcaMatrix r;
  r.countries = {"POOR", "RICH"};
  r.products = {"0001", "0002", "0003"};
  r.values.resize(2, 3);
  r.values << 1, 0, 0, 3, 2, 0;
  std::vector<CountryIncome> inc{{"POOR", 3000, 2000}, {"RICH", 30000, 2000}};
  Warnings w;
  auto out = prody(r, inc, &w);
  REQUIRE(out.size() == 2);
  CHECK(out[0].prody == doctest::Approx(23250.0));
  CHECK(out[1].prody == doctest::Approx(30000.0));  // single exporter
  CHECK_FALSE(w.empty());                            // 0003 omitted

  std::vector<CountryIncome> same{{"POOR", 500, 2000}, {"RICH", 500, 2000}};
  for (const auto& pi : prody(r, same, &w)) CHECK(pi.prody == doctest::Approx(500.0));
  CHECK_THROWS(prody(r, std::vector<CountryIncome>{{"NONE", 1, 2000}}));
}

TEST_CASE("prody lies between the contributing incomes") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_exports(rng, 6, 8);
    RcaMatrix r{m.countries, m.products, Eigen::MatrixXd(m.values.cwiseAbs() / 100.0), m.window};
    std::vector<CountryIncome> inc;
    for (const auto& c : m.countries) inc.push_back({c, uniform_real(rng, 500, 50000), 2000});
    double lo = 1e18, hi = 0;
    for (const auto& i : inc) lo = std::min(lo, i.gdp_per_capita), hi = std::max(hi, i.gdp_per_capita);
    Warnings w;
    for (const auto& pi : prody(r, inc, &w)) {
      CHECK(pi.prody >= lo * (1 - 1e-12));
      CHECK(pi.prody <= hi * (1 + 1e-12));
    }
  }
}

TEST_CASE("reach prody") {
  DiffusionTrace tr;
  tr.country = "C00";
  tr.products = {"0001", "0002", "0003", "0004"};
  tr.step = {0, 1, 2, -1};
  std::vector<ProductIncome> prodys{{"0001", 10}, {"0002", 20}, {"0003", 30}, {"0004", 99}};
  CHECK(*reach_prody(tr, prodys, 2) == 25.0);
  CHECK(*reach_prody(tr, prodys, 50) == 20.0);
  tr.step = {-1, -1, 0, -1};
  CHECK(*reach_prody(tr, prodys, 50) == 30.0);
  CHECK_FALSE(reach_prody(tr, std::vector<ProductIncome>{{"0001", 5}}, 5).has_value());
  CHECK_THROWS(reach_prody(tr, prodys, 0));
}

TEST_CASE("reach prody matches a sort-and-average oracle and ignores steps") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    DiffusionTrace tr;
    tr.products = product_codes(60);
    std::vector<ProductIncome> prodys;
    std::vector<double> reached;
    for (std::size_t k = 0; k < 60; ++k) {
      tr.step.push_back(uniform_int(rng, -1, 4));
      const double v = uniform_real(rng, 100, 40000);
      if (uniform_real(rng) < 0.9) {
        prodys.push_back({tr.products[k], v});
        if (tr.step.back() >= 0) reached.push_back(v);
      }
    }
    if (reached.empty()) continue;
    CHECK(*reach_prody(tr, prodys, 50) == doctest::Approx(top_n_mean(reached, 50)).epsilon(1e-12));
    auto flat = tr;
    for (auto& s : flat.step)
      if (s > 0) s = 1;
    CHECK(*reach_prody(flat, prodys, 50) == *reach_prody(tr, prodys, 50));
  }
}

TEST_CASE("convergence sweep") {
  Rng rng(6);
  auto s = random_specialization(rng, 10, 20, 0.2);
  auto p = proximity(random_specialization(rng, 15, 20, 0.3));
  std::vector<ProductIncome> prodys;
  for (const auto& code : p.products) prodys.push_back({code, uniform_real(rng, 1000, 30000)});

  SUBCASE("threshold above every proximity leaves the distribution unchanged") {
    DiffusionConfig cfg{0.55, 20, 50, false};
    auto rep = convergence_sweep(s, p, prodys, std::vector<double>{1.0}, cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK(*rep.rows[0].ratio == 1.0);
  }
  SUBCASE("the best reachable product only improves as phi0 falls") {
    // with top_n = 1 reach is the maximum over a growing set
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k) grid.push_back(0.4 + 0.05 * k);
    auto rep = convergence_sweep(s, p, prodys, grid, {0.55, 20, 1, true});
    CHECK(rep.rows.size() == grid.size());
    for (std::size_t k = 1; k < rep.rows.size(); ++k)
      for (std::size_t c = 0; c < rep.countries.size(); ++c)
        CHECK(rep.rows[k - 1].reach[c] >= rep.rows[k].reach[c] * (1 - 1e-12));
    for (std::size_t c = 0; c < rep.countries.size(); ++c)
      CHECK(rep.rows.back().reach[c] >= rep.original[c] * (1 - 1e-12));
  }
  SUBCASE("grid outside (0, 1]") {
    CHECK_THROWS(convergence_sweep(s, p, prodys, std::vector<double>{0.0}, {}));
  }
  SUBCASE("too few countries") {
    auto small = random_specialization(rng, 3, 20, 0.5);
    CHECK_THROWS_AS(convergence_sweep(small, p, prodys, std::vector<double>{0.5}, {}), UndefinedError);
  }
}

TEST_CASE("diffusion files") {
  TempDir dir;
  DiffusionTrace tr;
  tr.country = "C00";
  tr.products = {"0001", "0002", "0003"};
  tr.step = {0, -1, 3};
  write_traces(dir / "t.csv", std::vector<DiffusionTrace>{tr});
  CHECK(read_text(dir / "t.csv") == "country,sitc4,step\nC00,0001,0\nC00,0003,3\n");

  ConvergenceReport rep;
  rep.countries = {"A", "B", "C", "D"};
  rep.original = {1, 2, 3, 4};
  rep.original_iqr = 1.5;
  rep.rows = {{0.5, {1, 1, 1, 1}, 0.0, 0.0}, {0.6, {1, 2, 3, 4}, 1.5, 1.0}};
  write_convergence_json(dir / "c.json", rep);
  auto doc = nlohmann::json::parse(read_text(dir / "c.json"));
  CHECK(doc["original_iqr"] == 1.5);
  CHECK(doc["rows"][1]["ratio"] == 1.0);
  write_sweep(dir / "s.csv", rep);
  CHECK(read_text(dir / "s.csv").rfind("phi0,country,reach_prody\n0.5,A,1\n", 0) == 0);

  std::vector<ProductIncome> prodys{{"0001", 1234.5}};
  write_prody(dir / "p.csv", prodys);
  CHECK(read_prody(dir / "p.csv")[0].prody == 1234.5);
}
