#include "pspace/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pspace/csv.hpp"

namespace pspace {

namespace {

std::string country_code(int k) {
  std::string code = "K";
  code += static_cast<char>('A' + (k / 26) % 26);
  code += static_cast<char>('A' + k % 26);
  return code;
}

std::string product_code(int cluster, int k) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%d%03d", cluster % 10, k % 1000);
  return buf;
}

const char* kClusterNames[] = {"Agriculture", "Mining", "Garments", "Textiles",
                               "Electronics", "Chemicals", "Machinery", "Metals",
                               "Forest", "Fishing"};

}  // namespace

SyntheticWorld make_synthetic_world(const SyntheticOptions& o) {
  if (o.countries < 1 || o.products < 1 || o.clusters < 1 || o.years.empty()) {
    throw Error("synthetic world needs at least one country, product, cluster and year");
  }
  if (o.clusters > 10 || o.products / o.clusters >= 1000) {
    throw Error("synthetic world supports at most 10 clusters of under 1000 products");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticWorld w;

  struct Product {
    std::string code;
    int cluster;
    double sophistication;
  };
  std::vector<Product> products;
  for (int k = 0; k < o.products; ++k) {
    const int cluster = k % o.clusters;
    const double base = (cluster + 0.5) / o.clusters;
    const double soph = std::clamp(base + 0.08 * gauss(rng), 0.0, 1.0);
    products.push_back({product_code(cluster, k / o.clusters), cluster, soph});
    w.meta.push_back({products.back().code,
                      std::string(kClusterNames[cluster % 10]) + " product " + std::to_string(k),
                      kClusterNames[cluster % 10]});
  }
  std::sort(w.meta.begin(), w.meta.end(),
            [](const ProductMeta& a, const ProductMeta& b) { return a.product < b.product; });

  struct Country {
    std::string code;
    double capability;
    double drift;
    double size;
    std::vector<double> affinity;
  };
  std::vector<Country> countries;
  for (int c = 0; c < o.countries; ++c) {
    Country ct{country_code(c), unit(rng), 0.1 * unit(rng), std::exp(1.0 + gauss(rng)), {}};
    ct.affinity.assign(static_cast<std::size_t>(o.clusters), 0.15);
    for (int pick = 0; pick < 2; ++pick) {
      ct.affinity[static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(o.clusters))] = 1.0;
    }
    countries.push_back(std::move(ct));
  }

  const int first_year = o.years.front();
  const int last_year = o.years.back();
  for (int year : o.years) {
    const double progress =
        last_year == first_year ? 0.0 : double(year - first_year) / double(last_year - first_year);
    for (const auto& ct : countries) {
      const double cap = std::min(1.0, ct.capability + ct.drift * progress);
      for (const auto& p : products) {
        const double gap = (p.sophistication - cap) / 0.18;
        double value = 1000.0 * ct.size * std::exp(-0.5 * gap * gap) *
                       ct.affinity[static_cast<std::size_t>(p.cluster)] *
                       std::exp(0.5 * gauss(rng));
        if (value < 5.0) continue;  // below reporting threshold
        value = std::round(value * 10.0) / 10.0;
        w.trade.push_back({year, ct.code, p.code, value});
      }
      const double gdp = std::round(std::exp(7.0 + 3.2 * cap + 0.15 * gauss(rng)));
      w.incomes.push_back({ct.code, std::max(gdp, 100.0), year});
    }
  }
  return w;
}

void write_trade_records(const std::filesystem::path& path, std::span<const TradeRecord> records) {
  auto out = csv::open_output(path);
  out << "year,exporter,sitc4,value\n";
  for (const auto& r : records) {
    out << r.year << ',' << r.exporter << ',' << r.product << ',' << csv::format_real(r.value)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pspace
