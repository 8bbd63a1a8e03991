#include "pspace/diffusion.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "pspace/csv.hpp"
#include "pspace/stats.hpp"

namespace pspace {

namespace {

using Eigen::Index;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

std::map<std::string, int> DiffusionTrace::acquired() const {
  std::map<std::string, int> out;
  for (std::size_t k = 0; k < products.size(); ++k) {
    if (step[k] != kUnreached) out.emplace(products[k], step[k]);
  }
  return out;
}

std::vector<std::size_t> DiffusionTrace::reached_by(int round) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < step.size(); ++k) {
    if (step[k] != kUnreached && step[k] <= round) out.push_back(k);
  }
  return out;
}

int DiffusionTrace::rounds_used() const {
  return step.empty() ? 0 : std::max(0, *std::max_element(step.begin(), step.end()));
}

std::vector<ProductIncome> prody(const RcaMatrix& r, std::span<const CountryIncome> incomes,
                                 Warnings* warnings) {
  std::vector<std::pair<Index, double>> rows;  // RCA row, GDP per capita
  for (const auto& inc : incomes) {
    if (auto c = find_code(r.countries, inc.country)) rows.emplace_back(idx(*c), inc.gdp_per_capita);
  }
  if (rows.empty()) throw Error("PRODY needs income data for at least one exporting country");

  std::vector<ProductIncome> out;
  std::size_t omitted = 0;
  for (std::size_t p = 0; p < r.products.size(); ++p) {
    double weighted = 0.0, weight = 0.0;
    for (auto [c, gdp] : rows) {
      const double w = r.values(c, idx(p));
      weighted += w * gdp;
      weight += w;
    }
    if (!(weight > 0.0)) {
      ++omitted;
      continue;
    }
    out.push_back({r.products[p], weighted / weight});
  }
  if (omitted > 0) {
    warn(warnings, std::to_string(omitted) +
                       " products have no exporter with income data; PRODY omitted");
  }
  return out;
}

DiffusionTrace diffuse(const SpecializationMatrix& s, const ProximityMatrix& p,
                       const DiffusionConfig& cfg, std::string_view country) {
  if (s.products != p.products) {
    throw Error("specialization and proximity matrices cover different products; align first");
  }
  if (cfg.iterations < 0) throw Error("diffusion iterations must be non-negative");
  auto c = find_code(s.countries, country);
  if (!c) throw UnknownCodeError(std::string(country), "specialization countries");

  const std::size_t n = p.size();
  DiffusionTrace trace;
  trace.country = std::string(country);
  trace.products = p.products;
  trace.step.assign(n, DiffusionTrace::kUnreached);

  auto passes = [&](double phi) { return cfg.inclusive ? phi >= cfg.phi0 : phi > cfg.phi0; };

  // reachable[j]: some held product is within phi0 of j
  std::vector<char> reachable(n, 0);
  auto hold = [&](std::size_t i, int round) {
    trace.step[i] = round;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && passes(p.phi(idx(i), idx(j)))) reachable[j] = 1;
    }
  };
  for (std::size_t i : s.basket(*c)) hold(i, 0);

  for (int round = 1; round <= cfg.iterations; ++round) {
    std::vector<std::size_t> frontier;
    for (std::size_t j = 0; j < n; ++j) {
      if (trace.step[j] == DiffusionTrace::kUnreached && reachable[j]) frontier.push_back(j);
    }
    if (frontier.empty()) break;  // fixed point
    for (std::size_t j : frontier) hold(j, round);
  }
  return trace;
}

std::optional<double> reach_prody(const DiffusionTrace& trace,
                                  std::span<const ProductIncome> prodys, int top_n) {
  if (top_n <= 0) throw Error("top_n must be positive");
  std::map<std::string_view, double> price;
  for (const auto& pi : prodys) price.emplace(pi.product, pi.prody);
  std::vector<double> values;
  for (std::size_t k = 0; k < trace.products.size(); ++k) {
    if (trace.step[k] == DiffusionTrace::kUnreached) continue;
    auto it = price.find(trace.products[k]);
    if (it != price.end()) values.push_back(it->second);
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end(), std::greater<>());
  values.resize(std::min(values.size(), static_cast<std::size_t>(top_n)));
  return stats::mean(values);
}

ConvergenceReport convergence_sweep(const SpecializationMatrix& s, const ProximityMatrix& p,
                                    std::span<const ProductIncome> prodys,
                                    std::span<const double> phi_grid,
                                    const DiffusionConfig& cfg) {
  for (double phi0 : phi_grid) {
    if (!(phi0 > 0.0 && phi0 <= 1.0)) throw Error("phi grid values must lie in (0, 1]");
  }

  ConvergenceReport report;
  DiffusionConfig frozen = cfg;
  frozen.iterations = 0;
  for (const auto& country : s.countries) {
    if (auto v = reach_prody(diffuse(s, p, frozen, country), prodys, cfg.top_n)) {
      report.countries.push_back(country);
      report.original.push_back(*v);
    }
  }
  if (report.countries.size() < 4) {
    throw UndefinedError("IQR needs at least 4 countries with priced products, got " +
                         std::to_string(report.countries.size()));
  }
  report.original_iqr = stats::interquartile_range(report.original);

  for (double phi0 : phi_grid) {
    DiffusionConfig run = cfg;
    run.phi0 = phi0;
    ConvergenceRow row;
    row.phi0 = phi0;
    for (const auto& country : report.countries) {
      // a superset of the initial basket, so always priced
      row.reach.push_back(*reach_prody(diffuse(s, p, run, country), prodys, cfg.top_n));
    }
    row.iqr = stats::interquartile_range(row.reach);
    if (report.original_iqr > 0.0) row.ratio = row.iqr / report.original_iqr;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_prody(const std::filesystem::path& path, std::span<const ProductIncome> prodys) {
  auto out = csv::open_output(path);
  out << "sitc4,prody\n";
  for (const auto& pi : prodys) out << pi.product << ',' << csv::format_real(pi.prody) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ProductIncome> read_prody(const std::filesystem::path& path) {
  csv::Reader reader(path, {"sitc4", "prody"});
  std::vector<ProductIncome> out;
  while (auto row = reader.next()) {
    auto& f = *row;
    double v = 0.0;
    if (!csv::parse_real(f[1], v) || v <= 0.0) reader.fail("bad PRODY '" + f[1] + "'");
    out.push_back({f[0], v});
  }
  std::sort(out.begin(), out.end(),
            [](const ProductIncome& a, const ProductIncome& b) { return a.product < b.product; });
  return out;
}

void write_traces(const std::filesystem::path& path, std::span<const DiffusionTrace> traces) {
  auto out = csv::open_output(path);
  out << "country,sitc4,step\n";
  for (const auto& t : traces) {
    for (std::size_t k = 0; k < t.products.size(); ++k) {
      if (t.step[k] != DiffusionTrace::kUnreached) {
        out << t.country << ',' << t.products[k] << ',' << t.step[k] << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_sweep(const std::filesystem::path& path, const ConvergenceReport& report) {
  auto out = csv::open_output(path);
  out << "phi0,country,reach_prody\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < report.countries.size(); ++c) {
      out << csv::format_real(row.phi0) << ',' << report.countries[c] << ','
          << csv::format_real(row.reach[c]) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_convergence_json(const std::filesystem::path& path, const ConvergenceReport& report) {
  nlohmann::ordered_json doc;
  doc["original_iqr"] = csv::round_output(report.original_iqr);
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["phi0"] = csv::round_output(row.phi0);
    r["iqr"] = csv::round_output(row.iqr);
    r["ratio"] = row.ratio ? nlohmann::ordered_json(csv::round_output(*row.ratio))
                           : nlohmann::ordered_json();
    doc["rows"].push_back(std::move(r));
  }
  doc["original"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.countries.size(); ++c) {
    doc["original"].push_back(
        {{"country", report.countries[c]}, {"reach_prody", csv::round_output(report.original[c])}});
  }
  auto out = csv::open_output(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pspace
