#include "pspace/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pspace/csv.hpp"
#include "pspace/stats.hpp"

namespace pspace {

namespace {

using Eigen::Index;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_same_products(const SpecializationMatrix& s, const ProximityMatrix& p) {
  if (s.products != p.products) {
    throw Error("specialization and proximity matrices cover different products; align first");
  }
}

std::size_t bin_count(double width) {
  if (!(width > 0.0 && width <= 1.0)) throw Error("bin width must lie in (0, 1]");
  return static_cast<std::size_t>(std::llround(std::ceil(1.0 / width - 1e-9)));
}

// Indices in `p` of the products country `c` of `s` is specialized in.
std::vector<std::size_t> basket_in(const SpecializationMatrix& s, std::size_t c,
                                   const ProximityMatrix& p) {
  std::vector<std::size_t> out;
  for (std::size_t k : s.basket(c)) {
    if (auto j = find_code(p.products, s.products[k])) out.push_back(*j);
  }
  return out;
}

double nearest_developed(const std::vector<std::size_t>& basket, std::size_t j,
                         const ProximityMatrix& p) {
  double best = 0.0;
  for (std::size_t i : basket) {
    if (i != j) best = std::max(best, p.phi(idx(i), idx(j)));
  }
  return best;
}

struct EntryIndex {
  std::size_t country;  // row in s0
  std::size_t product;  // index in p
};

EntryIndex locate(const TransitionEntry& e, const SpecializationMatrix& s0,
                  const ProximityMatrix& p) {
  auto c = find_code(s0.countries, e.country);
  if (!c) throw UnknownCodeError(e.country, "start-of-period specialization");
  auto j = find_code(p.products, e.product);
  if (!j) throw UnknownCodeError(e.product, "proximity products");
  return {*c, *j};
}

std::optional<double> ratio_of(std::size_t hits, std::size_t total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? csv::format_real(*v) : std::string();
}

}  // namespace

std::optional<double> DensityTable::find(std::string_view country,
                                         std::string_view product) const {
  auto c = find_code(countries, country);
  auto p = find_code(products, product);
  if (!c || !p) return std::nullopt;
  return omega(idx(*c), idx(*p));
}

std::string_view to_string(TransitionLabel label) {
  switch (label) {
    case TransitionLabel::transition: return "transition";
    case TransitionLabel::undeveloped: return "undeveloped";
    case TransitionLabel::inconclusive: return "inconclusive";
  }
  return "";
}

TransitionLabel parse_transition_label(std::string_view text) {
  if (text == "transition") return TransitionLabel::transition;
  if (text == "undeveloped") return TransitionLabel::undeveloped;
  if (text == "inconclusive") return TransitionLabel::inconclusive;
  throw Error("unknown transition label '" + std::string(text) + "'");
}

std::size_t TransitionTable::count(TransitionLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [label](const TransitionEntry& e) { return e.label == label; }));
}

std::size_t TransitionStats::defined() const {
  return static_cast<std::size_t>(std::count_if(
      products.begin(), products.end(), [](const ProductRatio& r) { return r.ratio.has_value(); }));
}

std::optional<double> TransitionStats::fraction_above_one() const {
  std::size_t above = 0;
  for (const auto& r : products) {
    if (r.ratio && *r.ratio > 1.0) ++above;
  }
  return ratio_of(above, defined());
}

DensityTable density_table(const SpecializationMatrix& s, const ProximityMatrix& p) {
  require_same_products(s, p);
  const Index n = p.phi.rows();
  DensityTable d;
  d.countries = s.countries;
  d.products = s.products;
  d.omega = Eigen::MatrixXd::Zero(s.bits.rows(), n);

  // Same summation order for numerator and denominator keeps omega <= 1 and
  // exactly 1 for a saturated basket.
  for (Index j = 0; j < n; ++j) {
    double denom = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i != j) denom += p.phi(i, j);
    }
    if (denom <= 0.0) continue;
    for (Index c = 0; c < s.bits.rows(); ++c) {
      double num = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (i != j && s.bits(c, i)) num += p.phi(i, j);
      }
      d.omega(c, j) = num / denom;
    }
  }
  return d;
}

DensityRow density(const SpecializationMatrix& s, const ProximityMatrix& p,
                   std::string_view country) {
  require_same_products(s, p);
  auto c = find_code(s.countries, country);
  if (!c) throw UnknownCodeError(std::string(country), "specialization countries");
  SpecializationMatrix one;
  one.countries = {std::string(country)};
  one.products = s.products;
  one.threshold = s.threshold;
  one.bits = s.bits.row(idx(*c));
  auto table = density_table(one, p);
  DensityRow row;
  row.country = std::string(country);
  row.products = s.products;
  row.omega.assign(table.omega.data(), table.omega.data() + table.omega.size());
  return row;
}

TransitionTable classify_transitions(const RcaMatrix& r0, const RcaMatrix& r1, double low,
                                     double high, Warnings* warnings) {
  if (!(low < high)) throw Error("transition thresholds need low < high");
  const CodeList countries = intersect_codes(r0.countries, r1.countries);
  const CodeList products = intersect_codes(r0.products, r1.products);
  if (countries.empty() || products.empty()) {
    throw EmptyInputError("RCA snapshots share no countries or no products");
  }
  if (countries.size() != r0.countries.size() || countries.size() != r1.countries.size() ||
      products.size() != r0.products.size() || products.size() != r1.products.size()) {
    warn(warnings, "RCA snapshots differ in universe; classifying the " +
                       std::to_string(countries.size()) + " shared countries and " +
                       std::to_string(products.size()) + " shared products");
  }

  TransitionTable t;
  t.t0 = r0.window;
  t.t1 = r1.window;
  t.low = low;
  t.high = high;
  for (const auto& c : countries) {
    const auto c0 = idx(*find_code(r0.countries, c));
    const auto c1 = idx(*find_code(r1.countries, c));
    for (const auto& p : products) {
      const double start = r0.values(c0, idx(*find_code(r0.products, p)));
      if (!(start < low)) continue;
      const double end = r1.values(c1, idx(*find_code(r1.products, p)));
      TransitionLabel label = TransitionLabel::inconclusive;
      if (end > high) {
        label = TransitionLabel::transition;
      } else if (end < low) {
        label = TransitionLabel::undeveloped;
      }
      t.entries.push_back({c, p, label});
    }
  }
  return t;
}

DensityHistograms density_distributions(const TransitionTable& t, const DensityTable& densities,
                                        double bin_width) {
  const std::size_t bins = bin_count(bin_width);
  std::vector<double> trans, undev;
  for (const auto& e : t.entries) {
    if (e.label == TransitionLabel::inconclusive) continue;
    auto w = densities.find(e.country, e.product);
    if (!w) throw UnknownCodeError(e.country + "/" + e.product, "density table");
    (e.label == TransitionLabel::transition ? trans : undev).push_back(*w);
  }
  DensityHistograms h;
  h.bin_width = bin_width;
  h.transition.assign(bins, 0);
  h.undeveloped.assign(bins, 0);
  for (double w : trans) ++h.transition[stats::bin_index(w, bin_width, bins)];
  for (double w : undev) ++h.undeveloped[stats::bin_index(w, bin_width, bins)];
  if (!trans.empty()) h.transition_mean = stats::mean(trans);
  if (!undev.empty()) h.undeveloped_mean = stats::mean(undev);
  return h;
}

TransitionStats discovery_ratio(const TransitionTable& t, const DensityTable& densities) {
  struct Acc {
    std::size_t t = 0, u = 0;
    double sum_t = 0.0, sum_u = 0.0;
  };
  std::map<std::string, Acc> by_product;
  for (const auto& e : t.entries) {
    auto& acc = by_product[e.product];
    if (e.label == TransitionLabel::inconclusive) continue;
    auto w = densities.find(e.country, e.product);
    if (!w) throw UnknownCodeError(e.country + "/" + e.product, "density table");
    if (e.label == TransitionLabel::transition) {
      ++acc.t;
      acc.sum_t += *w;
    } else {
      ++acc.u;
      acc.sum_u += *w;
    }
  }

  TransitionStats out;
  for (const auto& [product, acc] : by_product) {
    ProductRatio r{product, acc.t, acc.u, std::nullopt};
    if (acc.t > 0 && acc.u > 0) {
      const double mean_t = acc.sum_t / static_cast<double>(acc.t);
      const double mean_u = acc.sum_u / static_cast<double>(acc.u);
      if (mean_t > 0.0 && mean_u > 0.0) r.ratio = mean_t / mean_u;
    }
    out.products.push_back(std::move(r));
  }
  return out;
}

TransitionCurve transition_prob_by_proximity(const TransitionTable& t,
                                             const SpecializationMatrix& s0,
                                             const ProximityMatrix& p, double bin_width,
                                             bool include_empty_baskets) {
  const std::size_t bins = bin_count(bin_width);
  TransitionCurve curve;
  for (std::size_t k = 0; k < bins; ++k) {
    curve.bins.push_back({static_cast<double>(k) * bin_width,
                          std::min(1.0, static_cast<double>(k + 1) * bin_width), 0, 0,
                          std::nullopt});
  }

  std::map<std::size_t, std::vector<std::size_t>> baskets;
  for (const auto& e : t.entries) {
    if (e.label == TransitionLabel::inconclusive) continue;
    const auto at = locate(e, s0, p);
    auto it = baskets.find(at.country);
    if (it == baskets.end()) it = baskets.emplace(at.country, basket_in(s0, at.country, p)).first;
    if (it->second.empty() && !include_empty_baskets) continue;
    const double nearest = nearest_developed(it->second, at.product, p);
    auto& bin = curve.bins[stats::bin_index(nearest, bin_width, bins)];
    ++bin.opportunities;
    if (e.label == TransitionLabel::transition) ++bin.transitions;
  }
  for (auto& b : curve.bins) b.probability = ratio_of(b.transitions, b.opportunities);
  return curve;
}

std::vector<RankPoint> transition_prob_by_rank(const TransitionTable& t,
                                               const SpecializationMatrix& s0,
                                               const ProximityMatrix& p) {
  std::map<std::size_t, std::vector<double>> neighbours;  // product -> phi, descending
  std::map<std::size_t, std::vector<std::size_t>> baskets;
  std::map<std::size_t, RankPoint> by_rank;

  for (const auto& e : t.entries) {
    if (e.label == TransitionLabel::inconclusive) continue;
    const auto at = locate(e, s0, p);
    auto b = baskets.find(at.country);
    if (b == baskets.end()) b = baskets.emplace(at.country, basket_in(s0, at.country, p)).first;
    const auto& basket = b->second;
    if (std::none_of(basket.begin(), basket.end(),
                     [&](std::size_t i) { return i != at.product; })) {
      continue;
    }

    auto nb = neighbours.find(at.product);
    if (nb == neighbours.end()) {
      std::vector<double> phis;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (i != at.product) phis.push_back(p.phi(idx(i), idx(at.product)));
      }
      std::sort(phis.begin(), phis.end(), std::greater<>());
      nb = neighbours.emplace(at.product, std::move(phis)).first;
    }
    const double nearest = nearest_developed(basket, at.product, p);
    // neighbours strictly closer than the nearest developed one
    const auto closer = static_cast<std::size_t>(
        std::lower_bound(nb->second.begin(), nb->second.end(), nearest, std::greater<>()) -
        nb->second.begin());
    auto& point = by_rank[closer + 1];
    point.rank = closer + 1;
    ++point.opportunities;
    if (e.label == TransitionLabel::transition) ++point.transitions;
  }

  std::vector<RankPoint> out;
  for (auto& [_, point] : by_rank) {
    point.probability = ratio_of(point.transitions, point.opportunities);
    out.push_back(point);
  }
  return out;
}

void write_density(const std::filesystem::path& path, const DensityTable& d) {
  auto out = csv::open_output(path);
  out << "country,sitc4,omega\n";
  for (std::size_t c = 0; c < d.countries.size(); ++c) {
    for (std::size_t p = 0; p < d.products.size(); ++p) {
      out << d.countries[c] << ',' << d.products[p] << ','
          << csv::format_real(d.omega(idx(c), idx(p))) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DensityTable read_density(const std::filesystem::path& path) {
  csv::Reader reader(path, {"country", "sitc4", "omega"});
  std::map<std::pair<std::string, std::string>, double> cells;
  std::set<std::string> countries, products;
  while (auto row = reader.next()) {
    auto& f = *row;
    double w = 0.0;
    if (!csv::parse_real(f[2], w) || w < 0.0 || w > 1.0) reader.fail("omega outside [0, 1]");
    if (!cells.emplace(std::make_pair(f[0], f[1]), w).second) reader.fail("duplicate cell");
    countries.insert(f[0]);
    products.insert(f[1]);
  }
  DensityTable d;
  d.countries.assign(countries.begin(), countries.end());
  d.products.assign(products.begin(), products.end());
  d.omega = Eigen::MatrixXd::Zero(idx(d.countries.size()), idx(d.products.size()));
  for (auto& [key, w] : cells) {
    d.omega(idx(*find_code(d.countries, key.first)), idx(*find_code(d.products, key.second))) = w;
  }
  return d;
}

void write_transitions(const std::filesystem::path& path, const TransitionTable& t) {
  auto out = csv::open_output(path);
  out << "country,sitc4,label\n";
  for (const auto& e : t.entries) {
    out << e.country << ',' << e.product << ',' << to_string(e.label) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TransitionTable read_transitions(const std::filesystem::path& path) {
  csv::Reader reader(path, {"country", "sitc4", "label"});
  TransitionTable t;
  while (auto row = reader.next()) {
    auto& f = *row;
    try {
      t.entries.push_back({f[0], f[1], parse_transition_label(f[2])});
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  std::sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.country, a.product) < std::tie(b.country, b.product);
  });
  return t;
}

void write_ratios(const std::filesystem::path& path, const TransitionStats& stats) {
  auto out = csv::open_output(path);
  out << "sitc4,T,nonT,H\n";
  for (const auto& r : stats.products) {
    out << r.product << ',' << r.transitions << ',' << r.non_transitions << ','
        << format_optional(r.ratio) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_curve(const std::filesystem::path& path, const TransitionCurve& curve) {
  auto out = csv::open_output(path);
  out << "bin_low,bin_high,transitions,opportunities,probability\n";
  for (const auto& b : curve.bins) {
    out << csv::format_real(b.low) << ',' << csv::format_real(b.high) << ',' << b.transitions
        << ',' << b.opportunities << ',' << format_optional(b.probability) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_rank_curve(const std::filesystem::path& path, const std::vector<RankPoint>& curve) {
  auto out = csv::open_output(path);
  out << "rank,transitions,opportunities,probability\n";
  for (const auto& r : curve) {
    out << r.rank << ',' << r.transitions << ',' << r.opportunities << ','
        << format_optional(r.probability) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_density_histograms(const std::filesystem::path& path, const DensityHistograms& h) {
  auto out = csv::open_output(path);
  out << "bin_low,bin_high,transition,undeveloped\n";
  for (std::size_t k = 0; k < h.transition.size(); ++k) {
    out << csv::format_real(static_cast<double>(k) * h.bin_width) << ','
        << csv::format_real(std::min(1.0, static_cast<double>(k + 1) * h.bin_width)) << ','
        << h.transition[k] << ',' << h.undeveloped[k] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pspace
