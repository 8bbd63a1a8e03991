#include "pspace/proximity.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <set>

#include <json.hpp>

#include "pspace/csv.hpp"
#include "pspace/stats.hpp"

namespace pspace {

namespace {

using Eigen::Index;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto s = path;
  s += ".json";
  return s;
}

}  // namespace

double ProximityMatrix::at(std::string_view a, std::string_view b) const {
  auto i = find_code(products, a);
  if (!i) throw UnknownCodeError(std::string(a), "proximity products");
  auto j = find_code(products, b);
  if (!j) throw UnknownCodeError(std::string(b), "proximity products");
  return phi(idx(*i), idx(*j));
}

ProximityMatrix proximity(const SpecializationMatrix& s) {
  if (s.bits.cols() == 0) throw EmptyInputError("proximity needs at least one product");
  // co-occurrence counts: shared(i, j) = |S_i & S_j|, diagonal = |S_i|
  const Eigen::MatrixXi x = s.bits.cast<int>();
  const Eigen::MatrixXi shared = x.transpose() * x;

  const Index n = shared.rows();
  ProximityMatrix p;
  p.products = s.products;
  p.phi = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const int support = std::max(shared(i, i), shared(j, j));
      if (support == 0) continue;
      const double v = static_cast<double>(shared(i, j)) / static_cast<double>(support);
      p.phi(i, j) = v;
      p.phi(j, i) = v;
    }
  }
  return p;
}

PhiStats phi_stats(const ProximityMatrix& p, std::span<const double> thresholds,
                   std::size_t bins) {
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw Error("phi_stats thresholds must lie in (0, 1]");
  }
  const Index n = p.phi.rows();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) values.push_back(p.phi(i, j));
  }

  PhiStats st;
  st.pairs = values.size();
  st.bin_width = bins > 0 ? 1.0 / static_cast<double>(bins) : 0.0;
  st.histogram = stats::histogram(values, 0.0, 1.0, bins);
  if (values.empty()) {
    for (double t : thresholds) st.frac_below.emplace_back(t, 0.0);
    return st;
  }
  const double total = static_cast<double>(values.size());
  st.frac_zero =
      static_cast<double>(std::count(values.begin(), values.end(), 0.0)) / total;
  for (double t : thresholds) {
    auto below = std::count_if(values.begin(), values.end(), [t](double v) { return v < t; });
    st.frac_below.emplace_back(t, static_cast<double>(below) / total);
  }
  return st;
}

double phi_correlation(const ProximityMatrix& a, const ProximityMatrix& b,
                       const std::vector<ProductPair>* edges, Warnings* warnings) {
  const CodeList shared = intersect_codes(a.products, b.products);
  if (shared.size() != a.products.size() || shared.size() != b.products.size()) {
    warn(warnings, "proximity matrices differ in products; correlating over the " +
                       std::to_string(shared.size()) + " shared codes");
  }

  std::vector<double> xs, ys;
  auto push = [&](std::string_view u, std::string_view v) {
    auto ia = find_code(a.products, u), ja = find_code(a.products, v);
    auto ib = find_code(b.products, u), jb = find_code(b.products, v);
    if (!ia || !ja || !ib || !jb) return false;
    xs.push_back(a.phi(idx(*ia), idx(*ja)));
    ys.push_back(b.phi(idx(*ib), idx(*jb)));
    return true;
  };

  if (edges) {
    std::set<std::pair<std::string, std::string>> seen;
    std::size_t skipped = 0;
    for (const auto& [u, v] : *edges) {
      if (u == v) continue;
      auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
      if (!seen.insert(key).second) continue;
      if (!push(key.first, key.second)) ++skipped;
    }
    if (skipped > 0) {
      warn(warnings, std::to_string(skipped) + " edges reference products outside the shared "
                                               "universe and were skipped");
    }
  } else {
    for (std::size_t i = 0; i < shared.size(); ++i) {
      for (std::size_t j = i + 1; j < shared.size(); ++j) push(shared[i], shared[j]);
    }
  }
  return stats::pearson(xs, ys);
}

void write_proximity(const std::filesystem::path& path, const ProximityMatrix& p) {
  auto out = csv::open_output(path);
  out << "sitc4_i,sitc4_j,phi\n";
  const auto n = p.products.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out << p.products[i] << ',' << p.products[j] << ','
          << csv::format_real(p.phi(idx(i), idx(j))) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ProximityMatrix read_proximity(const std::filesystem::path& path) {
  csv::Reader reader(path, {"sitc4_i", "sitc4_j", "phi"});
  std::map<std::pair<std::string, std::string>, double> pairs;
  std::set<std::string> codes;
  while (auto row = reader.next()) {
    auto& f = *row;
    if (!is_sitc4(f[0]) || !is_sitc4(f[1])) reader.fail("bad SITC-4 code");
    if (f[0] == f[1]) reader.fail("self pair " + f[0]);
    double v = 0.0;
    if (!csv::parse_real(f[2], v) || v < 0.0 || v > 1.0) reader.fail("phi outside [0, 1]");
    auto key = f[0] < f[1] ? std::make_pair(f[0], f[1]) : std::make_pair(f[1], f[0]);
    if (!pairs.emplace(key, v).second) reader.fail("duplicate pair " + f[0] + "-" + f[1]);
    codes.insert(f[0]);
    codes.insert(f[1]);
  }
  ProximityMatrix p;
  p.products.assign(codes.begin(), codes.end());
  const auto n = idx(p.products.size());
  p.phi = Eigen::MatrixXd::Zero(n, n);
  for (auto& [key, v] : pairs) {
    auto i = idx(*find_code(p.products, key.first));
    auto j = idx(*find_code(p.products, key.second));
    p.phi(i, j) = v;
    p.phi(j, i) = v;
  }
  return p;
}

void write_proximity_binary(const std::filesystem::path& path, const ProximityMatrix& p) {
  const auto n = idx(p.products.size());
  {
    auto out = csv::open_output(path);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        auto bits = std::bit_cast<std::uint64_t>(p.phi(i, j));
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char buf[8];
        std::memcpy(buf, &bits, 8);
        out.write(buf, 8);
      }
    }
    if (!out) throw IoError("write failed: " + path.string());
  }
  nlohmann::ordered_json meta;
  meta["dtype"] = "float64";
  meta["order"] = "row-major";
  meta["byte_order"] = "little";
  meta["rows"] = n;
  meta["cols"] = n;
  meta["products"] = p.products;
  auto out = csv::open_output(sidecar(path));
  out << meta.dump(2) << '\n';
}

ProximityMatrix read_proximity_binary(const std::filesystem::path& path) {
  std::ifstream side(sidecar(path));
  if (!side) throw IoError("cannot open " + sidecar(path).string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(sidecar(path).string() + ": " + e.what());
  }
  ProximityMatrix p;
  p.products = meta.at("products").get<CodeList>();
  if (!is_sorted_unique(p.products)) throw Error("sidecar product codes are not sorted/unique");
  const auto n = idx(p.products.size());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  p.phi.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      char buf[8];
      if (!in.read(buf, 8)) throw Error(path.string() + ": truncated matrix");
      std::uint64_t bits;
      std::memcpy(&bits, buf, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      p.phi(i, j) = std::bit_cast<double>(bits);
    }
  }
  return p;
}

}  // namespace pspace
