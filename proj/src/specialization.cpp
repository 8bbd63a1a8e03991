#include "pspace/specialization.hpp"

#include <map>
#include <set>

#include "pspace/csv.hpp"

namespace pspace {

namespace {

using Eigen::Index;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

// Long-form country,sitc4,value[,bit] reader shared by the RCA and
// specialization files. Cells absent from the file are 0 / false.
struct LongForm {
  CodeList countries;
  CodeList products;
  Eigen::MatrixXd values;
  BoolMatrix bits;
};

LongForm read_long_form(const std::filesystem::path& path, bool with_bit) {
  std::vector<std::string> cols{"country", "sitc4", "rca"};
  if (with_bit) cols.push_back("bit");
  csv::Reader reader(path, cols);

  struct Cell {
    double value;
    bool bit;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;
  std::set<std::string> countries, products;
  while (auto row = reader.next()) {
    auto& f = *row;
    if (f[0].empty()) reader.fail("empty country code");
    if (!is_sitc4(f[1])) reader.fail("bad SITC-4 code '" + f[1] + "'");
    double v = 0.0;
    if (!csv::parse_real(f[2], v) || v < 0.0) reader.fail("bad RCA value '" + f[2] + "'");
    bool bit = false;
    if (with_bit) {
      if (f[3] != "0" && f[3] != "1") reader.fail("bad bit '" + f[3] + "'");
      bit = f[3] == "1";
    }
    if (!cells.emplace(std::make_pair(f[0], f[1]), Cell{v, bit}).second) {
      reader.fail("duplicate cell (" + f[0] + ", " + f[1] + ")");
    }
    countries.insert(f[0]);
    products.insert(f[1]);
  }
  if (cells.empty()) throw EmptyInputError(path.string() + ": no rows");

  LongForm out;
  out.countries.assign(countries.begin(), countries.end());
  out.products.assign(products.begin(), products.end());
  out.values = Eigen::MatrixXd::Zero(idx(out.countries.size()), idx(out.products.size()));
  out.bits = BoolMatrix::Constant(idx(out.countries.size()), idx(out.products.size()), false);
  for (auto& [key, cell] : cells) {
    auto c = idx(*find_code(out.countries, key.first));
    auto p = idx(*find_code(out.products, key.second));
    out.values(c, p) = cell.value;
    out.bits(c, p) = cell.bit;
  }
  return out;
}

}  // namespace

double RcaMatrix::at(std::string_view country, std::string_view product) const {
  auto c = find_code(countries, country);
  if (!c) throw UnknownCodeError(std::string(country), "RCA countries");
  auto p = find_code(products, product);
  if (!p) throw UnknownCodeError(std::string(product), "RCA products");
  return values(idx(*c), idx(*p));
}

std::vector<std::size_t> SpecializationMatrix::basket(std::size_t c) const {
  std::vector<std::size_t> out;
  for (Index p = 0; p < bits.cols(); ++p) {
    if (bits(idx(c), p)) out.push_back(static_cast<std::size_t>(p));
  }
  return out;
}

RcaMatrix rca(const ExportMatrix& m) {
  if (m.values.rows() == 0 || m.values.cols() == 0) {
    throw EmptyInputError("RCA needs at least one country and one product");
  }
  const double world = m.values.sum();
  if (!(world > 0.0)) throw Error("RCA undefined: total world exports are zero");

  const Eigen::VectorXd country_total = m.values.rowwise().sum();
  const Eigen::RowVectorXd product_total = m.values.colwise().sum();

  RcaMatrix r;
  r.countries = m.countries;
  r.products = m.products;
  r.window = m.window;
  r.values = Eigen::MatrixXd::Zero(m.values.rows(), m.values.cols());
  for (Index c = 0; c < m.values.rows(); ++c) {
    if (country_total(c) <= 0.0) continue;
    for (Index p = 0; p < m.values.cols(); ++p) {
      if (product_total(p) <= 0.0) continue;
      const double country_share = m.values(c, p) / country_total(c);
      const double world_share = product_total(p) / world;
      r.values(c, p) = country_share / world_share;
    }
  }
  return r;
}

SpecializationMatrix binarize(const RcaMatrix& r, double threshold) {
  if (!(threshold > 0.0)) throw Error("binarize threshold must be positive");
  SpecializationMatrix s;
  s.countries = r.countries;
  s.products = r.products;
  s.threshold = threshold;
  s.bits = (r.values.array() > threshold).matrix();
  return s;
}

SpecializationMatrix align_products(const SpecializationMatrix& s, const CodeList& products,
                                    Warnings* warnings) {
  SpecializationMatrix out;
  out.countries = s.countries;
  out.products = products;
  out.threshold = s.threshold;
  out.bits = BoolMatrix::Constant(s.bits.rows(), idx(products.size()), false);
  std::size_t missing = 0;
  for (std::size_t p = 0; p < products.size(); ++p) {
    auto src = find_code(s.products, products[p]);
    if (!src) {
      ++missing;
      continue;
    }
    out.bits.col(idx(p)) = s.bits.col(idx(*src));
  }
  const std::size_t dropped = s.products.size() - (products.size() - missing);
  if (missing > 0 || dropped > 0) {
    warn(warnings, "aligning specialization onto product space: " + std::to_string(missing) +
                       " products absent (treated as unspecialized), " + std::to_string(dropped) +
                       " products dropped");
  }
  return out;
}

void write_rca(const std::filesystem::path& path, const RcaMatrix& r) {
  auto out = csv::open_output(path);
  out << "country,sitc4,rca\n";
  for (std::size_t c = 0; c < r.countries.size(); ++c) {
    for (std::size_t p = 0; p < r.products.size(); ++p) {
      out << r.countries[c] << ',' << r.products[p] << ','
          << csv::format_real(r.values(idx(c), idx(p))) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RcaMatrix read_rca(const std::filesystem::path& path) {
  auto lf = read_long_form(path, false);
  RcaMatrix r;
  r.countries = std::move(lf.countries);
  r.products = std::move(lf.products);
  r.values = std::move(lf.values);
  return r;
}

void write_specialization(const std::filesystem::path& path, const RcaMatrix& r,
                          const SpecializationMatrix& s) {
  if (r.countries != s.countries || r.products != s.products) {
    throw Error("RCA and specialization matrices have different universes");
  }
  auto out = csv::open_output(path);
  out << "country,sitc4,rca,bit\n";
  for (std::size_t c = 0; c < r.countries.size(); ++c) {
    for (std::size_t p = 0; p < r.products.size(); ++p) {
      out << r.countries[c] << ',' << r.products[p] << ','
          << csv::format_real(r.values(idx(c), idx(p))) << ',' << (s.bits(idx(c), idx(p)) ? 1 : 0)
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SpecializationMatrix read_specialization(const std::filesystem::path& path, double threshold) {
  auto lf = read_long_form(path, true);
  // the rca column is rounded to 12 digits, so only flag clear disagreements
  for (Index c = 0; c < lf.values.rows(); ++c) {
    for (Index p = 0; p < lf.values.cols(); ++p) {
      const double v = lf.values(c, p);
      const bool expect = v > threshold;
      if (expect != lf.bits(c, p) && std::abs(v - threshold) > 1e-9 * std::max(1.0, threshold)) {
        throw Error(path.string() + ": bit for (" + lf.countries[static_cast<std::size_t>(c)] +
                    ", " + lf.products[static_cast<std::size_t>(p)] +
                    ") disagrees with threshold " + csv::format_real(threshold) +
                    "; was the file written with a different --rca-high?");
      }
    }
  }
  SpecializationMatrix s;
  s.countries = std::move(lf.countries);
  s.products = std::move(lf.products);
  s.bits = std::move(lf.bits);
  s.threshold = threshold;
  return s;
}

}  // namespace pspace
