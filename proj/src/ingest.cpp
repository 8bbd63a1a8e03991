#include "pspace/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "pspace/csv.hpp"

namespace pspace {

namespace {

using TradeKey = std::tuple<int, std::string, std::string>;

std::string checked_country(csv::Reader& reader, const std::string& field) {
  if (field.empty()) reader.fail("empty country code");
  for (char c : field) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      reader.fail("bad country code '" + field + "'");
    }
  }
  return field;
}

}  // namespace

double ExportMatrix::at(std::string_view country, std::string_view product) const {
  auto c = find_code(countries, country);
  if (!c) throw UnknownCodeError(std::string(country), "export matrix countries");
  auto p = find_code(products, product);
  if (!p) throw UnknownCodeError(std::string(product), "export matrix products");
  return values(static_cast<Eigen::Index>(*c), static_cast<Eigen::Index>(*p));
}

bool is_sitc4(std::string_view code) {
  return code.size() == 4 &&
         std::all_of(code.begin(), code.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<TradeRecord> read_trade_records(const std::filesystem::path& path,
                                            Warnings* warnings) {
  csv::Reader reader(path, {"year", "exporter", "sitc4", "value"});
  std::map<TradeKey, std::vector<double>> cells;
  while (auto row = reader.next()) {
    auto& f = *row;
    int year = 0;
    if (!csv::parse_int(f[0], year)) reader.fail("bad year '" + f[0] + "'");
    auto exporter = checked_country(reader, f[1]);
    if (!is_sitc4(f[2])) reader.fail("bad SITC-4 code '" + f[2] + "' (expected 4 digits)");
    double value = 0.0;
    if (!csv::parse_real(f[3], value)) reader.fail("bad value '" + f[3] + "'");
    if (value < 0.0) reader.fail("negative export value " + f[3]);
    cells[{year, std::move(exporter), f[2]}].push_back(value);
  }

  std::vector<TradeRecord> records;
  records.reserve(cells.size());
  std::size_t duplicates = 0;
  const TradeKey* first_dup = nullptr;
  for (auto& [key, values] : cells) {
    if (values.size() > 1) {
      if (!first_dup) first_dup = &key;
      ++duplicates;
      // summation order must not depend on row order
      std::sort(values.begin(), values.end());
    }
    double total = 0.0;
    for (double v : values) total += v;
    records.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), total});
  }
  if (duplicates > 0) {
    warn(warnings, reader.file() + ": " + std::to_string(duplicates) +
                       " repeated (year, exporter, sitc4) keys summed, first (" +
                       std::to_string(std::get<0>(*first_dup)) + ", " + std::get<1>(*first_dup) +
                       ", " + std::get<2>(*first_dup) + ")");
  }
  return records;
}

ExportMatrix pool_trade(std::span<const TradeRecord> records, YearWindow window) {
  if (!window.valid()) throw Error("empty year window " + to_string(window));

  // country -> years present; (country, product) -> per-year values
  std::map<std::string, std::set<int>> years;
  std::map<std::pair<std::string, std::string>, std::map<int, double>> sums;
  std::set<std::string> products;
  for (const auto& r : records) {
    if (!window.contains(r.year)) continue;
    years[r.exporter].insert(r.year);
    products.insert(r.product);
    sums[{r.exporter, r.product}][r.year] += r.value;
  }
  if (years.empty() || products.empty()) {
    throw EmptyInputError("no trade records in window " + to_string(window));
  }

  ExportMatrix m;
  m.window = window;
  for (auto& [c, _] : years) m.countries.push_back(c);
  m.products.assign(products.begin(), products.end());
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.countries.size()),
                                   static_cast<Eigen::Index>(m.products.size()));
  for (auto& [key, by_year] : sums) {
    auto c = *find_code(m.countries, key.first);
    auto p = *find_code(m.products, key.second);
    double total = 0.0;
    for (auto& [_, v] : by_year) total += v;
    m.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)) =
        total / static_cast<double>(years[key.first].size());
  }
  return m;
}

ExportMatrix load_trade(const std::filesystem::path& path, YearWindow window,
                        Warnings* warnings) {
  if (!window.valid()) throw Error("empty year window " + to_string(window));
  auto records = read_trade_records(path, warnings);
  try {
    return pool_trade(records, window);
  } catch (const EmptyInputError& e) {
    throw EmptyInputError(path.string() + ": " + e.what());
  }
}

void write_trade(const std::filesystem::path& path, const ExportMatrix& m) {
  auto out = csv::open_output(path);
  out << "year,exporter,sitc4,value\n";
  const auto year = std::to_string(m.window.first);
  for (std::size_t c = 0; c < m.countries.size(); ++c) {
    for (std::size_t p = 0; p < m.products.size(); ++p) {
      out << year << ',' << m.countries[c] << ',' << m.products[p] << ','
          << csv::format_real(m.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)))
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<CountryIncome> load_income(const std::filesystem::path& path, int year,
                                       Warnings* warnings) {
  csv::Reader reader(path, {"country", "year", "gdp_pc"});
  std::set<std::pair<std::string, int>> seen;
  std::vector<CountryIncome> out;
  while (auto row = reader.next()) {
    auto& f = *row;
    auto country = checked_country(reader, f[0]);
    int y = 0;
    if (!csv::parse_int(f[1], y)) reader.fail("bad year '" + f[1] + "'");
    double gdp = 0.0;
    if (!csv::parse_real(f[2], gdp)) reader.fail("bad GDP per capita '" + f[2] + "'");
    if (gdp <= 0.0) reader.fail("non-positive GDP per capita " + f[2]);
    if (!seen.emplace(country, y).second) {
      throw DuplicateKeyError(reader.file() + ":" + std::to_string(reader.line()) +
                              ": duplicate income row (" + country + ", " + std::to_string(y) +
                              ")");
    }
    if (y == year) out.push_back({std::move(country), gdp, y});
  }
  std::sort(out.begin(), out.end(),
            [](const CountryIncome& a, const CountryIncome& b) { return a.country < b.country; });
  if (out.empty()) {
    warn(warnings, reader.file() + ": no income records for year " + std::to_string(year));
  }
  return out;
}

void write_income(const std::filesystem::path& path, std::span<const CountryIncome> incomes) {
  auto out = csv::open_output(path);
  out << "country,year,gdp_pc\n";
  for (const auto& i : incomes) {
    out << i.country << ',' << i.year << ',' << csv::format_real(i.gdp_per_capita) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ProductMeta> load_meta(const std::filesystem::path& path) {
  csv::Reader reader(path, {"sitc4", "name"}, {"leamer_class"});
  std::vector<ProductMeta> out;
  std::set<std::string> seen;
  while (auto row = reader.next()) {
    auto& f = *row;
    if (!is_sitc4(f[0])) reader.fail("bad SITC-4 code '" + f[0] + "'");
    if (!seen.insert(f[0]).second) {
      throw DuplicateKeyError(reader.file() + ":" + std::to_string(reader.line()) +
                              ": duplicate product " + f[0]);
    }
    out.push_back({f[0], f[1], f.size() > 2 ? f[2] : std::string()});
  }
  std::sort(out.begin(), out.end(),
            [](const ProductMeta& a, const ProductMeta& b) { return a.product < b.product; });
  return out;
}

RegionGroups load_regions(const std::filesystem::path& path) {
  csv::Reader reader(path, {"region", "country"});
  RegionGroups groups;
  while (auto row = reader.next()) {
    auto& f = *row;
    if (f[0].empty()) reader.fail("empty region label");
    groups[f[0]].insert(checked_country(reader, f[1]));
  }
  return groups;
}

ExportMatrix aggregate_region(const ExportMatrix& m, const RegionGroups& groups) {
  std::map<std::string, std::string> owner;
  for (const auto& [region, members] : groups) {
    for (const auto& c : members) {
      if (!find_code(m.countries, c)) throw UnknownCodeError(c, "region '" + region + "'");
      auto [it, inserted] = owner.emplace(c, region);
      if (!inserted) {
        throw Error("country " + c + " belongs to both '" + it->second + "' and '" + region +
                    "'");
      }
    }
  }

  ExportMatrix out;
  out.window = m.window;
  out.products = m.products;
  for (const auto& [region, _] : groups) out.countries.push_back(region);
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups.size()), m.values.cols());
  Eigen::Index row = 0;
  for (const auto& [region, members] : groups) {
    for (const auto& c : members) {
      out.values.row(row) += m.values.row(static_cast<Eigen::Index>(*find_code(m.countries, c)));
    }
    ++row;
  }
  return out;
}

}  // namespace pspace
