#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pspace/common.hpp"
#include "pspace/error.hpp"

namespace pspace {

// One row of the trade file: exports of `product` by `exporter` in `year`,
// thousands of current USD.
struct TradeRecord {
  int year = 0;
  std::string exporter;
  std::string product;  // SITC-4, four digits, leading zeros kept
  double value = 0.0;
};

// Country x product export values pooled over a year window.
struct ExportMatrix {
  CodeList countries;
  CodeList products;
  Eigen::MatrixXd values;  // countries x products, all >= 0
  YearWindow window;

  double at(std::string_view country, std::string_view product) const;
};

struct CountryIncome {
  std::string country;
  double gdp_per_capita = 0.0;  // current USD per person, > 0
  int year = 0;
};

struct ProductMeta {
  std::string product;
  std::string name;
  std::string leamer_class;  // empty when the table has no class column
};

using RegionGroups = std::map<std::string, std::set<std::string>>;

bool is_sitc4(std::string_view code);

// Reads and validates every row of a trade CSV (`year,exporter,sitc4,value`).
// Rows sharing a (year, exporter, product) key are summed with a warning.
// The result is sorted by (year, exporter, product).
std::vector<TradeRecord> read_trade_records(const std::filesystem::path& path,
                                            Warnings* warnings = nullptr);

// Pools records over `window`. For each country the pooled value is the mean
// of its yearly totals over the years in which it reports any trade; missing
// cells in those years count as zero. Countries absent from the whole window
// are dropped, and the product universe is the set of codes seen in the window.
ExportMatrix pool_trade(std::span<const TradeRecord> records, YearWindow window);

ExportMatrix load_trade(const std::filesystem::path& path, YearWindow window,
                        Warnings* warnings = nullptr);

// Writes the matrix as a trade CSV, one row per cell, stamped with
// window.first. Re-loading with the same window reproduces the matrix.
void write_trade(const std::filesystem::path& path, const ExportMatrix& m);

// Income records for `year` (`country,year,gdp_pc`). Countries without that
// year are omitted; an empty result is reported as a warning.
std::vector<CountryIncome> load_income(const std::filesystem::path& path, int year,
                                       Warnings* warnings = nullptr);

void write_income(const std::filesystem::path& path, std::span<const CountryIncome> incomes);

// Product metadata (`sitc4,name[,leamer_class]`), sorted by product.
std::vector<ProductMeta> load_meta(const std::filesystem::path& path);

// Region membership file `region,country`.
RegionGroups load_regions(const std::filesystem::path& path);

// Sums member countries into one row per region (rows in label order).
ExportMatrix aggregate_region(const ExportMatrix& m, const RegionGroups& groups);

}  // namespace pspace
