#pragma once

#include <cstdint>
#include <vector>

#include "pspace/ingest.hpp"

namespace pspace {

struct SyntheticOptions {
  std::uint64_t seed = 1;
  int countries = 24;
  int products = 60;
  int clusters = 6;
  std::vector<int> years{1985, 1990, 1995, 1998, 1999, 2000};
};

// A small world for demos and end-to-end tests: products sit in clusters
// ordered by sophistication, countries export near their capability level
// and in a couple of favoured clusters, and capabilities drift upward over
// time. Richer countries are more capable.
struct SyntheticWorld {
  std::vector<TradeRecord> trade;
  std::vector<CountryIncome> incomes;  // one per country per year
  std::vector<ProductMeta> meta;
};

SyntheticWorld make_synthetic_world(const SyntheticOptions& options);

void write_trade_records(const std::filesystem::path& path, std::span<const TradeRecord> records);

}  // namespace pspace
