#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "pspace/ingest.hpp"
#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"

namespace pspace::testing {

using Rng = std::mt19937_64;

CodeList product_codes(std::size_t n);  // "1000", "1001", ...
CodeList country_codes(std::size_t n);  // "C00", "C01", ...

int uniform_int(Rng& rng, int lo, int hi);  // inclusive
double uniform_real(Rng& rng, double lo = 0.0, double hi = 1.0);

SpecializationMatrix random_specialization(Rng& rng, std::size_t countries, std::size_t products,
                                           double density);

// Random symmetric phi with zero diagonal. With `levels` > 0 values are
// multiples of 1/levels, which produces plenty of ties.
ProximityMatrix random_proximity(Rng& rng, std::size_t n, int levels = 0);

ProximityMatrix make_proximity(const Eigen::MatrixXd& phi);

ExportMatrix random_exports(Rng& rng, std::size_t countries, std::size_t products,
                            double zero_share = 0.3);

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pspace::testing
