#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pspace/common.hpp"
#include "pspace/error.hpp"
#include "pspace/specialization.hpp"

namespace pspace {

// Symmetric product x product relatedness, phi in [0, 1], zero diagonal.
struct ProximityMatrix {
  CodeList products;
  Eigen::MatrixXd phi;

  std::size_t size() const noexcept { return products.size(); }
  double at(std::string_view a, std::string_view b) const;
};

struct PhiStats {
  std::size_t pairs = 0;  // n(n-1)/2 off-diagonal pairs
  double frac_zero = 0.0;
  std::vector<std::pair<double, double>> frac_below;  // (t, share of phi < t)
  double bin_width = 0.05;
  std::vector<std::size_t> histogram;  // over [0, 1]
};

using ProductPair = std::pair<std::string, std::string>;

// phi(i, j) = min(P(i | j), P(j | i)) over the countries specialized in each
// product, i.e. |S_i & S_j| / max(|S_i|, |S_j|); 0 when either set is empty.
ProximityMatrix proximity(const SpecializationMatrix& s);

// Zero and below-threshold shares over the off-diagonal pairs. Thresholds
// must lie in (0, 1].
PhiStats phi_stats(const ProximityMatrix& p, std::span<const double> thresholds,
                   std::size_t bins = 20);

// Pearson correlation of phi between two spaces. Uses every off-diagonal pair
// of the shared products, or only `edges` when given. Differing product
// universes are intersected with a warning.
double phi_correlation(const ProximityMatrix& a, const ProximityMatrix& b,
                       const std::vector<ProductPair>* edges = nullptr,
                       Warnings* warnings = nullptr);

// Long form `sitc4_i,sitc4_j,phi` with i < j, every pair listed.
void write_proximity(const std::filesystem::path& path, const ProximityMatrix& p);
ProximityMatrix read_proximity(const std::filesystem::path& path);

// Dense row-major little-endian float64 matrix plus `<path>.json` sidecar
// holding the product codes.
void write_proximity_binary(const std::filesystem::path& path, const ProximityMatrix& p);
ProximityMatrix read_proximity_binary(const std::filesystem::path& path);

}  // namespace pspace
