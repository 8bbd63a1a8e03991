#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pspace/ingest.hpp"
#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"

namespace pspace {

struct DiffusionConfig {
  double phi0 = 0.55;     // proximity a move may use
  int iterations = 20;    // rounds of diffusion
  int top_n = 50;         // products averaged by reach_prody
  bool inclusive = true;  // phi >= phi0 (true) or phi > phi0
};

// Acquisition step per product: 0 = initial basket, k >= 1 = first round in
// which the product was reached, kUnreached otherwise.
struct DiffusionTrace {
  static constexpr int kUnreached = -1;

  std::string country;
  CodeList products;
  std::vector<int> step;

  std::map<std::string, int> acquired() const;
  // Products held after `round` rounds.
  std::vector<std::size_t> reached_by(int round) const;
  int rounds_used() const;
};

struct ProductIncome {
  std::string product;
  double prody = 0.0;
};

struct ConvergenceRow {
  double phi0 = 0.0;
  std::vector<double> reach;  // aligned with ConvergenceReport::countries
  double iqr = 0.0;
  std::optional<double> ratio;  // iqr / original_iqr, undefined when that is 0
};

struct ConvergenceReport {
  CodeList countries;
  std::vector<double> original;  // reach_prody without diffusion
  double original_iqr = 0.0;
  std::vector<ConvergenceRow> rows;
};

// PRODY_p = sum_c RCA_cp * GDPpc_c / sum_c RCA_cp over countries with income
// data. Products nobody with income data exports are omitted with a warning.
std::vector<ProductIncome> prody(const RcaMatrix& r, std::span<const CountryIncome> incomes,
                                 Warnings* warnings = nullptr);

// Repeatedly adds every product within phi0 of something already held, for
// at most cfg.iterations rounds. The specialization and proximity matrices
// must share the product universe.
DiffusionTrace diffuse(const SpecializationMatrix& s, const ProximityMatrix& p,
                       const DiffusionConfig& cfg, std::string_view country);

// Mean PRODY of the top_n most valuable reached products (all of them when
// fewer). nullopt when no reached product has a PRODY.
std::optional<double> reach_prody(const DiffusionTrace& trace,
                                  std::span<const ProductIncome> prodys, int top_n);

// IQR of per-country reach_prody after diffusing at each phi0, relative to
// the undiffused distribution. Countries with no priced product are left
// out; at least 4 must remain.
ConvergenceReport convergence_sweep(const SpecializationMatrix& s, const ProximityMatrix& p,
                                    std::span<const ProductIncome> prodys,
                                    std::span<const double> phi_grid, const DiffusionConfig& cfg);

void write_prody(const std::filesystem::path& path, std::span<const ProductIncome> prodys);
std::vector<ProductIncome> read_prody(const std::filesystem::path& path);

// `country,sitc4,step` for every reached product.
void write_traces(const std::filesystem::path& path, std::span<const DiffusionTrace> traces);

// `phi0,country,reach_prody`.
void write_sweep(const std::filesystem::path& path, const ConvergenceReport& report);

// {original_iqr, rows:[{phi0, iqr, ratio}]} plus the original distribution.
void write_convergence_json(const std::filesystem::path& path, const ConvergenceReport& report);

}  // namespace pspace
