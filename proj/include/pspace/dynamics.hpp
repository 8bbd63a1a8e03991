#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"

namespace pspace {

// Density of one country around every product of the space.
struct DensityRow {
  std::string country;
  CodeList products;
  std::vector<double> omega;  // aligned with products, each in [0, 1]
};

// Densities for every country (countries x products).
struct DensityTable {
  CodeList countries;
  CodeList products;
  Eigen::MatrixXd omega;

  std::optional<double> find(std::string_view country, std::string_view product) const;
};

enum class TransitionLabel { transition, undeveloped, inconclusive };

std::string_view to_string(TransitionLabel label);
TransitionLabel parse_transition_label(std::string_view text);

struct TransitionEntry {
  std::string country;
  std::string product;
  TransitionLabel label;
};

// Country-product pairs that start below `low`, labelled by where they end.
// Entries are sorted by (country, product).
struct TransitionTable {
  YearWindow t0;
  YearWindow t1;
  double low = 0.5;
  double high = 1.0;
  std::vector<TransitionEntry> entries;

  std::size_t count(TransitionLabel label) const;
};

struct DensityHistograms {
  double bin_width = 0.02;
  std::vector<std::size_t> transition;
  std::vector<std::size_t> undeveloped;
  std::optional<double> transition_mean;
  std::optional<double> undeveloped_mean;
};

struct ProductRatio {
  std::string product;
  std::size_t transitions = 0;      // T
  std::size_t non_transitions = 0;  // N - T, countries that stayed undeveloped
  std::optional<double> ratio;      // H; undefined when either side is missing
};

struct TransitionStats {
  std::vector<ProductRatio> products;

  std::size_t defined() const;
  // Share of products with a defined ratio above 1.
  std::optional<double> fraction_above_one() const;
};

struct CurveBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t transitions = 0;
  std::size_t opportunities = 0;  // transitions + undeveloped
  std::optional<double> probability;
};

struct TransitionCurve {
  std::vector<CurveBin> bins;
};

struct RankPoint {
  std::size_t rank = 0;
  std::size_t transitions = 0;
  std::size_t opportunities = 0;
  std::optional<double> probability;
};

// omega_j = sum_{i != j} x_i phi_ij / sum_{i != j} phi_ij; 0 for isolated j.
DensityRow density(const SpecializationMatrix& s, const ProximityMatrix& p,
                   std::string_view country);
DensityTable density_table(const SpecializationMatrix& s, const ProximityMatrix& p);

// Pairs with r0 < low are labelled transition (r1 > high), undeveloped
// (r1 < low) or inconclusive. Differing universes are intersected with a
// warning.
TransitionTable classify_transitions(const RcaMatrix& r0, const RcaMatrix& r1, double low = 0.5,
                                     double high = 1.0, Warnings* warnings = nullptr);

// Histograms of start-of-period density for transition and undeveloped pairs.
DensityHistograms density_distributions(const TransitionTable& t, const DensityTable& densities,
                                        double bin_width = 0.02);

// H_j = mean density over transitioning countries / mean density over
// countries that stayed undeveloped.
TransitionStats discovery_ratio(const TransitionTable& t, const DensityTable& densities);

// Transition probability binned by phi*, the proximity of product j to the
// closest product the country already has (max over its basket). Countries
// with an empty basket get phi* = 0 unless `include_empty_baskets` is false.
// Inconclusive pairs are left out of both counts.
TransitionCurve transition_prob_by_proximity(const TransitionTable& t,
                                             const SpecializationMatrix& s0,
                                             const ProximityMatrix& p, double bin_width = 0.1,
                                             bool include_empty_baskets = true);

// Same, keyed by the rank of the closest developed neighbour among j's
// neighbours sorted by descending phi (ties share the smaller rank).
// Countries with an empty basket have no rank and are skipped.
std::vector<RankPoint> transition_prob_by_rank(const TransitionTable& t,
                                               const SpecializationMatrix& s0,
                                               const ProximityMatrix& p);

void write_density(const std::filesystem::path& path, const DensityTable& d);
DensityTable read_density(const std::filesystem::path& path);

void write_transitions(const std::filesystem::path& path, const TransitionTable& t);
TransitionTable read_transitions(const std::filesystem::path& path);

void write_ratios(const std::filesystem::path& path, const TransitionStats& stats);
void write_curve(const std::filesystem::path& path, const TransitionCurve& curve);
void write_rank_curve(const std::filesystem::path& path, const std::vector<RankPoint>& curve);
void write_density_histograms(const std::filesystem::path& path, const DensityHistograms& h);

}  // namespace pspace
