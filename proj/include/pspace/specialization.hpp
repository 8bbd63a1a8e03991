#pragma once

#include <filesystem>
#include <string_view>

#include "pspace/common.hpp"
#include "pspace/error.hpp"
#include "pspace/ingest.hpp"

namespace pspace {

// Balassa revealed comparative advantage, country x product.
struct RcaMatrix {
  CodeList countries;
  CodeList products;
  Eigen::MatrixXd values;
  YearWindow window;

  double at(std::string_view country, std::string_view product) const;
};

// bits(c, p) == (rca(c, p) > threshold), strictly.
struct SpecializationMatrix {
  CodeList countries;
  CodeList products;
  BoolMatrix bits;
  double threshold = 1.0;

  // Indices of the products country `c` is specialized in.
  std::vector<std::size_t> basket(std::size_t c) const;
};

// RCA[c][p] = (x_cp / sum_p x_cp) / (sum_c x_cp / sum_cp x_cp). Rows of
// non-exporting countries and columns of untraded products are 0.
RcaMatrix rca(const ExportMatrix& m);

SpecializationMatrix binarize(const RcaMatrix& r, double threshold);

// Re-indexes onto `products`; products missing from `s` get all-false bits.
SpecializationMatrix align_products(const SpecializationMatrix& s, const CodeList& products,
                                    Warnings* warnings = nullptr);

// Long form `country,sitc4,rca`.
void write_rca(const std::filesystem::path& path, const RcaMatrix& r);
RcaMatrix read_rca(const std::filesystem::path& path);

// Long form `country,sitc4,rca,bit`.
void write_specialization(const std::filesystem::path& path, const RcaMatrix& r,
                          const SpecializationMatrix& s);
// Reads a specialization file and checks every bit against `threshold`.
SpecializationMatrix read_specialization(const std::filesystem::path& path, double threshold);

}  // namespace pspace
