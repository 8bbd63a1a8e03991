#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pspace/ingest.hpp"
#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"

namespace pspace {

enum class EdgeTag { mst, overlay };

std::string_view to_string(EdgeTag tag);

struct GraphNode {
  std::string id;  // SITC-4 code
  std::string name;
  std::string leamer_class;
  std::optional<bool> rca;  // per-country / per-region specialization flag
};

// source < target index into nodes.
struct GraphEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  double phi = 0.0;
  EdgeTag tag = EdgeTag::mst;
};

// Undirected product network; edges sorted by (source, target).
struct ProductGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  double total_weight(EdgeTag tag) const;
  std::size_t count(EdgeTag tag) const;
};

struct ComponentSample {
  double threshold = 0.0;
  std::size_t giant_size = 0;
  std::size_t total = 0;
  double ratio = 0.0;
};

struct ComponentCurve {
  std::vector<ComponentSample> samples;
};

enum class GraphFormat { graphml, dot, json, edge_csv };

GraphFormat parse_graph_format(std::string_view name);
std::string_view file_extension(GraphFormat format);

// Maximum-weight spanning forest over the phi > 0 pairs (Kruskal). Equal
// weights are taken in lexicographic (i, j) code order.
ProductGraph max_spanning_forest(const ProximityMatrix& p);

// Adds every pair with phi > threshold that is not already an edge, tagged
// overlay.
ProductGraph overlay(ProductGraph g, const ProximityMatrix& p, double threshold);

void attach_metadata(ProductGraph& g, std::span<const ProductMeta> meta);

// Sets each node's rca flag from the named row of `s`.
void mark_specialization(ProductGraph& g, const SpecializationMatrix& s,
                         std::string_view country);

// Largest connected component of the phi >= t graph over all products, for
// each ascending threshold t. Isolated products count in the total.
ComponentCurve component_curve(const ProximityMatrix& p, std::span<const double> thresholds);

// Leaf order of average-linkage agglomerative clustering on 1 - phi. Among
// equally close cluster pairs the one with the lexicographically smallest
// (first member, first member) key merges first; a merged cluster lists the
// lower-keyed side first.
std::vector<std::size_t> hierarchical_order(const ProximityMatrix& p);

void export_graph(const ProductGraph& g, GraphFormat format, const std::filesystem::path& path);

// Parses the edge-csv format back (nodes are the codes appearing in edges).
ProductGraph read_edge_csv(const std::filesystem::path& path);

}  // namespace pspace
