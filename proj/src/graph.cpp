#include "pspace/graph.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "pspace/csv.hpp"
#include "union_find.hpp"

namespace pspace {

namespace {

using Eigen::Index;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

struct WeightedPair {
  double phi;
  std::size_t i, j;
};

// All i < j pairs, heaviest first; ties in (i, j) order.
std::vector<WeightedPair> sorted_pairs(const ProximityMatrix& p, bool positive_only) {
  const std::size_t n = p.size();
  std::vector<WeightedPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = p.phi(idx(i), idx(j));
      if (positive_only && !(v > 0.0)) continue;
      pairs.push_back({v, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const WeightedPair& a, const WeightedPair& b) {
    if (a.phi != b.phi) return a.phi > b.phi;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  return pairs;
}

void sort_edges(ProductGraph& g) {
  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void write_graphml(const ProductGraph& g, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
         "  <key id=\"leamer_class\" for=\"node\" attr.name=\"leamer_class\" "
         "attr.type=\"string\"/>\n"
         "  <key id=\"rca\" for=\"node\" attr.name=\"rca\" attr.type=\"boolean\"/>\n"
         "  <key id=\"phi\" for=\"edge\" attr.name=\"phi\" attr.type=\"double\"/>\n"
         "  <key id=\"tag\" for=\"edge\" attr.name=\"tag\" attr.type=\"string\"/>\n"
         "  <graph id=\"product_space\" edgedefault=\"undirected\">\n";
  for (const auto& n : g.nodes) {
    out << "    <node id=\"" << xml_escape(n.id) << "\">";
    if (!n.name.empty()) out << "<data key=\"name\">" << xml_escape(n.name) << "</data>";
    if (!n.leamer_class.empty()) {
      out << "<data key=\"leamer_class\">" << xml_escape(n.leamer_class) << "</data>";
    }
    if (n.rca) out << "<data key=\"rca\">" << (*n.rca ? "true" : "false") << "</data>";
    out << "</node>\n";
  }
  for (const auto& e : g.edges) {
    out << "    <edge source=\"" << xml_escape(g.nodes[e.source].id) << "\" target=\""
        << xml_escape(g.nodes[e.target].id) << "\"><data key=\"phi\">"
        << csv::format_real(e.phi) << "</data><data key=\"tag\">" << to_string(e.tag)
        << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(const ProductGraph& g, std::ostream& out) {
  out << "graph product_space {\n";
  for (const auto& n : g.nodes) {
    out << "  \"" << dot_escape(n.id) << "\"";
    std::vector<std::string> attrs;
    if (!n.name.empty()) attrs.push_back("label=\"" + dot_escape(n.name) + "\"");
    if (!n.leamer_class.empty()) {
      attrs.push_back("leamer_class=\"" + dot_escape(n.leamer_class) + "\"");
    }
    if (n.rca) attrs.push_back(std::string("rca=") + (*n.rca ? "true" : "false"));
    if (!attrs.empty()) {
      out << " [";
      for (std::size_t k = 0; k < attrs.size(); ++k) out << (k ? ", " : "") << attrs[k];
      out << "]";
    }
    out << ";\n";
  }
  for (const auto& e : g.edges) {
    out << "  \"" << dot_escape(g.nodes[e.source].id) << "\" -- \""
        << dot_escape(g.nodes[e.target].id) << "\" [weight=" << csv::format_real(e.phi)
        << ", tag=\"" << to_string(e.tag) << "\"];\n";
  }
  out << "}\n";
}

void write_json(const ProductGraph& g, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n.id;
    node["name"] = n.name;
    node["class"] = n.leamer_class;
    if (n.rca) node["rca"] = *n.rca;
    doc["nodes"].push_back(std::move(node));
  }
  for (const auto& e : g.edges) {
    nlohmann::ordered_json edge;
    edge["source"] = g.nodes[e.source].id;
    edge["target"] = g.nodes[e.target].id;
    edge["phi"] = csv::round_output(e.phi);
    edge["tag"] = std::string(to_string(e.tag));
    doc["edges"].push_back(std::move(edge));
  }
  out << doc.dump(2) << '\n';
}

void write_edge_csv(const ProductGraph& g, std::ostream& out) {
  out << "sitc4_i,sitc4_j,phi,tag\n";
  for (const auto& e : g.edges) {
    out << g.nodes[e.source].id << ',' << g.nodes[e.target].id << ',' << csv::format_real(e.phi)
        << ',' << to_string(e.tag) << '\n';
  }
}

}  // namespace

std::string_view to_string(EdgeTag tag) { return tag == EdgeTag::mst ? "mst" : "overlay"; }

double ProductGraph::total_weight(EdgeTag tag) const {
  // summed heaviest first so equal weight multisets give identical totals
  std::vector<double> w;
  for (const auto& e : edges) {
    if (e.tag == tag) w.push_back(e.phi);
  }
  std::sort(w.begin(), w.end(), std::greater<>());
  double total = 0.0;
  for (double v : w) total += v;
  return total;
}

std::size_t ProductGraph::count(EdgeTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [tag](const GraphEdge& e) { return e.tag == tag; }));
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "graphml") return GraphFormat::graphml;
  if (name == "dot") return GraphFormat::dot;
  if (name == "json") return GraphFormat::json;
  if (name == "edge-csv" || name == "csv") return GraphFormat::edge_csv;
  throw Error("unknown graph format '" + std::string(name) +
              "' (expected graphml, dot, json or edge-csv)");
}

std::string_view file_extension(GraphFormat format) {
  switch (format) {
    case GraphFormat::graphml: return "graphml";
    case GraphFormat::dot: return "dot";
    case GraphFormat::json: return "json";
    case GraphFormat::edge_csv: return "csv";
  }
  return "";
}

ProductGraph max_spanning_forest(const ProximityMatrix& p) {
  if (p.size() == 0) throw EmptyInputError("spanning forest of an empty proximity matrix");
  ProductGraph g;
  for (const auto& code : p.products) g.nodes.push_back({code, {}, {}, std::nullopt});

  detail::UnionFind uf(p.size());
  for (const auto& pr : sorted_pairs(p, true)) {
    if (uf.unite(pr.i, pr.j)) {
      g.edges.push_back({pr.i, pr.j, pr.phi, EdgeTag::mst});
      if (g.edges.size() + 1 == p.size()) break;
    }
  }
  sort_edges(g);
  return g;
}

ProductGraph overlay(ProductGraph g, const ProximityMatrix& p, double threshold) {
  if (g.nodes.size() != p.size()) throw Error("graph and proximity matrix differ in size");
  std::set<std::pair<std::size_t, std::size_t>> present;
  for (const auto& e : g.edges) present.emplace(e.source, e.target);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double v = p.phi(idx(i), idx(j));
      if (v > threshold && !present.count({i, j})) {
        g.edges.push_back({i, j, v, EdgeTag::overlay});
      }
    }
  }
  sort_edges(g);
  return g;
}

void attach_metadata(ProductGraph& g, std::span<const ProductMeta> meta) {
  std::map<std::string_view, const ProductMeta*> by_code;
  for (const auto& m : meta) by_code[m.product] = &m;
  for (auto& n : g.nodes) {
    auto it = by_code.find(n.id);
    if (it == by_code.end()) continue;
    n.name = it->second->name;
    n.leamer_class = it->second->leamer_class;
  }
}

void mark_specialization(ProductGraph& g, const SpecializationMatrix& s,
                         std::string_view country) {
  auto c = find_code(s.countries, country);
  if (!c) throw UnknownCodeError(std::string(country), "specialization countries");
  for (auto& n : g.nodes) {
    auto p = find_code(s.products, n.id);
    n.rca = p ? std::optional<bool>(s.bits(idx(*c), idx(*p))) : std::optional<bool>(false);
  }
}

ComponentCurve component_curve(const ProximityMatrix& p, std::span<const double> thresholds) {
  if (p.size() == 0) throw EmptyInputError("component curve of an empty proximity matrix");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error("component curve thresholds must be sorted ascending");
  }
  const auto pairs = sorted_pairs(p, false);
  const std::size_t n = p.size();

  // sweep thresholds from high to low, adding edges as they qualify
  ComponentCurve curve;
  curve.samples.resize(thresholds.size());
  detail::UnionFind uf(n);
  std::size_t giant = 1;
  std::size_t next = 0;
  for (std::size_t k = thresholds.size(); k-- > 0;) {
    const double t = thresholds[k];
    while (next < pairs.size() && pairs[next].phi >= t) {
      if (uf.unite(pairs[next].i, pairs[next].j)) {
        giant = std::max(giant, uf.size_of(pairs[next].i));
      }
      ++next;
    }
    curve.samples[k] = {t, giant, n, static_cast<double>(giant) / static_cast<double>(n)};
  }
  return curve;
}

// Linkage distances that differ by less than this are ties; averaging in a
// different order must not change the merge sequence.
constexpr double kTieTolerance = 1e-12;

std::vector<std::size_t> hierarchical_order(const ProximityMatrix& p) {
  const std::size_t n = p.size();
  if (n == 0) throw EmptyInputError("hierarchical order of an empty proximity matrix");

  // Slot k holds the cluster whose smallest member is k, so scanning slots in
  // order visits cluster pairs in key order.
  Eigen::MatrixXd dist = (1.0 - p.phi.array()).matrix();
  std::vector<std::vector<std::size_t>> leaves(n);
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  for (std::size_t k = 0; k < n; ++k) leaves[k] = {k};

  for (std::size_t merges = 0; merges + 1 < n; ++merges) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double d = dist(idx(i), idx(j));
        if (d < best - kTieTolerance) {
          best = d;
          a = i;
          b = j;
        }
      }
    }
    // average linkage update (Lance-Williams)
    const double wa = static_cast<double>(size[a]);
    const double wb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double d = (wa * dist(idx(a), idx(k)) + wb * dist(idx(b), idx(k))) / (wa + wb);
      dist(idx(a), idx(k)) = d;
      dist(idx(k), idx(a)) = d;
    }
    leaves[a].insert(leaves[a].end(), leaves[b].begin(), leaves[b].end());
    leaves[b].clear();
    size[a] += size[b];
    active[b] = false;
  }
  return leaves[0];
}

void export_graph(const ProductGraph& g, GraphFormat format, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  switch (format) {
    case GraphFormat::graphml: write_graphml(g, out); break;
    case GraphFormat::dot: write_dot(g, out); break;
    case GraphFormat::json: write_json(g, out); break;
    case GraphFormat::edge_csv: write_edge_csv(g, out); break;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ProductGraph read_edge_csv(const std::filesystem::path& path) {
  csv::Reader reader(path, {"sitc4_i", "sitc4_j", "phi", "tag"});
  struct Row {
    std::string a, b;
    double phi;
    EdgeTag tag;
  };
  std::vector<Row> rows;
  std::set<std::string> codes;
  while (auto row = reader.next()) {
    auto& f = *row;
    if (f[0] == f[1]) reader.fail("self-loop on " + f[0]);
    double v = 0.0;
    if (!csv::parse_real(f[2], v)) reader.fail("bad phi '" + f[2] + "'");
    EdgeTag tag;
    if (f[3] == "mst") {
      tag = EdgeTag::mst;
    } else if (f[3] == "overlay") {
      tag = EdgeTag::overlay;
    } else {
      reader.fail("bad tag '" + f[3] + "'");
    }
    codes.insert(f[0]);
    codes.insert(f[1]);
    rows.push_back({f[0], f[1], v, tag});
  }
  ProductGraph g;
  CodeList ids(codes.begin(), codes.end());
  for (const auto& id : ids) g.nodes.push_back({id, {}, {}, std::nullopt});
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : rows) {
    auto i = *find_code(ids, r.a);
    auto j = *find_code(ids, r.b);
    if (i > j) std::swap(i, j);
    if (!seen.emplace(i, j).second) {
      throw Error(path.string() + ": duplicate edge " + r.a + "-" + r.b);
    }
    g.edges.push_back({i, j, r.phi, r.tag});
  }
  sort_edges(g);
  return g;
}

}  // namespace pspace
