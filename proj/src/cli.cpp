#include "pspace/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "pspace/csv.hpp"
#include "pspace/diffusion.hpp"
#include "pspace/dynamics.hpp"
#include "pspace/graph.hpp"
#include "pspace/ingest.hpp"
#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"
#include "pspace/synthetic.hpp"

namespace pspace::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunConfig::RunConfig()
    : phi_grid(parse_grid("0.4:0.05:0.8")), component_grid(parse_grid("0:0.05:1")) {
  if (const char* env = std::getenv("PSPACE_OUT"); env && *env) {
    out = env;
  } else {
    out = "pspace_out";
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  auto bad = [&] { return Error("invalid grid '" + text + "' (expected START:STEP:STOP or a,b,c)"); };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    double start = 0, step = 0, stop = 0;
    if (parts.size() != 3 || !csv::parse_real(parts[0], start) ||
        !csv::parse_real(parts[1], step) || !csv::parse_real(parts[2], stop) || !(step > 0) ||
        stop < start) {
      throw bad();
    }
    for (long k = 0;; ++k) {
      const double v = csv::round_output(start + static_cast<double>(k) * step);
      if (v > stop + 1e-9) break;
      values.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
      double v = 0;
      if (!csv::parse_real(part, v)) throw bad();
      values.push_back(v);
    }
  }
  if (values.empty()) throw bad();
  std::sort(values.begin(), values.end());
  return values;
}

json to_json(const RunConfig& c) {
  json j;
  j["trade"] = c.trade;
  j["income"] = c.income;
  j["meta"] = c.meta;
  j["regions"] = c.regions;
  j["window"] = to_string(c.window);
  j["compare"] = c.compare ? json(std::to_string(c.compare->first) + ":" +
                                  std::to_string(c.compare->second))
                           : json();
  j["income_year"] = c.income_year ? json(*c.income_year) : json();
  j["rca_high"] = c.rca_high;
  j["rca_low"] = c.rca_low;
  j["overlay_phi"] = c.overlay_phi;
  j["min_export"] = c.min_export;
  j["phi0"] = c.phi0;
  j["phi_grid"] = c.phi_grid;
  j["iterations"] = c.iterations;
  j["top_n"] = c.top_n;
  j["inclusive_threshold"] = c.inclusive;
  j["phi_thresholds"] = c.phi_thresholds;
  j["component_grid"] = c.component_grid;
  j["density_bin"] = c.density_bin;
  j["curve_bin"] = c.curve_bin;
  j["empty_baskets"] = c.empty_baskets;
  j["formats"] = c.formats;
  j["countries"] = c.countries;
  j["highlight"] = c.highlight;
  j["against"] = c.against;
  j["seed"] = c.seed;
  j["synth_countries"] = c.synth_countries;
  j["synth_products"] = c.synth_products;
  j["out"] = c.out;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(field);
  };
  get("trade", c.trade);
  get("income", c.income);
  get("meta", c.meta);
  get("regions", c.regions);
  if (j.contains("window") && j["window"].is_string()) {
    c.window = parse_window(j["window"].get<std::string>());
  }
  if (j.contains("compare") && j["compare"].is_string()) {
    auto w = parse_window(j["compare"].get<std::string>());
    c.compare = std::make_pair(w.first, w.last);
  }
  if (j.contains("income_year") && j["income_year"].is_number_integer()) {
    c.income_year = j["income_year"].get<int>();
  }
  get("rca_high", c.rca_high);
  get("rca_low", c.rca_low);
  get("overlay_phi", c.overlay_phi);
  get("min_export", c.min_export);
  get("phi0", c.phi0);
  get("phi_grid", c.phi_grid);
  get("iterations", c.iterations);
  get("top_n", c.top_n);
  get("inclusive_threshold", c.inclusive);
  get("phi_thresholds", c.phi_thresholds);
  get("component_grid", c.component_grid);
  get("density_bin", c.density_bin);
  get("curve_bin", c.curve_bin);
  get("empty_baskets", c.empty_baskets);
  get("formats", c.formats);
  get("countries", c.countries);
  get("highlight", c.highlight);
  get("against", c.against);
  get("seed", c.seed);
  get("synth_countries", c.synth_countries);
  get("synth_products", c.synth_products);
  get("out", c.out);
  return c;
}

namespace {

// Names of the artifacts each stage writes inside the run directory.
namespace artifact {
constexpr const char* exports = "exports.csv";
constexpr const char* exports_t0 = "exports_t0.csv";
constexpr const char* exports_t1 = "exports_t1.csv";
constexpr const char* exports_regions = "exports_regions.csv";
constexpr const char* income = "income.csv";
constexpr const char* meta = "meta.csv";
constexpr const char* rca = "rca.csv";
constexpr const char* rca_t0 = "rca_t0.csv";
constexpr const char* rca_t1 = "rca_t1.csv";
constexpr const char* rca_regions = "rca_regions.csv";
constexpr const char* spec = "specialization.csv";
constexpr const char* spec_t0 = "specialization_t0.csv";
constexpr const char* spec_regions = "specialization_regions.csv";
constexpr const char* proximity = "proximity.csv";
constexpr const char* proximity_bin = "proximity.bin";
constexpr const char* phi_stats = "phi_stats.json";
constexpr const char* component_curve = "component_curve.csv";
constexpr const char* order = "hierarchical_order.csv";
constexpr const char* density = "density.csv";
constexpr const char* density_t0 = "density_t0.csv";
constexpr const char* transitions = "transitions.csv";
constexpr const char* density_hist = "density_hist.csv";
constexpr const char* ratios = "ratios.csv";
constexpr const char* curve_proximity = "curve_proximity.csv";
constexpr const char* curve_rank = "curve_rank.csv";
constexpr const char* transitions_summary = "transitions.json";
constexpr const char* trace = "trace.csv";
constexpr const char* prody = "prody.csv";
constexpr const char* sweep = "sweep.csv";
constexpr const char* convergence = "convergence.json";
constexpr const char* report = "report.json";
}  // namespace artifact

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;
  std::string stage;
  Warnings warnings;

  fs::path at(const char* name) const { return dir / name; }

  // Path of an artifact some earlier stage must have written.
  fs::path need(const char* name, const char* producer) const {
    auto p = dir / name;
    if (!fs::exists(p)) {
      throw Error("missing " + p.string() + "; run `pspace " + producer + "` first");
    }
    return p;
  }

  bool has(const char* name) const { return fs::exists(dir / name); }

  void flush_warnings() {
    for (const auto& w : warnings.messages()) err << "pspace " << stage << ": warning: " << w << '\n';
    warnings = Warnings();
  }
};

void write_json_file(const fs::path& path, const json& doc) {
  auto f = csv::open_output(path);
  f << doc.dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

json optional_real(const std::optional<double>& v) {
  return v ? json(csv::round_output(*v)) : json();
}

void write_stage_config(const Context& ctx) {
  write_json_file(ctx.dir / (ctx.stage + ".config.json"), to_json(ctx.cfg));
}

ExportMatrix drop_small_exporters(ExportMatrix m, double min_export) {
  if (min_export <= 0.0) return m;
  ExportMatrix kept;
  kept.window = m.window;
  kept.products = m.products;
  std::vector<Eigen::Index> rows;
  for (std::size_t c = 0; c < m.countries.size(); ++c) {
    if (m.values.row(static_cast<Eigen::Index>(c)).sum() >= min_export) {
      kept.countries.push_back(m.countries[c]);
      rows.push_back(static_cast<Eigen::Index>(c));
    }
  }
  if (rows.empty()) throw EmptyInputError("no country reaches --min-export");
  kept.values.resize(static_cast<Eigen::Index>(rows.size()), m.values.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    kept.values.row(static_cast<Eigen::Index>(k)) = m.values.row(rows[k]);
  }
  return kept;
}

// Re-reads an exports artifact, whose rows are stamped with window.first.
ExportMatrix load_exports(const fs::path& path, YearWindow window, Warnings* w) {
  auto records = read_trade_records(path, w);
  for (const auto& r : records) {
    if (r.year != window.first) {
      throw Error(path.string() + " was written for a different window; rerun `pspace ingest`");
    }
  }
  return pool_trade(records, window);
}

void write_meta(const fs::path& path, const std::vector<ProductMeta>& meta) {
  auto f = csv::open_output(path);
  f << "sitc4,name,leamer_class\n";
  for (const auto& m : meta) {
    f << m.product << ',' << csv::quote(m.name) << ',' << csv::quote(m.leamer_class) << '\n';
  }
}

YearWindow snapshot(int year) { return {year, year}; }

// ---------------------------------------------------------------- stages

void stage_ingest(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.trade.empty()) throw Error("--trade is required");
  auto records = read_trade_records(cfg.trade, &ctx.warnings);

  auto m = drop_small_exporters(pool_trade(records, cfg.window), cfg.min_export);
  write_trade(ctx.at(artifact::exports), m);
  ctx.out << "ingest: " << m.countries.size() << " countries x " << m.products.size()
          << " products over " << to_string(cfg.window) << '\n';

  if (cfg.compare) {
    for (auto [year, name] : {std::pair{cfg.compare->first, artifact::exports_t0},
                              std::pair{cfg.compare->second, artifact::exports_t1}}) {
      auto snap = drop_small_exporters(pool_trade(records, snapshot(year)), cfg.min_export);
      write_trade(ctx.at(name), snap);
      ctx.out << "ingest: snapshot " << year << ": " << snap.countries.size() << " countries x "
              << snap.products.size() << " products\n";
    }
  }
  if (!cfg.income.empty()) {
    const int year = cfg.income_year.value_or(cfg.window.last);
    auto incomes = load_income(cfg.income, year, &ctx.warnings);
    write_income(ctx.at(artifact::income), incomes);
    ctx.out << "ingest: " << incomes.size() << " income records for " << year << '\n';
  }
  if (!cfg.meta.empty()) write_meta(ctx.at(artifact::meta), load_meta(cfg.meta));
  if (!cfg.regions.empty()) {
    auto groups = load_regions(cfg.regions);
    write_trade(ctx.at(artifact::exports_regions), aggregate_region(m, groups));
    ctx.out << "ingest: " << groups.size() << " regions\n";
  }
}

void stage_rca(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto m = load_exports(ctx.need(artifact::exports, "ingest"), cfg.window, &ctx.warnings);
  auto r = rca(m);
  auto s = binarize(r, cfg.rca_high);
  write_rca(ctx.at(artifact::rca), r);
  write_specialization(ctx.at(artifact::spec), r, s);
  ctx.out << "rca: " << s.bits.count() << " specialized country-product pairs\n";

  if (ctx.has(artifact::exports_t0) && ctx.has(artifact::exports_t1)) {
    if (!cfg.compare) throw Error("snapshot exports present but --compare not given");
    auto r0 = rca(load_exports(ctx.at(artifact::exports_t0), snapshot(cfg.compare->first),
                               &ctx.warnings));
    auto r1 = rca(load_exports(ctx.at(artifact::exports_t1), snapshot(cfg.compare->second),
                               &ctx.warnings));
    write_rca(ctx.at(artifact::rca_t0), r0);
    write_rca(ctx.at(artifact::rca_t1), r1);
    write_specialization(ctx.at(artifact::spec_t0), r0, binarize(r0, cfg.rca_high));
  }
  if (ctx.has(artifact::exports_regions)) {
    auto rr = rca(load_exports(ctx.at(artifact::exports_regions), cfg.window, &ctx.warnings));
    write_rca(ctx.at(artifact::rca_regions), rr);
    write_specialization(ctx.at(artifact::spec_regions), rr, binarize(rr, cfg.rca_high));
  }
}

bool wants(const RunConfig& cfg, std::string_view format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

ProductGraph display_network(const ProximityMatrix& p, double overlay_phi) {
  return overlay(max_spanning_forest(p), p, overlay_phi);
}

void stage_proximity(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto s = read_specialization(ctx.need(artifact::spec, "rca"), cfg.rca_high);
  auto p = proximity(s);
  write_proximity(ctx.at(artifact::proximity), p);
  if (wants(cfg, "binary")) write_proximity_binary(ctx.at(artifact::proximity_bin), p);

  auto st = phi_stats(p, cfg.phi_thresholds);
  json doc;
  doc["products"] = p.size();
  doc["pairs"] = st.pairs;
  doc["frac_zero"] = csv::round_output(st.frac_zero);
  doc["frac_below"] = json::array();
  for (auto [t, f] : st.frac_below) {
    doc["frac_below"].push_back({{"threshold", csv::round_output(t)}, {"fraction", csv::round_output(f)}});
  }
  doc["bin_width"] = csv::round_output(st.bin_width);
  doc["histogram"] = st.histogram;

  if (!cfg.against.empty()) {
    auto other = read_proximity(cfg.against);
    json corr;
    corr["against"] = cfg.against;
    corr["all_pairs"] = csv::round_output(phi_correlation(p, other, nullptr, &ctx.warnings));
    auto g = display_network(p, cfg.overlay_phi);
    std::vector<ProductPair> edges;
    for (const auto& e : g.edges) edges.emplace_back(g.nodes[e.source].id, g.nodes[e.target].id);
    try {
      corr["network_edges"] =
          csv::round_output(phi_correlation(p, other, &edges, &ctx.warnings));
    } catch (const UndefinedError& e) {
      ctx.warnings.add(std::string("network-edge correlation: ") + e.what());
      corr["network_edges"] = nullptr;
    }
    doc["correlation"] = corr;
  }
  write_json_file(ctx.at(artifact::phi_stats), doc);
  ctx.out << "proximity: " << p.size() << " products, frac_zero " << csv::format_real(st.frac_zero)
          << '\n';
}

void stage_graph(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto p = read_proximity(ctx.need(artifact::proximity, "proximity"));
  auto g = display_network(p, cfg.overlay_phi);
  if (ctx.has(artifact::meta)) attach_metadata(g, load_meta(ctx.at(artifact::meta)));
  if (!cfg.highlight.empty()) {
    std::optional<SpecializationMatrix> source;
    if (ctx.has(artifact::spec_regions)) {
      auto sr = read_specialization(ctx.at(artifact::spec_regions), cfg.rca_high);
      if (find_code(sr.countries, cfg.highlight)) source = std::move(sr);
    }
    if (!source) source = read_specialization(ctx.need(artifact::spec, "rca"), cfg.rca_high);
    mark_specialization(g, *source, cfg.highlight);
  }

  std::vector<std::string> formats;
  for (const auto& f : cfg.formats) {
    if (f != "binary") formats.push_back(f);
  }
  if (formats.empty()) formats = {"graphml", "edge-csv"};
  for (const auto& name : formats) {
    const auto format = parse_graph_format(name);
    const std::string file =
        format == GraphFormat::edge_csv ? "graph_edges.csv"
                                        : "graph." + std::string(file_extension(format));
    export_graph(g, format, ctx.dir / file);
  }

  auto curve = component_curve(p, cfg.component_grid);
  {
    auto f = csv::open_output(ctx.at(artifact::component_curve));
    f << "threshold,giant_size,total,ratio\n";
    for (const auto& s : curve.samples) {
      f << csv::format_real(s.threshold) << ',' << s.giant_size << ',' << s.total << ','
        << csv::format_real(s.ratio) << '\n';
    }
  }
  {
    auto f = csv::open_output(ctx.at(artifact::order));
    f << "position,sitc4\n";
    auto order = hierarchical_order(p);
    for (std::size_t k = 0; k < order.size(); ++k) f << k << ',' << p.products[order[k]] << '\n';
  }
  ctx.out << "graph: " << g.count(EdgeTag::mst) << " forest edges, " << g.count(EdgeTag::overlay)
          << " overlay edges above " << csv::format_real(cfg.overlay_phi) << '\n';
}

SpecializationMatrix aligned_specialization(Context& ctx, const char* name,
                                            const ProximityMatrix& p) {
  auto s = read_specialization(ctx.need(name, "rca"), ctx.cfg.rca_high);
  if (s.products == p.products) return s;
  return align_products(s, p.products, &ctx.warnings);
}

void stage_density(Context& ctx) {
  auto p = read_proximity(ctx.need(artifact::proximity, "proximity"));
  auto s = aligned_specialization(ctx, artifact::spec, p);
  write_density(ctx.at(artifact::density), density_table(s, p));
  if (ctx.has(artifact::spec_t0)) {
    auto s0 = aligned_specialization(ctx, artifact::spec_t0, p);
    write_density(ctx.at(artifact::density_t0), density_table(s0, p));
  }
  ctx.out << "density: " << s.countries.size() << " countries\n";
}

void stage_transitions(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.compare) throw Error("--compare START:END is required for transitions");
  auto r0 = read_rca(ctx.need(artifact::rca_t0, "rca --compare"));
  auto r1 = read_rca(ctx.need(artifact::rca_t1, "rca --compare"));
  r0.window = snapshot(cfg.compare->first);
  r1.window = snapshot(cfg.compare->second);
  auto p = read_proximity(ctx.need(artifact::proximity, "proximity"));
  auto d0 = read_density(ctx.need(artifact::density_t0, "density"));
  auto s0 = aligned_specialization(ctx, artifact::spec_t0, p);

  auto t = classify_transitions(r0, r1, cfg.rca_low, cfg.rca_high, &ctx.warnings);
  const auto before = t.entries.size();
  std::erase_if(t.entries, [&](const TransitionEntry& e) {
    return !find_code(p.products, e.product) || !d0.find(e.country, e.product);
  });
  if (t.entries.size() != before) {
    ctx.warnings.add(std::to_string(before - t.entries.size()) +
                     " classified pairs fall outside the product space and were dropped");
  }
  write_transitions(ctx.at(artifact::transitions), t);

  auto hist = density_distributions(t, d0, cfg.density_bin);
  write_density_histograms(ctx.at(artifact::density_hist), hist);
  auto ratios = discovery_ratio(t, d0);
  write_ratios(ctx.at(artifact::ratios), ratios);
  auto curve = transition_prob_by_proximity(t, s0, p, cfg.curve_bin, cfg.empty_baskets);
  write_curve(ctx.at(artifact::curve_proximity), curve);
  write_rank_curve(ctx.at(artifact::curve_rank), transition_prob_by_rank(t, s0, p));

  json doc;
  doc["t0"] = cfg.compare->first;
  doc["t1"] = cfg.compare->second;
  doc["counts"] = {{"transition", t.count(TransitionLabel::transition)},
                   {"undeveloped", t.count(TransitionLabel::undeveloped)},
                   {"inconclusive", t.count(TransitionLabel::inconclusive)}};
  doc["mean_density"] = {{"transition", optional_real(hist.transition_mean)},
                         {"undeveloped", optional_real(hist.undeveloped_mean)}};
  doc["ratios"] = {{"products", ratios.products.size()},
                   {"defined", ratios.defined()},
                   {"fraction_above_one", optional_real(ratios.fraction_above_one())}};
  doc["curve"] = json::array();
  for (const auto& b : curve.bins) {
    doc["curve"].push_back({{"bin_low", csv::round_output(b.low)},
                            {"bin_high", csv::round_output(b.high)},
                            {"opportunities", b.opportunities},
                            {"probability", optional_real(b.probability)}});
  }
  write_json_file(ctx.at(artifact::transitions_summary), doc);
  ctx.out << "transitions: " << t.count(TransitionLabel::transition) << " transition, "
          << t.count(TransitionLabel::undeveloped) << " undeveloped, "
          << t.count(TransitionLabel::inconclusive) << " inconclusive\n";
}

DiffusionConfig diffusion_config(const RunConfig& cfg) {
  return {cfg.phi0, cfg.iterations, cfg.top_n, cfg.inclusive};
}

void stage_diffuse(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto p = read_proximity(ctx.need(artifact::proximity, "proximity"));
  auto s = aligned_specialization(ctx, artifact::spec, p);
  const auto& countries = cfg.countries.empty() ? s.countries : cfg.countries;
  std::vector<DiffusionTrace> traces;
  for (const auto& c : countries) traces.push_back(diffuse(s, p, diffusion_config(cfg), c));
  write_traces(ctx.at(artifact::trace), traces);
  ctx.out << "diffuse: " << traces.size() << " countries at phi0 " << csv::format_real(cfg.phi0)
          << '\n';
}

void stage_converge(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto p = read_proximity(ctx.need(artifact::proximity, "proximity"));
  auto r = read_rca(ctx.need(artifact::rca, "rca"));
  auto s = aligned_specialization(ctx, artifact::spec, p);
  const int year = cfg.income_year.value_or(cfg.window.last);
  auto incomes = load_income(ctx.need(artifact::income, "ingest --income"), year, &ctx.warnings);
  auto prodys = prody(r, incomes, &ctx.warnings);
  write_prody(ctx.at(artifact::prody), prodys);
  auto report = convergence_sweep(s, p, prodys, cfg.phi_grid, diffusion_config(cfg));
  write_sweep(ctx.at(artifact::sweep), report);
  write_convergence_json(ctx.at(artifact::convergence), report);
  ctx.out << "converge: " << report.countries.size() << " countries, original IQR "
          << csv::format_real(report.original_iqr) << '\n';
}

void stage_report(Context& ctx) {
  if (!fs::is_directory(ctx.dir)) throw Error("run directory " + ctx.dir.string() + " not found");
  json doc;
  json missing = json::array();
  auto absent = [&](const char* name, const char* producer) {
    missing.push_back({{"artifact", name}, {"stage", producer}});
    ctx.warnings.add(std::string("missing ") + name + " (run `pspace " + producer + "`)");
  };

  if (ctx.has(artifact::phi_stats)) {
    doc["phi_stats"] = read_json_file(ctx.at(artifact::phi_stats));
  } else {
    doc["phi_stats"] = nullptr;
    absent(artifact::phi_stats, "proximity");
  }

  if (ctx.has(artifact::component_curve)) {
    csv::Reader reader(ctx.at(artifact::component_curve), {"threshold", "giant_size", "total", "ratio"});
    json rows = json::array();
    while (auto row = reader.next()) {
      double t = 0, ratio = 0;
      int giant = 0, total = 0;
      if (!csv::parse_real((*row)[0], t) || !csv::parse_int((*row)[1], giant) ||
          !csv::parse_int((*row)[2], total) || !csv::parse_real((*row)[3], ratio)) {
        reader.fail("malformed component curve row");
      }
      rows.push_back({{"threshold", t}, {"giant_size", giant}, {"total", total}, {"ratio", ratio}});
    }
    doc["component_curve"] = rows;
  } else {
    doc["component_curve"] = nullptr;
    absent(artifact::component_curve, "graph");
  }

  if (ctx.has(artifact::transitions_summary)) {
    doc["transitions"] = read_json_file(ctx.at(artifact::transitions_summary));
  } else {
    doc["transitions"] = nullptr;
    absent(artifact::transitions_summary, "transitions");
  }

  if (ctx.has(artifact::trace)) {
    csv::Reader reader(ctx.at(artifact::trace), {"country", "sitc4", "step"});
    std::set<std::string> countries;
    std::size_t initial = 0, acquired = 0;
    int max_step = 0;
    while (auto row = reader.next()) {
      int step = 0;
      if (!csv::parse_int((*row)[2], step)) reader.fail("bad step");
      countries.insert((*row)[0]);
      (step == 0 ? initial : acquired) += 1;
      max_step = std::max(max_step, step);
    }
    doc["diffusion"] = {{"countries", countries.size()},
                        {"initial_products", initial},
                        {"acquired_products", acquired},
                        {"max_step", max_step}};
  } else {
    doc["diffusion"] = nullptr;
    absent(artifact::trace, "diffuse");
  }

  if (ctx.has(artifact::convergence)) {
    auto conv = read_json_file(ctx.at(artifact::convergence));
    doc["convergence"] = {{"original_iqr", conv.at("original_iqr")}, {"rows", conv.at("rows")}};
  } else {
    doc["convergence"] = nullptr;
    absent(artifact::convergence, "converge");
  }
  doc["missing"] = missing;

  write_json_file(ctx.at(artifact::report), doc);
  ctx.out << "report: " << ctx.at(artifact::report).string() << ", " << missing.size()
          << " missing artifacts\n";
}

void stage_synth(Context& ctx) {
  const auto& cfg = ctx.cfg;
  SyntheticOptions opt;
  opt.seed = cfg.seed;
  opt.countries = cfg.synth_countries;
  opt.products = cfg.synth_products;
  auto world = make_synthetic_world(opt);
  write_trade_records(ctx.dir / "trade.csv", world.trade);
  {
    auto f = csv::open_output(ctx.dir / "income.csv");
    f << "country,year,gdp_pc\n";
    for (const auto& i : world.incomes) {
      f << i.country << ',' << i.year << ',' << csv::format_real(i.gdp_per_capita) << '\n';
    }
  }
  write_meta(ctx.dir / "meta.csv", world.meta);
  ctx.out << "synth: " << world.trade.size() << " trade rows written to " << ctx.dir.string()
          << '\n';
}

using StageFn = void (*)(Context&);

struct StageInfo {
  const char* name;
  const char* help;
  StageFn fn;
};

const StageInfo kStages[] = {
    {"ingest", "Parse trade, income, metadata and region files into pooled matrices", stage_ingest},
    {"rca", "Compute revealed comparative advantage and specialization bits", stage_rca},
    {"proximity", "Build the product proximity matrix and its distribution statistics",
     stage_proximity},
    {"graph", "Spanning forest plus overlay network, component curve and clustering order",
     stage_graph},
    {"density", "Density of every country around every product", stage_density},
    {"transitions", "Classify transitions between snapshots; ratios and probability curves",
     stage_transitions},
    {"diffuse", "Threshold diffusion traces per country", stage_diffuse},
    {"converge", "PRODY and the IQR convergence sweep over a phi0 grid", stage_converge},
    {"report", "Summarize a run directory as one JSON document", stage_report},
    {"synth", "Write a seeded synthetic trade/income/metadata fixture", stage_synth},
};

int run_stage(const StageInfo& stage, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Context ctx{cfg, fs::path(cfg.out), out, err, stage.name, {}};
  try {
    fs::create_directories(ctx.dir);
    stage.fn(ctx);
    if (stage.fn != stage_report) write_stage_config(ctx);
    ctx.flush_warnings();
    return 0;
  } catch (const std::exception& e) {
    ctx.flush_warnings();
    err << "pspace " << stage.name << ": error: " << e.what() << '\n';
    return 1;
  }
}

int run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  for (const auto& stage : kStages) {
    const std::string name = stage.name;
    if (name == "synth") continue;
    if (name == "transitions" && !cfg.compare) {
      err << "pspace run: skipping transitions (no --compare)\n";
      continue;
    }
    if (name == "converge" && cfg.income.empty()) {
      err << "pspace run: skipping converge (no --income)\n";
      continue;
    }
    if (int rc = run_stage(stage, cfg, out, err); rc != 0) return rc;
  }
  return 0;
}

// Registers options that write into a RunConfig only when given on the
// command line, so they can override a --config file.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  void add(const std::string& name, const std::string& help,
           std::function<void(RunConfig&, const T&)> apply) {
    auto holder = std::make_shared<T>();
    auto* opt = app_->add_option(name, *holder, help);
    if constexpr (std::is_same_v<T, std::vector<std::string>>) opt->delimiter(',');
    appliers_.push_back({opt, [holder, apply](RunConfig& c) { apply(c, *holder); }});
  }

  void flag(const std::string& name, const std::string& help,
            std::function<void(RunConfig&, bool)> apply) {
    auto holder = std::make_shared<bool>(true);
    auto* opt = app_->add_flag(name, *holder, help);
    appliers_.push_back({opt, [holder, apply](RunConfig& c) { apply(c, *holder); }});
  }

  void apply(RunConfig& cfg) const {
    for (const auto& [opt, fn] : appliers_) {
      if (opt->count() > 0) fn(cfg);
    }
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> appliers_;
};

using S = std::string;

void add_inputs(Options& o) {
  o.add<S>("--trade", "Trade CSV (year,exporter,sitc4,value)", [](RunConfig& c, const S& v) { c.trade = v; });
  o.add<S>("--income", "Income CSV (country,year,gdp_pc)", [](RunConfig& c, const S& v) { c.income = v; });
  o.add<S>("--meta", "Product metadata CSV (sitc4,name[,leamer_class])",
           [](RunConfig& c, const S& v) { c.meta = v; });
  o.add<S>("--regions", "Region membership CSV (region,country)",
           [](RunConfig& c, const S& v) { c.regions = v; });
  o.add<double>("--min-export", "Drop countries whose pooled exports are below this total",
                [](RunConfig& c, const double& v) { c.min_export = v; });
}

void add_window(Options& o) {
  o.add<S>("--window", "Base year window FIRST:LAST (default 1998:2000)",
           [](RunConfig& c, const S& v) { c.window = parse_window(v); });
}

void add_compare(Options& o) {
  o.add<S>("--compare", "Start and end snapshot years START:END, e.g. 1990:1995",
           [](RunConfig& c, const S& v) {
             auto w = parse_window(v);
             if (w.first == w.last) throw Error("--compare needs two distinct years");
             c.compare = std::make_pair(w.first, w.last);
           });
}

void add_income_year(Options& o) {
  o.add<int>("--income-year", "Year of GDP per capita used for PRODY (default: window end)",
             [](RunConfig& c, const int& v) { c.income_year = v; });
}

void add_rca_high(Options& o) {
  o.add<double>("--rca-high", "Specialization threshold, RCA > value (default 1)",
                [](RunConfig& c, const double& v) { c.rca_high = v; });
}

void add_rca_low(Options& o) {
  o.add<double>("--rca-low", "Undeveloped threshold, RCA < value (default 0.5)",
                [](RunConfig& c, const double& v) { c.rca_low = v; });
}

void add_format(Options& o) {
  o.add<std::vector<S>>("--format", "Output formats: graphml,dot,json,edge-csv (graph); binary (proximity)",
                        [](RunConfig& c, const std::vector<S>& v) { c.formats = v; });
}

void add_proximity_opts(Options& o) {
  o.add<S>("--against", "Second proximity CSV to correlate with",
           [](RunConfig& c, const S& v) { c.against = v; });
}

void add_graph_opts(Options& o) {
  o.add<double>("--overlay-phi", "Overlay links with phi above this (default 0.55)",
                [](RunConfig& c, const double& v) { c.overlay_phi = v; });
  o.add<S>("--highlight", "Country or region whose RCA > 1 products are flagged on nodes",
           [](RunConfig& c, const S& v) { c.highlight = v; });
  o.add<S>("--component-grid", "Thresholds for the giant-component curve (default 0:0.05:1)",
           [](RunConfig& c, const S& v) { c.component_grid = parse_grid(v); });
}

void add_transition_opts(Options& o) {
  o.add<double>("--density-bin", "Bin width of density histograms (default 0.02)",
                [](RunConfig& c, const double& v) { c.density_bin = v; });
  o.add<double>("--curve-bin", "Bin width of the proximity curve (default 0.1)",
                [](RunConfig& c, const double& v) { c.curve_bin = v; });
  o.flag("--exclude-empty-baskets", "Leave out countries with no specialized product",
         [](RunConfig& c, bool) { c.empty_baskets = false; });
}

void add_diffusion_opts(Options& o, bool single_phi0) {
  if (single_phi0) {
    o.add<double>("--phi0", "Diffusion threshold (default 0.55)",
                  [](RunConfig& c, const double& v) { c.phi0 = v; });
    o.add<std::vector<S>>("--country", "Countries to diffuse (default: all)",
                          [](RunConfig& c, const std::vector<S>& v) { c.countries = v; });
  } else {
    o.add<S>("--phi-grid", "phi0 values START:STEP:STOP or a,b,c (default 0.4:0.05:0.8)",
             [](RunConfig& c, const S& v) { c.phi_grid = parse_grid(v); });
  }
  o.add<int>("--iterations", "Diffusion rounds M (default 20)",
             [](RunConfig& c, const int& v) { c.iterations = v; });
  o.add<int>("--top-n", "Products averaged for reach PRODY, N (default 50)",
             [](RunConfig& c, const int& v) { c.top_n = v; });
  o.flag("--inclusive-threshold,!--strict-threshold",
         "Move along phi >= phi0 (default) or, with --strict-threshold, phi > phi0",
         [](RunConfig& c, bool v) { c.inclusive = v; });
}

void add_synth_opts(Options& o) {
  o.add<std::uint64_t>("--seed", "Seed of the synthetic generator",
                       [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
  o.add<int>("--synth-countries", "Countries in the synthetic world",
             [](RunConfig& c, const int& v) { c.synth_countries = v; });
  o.add<int>("--synth-products", "Products in the synthetic world",
             [](RunConfig& c, const int& v) { c.synth_products = v; });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Product space construction and specialization dynamics", "pspace"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::unique_ptr<Options> opts;
    std::string config_path;
  };
  std::map<std::string, Sub> subs;

  auto make = [&](const std::string& name, const std::string& help) -> Options& {
    auto& sub = subs[name];
    sub.app = app.add_subcommand(name, help);
    sub.opts = std::make_unique<Options>(sub.app);
    sub.opts->add<S>("--out", "Run directory (default $PSPACE_OUT or ./pspace_out)",
                     [](RunConfig& c, const S& v) { c.out = v; });
    sub.app->add_option("--config", sub.config_path, "Resolved config JSON from an earlier run")
        ->check(CLI::ExistingFile);
    return *sub.opts;
  };

  for (const auto& stage : kStages) {
    auto& o = make(stage.name, stage.help);
    const std::string name = stage.name;
    if (name == "ingest") {
      add_inputs(o);
      add_window(o);
      add_compare(o);
      add_income_year(o);
    } else if (name == "rca") {
      add_window(o);
      add_compare(o);
      add_rca_high(o);
    } else if (name == "proximity") {
      add_rca_high(o);
      add_format(o);
      add_proximity_opts(o);
      o.add<double>("--overlay-phi", "Overlay threshold of the network used for edge correlation",
                    [](RunConfig& c, const double& v) { c.overlay_phi = v; });
    } else if (name == "graph") {
      add_rca_high(o);
      add_format(o);
      add_graph_opts(o);
    } else if (name == "density") {
      add_rca_high(o);
    } else if (name == "transitions") {
      add_compare(o);
      add_rca_high(o);
      add_rca_low(o);
      add_transition_opts(o);
    } else if (name == "diffuse") {
      add_rca_high(o);
      add_diffusion_opts(o, true);
    } else if (name == "converge") {
      add_window(o);
      add_income_year(o);
      add_rca_high(o);
      add_diffusion_opts(o, false);
    } else if (name == "synth") {
      add_synth_opts(o);
    }
  }

  auto& all = make("run", "Run every stage in dependency order");
  add_inputs(all);
  add_window(all);
  add_compare(all);
  add_income_year(all);
  add_rca_high(all);
  add_rca_low(all);
  add_format(all);
  add_proximity_opts(all);
  add_graph_opts(all);
  add_transition_opts(all);
  all.add<double>("--phi0", "Diffusion threshold for traces (default 0.55)",
                  [](RunConfig& c, const double& v) { c.phi0 = v; });
  all.add<std::vector<S>>("--country", "Countries to trace (default: all)",
                          [](RunConfig& c, const std::vector<S>& v) { c.countries = v; });
  add_diffusion_opts(all, false);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    RunConfig cfg;
    try {
      if (!sub.config_path.empty()) cfg = config_from_json(read_json_file(sub.config_path));
      sub.opts->apply(cfg);
    } catch (const std::exception& e) {
      err << "pspace " << name << ": error: " << e.what() << '\n';
      return 2;
    }
    if (name == "run") return run_pipeline(cfg, out, err);
    for (const auto& stage : kStages) {
      if (name == stage.name) return run_stage(stage, cfg, out, err);
    }
  }
  return 1;
}

}  // namespace pspace::cli
