#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pspace/cli.hpp"
#include "pspace/diffusion.hpp"
#include "pspace/dynamics.hpp"
#include "pspace/graph.hpp"
#include "pspace/ingest.hpp"
#include "pspace/proximity.hpp"
#include "pspace/specialization.hpp"

namespace py = pybind11;
using namespace pspace;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Product space construction and specialization dynamics";

  auto base = py::register_exception<Error>(m, "PspaceError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UndefinedError>(m, "UndefinedError", base.ptr());
  py::register_exception<UnknownCodeError>(m, "UnknownCodeError", base.ptr());

  py::class_<YearWindow>(m, "YearWindow")
      .def(py::init<>())
      .def(py::init([](int first, int last) { return YearWindow{first, last}; }))
      .def_readwrite("first", &YearWindow::first)
      .def_readwrite("last", &YearWindow::last)
      .def("__repr__", [](const YearWindow& w) { return "YearWindow(" + to_string(w) + ")"; });

  py::class_<ExportMatrix>(m, "ExportMatrix")
      .def(py::init<>())
      .def(py::init([](CodeList countries, CodeList products, Eigen::MatrixXd values) {
             if (values.rows() != static_cast<Eigen::Index>(countries.size()) ||
                 values.cols() != static_cast<Eigen::Index>(products.size()))
               throw Error("values shape does not match the code lists");
             return ExportMatrix{std::move(countries), std::move(products), std::move(values), {}};
           }),
           py::arg("countries"), py::arg("products"), py::arg("values"))
      .def_readwrite("countries", &ExportMatrix::countries)
      .def_readwrite("products", &ExportMatrix::products)
      .def_readwrite("values", &ExportMatrix::values)
      .def_readwrite("window", &ExportMatrix::window)
      .def("at", &ExportMatrix::at);

  py::class_<RcaMatrix>(m, "RcaMatrix")
      .def_readonly("countries", &RcaMatrix::countries)
      .def_readonly("products", &RcaMatrix::products)
      .def_readonly("values", &RcaMatrix::values)
      .def("at", &RcaMatrix::at);

  py::class_<SpecializationMatrix>(m, "SpecializationMatrix")
      .def_readonly("countries", &SpecializationMatrix::countries)
      .def_readonly("products", &SpecializationMatrix::products)
      .def_readonly("bits", &SpecializationMatrix::bits)
      .def_readonly("threshold", &SpecializationMatrix::threshold);

  py::class_<ProximityMatrix>(m, "ProximityMatrix")
      .def(py::init([](CodeList products, Eigen::MatrixXd phi) {
             return ProximityMatrix{std::move(products), std::move(phi)};
           }),
           py::arg("products"), py::arg("phi"))
      .def_readonly("products", &ProximityMatrix::products)
      .def_readonly("phi", &ProximityMatrix::phi)
      .def("at", &ProximityMatrix::at);

  py::class_<PhiStats>(m, "PhiStats")
      .def_readonly("pairs", &PhiStats::pairs)
      .def_readonly("frac_zero", &PhiStats::frac_zero)
      .def_readonly("frac_below", &PhiStats::frac_below)
      .def_readonly("histogram", &PhiStats::histogram);

  m.def("load_trade", [](const std::filesystem::path& p, YearWindow w) { return load_trade(p, w); },
        py::arg("path"), py::arg("window"));
  m.def("rca", &rca);
  m.def("binarize", &binarize, py::arg("rca"), py::arg("threshold") = 1.0);
  m.def("proximity", &proximity);
  m.def("phi_stats",
        [](const ProximityMatrix& p, std::vector<double> thresholds) { return phi_stats(p, thresholds); },
        py::arg("proximity"), py::arg("thresholds") = std::vector<double>{0.1, 0.2});

  m.def(
      "product_network",
      [](const ProximityMatrix& p, double threshold) {
        auto g = overlay(max_spanning_forest(p), p, threshold);
        py::list edges;
        for (const auto& e : g.edges)
          edges.append(py::make_tuple(g.nodes[e.source].id, g.nodes[e.target].id, e.phi,
                                      std::string(to_string(e.tag))));
        return edges;
      },
      py::arg("proximity"), py::arg("overlay_phi") = 0.55,
      "Spanning-forest plus overlay edges as (source, target, phi, tag) tuples.");
  m.def(
      "component_curve",
      [](const ProximityMatrix& p, std::vector<double> thresholds) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : component_curve(p, thresholds).samples) out.emplace_back(s.threshold, s.ratio);
        return out;
      },
      py::arg("proximity"), py::arg("thresholds"));
  m.def("hierarchical_order", &hierarchical_order);

  m.def("density", [](const SpecializationMatrix& s, const ProximityMatrix& p) {
    return density_table(s, p).omega;
  });
  m.def(
      "classify_transitions",
      [](const RcaMatrix& r0, const RcaMatrix& r1, double low, double high) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& e : classify_transitions(r0, r1, low, high).entries)
          out.emplace_back(e.country, e.product, std::string(to_string(e.label)));
        return out;
      },
      py::arg("r0"), py::arg("r1"), py::arg("low") = 0.5, py::arg("high") = 1.0);

  m.def(
      "diffuse",
      [](const SpecializationMatrix& s, const ProximityMatrix& p, const std::string& country, double phi0,
         int iterations, bool inclusive) {
        return diffuse(s, p, {phi0, iterations, 50, inclusive}, country).acquired();
      },
      py::arg("specialization"), py::arg("proximity"), py::arg("country"), py::arg("phi0") = 0.55,
      py::arg("iterations") = 20, py::arg("inclusive") = true,
      "Map of reached product to the round it was acquired in (0 = initial basket).");
  m.def(
      "prody",
      [](const RcaMatrix& r, const std::map<std::string, double>& gdp) {
        std::vector<CountryIncome> inc;
        for (const auto& [c, v] : gdp) inc.push_back({c, v, 0});
        Warnings w;
        std::map<std::string, double> out;
        for (const auto& pi : prody(r, inc, &w)) out[pi.product] = pi.prody;
        return out;
      },
      py::arg("rca"), py::arg("gdp_per_capita"));
  m.def(
      "convergence_sweep",
      [](const SpecializationMatrix& s, const ProximityMatrix& p, const std::map<std::string, double>& prodys,
         std::vector<double> grid, int iterations, int top_n) {
        std::vector<ProductIncome> pi;
        for (const auto& [k, v] : prodys) pi.push_back({k, v});
        auto rep = convergence_sweep(s, p, pi, grid, {0.55, iterations, top_n, true});
        py::dict out;
        out["original_iqr"] = rep.original_iqr;
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["phi0"] = r.phi0;
          d["iqr"] = r.iqr;
          d["ratio"] = r.ratio ? py::object(py::float_(*r.ratio)) : py::object(py::none());
          rows.append(d);
        }
        out["rows"] = rows;
        return out;
      },
      py::arg("specialization"), py::arg("proximity"), py::arg("prody"), py::arg("phi_grid"),
      py::arg("iterations") = 20, py::arg("top_n") = 50);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a pspace command in-process; returns (exit_code, stdout, stderr).");
}
