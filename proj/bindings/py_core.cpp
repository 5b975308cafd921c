// Python bindings for the main operations of the fkghost engine.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fkghost/engine.hpp"
#include "fkghost/estimators.hpp"
#include "fkghost/lattice.hpp"
#include "fkghost/oracle.hpp"
#include "fkghost/topology.hpp"
#include "fkghost/transfer.hpp"

namespace py = pybind11;
using namespace fkghost;

namespace {

LatticeSpec make_spec(int width, int height, double spacing, const std::string& boundary) {
  LatticeSpec spec{width, height, spacing, boundary_from_string(boundary)};
  spec.validate();
  return spec;
}

std::vector<std::vector<double>> matrix_to_lists(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    out[r].resize(m.cols());
    for (int c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FK-Ising lattice engine with a ghost magnetic field";

  m.def("critical_beta", &critical_beta);

  py::class_<Site>(m, "Site")
      .def(py::init<int, int>(), py::arg("col"), py::arg("row"))
      .def_readwrite("col", &Site::col)
      .def_readwrite("row", &Site::row)
      .def("__repr__", [](const Site& s) {
        return "Site(" + std::to_string(s.col) + ", " + std::to_string(s.row) + ")";
      });

  py::class_<LatticeSpec>(m, "LatticeSpec")
      .def(py::init(&make_spec), py::arg("width"), py::arg("height"),
           py::arg("spacing") = 1.0, py::arg("boundary") = "free")
      .def_readonly("width", &LatticeSpec::width)
      .def_readonly("height", &LatticeSpec::height)
      .def_readonly("spacing", &LatticeSpec::spacing)
      .def_property_readonly("boundary",
                             [](const LatticeSpec& s) { return std::string(to_string(s.boundary)); })
      .def("n_sites", &LatticeSpec::n_sites)
      .def("site_index", py::overload_cast<int, int>(&LatticeSpec::site_index, py::const_));

  py::class_<FieldParams>(m, "FieldParams")
      .def(py::init<double, double>(), py::arg("beta"), py::arg("big_h") = 0.0)
      .def_readonly("beta", &FieldParams::beta)
      .def_readonly("big_h", &FieldParams::big_h)
      .def("little_h", &FieldParams::little_h, py::arg("spacing"));

  py::class_<Region>(m, "Region")
      .def_static("box", &Region::box, py::arg("cx"), py::arg("cy"), py::arg("half"))
      .def_static("annulus", &Region::annulus, py::arg("cx"), py::arg("cy"), py::arg("inner"),
                  py::arg("outer"))
      .def_static("rectangle", &Region::rectangle, py::arg("cx"), py::arg("cy"),
                  py::arg("half_w"), py::arg("half_h"))
      .def("contains", &Region::contains);

  py::class_<GhostGraph>(m, "GhostGraph")
      .def_property_readonly("spec", [](const GhostGraph& g) { return g.spec; })
      .def("n_sites", &GhostGraph::n_sites)
      .def("n_internal", &GhostGraph::n_internal)
      .def("n_external", &GhostGraph::n_external)
      .def("internal_edges", [](const GhostGraph& g) {
        std::vector<std::pair<int, int>> out;
        for (const auto& e : g.internal_edges) out.push_back({e.a, e.b});
        return out;
      });

  m.def("build_graph", &build_graph);
  m.def("boundary_sites", &boundary_sites, py::arg("spec"), py::arg("region"), py::arg("side"));

  py::enum_<RegionSide>(m, "RegionSide")
      .value("inner", RegionSide::Inner)
      .value("outer", RegionSide::Outer);

  py::class_<SpinConfig>(m, "SpinConfig")
      .def_property_readonly("spins", [](const SpinConfig& s) {
        return std::vector<int>(s.spin.begin(), s.spin.end());
      });

  py::class_<FkConfig>(m, "FkConfig")
      .def_static("all_closed", &FkConfig::all_closed)
      .def_static("all_open", &FkConfig::all_open)
      .def_property(
          "internal_open",
          [](const FkConfig& fk) { return std::vector<int>(fk.internal_open.begin(), fk.internal_open.end()); },
          [](FkConfig& fk, const std::vector<int>& v) {
            fk.internal_open.assign(v.begin(), v.end());
          })
      .def_property(
          "ghost_open",
          [](const FkConfig& fk) { return std::vector<int>(fk.ghost_open.begin(), fk.ghost_open.end()); },
          [](FkConfig& fk, const std::vector<int>& v) { fk.ghost_open.assign(v.begin(), v.end()); });

  py::class_<ClusterDecomposition>(m, "ClusterDecomposition")
      .def_readonly("label", &ClusterDecomposition::label)
      .def_readonly("ids", &ClusterDecomposition::ids)
      .def_readonly("sizes", &ClusterDecomposition::sizes)
      .def_property_readonly("ghost_connected", [](const ClusterDecomposition& d) {
        return std::vector<int>(d.ghost_connected.begin(), d.ghost_connected.end());
      });

  m.def("find_clusters", &find_clusters);

  // oracle
  py::class_<ExactDistribution>(m, "ExactDistribution")
      .def_readonly("dof_bits", &ExactDistribution::dof_bits)
      .def_readonly("log_partition", &ExactDistribution::log_partition)
      .def("prob", &ExactDistribution::prob)
      .def("probabilities", [](const ExactDistribution& d) {
        std::vector<double> out(d.support_size());
        for (uint64_t c = 0; c < d.support_size(); ++c) out[c] = d.prob(c);
        return out;
      });

  m.def("enumerate_ising", &enumerate_ising);
  m.def("enumerate_fk_ghost", &enumerate_fk_ghost);
  m.def("exact_magnetization", &exact_magnetization);
  m.def("exact_truncated_two_point", &exact_truncated_two_point);
  m.def("verify_es_identity", &verify_es_identity);
  m.def("verify_rn_coupling", &verify_rn_coupling);

  // engine
  py::class_<ChainState>(m, "ChainState")
      .def_readonly("spins", &ChainState::spins)
      .def_readonly("bonds", &ChainState::bonds)
      .def_readonly("sweep_count", &ChainState::sweep_count);

  m.def("init_chain", &init_chain);
  m.def("sw_step", &sw_step);
  m.def("wolff_step", &wolff_step);
  m.def("rn_log_weight", &rn_log_weight);

  py::class_<SampleSchedule>(m, "SampleSchedule")
      .def(py::init([](int64_t sweeps, int64_t burn_in, int64_t thin, uint64_t seed,
                       const std::string& sampler) {
             SampleSchedule s;
             s.sweeps = sweeps;
             s.burn_in = burn_in;
             s.thin = thin;
             s.seed = seed;
             s.sampler = sampler == "wolff" ? Sampler::Wolff : Sampler::SwendsenWang;
             s.validate();
             return s;
           }),
           py::arg("sweeps"), py::arg("burn_in") = 0, py::arg("thin") = 1, py::arg("seed") = 1,
           py::arg("sampler") = "sw");

  m.def("sample_chain", [](const GhostGraph& g, const FieldParams& params,
                           const SampleSchedule& schedule, const std::vector<std::string>& names) {
    std::vector<Observable> obs;
    for (const auto& n : names) obs.push_back(make_observable(n, g.spec));
    auto series = sample_chain(g, params, schedule, obs);
    py::dict out;
    out["sweep"] = series.sweep;
    for (size_t i = 0; i < series.names.size(); ++i)
      out[py::str(series.names[i])] = series.values[i];
    return out;
  });

  // topology
  py::class_<EventReport>(m, "EventReport")
      .def_readonly("occurred", &EventReport::occurred)
      .def_property_readonly("witness_sites", [](const EventReport& r) {
        std::vector<std::pair<int, int>> out;
        for (const auto& s : r.sites) out.push_back({s.col, s.row});
        return out;
      })
      .def_readonly("cluster_cycle", &EventReport::cluster_cycle);

  m.def("connected", &connected);
  m.def("connected_to_ghost", &connected_to_ghost);
  m.def("detect_event_F", &detect_event_F);
  m.def("detect_event_G", &detect_event_G);
  m.def("detect_necklace", &detect_necklace, py::arg("graph"), py::arg("fk"), py::arg("annulus"),
        py::arg("k_max"), py::arg("min_mass"));
  m.def("block_good", &block_good);
  m.def("block_field_scan", [](const GhostGraph& g, const FkConfig& fk, int scale) {
    auto field = block_field_scan(g, fk, scale);
    py::dict out;
    out["anchor_cols"] = field.anchor_cols;
    out["anchor_rows"] = field.anchor_rows;
    out["good"] = std::vector<int>(field.good.begin(), field.good.end());
    out["density"] = field.density();
    return out;
  });

  // estimators
  py::class_<EstimatorResult>(m, "EstimatorResult")
      .def_readonly("mean", &EstimatorResult::mean)
      .def_readonly("std_error", &EstimatorResult::std_error)
      .def_readonly("tau", &EstimatorResult::tau)
      .def_readonly("count", &EstimatorResult::count);

  m.def("autocorrelation", [](const std::vector<double>& series) {
    auto t = autocorrelation(series);
    return py::make_tuple(t.tau, t.anti_correlated, t.constant);
  });

  py::class_<CorrelationProfile>(m, "CorrelationProfile")
      .def_readonly("r", &CorrelationProfile::r)
      .def_readonly("value", &CorrelationProfile::value)
      .def_readonly("error", &CorrelationProfile::error);

  py::class_<MassFit>(m, "MassFit")
      .def_readonly("mass", &MassFit::mass)
      .def_readonly("mass_std_error", &MassFit::mass_std_error)
      .def_readonly("log_prefactor", &MassFit::log_prefactor)
      .def_readonly("residual_rms", &MassFit::residual_rms);

  m.def("fit_mass",
        [](const std::vector<double>& r, const std::vector<double>& value,
           const std::vector<double>& error, double r_min, double r_max, double power) {
          CorrelationProfile profile;
          profile.r = r;
          profile.value = value;
          profile.error = error;
          return fit_mass(profile, FitWindow{r_min, r_max}, power);
        },
        py::arg("r"), py::arg("value"), py::arg("error"), py::arg("r_min"), py::arg("r_max"),
        py::arg("prefactor_power") = 0.25);

  m.def("exponent_fit", [](const std::vector<std::tuple<double, double, double>>& pts) {
    std::vector<ExponentPoint> points;
    for (auto [x, y, e] : pts) points.push_back({x, y, e});
    auto fit = exponent_fit(points);
    return py::make_tuple(fit.slope, fit.intercept, fit.slope_std_error);
  });

  // transfer matrix
  py::class_<StripSpec>(m, "StripSpec")
      .def(py::init([](int width, double beta, double big_h, const std::string& vertical) {
             return StripSpec(width, beta, big_h,
                              vertical == "periodic" ? VerticalBoundary::Periodic
                                                     : VerticalBoundary::Free);
           }),
           py::arg("width"), py::arg("beta"), py::arg("big_h") = 0.0,
           py::arg("vertical") = "free");

  m.def("build_symmetric_transfer",
        [](const StripSpec& spec) { return matrix_to_lists(build_symmetric_transfer(spec)); });
  m.def("mass_gap", &mass_gap);
  m.def("tm_mass_scan", [](int width, double beta, const std::vector<double>& h_grid) {
    std::vector<std::tuple<double, double>> out;
    for (const auto& row : tm_mass_scan(width, beta, h_grid))
      out.push_back({row.big_h, row.gap});
    return out;
  });
  m.def("column_covariance_decay",
        [](const StripSpec& spec, const std::vector<double>& f, const std::vector<double>& g,
           const std::vector<int>& k_list) {
          Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
          Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
          return column_covariance_decay(spec, fv, gv, k_list);
        });
  m.def("column_magnetization", [](int width) {
    auto v = column_magnetization(width);
    return std::vector<double>(v.data(), v.data() + v.size());
  });
}
