#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nullforge/certificate.hpp"
#include "nullforge/deep_ritz.hpp"
#include "nullforge/experiments.hpp"
#include "nullforge/jet.hpp"
#include "nullforge/measurement.hpp"
#include "nullforge/network_json.hpp"
#include "nullforge/null_forge.hpp"
#include "nullforge/regularization.hpp"
#include "nullforge/wpinn.hpp"

namespace py = pybind11;
using namespace nullforge;

namespace {

NullFamily family_from_name(const std::string& name) {
  if (name == "relu") return NullFamily::relu();
  return NullFamily::smooth(Activation::from_name(name));
}

DeepRitzConfig dr_config(double T, double u0, double uT, double alpha_b,
                         const std::vector<double>& interior, bool hard) {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(T, u0, uT, alpha_b, interior);
  if (hard) cfg.enforcement = Enforcement::HardAtPoints;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_nullforge, m) {
  m.doc() = "degeneracy certificates for neural variational discretizations";

  py::class_<MlpNetwork>(m, "MlpNetwork")
      .def_static("from_json", [](const std::string& s) { return network_from_string(s); })
      .def("to_json", [](const MlpNetwork& n) { return network_to_string(n); })
      .def("forward",
           [](const MlpNetwork& n, const std::vector<double>& x) { return n.forward(x); })
      .def("jet",
           [](const MlpNetwork& n, const std::vector<double>& x, int order) {
             const auto jet = jet_forward(n, x, order);
             py::dict out;
             for (int i = 0; i < jet.table->size(); ++i) {
               py::tuple key(jet.table->dim());
               for (int a = 0; a < jet.table->dim(); ++a) key[a] = jet.table->at(i)[a];
               out[key] = jet.entries[i];
             }
             return out;
           })
      .def("is_smooth_at",
           [](const MlpNetwork& n, const std::vector<double>& x, double tol) {
             return n.is_smooth_at(x, tol);
           },
           py::arg("x"), py::arg("kink_tol") = 1e-9)
      .def_property_readonly("layer_dims", &MlpNetwork::layer_dims)
      .def_property_readonly("depth", &MlpNetwork::depth)
      .def_property_readonly("parameter_count", &MlpNetwork::parameter_count)
      .def_property_readonly("activation",
                             [](const MlpNetwork& n) { return n.activation().name(); });

  m.def("linear_combine", &linear_combine, py::arg("nets"), py::arg("coeffs"));
  m.def("extend_depth_identity", &extend_depth_identity, py::arg("net"), py::arg("target_depth"),
        py::arg("identity_shift") = 0.0);

  m.def("affine_minimizer_1d", [](double T, double u0, double uT, double alpha_b) {
    const AffineMinimizer am = affine_minimizer_1d(T, u0, uT, alpha_b);
    return py::make_tuple(am.slope, am.intercept);
  });
  m.def("one_neuron_zero_loss", &one_neuron_zero_loss, py::arg("b"), py::arg("T"), py::arg("u0"),
        py::arg("uT"), py::arg("z_max"));

  m.def(
      "dr_loss",
      [](const MlpNetwork& net, double T, double u0, double uT, double alpha_b,
         const std::vector<double>& interior, bool hard) {
        return dr_loss(net, LocalIntegrand::dirichlet_energy(),
                       dr_config(T, u0, uT, alpha_b, interior, hard));
      },
      py::arg("net"), py::arg("T"), py::arg("u0"), py::arg("uT"), py::arg("alpha_b"),
      py::arg("interior"), py::arg("hard") = false,
      "discrete Dirichlet-energy loss of the two-point example");

  m.def(
      "relu_plateau_interpolant",
      [](const std::vector<std::vector<double>>& nodes, const std::vector<double>& data,
         int depth) { return relu_plateau_interpolant(nodes, data, depth); },
      py::arg("nodes"), py::arg("data"), py::arg("depth") = 2);

  m.def(
      "smooth_hermite_interpolant",
      [](const std::vector<std::vector<double>>& nodes, const std::vector<double>& data, int m,
         const std::string& activation, int depth, std::uint64_t seed) {
        return smooth_hermite_interpolant(nodes, data, m, Activation::from_name(activation),
                                          depth, seed);
      },
      py::arg("nodes"), py::arg("data"), py::arg("m"), py::arg("activation") = "tanh",
      py::arg("depth") = 2, py::arg("seed") = 1);

  m.def(
      "null_direction_deep_ritz",
      [](const std::vector<double>& interior, const std::vector<double>& boundary, double z0,
         const std::string& family, int depth, std::uint64_t seed) {
        std::vector<Point> ipts, bpts;
        for (double z : interior) ipts.push_back({z});
        for (double z : boundary) bpts.push_back({z});
        const MeasurementSpec spec = MeasurementSpec::deep_ritz(ipts, bpts);
        return null_direction(spec, {z0}, family_from_name(family), depth, seed);
      },
      py::arg("interior"), py::arg("boundary"), py::arg("z0"), py::arg("family") = "relu",
      py::arg("depth") = 2, py::arg("seed") = 1,
      "forge a normalized null direction for the Deep Ritz measurements");

  m.def(
      "deep_ritz_invariance_sweep",
      [](const MlpNetwork& base, const MlpNetwork& phi, double z0, double T, double u0,
         double uT, double alpha_b, const std::vector<double>& interior,
         const std::vector<double>& lambdas) {
        const auto loss =
            make_dr_loss(LocalIntegrand::dirichlet_energy(),
                         dr_config(T, u0, uT, alpha_b, interior, false));
        const double tol = base.activation().kind() == ActivationKind::ReLU ? 1e-12 : 1e-8;
        const auto cert = loss_invariance_sweep(loss, base, phi, {z0}, lambdas, tol);
        return certificate_to_json(cert).dump();
      },
      py::arg("base"), py::arg("phi"), py::arg("z0"), py::arg("T"), py::arg("u0"), py::arg("uT"),
      py::arg("alpha_b"), py::arg("interior"), py::arg("lambdas"));

  m.def(
      "lp_distance",
      [](const MlpNetwork& u, const MlpNetwork& v, double p, const std::vector<double>& lo,
         const std::vector<double>& hi, int resolution) {
        return lp_distance(u, v, p, Box{lo, hi}, resolution);
      },
      py::arg("u"), py::arg("v"), py::arg("p"), py::arg("lo"), py::arg("hi"),
      py::arg("resolution") = 4096);

  m.def(
      "reg_pointwise_loss",
      [](const MlpNetwork& net, const std::string& kind, double a, double b, int n,
         const std::vector<double>& data, double alpha1, double alpha2) {
        const GridSpec grid = GridSpec::line(a, b, n);
        RegularizerSpec reg = RegularizerSpec::tv(1);
        if (kind == "tikhonov") reg = RegularizerSpec::tikhonov(2);
        else if (kind == "tv") reg = RegularizerSpec::tv(1);
        else if (kind == "hessian") reg = RegularizerSpec::hessian();
        else if (kind == "nonconvex_p") reg = RegularizerSpec::nonconvex_p(0.5);
        else throw std::invalid_argument("unsupported kind: " + kind);
        FidelityConfig fid;
        fid.alpha1 = alpha1;
        fid.alpha2 = alpha2;
        fid.data = data;
        return reg_pointwise_loss(net, reg, fid, grid);
      },
      py::arg("net"), py::arg("kind"), py::arg("a"), py::arg("b"), py::arg("n"), py::arg("data"),
      py::arg("alpha1") = 1.0, py::arg("alpha2") = 1.0,
      "quadrature regularization loss with pointwise derivatives on a 1D grid");

  m.def(
      "zero_loss_interpolant",
      [](double a, double b, int n, const std::vector<double>& data, int m_order,
         const std::string& family, int depth, std::uint64_t seed) {
        return zero_loss_interpolant(GridSpec::line(a, b, n), data, m_order,
                                     family_from_name(family), depth, seed);
      },
      py::arg("a"), py::arg("b"), py::arg("n"), py::arg("data"), py::arg("m") = 1,
      py::arg("family") = "relu", py::arg("depth") = 2, py::arg("seed") = 1);

  m.def(
      "wpinn_kernel",
      [](double T, int n, int width, int q, std::uint64_t seed) {
        const TestSpace space = TestSpace::uniform(T, n, q);
        const auto nets = draw_trial_nets(n + 1, width, seed);
        const KernelResult ker = homogeneous_kernel(nets, space, seed + 1);
        return py::make_tuple(ker.phi, ker.residual, ker.smax);
      },
      py::arg("T") = 1.0, py::arg("n") = 4, py::arg("width") = 8, py::arg("q") = 8,
      py::arg("seed") = 1,
      "null combination of n+1 trial networks against n test functions");

  m.def("list_experiments", []() {
    py::list out;
    for (const auto& e : experiment_registry())
      out.append(py::make_tuple(e.name, e.anchor, e.expected_runtime_s));
    return out;
  });
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config_json, const std::string& out_dir) {
        return run_experiment(name, nlohmann::json::parse(config_json), out_dir);
      },
      py::arg("name"), py::arg("config_json"), py::arg("out_dir"));
  m.def("default_config",
        [](const std::string& name) { return default_config(name).dump(); });
}
