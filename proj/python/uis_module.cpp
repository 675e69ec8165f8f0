#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uis/errors.hpp"
#include "uis/measurement.hpp"
#include "uis/metrics.hpp"
#include "uis/priors.hpp"
#include "uis/run.hpp"
#include "uis/sampler.hpp"
#include "uis/schedules.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Wraps a Python callable f(y, sigma_hint) -> x_hat.
class CallableDenoiser final : public uis::Denoiser {
 public:
  explicit CallableDenoiser(py::function fn) : fn_(std::move(fn)) {}

  uis::SignalVector denoise(const uis::SignalVector& y, std::optional<uis::NoiseLevel> hint) override {
    py::object sigma = hint ? py::cast(hint->value()) : py::none();
    py::object out = fn_(y.data(), sigma);
    return y.with_data(out.cast<Eigen::VectorXd>());
  }

 private:
  py::function fn_;
};

using ShapeArg = std::variant<std::size_t, std::vector<std::size_t>>;
using DenoiserArg = std::variant<std::shared_ptr<uis::AnalyticPrior>, py::function>;

std::optional<uis::ImageShape> to_shape(const ShapeArg& arg) {
  if (std::holds_alternative<std::size_t>(arg)) return std::nullopt;
  const auto& v = std::get<std::vector<std::size_t>>(arg);
  if (v.size() < 2 || v.size() > 3) throw uis::ArgumentError("shape must be (height, width) or (height, width, channels)");
  return uis::ImageShape{v[0], v[1], v.size() == 3 ? v[2] : 1};
}

std::unique_ptr<uis::Denoiser> to_denoiser(const DenoiserArg& arg, std::optional<double> fixed_sigma) {
  if (auto* prior = std::get_if<std::shared_ptr<uis::AnalyticPrior>>(&arg)) {
    std::optional<uis::NoiseLevel> fixed;
    if (fixed_sigma) fixed = uis::NoiseLevel(*fixed_sigma);
    return std::make_unique<uis::OracleDenoiser>(*prior, fixed);
  }
  return std::make_unique<CallableDenoiser>(std::get<py::function>(arg));
}

uis::SamplerParams make_params(double sigma0, double sigmaL, double h0, double beta, std::size_t max_iters,
                               std::uint64_t seed, double init_mean) {
  uis::SamplerParams p;
  p.sigma0 = uis::NoiseLevel(sigma0);
  p.sigmaL = uis::NoiseLevel(sigmaL);
  p.h0 = h0;
  p.beta = beta;
  p.max_iters = max_iters;
  p.seed = seed;
  p.init_mean = init_mean;
  return p;
}

py::dict result_dict(const uis::SampleResult& r) {
  std::vector<double> h, observed, expected, gamma, rms;
  for (const auto& rec : r.trace.records) {
    h.push_back(rec.h);
    observed.push_back(rec.sigma_observed);
    expected.push_back(rec.sigma_expected);
    gamma.push_back(rec.gamma);
    if (rec.constraint_rms) rms.push_back(*rec.constraint_rms);
  }
  py::dict trace;
  trace["h"] = h;
  trace["sigma_observed"] = observed;
  trace["sigma_expected"] = expected;
  trace["gamma"] = gamma;
  if (!rms.empty()) trace["constraint_rms"] = rms;
  py::dict out;
  out["sample"] = r.sample.data();
  out["converged"] = r.converged;
  out["iterations"] = r.iterations();
  out["sigma_initial"] = r.trace.sigma_initial;
  out["trace"] = trace;
  out["trace_csv"] = uis::trace_csv(r.trace);
  return out;
}

uis::SignalVector signal(const Eigen::VectorXd& data, const std::optional<std::vector<std::size_t>>& shape) {
  if (!shape) return uis::SignalVector(data);
  return uis::SignalVector(data, to_shape(*shape));
}

}  // namespace

PYBIND11_MODULE(_uis, m) {
  m.doc() = "Universal inverse sampler: coarse-to-fine ascent on a denoiser's implicit prior";

  static py::exception<uis::Error> base(m, "UisError", PyExc_RuntimeError);
  py::register_exception<uis::ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<uis::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<uis::InfeasibleConstraint>(m, "InfeasibleConstraint", base.ptr());
  py::register_exception<uis::NumericError>(m, "NumericError", base.ptr());
  py::register_exception<uis::ContractViolation>(m, "ContractViolation", base.ptr());
  py::register_exception<uis::SamplerAborted>(m, "SamplerAborted", base.ptr());

  m.def("step_size", &uis::step_size, py::arg("h0"), py::arg("t"));
  m.def(
      "injected_noise_amplitude",
      [](double beta, double h, double sigma) { return uis::injected_noise_amplitude(beta, h, uis::NoiseLevel(sigma)); },
      py::arg("beta"), py::arg("h"), py::arg("sigma"));
  m.def(
      "expected_sigma_next",
      [](double beta, double h, double sigma) { return uis::expected_sigma_next(beta, h, uis::NoiseLevel(sigma)).value(); },
      py::arg("beta"), py::arg("h"), py::arg("sigma"));
  m.def(
      "effective_sigma", [](const Eigen::VectorXd& d) { return uis::effective_sigma(d).value(); }, py::arg("residual"));

  py::class_<uis::LinearMeasurement>(m, "Measurement")
      .def_property_readonly("signal_dim", &uis::LinearMeasurement::signal_dim)
      .def_property_readonly("rank", &uis::LinearMeasurement::rank)
      .def("measure", py::overload_cast<const Eigen::Ref<const Eigen::VectorXd>&>(&uis::LinearMeasurement::measure, py::const_))
      .def("embed", &uis::LinearMeasurement::embed)
      .def("project", py::overload_cast<const Eigen::Ref<const Eigen::VectorXd>&>(&uis::LinearMeasurement::project, py::const_))
      .def("dense", &uis::LinearMeasurement::dense)
      .def_property_readonly("descriptor_json", [](const uis::LinearMeasurement& mm) { return mm.descriptor().dump(); });

  m.def(
      "measurement_from_json",
      [](const std::string& text, std::optional<std::vector<std::size_t>> shape) {
        std::optional<uis::ImageShape> s;
        if (shape) s = to_shape(*shape);
        auto [meas, xc] = uis::measurement_from_json(json::parse(text), s);
        return py::make_tuple(meas, xc ? py::cast(*xc) : py::none());
      },
      py::arg("descriptor"), py::arg("shape") = py::none());

  py::class_<uis::AnalyticPrior, std::shared_ptr<uis::AnalyticPrior>>(m, "Prior")
      .def_property_readonly("dim", &uis::AnalyticPrior::dim)
      .def("noisy_log_density",
           [](const uis::AnalyticPrior& p, const Eigen::VectorXd& y, double s) { return p.noisy_log_density(y, uis::NoiseLevel(s)); })
      .def("score", [](const uis::AnalyticPrior& p, const Eigen::VectorXd& y, double s) { return p.score(y, uis::NoiseLevel(s)); })
      .def("mmse_denoise",
           [](const uis::AnalyticPrior& p, const Eigen::VectorXd& y, double s) { return p.mmse_denoise(y, uis::NoiseLevel(s)); })
      .def("mean", &uis::AnalyticPrior::mean)
      .def("to_json", [](const uis::AnalyticPrior& p) { return p.to_json().dump(); });

  m.def(
      "prior_from_json",
      [](const std::string& text) { return std::const_pointer_cast<uis::AnalyticPrior>(uis::prior_from_json(json::parse(text))); },
      py::arg("descriptor"));

  m.def(
      "sample_prior",
      [](const DenoiserArg& denoiser, const ShapeArg& shape, double sigma0, double sigmaL, double h0, double beta,
         std::size_t max_iters, std::uint64_t seed, double init_mean, std::optional<double> denoiser_sigma) {
        auto d = to_denoiser(denoiser, denoiser_sigma);
        const auto params = make_params(sigma0, sigmaL, h0, beta, max_iters, seed, init_mean);
        uis::RngStream rng(seed);
        if (auto s = to_shape(shape)) return result_dict(uis::sample_prior(*d, *s, params, rng));
        return result_dict(uis::sample_prior(*d, std::get<std::size_t>(shape), params, rng));
      },
      py::arg("denoiser"), py::arg("shape"), py::kw_only(), py::arg("sigma0") = 1.0, py::arg("sigmaL") = 0.01,
      py::arg("h0") = 0.01, py::arg("beta") = 0.01, py::arg("max_iters") = 10000, py::arg("seed") = 0,
      py::arg("init_mean") = 0.5, py::arg("denoiser_sigma") = py::none());

  m.def(
      "sample_conditional",
      [](const DenoiserArg& denoiser, const uis::LinearMeasurement& measurement, const Eigen::VectorXd& xc,
         double sigma0, double sigmaL, double h0, double beta, std::size_t max_iters, std::uint64_t seed,
         double init_mean, std::optional<double> denoiser_sigma) {
        auto d = to_denoiser(denoiser, denoiser_sigma);
        const auto params = make_params(sigma0, sigmaL, h0, beta, max_iters, seed, init_mean);
        uis::RngStream rng(seed);
        return result_dict(uis::sample_conditional(*d, measurement, xc, params, rng));
      },
      py::arg("denoiser"), py::arg("measurement"), py::arg("xc"), py::kw_only(), py::arg("sigma0") = 1.0,
      py::arg("sigmaL") = 0.01, py::arg("h0") = 0.01, py::arg("beta") = 0.01, py::arg("max_iters") = 10000,
      py::arg("seed") = 0, py::arg("init_mean") = 0.5, py::arg("denoiser_sigma") = py::none());

  m.def(
      "psnr",
      [](const Eigen::VectorXd& x, const Eigen::VectorXd& xhat, std::optional<std::vector<std::size_t>> shape,
         double peak) { return uis::psnr(signal(x, shape), signal(xhat, shape), peak); },
      py::arg("x"), py::arg("xhat"), py::arg("shape") = py::none(), py::arg("peak") = 1.0);
  m.def(
      "ssim",
      [](const Eigen::VectorXd& x, const Eigen::VectorXd& xhat, std::vector<std::size_t> shape, std::size_t window,
         double peak) { return uis::ssim(signal(x, shape), signal(xhat, shape), window, 0.01, 0.03, peak); },
      py::arg("x"), py::arg("xhat"), py::arg("shape"), py::arg("window") = 8, py::arg("peak") = 1.0);

  m.def(
      "run",
      [](const std::string& config_json) {
        const uis::RunOutcome outcome = uis::run(uis::RunConfig::from_json(json::parse(config_json)));
        return py::make_tuple(outcome.exit_code, outcome.metrics.dump());
      },
      py::arg("config"));
}
