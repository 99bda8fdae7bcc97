#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>

#include "spsc/analytic_models.hpp"
#include "spsc/correlator.hpp"
#include "spsc/coupling.hpp"
#include "spsc/errors.hpp"
#include "spsc/fit_recipes.hpp"
#include "spsc/hom_models.hpp"
#include "spsc/io.hpp"
#include "spsc/montecarlo.hpp"

namespace py = pybind11;
using namespace spsc;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using TimeArray = py::array_t<TimePs, py::array::c_style | py::array::forcecast>;

template <typename F>
py::array_t<double> vectorize(const DoubleArray& xs, F f) {
  py::array_t<double> out(xs.request().shape);
  const double* in = xs.data();
  double* o = out.mutable_data();
  for (py::ssize_t i = 0; i < xs.size(); ++i) o[i] = f(in[i]);
  return out;
}

py::array_t<TimePs> to_array(const std::vector<TimePs>& v) { return py::array_t<TimePs>(v.size(), v.data()); }

TagStream stream_from(const TimeArray& times, TimePs duration_ps) {
  const std::span<const TimePs> t(times.data(), static_cast<std::size_t>(times.size()));
  return TagStream::from_times(t, 0, duration_ps);
}

py::tuple split_pair(const std::pair<TagStream, TagStream>& ab) {
  return py::make_tuple(to_array(ab.first.times()), to_array(ab.second.times()), ab.first.duration_ps());
}

std::vector<DataPoint> points(const DoubleArray& x, const DoubleArray& y, const std::optional<DoubleArray>& sigma) {
  if (x.size() != y.size() || (sigma && sigma->size() != x.size())) {
    throw std::invalid_argument("x, y and sigma must have the same length");
  }
  std::vector<DataPoint> pts(static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {x.data()[i], y.data()[i], sigma ? sigma->data()[i] : 0.0};
  }
  return pts;
}

FieldMap field_from(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a,
                    double dx_um, double dy_um) {
  if (a.ndim() != 2) throw std::invalid_argument("field must be a 2D array indexed [y, x]");
  FieldMap f;
  f.ny = static_cast<std::size_t>(a.shape(0));
  f.nx = static_cast<std::size_t>(a.shape(1));
  f.dx_um = dx_um;
  f.dy_um = dy_um;
  f.amplitude.assign(a.data(), a.data() + a.size());
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Single-photon source characterisation core";
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);

  // analytic models
  m.def("g2_two_level", [](const DoubleArray& tau_ns, double g2_zero, double gamma1) {
    const G2TwoLevelParams p{g2_zero, gamma1};
    p.validate();
    return vectorize(tau_ns, [&](double t) { return eval_g2_two_level(t, p); });
  }, py::arg("tau_ns"), py::arg("g2_zero"), py::arg("gamma1"));
  m.def("saturation", [](const DoubleArray& power_uw, double i0, double i_sat, double p_sat) {
    const SaturationParams p{i0, i_sat, p_sat};
    p.validate();
    return vectorize(power_uw, [&](double x) { return eval_saturation(x, p); });
  }, py::arg("power_uw"), py::arg("i0"), py::arg("i_sat"), py::arg("p_sat"));
  m.def("lorentzian", [](const DoubleArray& wavelength_nm, double center, double fwhm, double amplitude, double offset) {
    const LorentzianParams p{center, fwhm, amplitude, offset};
    p.validate();
    return vectorize(wavelength_nm, [&](double x) { return eval_lorentzian(x, p); });
  }, py::arg("wavelength_nm"), py::arg("center"), py::arg("fwhm"), py::arg("amplitude"), py::arg("offset") = 0.0);
  m.def("corrected_rate", &corrected_rate, py::arg("rate_cps"), py::arg("g2_zero"));

  // HOM
  py::class_<SplitterPair>(m, "SplitterPair")
      .def(py::init(&SplitterPair::from_transmissions), py::arg("t1") = 0.5, py::arg("t2") = 0.5)
      .def_readonly("r1", &SplitterPair::r1)
      .def_readonly("t1", &SplitterPair::t1)
      .def_readonly("r2", &SplitterPair::r2)
      .def_readonly("t2", &SplitterPair::t2);
  py::class_<HOMParams>(m, "HOMParams")
      .def(py::init([](const SplitterPair& s, double dtau2_ns, double visibility, double tau_c_ps, double g2_zero,
                       double gamma1) {
             HOMParams p;
             p.splitters = s;
             p.dtau2_ns = dtau2_ns;
             p.visibility = visibility;
             p.tau_c_ps = tau_c_ps;
             p.base = {g2_zero, gamma1};
             p.validate();
             return p;
           }),
           py::arg("splitters") = SplitterPair::from_transmissions(0.5, 0.5), py::arg("dtau2_ns") = 4.36,
           py::arg("visibility") = 1.0, py::arg("tau_c_ps") = 450.0, py::arg("g2_zero") = 0.0,
           py::arg("gamma1") = 0.5348)
      .def_readwrite("visibility", &HOMParams::visibility)
      .def_readwrite("tau_c_ps", &HOMParams::tau_c_ps)
      .def_readwrite("dtau2_ns", &HOMParams::dtau2_ns)
      .def_readonly("splitters", &HOMParams::splitters);
  m.def("g2_co", [](const DoubleArray& tau_ns, const HOMParams& p) {
    return vectorize(tau_ns, [&](double t) { return eval_g2_co(t, p); });
  }, py::arg("tau_ns"), py::arg("params"));
  m.def("g2_cross", [](const DoubleArray& tau_ns, const HOMParams& p) {
    return vectorize(tau_ns, [&](double t) { return eval_g2_cross(t, p); });
  }, py::arg("tau_ns"), py::arg("params"));
  m.def("visibility_raw", &visibility_raw, py::arg("g_co_zero"), py::arg("g_cross_zero"));
  m.def("visibility_corrected", &visibility_corrected, py::arg("v_hom"), py::arg("g2_zero"));
  m.def("lifetime_limit_factor", &lifetime_limit_factor, py::arg("tau_rad_ns"), py::arg("tau_c_ps"));

  // Monte Carlo
  py::class_<EmitterConfig>(m, "EmitterConfig")
      .def(py::init([](double tau_rad_ns, double pump_rate_per_ns, double background_cps, double duration_s,
                       std::optional<double> rep_rate_mhz, double pulse_width_ps, double excitation_prob) {
             EmitterConfig c;
             c.tau_rad_ns = tau_rad_ns;
             c.pump_rate_per_ns = pump_rate_per_ns;
             c.background_rate_cps = background_cps;
             c.duration_s = duration_s;
             if (rep_rate_mhz) c.excitation = PulsedExcitation{*rep_rate_mhz, pulse_width_ps, excitation_prob};
             c.validate();
             return c;
           }),
           py::arg("tau_rad_ns") = 1.87, py::arg("pump_rate_per_ns") = 0.0, py::arg("background_cps") = 0.0,
           py::arg("duration_s") = 1e-3, py::arg("rep_rate_mhz") = py::none(), py::arg("pulse_width_ps") = 300.0,
           py::arg("excitation_prob") = 1.0)
      .def_property_readonly("pulsed", &EmitterConfig::pulsed)
      .def_property_readonly("duration_ps", &EmitterConfig::duration_ps);
  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init([](double efficiency, double jitter_sigma_ps, double dead_time_ns, double dark_rate_cps) {
             DetectorConfig d{efficiency, jitter_sigma_ps, dead_time_ns, dark_rate_cps};
             d.validate();
             return d;
           }),
           py::arg("efficiency") = 1.0, py::arg("jitter_sigma_ps") = 0.0, py::arg("dead_time_ns") = 0.0,
           py::arg("dark_rate_cps") = 0.0);
  m.def("pump_rate_for_power", [](double power_uw, double tau_rad_ns, double alpha) {
    return pump_rate_for_power(power_uw, {tau_rad_ns, alpha});
  }, py::arg("power_uw"), py::arg("tau_rad_ns"), py::arg("alpha"));
  m.def("cw_emission_rate_cps", &cw_emission_rate_cps, py::arg("config"));
  m.def("simulate_emission", [](const EmitterConfig& c, std::uint64_t seed, unsigned threads) {
    const auto s = simulate_emission(c, seed, threads);
    return py::make_tuple(to_array(s.times()), s.duration_ps());
  }, py::arg("config"), py::arg("seed") = 1554, py::arg("threads") = 1,
        "Photon emission times (ps) and the stream duration (ps).");
  m.def("simulate_hbt", [](const EmitterConfig& c, double transmission, const DetectorConfig& da,
                           const DetectorConfig& db, std::uint64_t seed, unsigned threads) {
    const auto s = simulate_emission(c, seed, threads);
    return split_pair(route_hbt(s, {1.0 - transmission, transmission}, da, db, seed, threads));
  }, py::arg("config"), py::arg("transmission") = 0.5, py::arg("detector_a") = DetectorConfig{},
        py::arg("detector_b") = DetectorConfig{}, py::arg("seed") = 1554, py::arg("threads") = 1,
        "Detection times (ps) at both HBT outputs and the duration (ps).");
  m.def("simulate_hom", [](const EmitterConfig& c, const HOMParams& p, const DetectorConfig& da,
                           const DetectorConfig& db, std::uint64_t seed, unsigned threads) {
    const auto s = simulate_emission(c, seed, threads);
    return split_pair(route_hom(s, p, da, db, seed, threads));
  }, py::arg("config"), py::arg("params"), py::arg("detector_a") = DetectorConfig{},
        py::arg("detector_b") = DetectorConfig{}, py::arg("seed") = 1554, py::arg("threads") = 1,
        "Detection times (ps) at both interferometer outputs and the duration (ps).");

  // correlator
  py::class_<Histogram>(m, "Histogram")
      .def_readonly("bin_width_ps", &Histogram::bin_width_ps)
      .def_readonly("tau_max_ps", &Histogram::tau_max_ps)
      .def_readonly("total_pairs", &Histogram::total_pairs)
      .def_readonly("norm", &Histogram::norm)
      .def_property_readonly("counts", [](const Histogram& h) {
        return py::array_t<std::uint64_t>(h.counts.size(), h.counts.data());
      })
      .def_property_readonly("delays_ns", [](const Histogram& h) {
        const auto c = h.bin_centers_ns();
        return py::array_t<double>(c.size(), c.data());
      })
      .def_property_readonly("g2", [](const Histogram& h) {
        const auto g = h.g2_values();
        return py::array_t<double>(g.size(), g.data());
      })
      .def("__len__", &Histogram::bins)
      .def("save", [](const Histogram& h, const std::string& path) { io::write_histogram(path, h); })
      .def_static("load", [](const std::string& path) { return io::read_histogram(path); });
  m.def("correlate", [](const TimeArray& a, const TimeArray& b, TimePs duration_ps, TimePs bin_ps, TimePs tau_max_ps,
                        unsigned threads) {
    const auto sa = stream_from(a, duration_ps);
    const auto sb = stream_from(b, duration_ps);
    return normalize_g2(cross_correlate(sa, sb, bin_ps, tau_max_ps, threads), sa, sb);
  }, py::arg("times_a"), py::arg("times_b"), py::arg("duration_ps"), py::arg("bin_ps") = 100,
        py::arg("tau_max_ps") = 50'000, py::arg("threads") = 1,
        "Normalized g2 histogram of t_b - t_a; inputs must be sorted.");
  m.def("autocorrelate", [](const TimeArray& a, TimePs duration_ps, TimePs bin_ps, TimePs tau_max_ps,
                            unsigned threads) {
    const auto s = stream_from(a, duration_ps);
    return normalize_g2(auto_correlate(s, bin_ps, tau_max_ps, threads), s, s);
  }, py::arg("times"), py::arg("duration_ps"), py::arg("bin_ps") = 100, py::arg("tau_max_ps") = 50'000,
        py::arg("threads") = 1);
  m.def("pulsed_g2_zero", [](const Histogram& h, double rep_period_ns, double window_ns, int side_peaks) {
    const auto r = pulsed_g2_zero(h, rep_period_ns, window_ns, side_peaks);
    return py::dict(py::arg("g2_zero") = r.g2_zero, py::arg("uncertainty") = r.uncertainty,
                    py::arg("central_area") = r.central_area, py::arg("side_mean") = r.side_mean);
  }, py::arg("histogram"), py::arg("rep_period_ns"), py::arg("window_ns"), py::arg("side_peaks") = 4);

  // fits
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("names", &FitResult::names)
      .def_readonly("params", &FitResult::params)
      .def_readonly("sigma", &FitResult::sigma)
      .def_readonly("covariance", &FitResult::covariance)
      .def_readonly("chi2", &FitResult::chi2)
      .def_readonly("chi2_reduced", &FitResult::chi2_reduced)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("objective_history", &FitResult::objective_history)
      .def("value", &FitResult::value)
      .def("error", &FitResult::error)
      .def("as_dict", [](const FitResult& r) {
        py::dict d;
        for (std::size_t j = 0; j < r.names.size(); ++j) d[py::str(r.names[j])] = py::make_tuple(r.params[j], r.sigma[j]);
        return d;
      });
  m.def("fit_g2_cw", &fit_g2_cw, py::arg("histogram"), py::arg("max_delay_ns") = 0.0);
  m.def("fit_saturation", [](const DoubleArray& p, const DoubleArray& rate, std::optional<DoubleArray> sigma,
                             bool fix_i0) { return fit_saturation(points(p, rate, sigma), fix_i0); },
        py::arg("power_uw"), py::arg("rate_cps"), py::arg("sigma") = py::none(), py::arg("fix_i0") = false);
  m.def("fit_gamma1_linear", [](const DoubleArray& p, const DoubleArray& gamma1, std::optional<DoubleArray> sigma) {
    return fit_gamma1_linear(points(p, gamma1, sigma));
  }, py::arg("power_uw"), py::arg("gamma1"), py::arg("sigma") = py::none());
  m.def("fit_lorentzian", [](const DoubleArray& wl, const DoubleArray& counts, std::optional<DoubleArray> sigma) {
    return fit_lorentzian(points(wl, counts, sigma));
  }, py::arg("wavelength_nm"), py::arg("counts"), py::arg("sigma") = py::none());
  py::class_<HomFit>(m, "HomFit")
      .def_readonly("cross_stage", &HomFit::cross_stage)
      .def_readonly("joint", &HomFit::joint)
      .def_readonly("g_co_zero", &HomFit::g_co_zero)
      .def_readonly("g_cross_zero", &HomFit::g_cross_zero)
      .def_readonly("v_hom_raw", &HomFit::v_hom_raw)
      .def_readonly("m_s", &HomFit::m_s);
  m.def("fit_hom_joint", &fit_hom_joint, py::arg("co"), py::arg("cross"),
        py::arg("splitters") = SplitterPair::from_transmissions(0.5, 0.5), py::arg("dtau2_ns") = 4.36,
        py::arg("max_delay_ns") = 0.0);

  // coupling
  m.def("overlap_efficiency", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& e1,
                                 const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& e2,
                                 double dx_um, double dy_um) {
    return overlap_efficiency(field_from(e1, dx_um, dy_um), field_from(e2, dx_um, dy_um));
  }, py::arg("e1"), py::arg("e2"), py::arg("dx_um") = 1.0, py::arg("dy_um") = 1.0);
  m.def("gaussian_overlap", &gaussian_overlap_closed_form, py::arg("w1_um"), py::arg("w2_um"));
  m.def("fit_gaussian_2d", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& e,
                              double dx_um, double dy_um) {
    const auto g = fit_gaussian_2d(field_from(e, dx_um, dy_um));
    return py::dict(py::arg("center_x_um") = g.center_x_um, py::arg("center_y_um") = g.center_y_um,
                    py::arg("waist_x_um") = g.waist_x_um, py::arg("waist_y_um") = g.waist_y_um,
                    py::arg("amplitude") = g.amplitude, py::arg("fit") = g.fit);
  }, py::arg("field"), py::arg("dx_um") = 1.0, py::arg("dy_um") = 1.0,
        "Gaussian fit of |E|; the array is indexed [y, x] on a grid centred at zero.");
  m.def("reflectance_coupling", [](double p_in_mw, double p_out_mw, double t_bs) {
    return reflectance_coupling({p_in_mw, p_out_mw, t_bs});
  }, py::arg("p_in_mw"), py::arg("p_out_mw"), py::arg("t_bs"));
  m.def("photon_budget", [](double i_sat_cps, double rep_rate_hz, const std::vector<double>& stages) {
    const auto b = efficiency_chain(i_sat_cps, rep_rate_hz, EfficiencyChain::standard(stages));
    return py::dict(py::arg("end_to_end") = b.end_to_end, py::arg("b_fib") = b.b_fib,
                    py::arg("b_source") = b.b_source);
  }, py::arg("i_sat_cps"), py::arg("rep_rate_hz"), py::arg("stages"),
        "Stages in order: fiber, spectral_filter, beam_splitter, fiber_cable, detector.");
}
