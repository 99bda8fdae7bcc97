#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "report.hpp"
#include "spsc/correlator.hpp"
#include "spsc/coupling.hpp"
#include "spsc/errors.hpp"
#include "spsc/fit_recipes.hpp"
#include "spsc/io.hpp"
#include "spsc/montecarlo.hpp"
#include "spsc/plot.hpp"

namespace spsc::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

// SVG for ".svg", long-format CSV otherwise.
void save_figure(const fs::path& path, const plot::Figure& fig) {
  if (path.extension() == ".svg") {
    plot::write_svg(path, fig);
  } else {
    plot::write_csv(path, fig);
  }
}

void print_fit(std::ostream& out, const FitResult& r) {
  out << "model " << r.model << (r.converged ? "" : " (not converged)") << ", chi2_red = " << r.chi2_reduced << '\n';
  for (std::size_t j = 0; j < r.params.size(); ++j) {
    out << "  " << r.names[j] << " = " << r.params[j] << " +/- " << r.sigma[j] << '\n';
  }
}

void require_converged(const FitResult& r) {
  if (!r.converged) throw ComputationError("fit " + r.model + " did not converge");
}

plot::Series histogram_series(const Histogram& h, const std::string& name) {
  plot::Series s{name, h.bin_centers_ns(), h.g2_values(), true};
  return s;
}

plot::Series model_series(const Histogram& h, const std::string& name, const std::function<double(double)>& f) {
  plot::Series s{name, h.bin_centers_ns(), {}, false};
  for (double x : s.x) s.y.push_back(f(x));
  return s;
}

struct SimulateArgs {
  std::string mode = "cw";
  std::string setup = "hbt";
  double tau_rad_ns = 1.87;
  double pump_rate_per_ns = 0.3;
  std::optional<double> power_uw;
  double alpha = 0.25;
  double background_cps = 0.0;
  double duration_s = 0.01;
  double rep_mhz = 40.0;
  double pulse_width_ps = 300.0;
  double excitation_prob = 1.0;
  double transmission = 0.5;
  double t1 = 0.5;
  double t2 = 0.5;
  double dtau2_ns = 4.36;
  double visibility = 1.0;
  double tau_c_ps = 450.0;
  DetectorConfig detector;
  std::string output;
};

int do_simulate(const SimulateArgs& a, std::uint64_t seed, unsigned threads, std::ostream& out) {
  EmitterConfig cfg;
  cfg.tau_rad_ns = a.tau_rad_ns;
  cfg.pump_rate_per_ns = a.power_uw ? pump_rate_for_power(*a.power_uw, {a.tau_rad_ns, a.alpha}) : a.pump_rate_per_ns;
  cfg.background_rate_cps = a.background_cps;
  cfg.duration_s = a.duration_s;
  if (a.mode == "pulsed") cfg.excitation = PulsedExcitation{a.rep_mhz, a.pulse_width_ps, a.excitation_prob};
  const TagStream source = simulate_emission(cfg, seed, threads);

  TagStream result;
  if (a.setup == "source") {
    result = source;
  } else {
    std::pair<TagStream, TagStream> ab;
    if (a.setup == "hbt") {
      ab = route_hbt(source, {1.0 - a.transmission, a.transmission}, a.detector, a.detector, seed, threads);
    } else {
      HOMParams p;
      p.splitters = SplitterPair::from_transmissions(a.t1, a.t2);
      p.dtau2_ns = a.dtau2_ns;
      p.visibility = a.visibility;
      p.tau_c_ps = a.tau_c_ps;
      ab = route_hom(source, p, a.detector, a.detector, seed, threads);
    }
    std::vector<Tag> tags = ab.first.tags();
    tags.insert(tags.end(), ab.second.tags().begin(), ab.second.tags().end());
    result = TagStream::from_unsorted(std::move(tags), source.duration_ps());
  }
  io::write_tags(a.output, result);
  out << "emitted " << source.size() << " photons, wrote " << result.size() << " tags over " << cfg.duration_s
      << " s to " << a.output << '\n';
  return kOk;
}

struct CorrelateArgs {
  std::string input;
  std::string output;
  std::string plot;
  Channel channel_a = 0;
  Channel channel_b = 1;
  TimePs bin_ps = 100;
  TimePs tau_max_ps = 50'000;
  std::optional<TimePs> duration_ps;
  bool autocorrelate = false;
};

int do_correlate(const CorrelateArgs& a, unsigned threads, std::ostream& out) {
  const TagStream all = io::read_tags(a.input, a.duration_ps);
  const TagStream sa = all.channel(a.channel_a);
  const TagStream sb = a.autocorrelate ? sa : all.channel(a.channel_b);
  if (sa.empty() || sb.empty()) throw ComputationError("correlate: a selected channel has no tags");
  if (all.duration_ps() <= 0) throw ComputationError("correlate: stream duration is zero");
  Histogram h = a.autocorrelate ? auto_correlate(sa, a.bin_ps, a.tau_max_ps, threads)
                                : cross_correlate(sa, sb, a.bin_ps, a.tau_max_ps, threads);
  h = normalize_g2(std::move(h), sa, sb);
  io::write_histogram(a.output, h);
  out << "correlated " << sa.size() << " x " << sb.size() << " tags: " << h.total_pairs << " pairs in " << h.bins()
      << " bins, norm " << h.norm << '\n';
  if (!a.plot.empty()) save_figure(a.plot, {"g2", "delay (ns)", "g2", {histogram_series(h, "data")}});
  return kOk;
}

struct FitG2Args {
  std::string input;
  std::string output;
  std::string plot;
  double max_delay_ns = 0.0;
  bool pulsed = false;
  double rep_mhz = 40.0;
  std::optional<double> window_ns;
  int side_peaks = 4;
};

int do_fit_g2(const FitG2Args& a, std::ostream& out) {
  const Histogram h = io::read_histogram(a.input);
  if (a.pulsed) {
    const double period = 1e3 / a.rep_mhz;
    const auto r = pulsed_g2_zero(h, period, a.window_ns.value_or(0.5 * period), a.side_peaks);
    out << "pulsed g2(0) = " << r.g2_zero << " +/- " << r.uncertainty << " (central area " << r.central_area
        << ", side mean " << r.side_mean << ")\n";
    if (!a.output.empty()) {
      std::ofstream f(a.output);
      f << "g2_zero = " << io::format_double(r.g2_zero) << "\nuncertainty = " << io::format_double(r.uncertainty)
        << "\ncentral_area = " << io::format_double(r.central_area)
        << "\nside_mean = " << io::format_double(r.side_mean) << '\n';
    }
    return kOk;
  }
  const auto fit = fit_g2_cw(h, a.max_delay_ns);
  print_fit(out, fit);
  if (!a.output.empty()) io::write_fit_result(fs::path(a.output), fit);
  if (!a.plot.empty()) {
    const G2TwoLevelParams p{fit.value("g2_zero"), fit.value("gamma1")};
    save_figure(a.plot, {"g2 fit", "delay (ns)", "g2",
                         {histogram_series(h, "data"),
                          model_series(h, "fit", [&](double t) { return eval_g2_two_level(t, p); })}});
  }
  require_converged(fit);
  return kOk;
}

struct FitPointsArgs {
  std::string input;
  std::string output;
  std::string plot;
  bool fix_i0 = false;
  std::optional<double> g2_zero;
};

plot::Figure points_figure(const std::string& title, const std::string& xl, const std::string& yl,
                           const std::vector<DataPoint>& pts, const std::function<double(double)>& f) {
  plot::Series data{"data", {}, {}, true};
  for (const auto& p : pts) {
    data.x.push_back(p.x);
    data.y.push_back(p.y);
  }
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  plot::Series model{"fit", {}, {}, false};
  for (int i = 0; i <= 400; ++i) {
    const double x = *lo + (*hi - *lo) * i / 400.0;
    model.x.push_back(x);
    model.y.push_back(f(x));
  }
  return {title, xl, yl, {data, model}};
}

int do_fit_sat(const FitPointsArgs& a, std::ostream& out) {
  auto pts = io::read_points(a.input);
  if (a.g2_zero) {
    for (auto& p : pts) {
      p.y = corrected_rate(p.y, *a.g2_zero);
      p.sigma = corrected_rate(p.sigma, *a.g2_zero);
    }
  }
  const auto fit = fit_saturation(pts, a.fix_i0);
  print_fit(out, fit);
  if (!a.output.empty()) io::write_fit_result(fs::path(a.output), fit);
  if (!a.plot.empty()) {
    const SaturationParams p{fit.value("i0"), fit.value("i_sat"), fit.value("p_sat")};
    save_figure(a.plot, points_figure("saturation", "power (uW)", "rate (cps)", pts,
                                      [&](double x) { return eval_saturation(x, p); }));
  }
  require_converged(fit);
  return kOk;
}

int do_fit_spectrum(const FitPointsArgs& a, std::ostream& out) {
  const auto pts = io::read_points(a.input);
  const auto fit = fit_lorentzian(pts);
  print_fit(out, fit);
  if (!a.output.empty()) io::write_fit_result(fs::path(a.output), fit);
  if (!a.plot.empty()) {
    const LorentzianParams p{fit.value("center"), fit.value("fwhm"), fit.value("amplitude"), fit.value("offset")};
    save_figure(a.plot, points_figure("spectrum", "wavelength (nm)", "counts", pts,
                                      [&](double x) { return eval_lorentzian(x, p); }));
  }
  require_converged(fit);
  return kOk;
}

struct FitHomArgs {
  std::string co;
  std::string cross;
  std::string output;
  std::string plot;
  double t1 = 0.5;
  double t2 = 0.5;
  double dtau2_ns = 4.36;
  double max_delay_ns = 0.0;
  std::optional<double> g2_zero;
};

int do_fit_hom(const FitHomArgs& a, std::ostream& out) {
  const Histogram co = io::read_histogram(a.co);
  const Histogram cross = io::read_histogram(a.cross);
  const auto s = SplitterPair::from_transmissions(a.t1, a.t2);
  const auto r = fit_hom_joint(co, cross, s, a.dtau2_ns, a.max_delay_ns);
  print_fit(out, r.joint);
  const double g0 = a.g2_zero.value_or(r.joint.value("g2_zero"));
  const double ms = visibility_corrected(r.v_hom_raw, g0);
  out << "tau_c = " << r.joint.value("tau_c") << " +/- " << r.joint.error("tau_c") << " ps\n";
  out << "g_co(0) = " << r.g_co_zero << ", g_cross(0) = " << r.g_cross_zero << '\n';
  out << "V_HOM (raw) = " << r.v_hom_raw << ", M_s = " << ms << " (g2(0) = " << g0 << ")\n";
  if (!a.output.empty()) io::write_fit_result(fs::path(a.output), r.joint);
  if (!a.plot.empty()) {
    HOMParams p;
    p.splitters = s;
    p.dtau2_ns = a.dtau2_ns;
    p.base = {r.joint.value("g2_zero"), r.joint.value("gamma1")};
    p.visibility = r.joint.value("visibility");
    p.tau_c_ps = r.joint.value("tau_c");
    save_figure(a.plot, {"HOM", "delay (ns)", "g2",
                         {histogram_series(co, "co-polarized"), histogram_series(cross, "cross-polarized"),
                          model_series(co, "co fit", [&](double t) { return eval_g2_co(t, p); }),
                          model_series(cross, "cross fit", [&](double t) { return eval_g2_cross(t, p); })}});
  }
  require_converged(r.joint);
  return kOk;
}

struct OverlapArgs {
  std::string field1;
  std::string field2;
  std::optional<double> waist_um;
  bool fit_gaussian = false;
};

int do_overlap(const OverlapArgs& a, std::ostream& out) {
  const FieldMap f1 = io::read_field_map(fs::path(a.field1));
  if (a.fit_gaussian) {
    const auto g = fit_gaussian_2d(f1);
    out << "gaussian fit: center (" << g.center_x_um << ", " << g.center_y_um << ") um, waists " << g.waist_x_um
        << " x " << g.waist_y_um << " um, amplitude " << g.amplitude << '\n';
    require_converged(g.fit);
  }
  std::optional<FieldMap> f2;
  if (!a.field2.empty()) {
    f2 = io::read_field_map(fs::path(a.field2));
  } else if (a.waist_um) {
    f2 = FieldMap::gaussian(f1.nx, f1.ny, f1.dx_um, f1.dy_um, *a.waist_um, *a.waist_um);
  }
  if (f2) out << "overlap = " << fmt("%.6f", overlap_efficiency(f1, *f2)) << '\n';
  return kOk;
}

struct BudgetArgs {
  double isat = 0.0;
  double rep = 0.0;
  std::vector<double> stages;
};

int do_budget(const BudgetArgs& a, std::ostream& out) {
  const auto b = efficiency_chain(a.isat, a.rep, EfficiencyChain::standard(a.stages));
  out << "end-to-end efficiency: " << fmt("%.2f%%", 100 * b.end_to_end) << '\n';
  out << "B_fib:                 " << fmt("%.2f%%", 100 * b.b_fib) << '\n';
  out << "B_source:              " << fmt("%.2f%%", 100 * b.b_source) << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-photon source characterisation toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  app.add_option("--seed", seed, "random seed (default 1554)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  std::function<int()> action;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo photon stream through an HBT or HOM setup");
  simulate->add_option("--mode", sim.mode, "cw or pulsed")->check(CLI::IsMember({"cw", "pulsed"}));
  simulate->add_option("--setup", sim.setup, "hbt, hom or source")->check(CLI::IsMember({"hbt", "hom", "source"}));
  simulate->add_option("--tau-rad-ns", sim.tau_rad_ns, "radiative lifetime");
  simulate->add_option("--pump-rate-per-ns", sim.pump_rate_per_ns, "CW excitation rate");
  simulate->add_option("--power-uw", sim.power_uw, "pump power; overrides --pump-rate-per-ns");
  simulate->add_option("--alpha", sim.alpha, "pump-rate slope per uW, used with --power-uw");
  simulate->add_option("--background-cps", sim.background_cps, "uncorrelated background rate");
  simulate->add_option("--duration-s", sim.duration_s, "acquisition time");
  simulate->add_option("--rep-mhz", sim.rep_mhz, "pulsed repetition rate");
  simulate->add_option("--pulse-width-ps", sim.pulse_width_ps, "pulsed excitation window");
  simulate->add_option("--excitation-prob", sim.excitation_prob, "excitation probability per pulse");
  simulate->add_option("--transmission", sim.transmission, "HBT splitter transmission to channel 0");
  simulate->add_option("--t1", sim.t1, "HOM first splitter transmission");
  simulate->add_option("--t2", sim.t2, "HOM second splitter transmission");
  simulate->add_option("--dtau2-ns", sim.dtau2_ns, "interferometer delay");
  simulate->add_option("--visibility", sim.visibility, "two-photon overlap, 0 for cross-polarized");
  simulate->add_option("--tau-c-ps", sim.tau_c_ps, "coherence time");
  simulate->add_option("--efficiency", sim.detector.efficiency, "detector efficiency");
  simulate->add_option("--jitter-ps", sim.detector.jitter_sigma_ps, "detector timing jitter (sigma)");
  simulate->add_option("--dead-time-ns", sim.detector.dead_time_ns, "detector dead time");
  simulate->add_option("--dark-cps", sim.detector.dark_rate_cps, "dark count rate");
  simulate->add_option("-o,--output", sim.output, "tag file (.csv or binary)")->required();
  simulate->callback([&] { action = [&] { return do_simulate(sim, seed, threads, out); }; });

  CorrelateArgs cor;
  auto* correlate = app.add_subcommand("correlate", "g2 histogram of two channels of a tag file");
  correlate->add_option("-i,--input", cor.input, "tag file")->required();
  correlate->add_option("-o,--output", cor.output, "histogram CSV")->required();
  correlate->add_option("--plot", cor.plot, "plot file (.svg or .csv)");
  correlate->add_option("--channel-a", cor.channel_a, "start channel");
  correlate->add_option("--channel-b", cor.channel_b, "stop channel");
  correlate->add_option("--bin-ps", cor.bin_ps, "bin width");
  correlate->add_option("--tau-max-ps", cor.tau_max_ps, "histogram half range");
  correlate->add_option("--duration-ps", cor.duration_ps, "acquisition time when the file does not record it");
  correlate->add_flag("--auto", cor.autocorrelate, "correlate channel a with itself");
  correlate->callback([&] { action = [&] { return do_correlate(cor, threads, out); }; });

  FitG2Args g2;
  auto* fit_g2 = app.add_subcommand("fit-g2", "antibunching fit or pulsed g2(0) of a histogram");
  fit_g2->add_option("-i,--input", g2.input, "histogram CSV")->required();
  fit_g2->add_option("-o,--output", g2.output, "fit result file");
  fit_g2->add_option("--plot", g2.plot, "plot file (.svg or .csv)");
  fit_g2->add_option("--max-delay-ns", g2.max_delay_ns, "fit only |tau| below this delay");
  fit_g2->add_flag("--pulsed", g2.pulsed, "peak-area analysis for pulsed excitation");
  fit_g2->add_option("--rep-mhz", g2.rep_mhz, "pulsed repetition rate");
  fit_g2->add_option("--window-ns", g2.window_ns, "peak integration window (default half a period)");
  fit_g2->add_option("--side-peaks", g2.side_peaks, "side peaks per side");
  fit_g2->callback([&] { action = [&] { return do_fit_g2(g2, out); }; });

  FitPointsArgs sat;
  auto* fit_sat = app.add_subcommand("fit-sat", "saturation fit of rate against power");
  fit_sat->add_option("-i,--input", sat.input, "CSV power_uw,rate_cps[,sigma]")->required();
  fit_sat->add_option("-o,--output", sat.output, "fit result file");
  fit_sat->add_option("--plot", sat.plot, "plot file (.svg or .csv)");
  fit_sat->add_flag("--fix-i0", sat.fix_i0, "hold the background at zero");
  fit_sat->add_option("--g2-zero", sat.g2_zero, "correct rates by sqrt(1 - g2(0)) before fitting");
  fit_sat->callback([&] { action = [&] { return do_fit_sat(sat, out); }; });

  FitHomArgs hom;
  auto* fit_hom = app.add_subcommand("fit-hom", "joint fit of co- and cross-polarized HOM histograms");
  fit_hom->add_option("--co", hom.co, "co-polarized histogram CSV")->required();
  fit_hom->add_option("--cross", hom.cross, "cross-polarized histogram CSV")->required();
  fit_hom->add_option("-o,--output", hom.output, "fit result file");
  fit_hom->add_option("--plot", hom.plot, "plot file (.svg or .csv)");
  fit_hom->add_option("--t1", hom.t1, "first splitter transmission");
  fit_hom->add_option("--t2", hom.t2, "second splitter transmission");
  fit_hom->add_option("--dtau2-ns", hom.dtau2_ns, "interferometer delay");
  fit_hom->add_option("--max-delay-ns", hom.max_delay_ns, "fit only |tau| below this delay");
  fit_hom->add_option("--g2-zero", hom.g2_zero, "g2(0) for the corrected visibility (default: fitted)");
  fit_hom->callback([&] { action = [&] { return do_fit_hom(hom, out); }; });

  FitPointsArgs line;
  auto* fit_spectrum = app.add_subcommand("fit-spectrum", "Lorentzian fit of a spectrum");
  fit_spectrum->add_option("-i,--input", line.input, "CSV wavelength_nm,counts[,sigma]")->required();
  fit_spectrum->add_option("-o,--output", line.output, "fit result file");
  fit_spectrum->add_option("--plot", line.plot, "plot file (.svg or .csv)");
  fit_spectrum->callback([&] { action = [&] { return do_fit_spectrum(line, out); }; });

  OverlapArgs ov;
  auto* overlap = app.add_subcommand("overlap", "mode overlap of two field maps");
  overlap->add_option("--field1", ov.field1, "field map")->required();
  auto* f2 = overlap->add_option("--field2", ov.field2, "second field map");
  overlap->add_option("--waist-um", ov.waist_um, "compare with a centred Gaussian of this 1/e field radius")
      ->excludes(f2);
  overlap->add_flag("--fit-gaussian", ov.fit_gaussian, "fit a 2D Gaussian to field1");
  overlap->callback([&] { action = [&] { return do_overlap(ov, out); }; });

  BudgetArgs bud;
  auto* budget = app.add_subcommand("budget", "photon budget from the saturated count rate");
  budget->add_option("--isat", bud.isat, "saturated detected rate (cps)")->required();
  budget->add_option("--rep", bud.rep, "repetition rate (Hz)")->required();
  budget->add_option("--stages", bud.stages,
                     "transmissions: fiber, spectral_filter, beam_splitter, fiber_cable, detector[, ...]")
      ->required()
      ->delimiter(',');
  budget->callback([&] { action = [&] { return do_budget(bud, out); }; });

  bool quick = false;
  std::string report_out;
  auto* report = app.add_subcommand("report", "recompute every headline number into one table");
  report->add_flag("--quick", quick, "shorter Monte Carlo runs");
  report->add_option("-o,--output", report_out, "also write the table to this file");
  report->callback([&] {
    action = [&] {
      const auto rows = build_report({seed, threads, quick});
      print_report(out, rows);
      if (!report_out.empty()) {
        std::ofstream f(report_out);
        if (!f) throw std::runtime_error("cannot write " + report_out);
        print_report(f, rows);
      }
      const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.ok; });
      return all_ok ? int{kOk} : int{kComputation};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const ComputationError& e) {
    err << "error: " << e.what() << '\n';
    return kComputation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    // unreadable files land here
    err << "error: " << e.what() << '\n';
    return kFormat;
  }
}

}  // namespace spsc::cli
