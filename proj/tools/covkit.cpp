// covkit command-line front end: purity, reconstruct, convert, simulate, verify.
//
// Exit codes: 0 success, 1 invalid input (documents, configs, arguments),
// 2 numerical failure (degenerate/singular states, exhausted budgets),
// 3 verification mismatch.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <covkit/errors.hpp>
#include <covkit/gaussian.hpp>
#include <covkit/homodyne.hpp>
#include <covkit/io.hpp>
#include <covkit/multimode.hpp>
#include <covkit/oracle.hpp>

namespace {

using json = covkit::io::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void emit(const json& report, bool as_json) {
  if (as_json) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : report.items()) {
    std::cout << key << ": ";
    if (value.is_string()) {
      std::cout << value.get<std::string>();
    } else if (value.is_number_float()) {
      std::cout << fmt(value.get<double>());
    } else if (value.is_boolean()) {
      std::cout << (value.get<bool>() ? "yes" : "no");
    } else {
      std::cout << value.dump();
    }
    std::cout << "\n";
  }
}

// -- purity -----------------------------------------------------------------------

int cmd_purity(const std::string& file, bool as_json) {
  const covkit::io::CMDocument doc = covkit::io::load_cm(file);
  json r;
  r["kind"] = covkit::io::to_string(doc.kind);
  switch (doc.kind) {
    case covkit::io::CMKind::Quadrature: {
      const auto& m = doc.quadrature();
      r["det"] = m.det();
      r["purity"] = covkit::purity(m);
      r["law"] = "purity = 1/sqrt(det M), single 2x2 quadrature matrix";
      r["physical"] = covkit::is_physical(m);
      break;
    }
    case covkit::io::CMKind::Amplitude: {
      const auto& m = doc.amplitude();
      r["det"] = m.det();
      r["purity"] = covkit::purity(m);
      r["law"] = "purity = 1/sqrt(det M), amplitude form m_abs^2 - |m_aa|^2";
      r["physical"] = covkit::is_physical(m);
      break;
    }
    case covkit::io::CMKind::TwoModePQ: {
      const auto& m = doc.two_mode();
      const double p = covkit::purity_pq_pair(m);
      r["det_4x4"] = m.matrix().determinant();
      r["purity"] = p;
      r["law"] =
          "purity = 1/sqrt(det M4) = product of per-bin purities (uncorrelated bins)";
      break;
    }
    case covkit::io::CMKind::XYPair: {
      const auto& m = doc.xy_pair();
      r["det"] = m.det();
      r["purity"] = covkit::purity_xy_pair(m);
      r["law"] = "purity = 1/det, collective +/- pair 2x2 (no square root)";
      r["physical"] = covkit::is_physical(m);
      break;
    }
  }
  emit(r, as_json);
  return 0;
}

// -- reconstruct --------------------------------------------------------------------

json single_mode_report(const covkit::GaussianParams<double>& p) {
  json r;
  r["a"] = p.a;
  r["b"] = p.b;
  r["c"] = p.c;
  const auto rep = covkit::validate_physicality(p);
  r["normalizable"] = rep.normalizable;
  r["physical"] = rep.physical;
  if (rep.purity) r["purity"] = *rep.purity;
  const double d = p.normal_form_det();
  r["law"] = "purity = sqrt(a b - c^2) = 1/sqrt(det M)";
  r["wigner"] = "W(dx,dy) = " + fmt(2.0 / M_PI * std::sqrt(d)) + " * exp(-[" + fmt(p.a) +
                " dx^2 + " + fmt(p.b) + " dy^2 - " + fmt(2.0 * p.c) + " dx dy])";
  return r;
}

int cmd_reconstruct(const std::string& file, bool as_json) {
  const covkit::io::CMDocument doc = covkit::io::load_cm(file);
  json r;
  r["kind"] = covkit::io::to_string(doc.kind);
  switch (doc.kind) {
    case covkit::io::CMKind::Quadrature:
      r.update(single_mode_report(covkit::params_from_quadrature_cm(doc.quadrature())));
      break;
    case covkit::io::CMKind::Amplitude:
      r.update(single_mode_report(covkit::params_from_amplitude_cm(doc.amplitude())));
      break;
    case covkit::io::CMKind::XYPair: {
      const auto p = covkit::two_mode_params_from_xy_cm(doc.xy_pair());
      r["a"] = p.a;
      r["b"] = p.b;
      r["c"] = p.c;
      const double d = p.normal_form_det();
      r["purity"] = covkit::purity_xy_pair(p);
      r["physical"] = covkit::is_physical(doc.xy_pair());
      r["law"] = "purity = a b - c^2 = 1/det (collective +/- pair, no square root)";
      r["wigner"] = "W(dX,dY) = " + fmt(4.0 / (M_PI * M_PI) * d) + " * exp(-[" + fmt(p.a) +
                    " |dX|^2 + " + fmt(p.b) + " |dY|^2 - " + fmt(2.0 * p.c) +
                    " Re(dX conj(dY))])";
      break;
    }
    case covkit::io::CMKind::TwoModePQ:
      throw covkit::UnsupportedKind(
          "reconstruct does not accept TWO_MODE_PQ documents; reconstruct the per-bin "
          "QUADRATURE documents or the pair's XY_PAIR document instead");
  }
  emit(r, as_json);
  return 0;
}

// -- convert ------------------------------------------------------------------------

int cmd_convert(const std::string& file, const std::string& to, const std::string& out) {
  const covkit::io::CMDocument doc = covkit::io::load_cm(file);
  const covkit::io::CMKind target = covkit::io::kind_from_string(to);
  covkit::io::CMDocument result = doc;
  if (target != doc.kind) {
    if (doc.kind == covkit::io::CMKind::Quadrature &&
        target == covkit::io::CMKind::Amplitude) {
      result.payload = covkit::amplitude_cm_from_quadrature_cm(doc.quadrature());
      result.mode.reset();
    } else if (doc.kind == covkit::io::CMKind::Amplitude &&
               target == covkit::io::CMKind::Quadrature) {
      result.payload = covkit::quadrature_cm_from_amplitude_cm(doc.amplitude());
    } else if (doc.kind == covkit::io::CMKind::XYPair &&
               target == covkit::io::CMKind::TwoModePQ) {
      result.payload = covkit::expand_xy_to_full_pq_cm(doc.xy_pair());
    } else {
      throw covkit::UnsupportedKind(
          std::string("cannot convert ") + covkit::io::to_string(doc.kind) + " to " +
          covkit::io::to_string(target) +
          " (supported: QUADRATURE<->AMPLITUDE, XY_PAIR->TWO_MODE_PQ)");
    }
    result.kind = target;
    result.provenance.std_errors.clear();  // entries changed meaning
    result.provenance.source = std::string("converted from ") +
                               covkit::io::to_string(doc.kind) + " document " + file;
  }
  if (out.empty()) {
    std::cout << covkit::io::to_json(result).dump(2) << "\n";
  } else {
    covkit::io::save_cm(result, out);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

// -- simulate -----------------------------------------------------------------------

int cmd_simulate(const std::string& config_file, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, int threads, bool no_table) {
  covkit::homodyne::SpectrumConfig cfg = covkit::io::load_spectrum_config(config_file);
  if (seed_override) cfg.seed = *seed_override;
  if (cfg.n_samples < covkit::homodyne::kNumBlocks) {
    throw covkit::ConfigInvalid("simulate needs n_samples >= " +
                                std::to_string(covkit::homodyne::kNumBlocks) +
                                " to estimate matrices with uncertainties");
  }
  std::filesystem::create_directories(out_dir);
  const auto ens = covkit::homodyne::sample_ensemble(cfg, threads);
  std::cout << "sampled " << ens.n_samples() << " records for " << ens.bins().size()
            << " bins (seed " << ens.seed() << ", config digest " << ens.digest() << ")\n";

  if (!no_table) {
    const std::string table = out_dir + "/ensemble.tsv";
    covkit::io::write_ensemble_table(ens, table);
    std::cout << "wrote " << table << "\n";
  }

  for (const auto& [bin, params] : cfg.solo) {
    const auto est = covkit::homodyne::estimate_cm_pq(ens, bin, threads);
    covkit::io::CMDocument doc;
    doc.kind = covkit::io::CMKind::Quadrature;
    doc.mode = bin;
    doc.payload = est.cm;
    doc.provenance.source = "homodyne estimate, n=" + std::to_string(est.n);
    doc.provenance.ensemble_digest = ens.digest();
    doc.provenance.std_errors = {
        {"m_xx", est.se_m_xx}, {"m_yy", est.se_m_yy}, {"m_xy", est.se_m_xy}};
    const std::string path = out_dir + "/cm_pq_bin_" + std::to_string(bin) + ".json";
    covkit::io::save_cm(doc, path);
    std::cout << "bin " << bin << ": m_xx=" << fmt(est.cm.m_xx) << " m_yy=" << fmt(est.cm.m_yy)
              << " m_xy=" << fmt(est.cm.m_xy) << " purity=" << fmt(covkit::purity(est.cm))
              << " -> " << path << "\n";
  }

  for (const auto& [bin, params] : cfg.pairs) {
    const auto est = covkit::homodyne::estimate_cm_xy(ens, bin, threads);
    covkit::io::CMDocument doc;
    doc.kind = covkit::io::CMKind::XYPair;
    doc.payload = est.cm;
    doc.provenance.source = "homodyne estimate, n=" + std::to_string(est.n);
    doc.provenance.ensemble_digest = ens.digest();
    doc.provenance.std_errors = {
        {"m_xx", est.se_m_xx}, {"m_yy", est.se_m_yy}, {"m_xy", est.se_m_xy}};
    const std::string path = out_dir + "/cm_xy_pair_" + std::to_string(bin) + ".json";
    covkit::io::save_cm(doc, path);
    std::cout << "pair " << bin << ": m_xx=" << fmt(est.cm.m_xx) << " m_yy="
              << fmt(est.cm.m_yy) << " m_xy=" << fmt(est.cm.m_xy)
              << " purity=" << fmt(covkit::purity_xy_pair(est.cm)) << " (1/det law) -> "
              << path << "\n";
  }
  return 0;
}

// -- verify -------------------------------------------------------------------------

struct VerifySpec {
  bool two_mode{false};
  covkit::GaussianParams<double> single;
  covkit::TwoModeGaussianParams<double> pair;
  double closed_form{0};
  std::string law;
  std::string state;
};

VerifySpec verify_target_from_file(const std::string& file) {
  const covkit::io::CMDocument doc = covkit::io::load_cm(file);
  VerifySpec t;
  switch (doc.kind) {
    case covkit::io::CMKind::Quadrature:
      t.single = covkit::params_from_quadrature_cm(doc.quadrature());
      t.closed_form = covkit::purity(doc.quadrature());
      t.law = "1/sqrt(det M)";
      break;
    case covkit::io::CMKind::Amplitude:
      t.single = covkit::params_from_amplitude_cm(doc.amplitude());
      t.closed_form = covkit::purity(doc.amplitude());
      t.law = "1/sqrt(det M)";
      break;
    case covkit::io::CMKind::XYPair:
      t.two_mode = true;
      t.pair = covkit::two_mode_params_from_xy_cm(doc.xy_pair());
      t.closed_form = covkit::purity_xy_pair(doc.xy_pair());
      t.law = "1/det (collective +/- pair)";
      break;
    case covkit::io::CMKind::TwoModePQ:
      throw covkit::UnsupportedKind(
          "verify does not accept TWO_MODE_PQ documents; verify the per-bin QUADRATURE "
          "documents or the pair's XY_PAIR document instead");
  }
  t.state = std::string(covkit::io::to_string(doc.kind)) + " document " + file;
  return t;
}

int cmd_verify(const VerifySpec& target, covkit::oracle::GridSpec grid,
               std::optional<double> tolerance, bool as_json) {
  covkit::oracle::OracleResult res;
  if (target.two_mode) {
    res = covkit::oracle::purity_integral_two_mode(target.pair, grid);
  } else {
    res = covkit::oracle::purity_integral_single(target.single, grid);
  }
  const bool mc = res.method == covkit::oracle::IntegrationMethod::MonteCarlo;
  double tol;
  if (tolerance) {
    tol = *tolerance;
  } else if (mc) {
    tol = 3.0 * res.std_error;
  } else {
    tol = target.two_mode ? 1e-3 : 1e-6;
  }
  const double diff = std::abs(res.value - target.closed_form);
  const bool pass = diff <= tol;

  json r;
  r["state"] = target.state;
  r["law"] = target.law;
  r["closed_form"] = target.closed_form;
  r["method"] = covkit::oracle::to_string(res.method);
  r["oracle_value"] = res.value;
  if (mc) r["oracle_std_error"] = res.std_error;
  r["vacuum_self_test"] = res.self_test;
  r["evaluations"] = res.evaluations;
  r["difference"] = diff;
  r["tolerance"] = tol;
  r["result"] = pass ? "PASS" : "FAIL";
  emit(r, as_json);
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covkit: Gaussian field states, covariance matrices and purity laws"};
  app.set_version_flag("--version", "covkit 0.1.0");
  app.require_subcommand(1);

  // purity
  std::string purity_file;
  bool purity_json = false;
  auto* c_purity = app.add_subcommand("purity", "purity of a covariance-matrix document");
  c_purity->add_option("cm-file", purity_file, "CM document (JSON)")->required();
  c_purity->add_flag("--json", purity_json, "emit a JSON report");

  // reconstruct
  std::string rec_file;
  bool rec_json = false;
  auto* c_rec = app.add_subcommand(
      "reconstruct", "Wigner exponent parameters and physicality from a CM document");
  c_rec->add_option("cm-file", rec_file, "CM document (JSON)")->required();
  c_rec->add_flag("--json", rec_json, "emit a JSON report");

  // convert
  std::string conv_file, conv_to, conv_out;
  auto* c_conv = app.add_subcommand("convert", "convert a CM document between kinds");
  c_conv->add_option("cm-file", conv_file, "CM document (JSON)")->required();
  c_conv->add_option("--to", conv_to, "target kind (QUADRATURE, AMPLITUDE, TWO_MODE_PQ)")
      ->required();
  c_conv->add_option("-o,--output", conv_out, "output file (default: stdout)");

  // simulate
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int sim_threads = 0;
  bool sim_no_table = false;
  auto* c_sim = app.add_subcommand(
      "simulate", "sample a homodyne ensemble and estimate per-bin matrices");
  c_sim->add_option("config", sim_config, "spectrum config (JSON)")->required();
  c_sim->add_option("-o,--output", sim_out, "output directory")->required();
  c_sim->add_option("--seed", sim_seed, "override the config seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  c_sim->add_option("--threads", sim_threads, "worker threads (default: COVKIT_THREADS)");
  c_sim->add_flag("--no-table", sim_no_table, "skip the per-sample ensemble table");

  // verify
  std::string ver_file;
  std::vector<double> ver_params;
  bool ver_two_mode = false;
  std::string ver_method = "grid";
  int ver_points = 0;
  double ver_half_width = 8.0;
  std::size_t ver_mc_samples = 10'000'000;
  std::uint64_t ver_seed = 0x5eedc0de;
  double ver_tolerance = -1.0;
  int ver_threads = 0;
  bool ver_deterministic = false;
  bool ver_json = false;
  auto* c_ver = app.add_subcommand(
      "verify", "check a closed-form purity against the phase-space integral oracle");
  auto* ver_file_opt = c_ver->add_option("cm-file", ver_file, "CM document (JSON)");
  auto* ver_params_opt =
      c_ver->add_option("--params", ver_params, "exponent parameters a,b,c")
          ->delimiter(',')
          ->expected(3);
  ver_file_opt->excludes(ver_params_opt);
  c_ver->add_flag("--two-mode", ver_two_mode,
                  "treat --params as a +/- pair state (1/det law)");
  c_ver->add_option("--method", ver_method, "grid (tensor midpoint) or mc (importance)")
      ->check(CLI::IsMember({"grid", "mc"}));
  c_ver->add_option("--grid-points", ver_points, "points per axis (odd, >= 51)");
  c_ver->add_option("--half-width", ver_half_width, "box half-width in marginal sigmas");
  c_ver->add_option("--mc-samples", ver_mc_samples, "Monte Carlo sample count");
  c_ver->add_option("--seed", ver_seed, "Monte Carlo seed");
  c_ver->add_option("--tolerance", ver_tolerance,
                    "override the pass tolerance (default: 1e-6 single, 1e-3 pair, "
                    "3 standard errors for mc)");
  c_ver->add_option("--threads", ver_threads, "worker threads (default: COVKIT_THREADS)");
  c_ver->add_flag("--deterministic", ver_deterministic,
                  "require bit-reproducible reduction (always on; flag documents intent)");
  c_ver->add_flag("--json", ver_json, "emit a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(c_purity)) return cmd_purity(purity_file, purity_json);
    if (app.got_subcommand(c_rec)) return cmd_reconstruct(rec_file, rec_json);
    if (app.got_subcommand(c_conv)) return cmd_convert(conv_file, conv_to, conv_out);
    if (app.got_subcommand(c_sim)) {
      return cmd_simulate(sim_config, sim_out,
                          sim_seed_set ? std::optional<std::uint64_t>(sim_seed) : std::nullopt,
                          sim_threads, sim_no_table);
    }
    if (app.got_subcommand(c_ver)) {
      VerifySpec target;
      if (!ver_file.empty()) {
        target = verify_target_from_file(ver_file);
      } else if (ver_params.size() == 3) {
        if (ver_two_mode) {
          target.two_mode = true;
          target.pair = {ver_params[0], ver_params[1], ver_params[2]};
          target.closed_form = covkit::purity_xy_pair(target.pair);
          target.law = "1/det (collective +/- pair)";
        } else {
          target.single = {ver_params[0], ver_params[1], ver_params[2]};
          target.closed_form = covkit::purity(target.single);
          target.law = "sqrt(a b - c^2) = 1/sqrt(det M)";
        }
        target.state = "params a=" + fmt(ver_params[0]) + " b=" + fmt(ver_params[1]) +
                       " c=" + fmt(ver_params[2]);
      } else {
        throw covkit::ConfigInvalid("verify needs a cm-file or --params a,b,c");
      }
      covkit::oracle::GridSpec grid = target.two_mode
                                          ? covkit::oracle::GridSpec::two_mode_default()
                                          : covkit::oracle::GridSpec::single_mode_default();
      if (ver_method == "mc") grid.method = covkit::oracle::IntegrationMethod::MonteCarlo;
      if (ver_points > 0) grid.points_per_axis = ver_points;
      grid.half_width_sigmas = ver_half_width;
      grid.mc_samples = ver_mc_samples;
      grid.mc_seed = ver_seed;
      grid.threads = ver_threads;
      return cmd_verify(target, grid,
                        ver_tolerance >= 0 ? std::optional<double>(ver_tolerance)
                                           : std::nullopt,
                        ver_json);
    }
  } catch (const covkit::ValidationError& e) {
    std::cerr << "error (validation): " << e.what() << "\n";
    return 1;
  } catch (const covkit::NumericError& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
