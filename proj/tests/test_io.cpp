#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <covkit/io.hpp>

using namespace covkit;
using namespace covkit::io;
using doctest::Approx;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "covkit_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string scratch_file(const std::string& name) { return (scratch_dir() / name).string(); }

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  out << body;
}

}  // namespace

TEST_CASE("quadrature document: exact-bit save/load round trip") {
  CMDocument doc;
  doc.kind = CMKind::Quadrature;
  QuadratureCM<double> m{1.0 / 3.0, 0.1 + 2.0, -0.30000000000000004,
                         QuadratureBasis::SpectralPQ};
  doc.payload = m;
  doc.mode = -7;
  doc.provenance.source = "test fixture";
  doc.provenance.ensemble_digest = "0123456789abcdef";
  doc.provenance.std_errors["m_xx"] = 1e-3;
  doc.provenance.std_errors["m_xy"] = 2.5e-4;

  const auto path = scratch_file("quad.json");
  save_cm(doc, path);
  const CMDocument back = load_cm(path);

  CHECK(back.kind == CMKind::Quadrature);
  CHECK(back.quadrature().m_xx == m.m_xx);
  CHECK(back.quadrature().m_yy == m.m_yy);
  CHECK(back.quadrature().m_xy == m.m_xy);
  CHECK(back.quadrature().basis == QuadratureBasis::SpectralPQ);
  REQUIRE(back.mode.has_value());
  CHECK(*back.mode == -7);
  CHECK(back.provenance.source == "test fixture");
  CHECK(back.provenance.ensemble_digest == "0123456789abcdef");
  CHECK(back.provenance.std_errors.at("m_xx") == 1e-3);
  CHECK(back.provenance.std_errors.at("m_xy") == 2.5e-4);

  SUBCASE("a second save of the loaded document is byte-identical") {
    const auto path2 = scratch_file("quad2.json");
    save_cm(back, path2);
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("amplitude document round trip") {
  CMDocument doc;
  doc.kind = CMKind::Amplitude;
  doc.payload = AmplitudeCM<double>{2.125, {-1.875, 1.0 / 3.0}};
  const auto path = scratch_file("ampl.json");
  save_cm(doc, path);
  const CMDocument back = load_cm(path);
  CHECK(back.kind == CMKind::Amplitude);
  CHECK(back.amplitude().m_abs == 2.125);
  CHECK(back.amplitude().m_aa.real() == -1.875);
  CHECK(back.amplitude().m_aa.imag() == 1.0 / 3.0);
  CHECK_THROWS_AS(back.quadrature(), UnsupportedKind);
}

TEST_CASE("two-mode document round trip") {
  CMDocument doc;
  doc.kind = CMKind::TwoModePQ;
  TwoModeCM<double> m;
  m.block_1 = {1.125, 1.125, -0.125, QuadratureBasis::SpectralPQ};
  m.block_2 = {1.125, 1.125, 0.125, QuadratureBasis::SpectralPQ};
  m.cross << -0.125, 0.5, 0.5, 0.125;
  m.mode_1 = 3;
  m.mode_2 = -3;
  doc.payload = m;
  const auto path = scratch_file("pair_pq.json");
  save_cm(doc, path);
  const CMDocument back = load_cm(path);
  CHECK(back.two_mode().mode_1 == 3);
  CHECK(back.two_mode().mode_2 == -3);
  CHECK(back.two_mode().block_1.m_xy == -0.125);
  CHECK(back.two_mode().cross(0, 1) == 0.5);
  CHECK(back.two_mode().cross(1, 1) == 0.125);
  CHECK(back.two_mode().cross_zeroed == false);

  SUBCASE("the cross_zeroed marker survives") {
    TwoModeCM<double> z = m;
    z.cross.setZero();
    z.cross_zeroed = true;
    z.mode_2 = 9;
    CMDocument d2;
    d2.kind = CMKind::TwoModePQ;
    d2.payload = z;
    const auto p2 = scratch_file("pair_pq_zeroed.json");
    save_cm(d2, p2);
    CHECK(load_cm(p2).two_mode().cross_zeroed == true);
  }
}

TEST_CASE("xy pair document round trip") {
  CMDocument doc;
  doc.kind = CMKind::XYPair;
  doc.payload = XYPairCM<double>{1.25, 1.0, 0.5, 6};
  const auto path = scratch_file("pair_xy.json");
  save_cm(doc, path);
  const CMDocument back = load_cm(path);
  CHECK(back.xy_pair().m_xx == 1.25);
  CHECK(back.xy_pair().m_yy == 1.0);
  CHECK(back.xy_pair().m_xy == 0.5);
  CHECK(back.xy_pair().mode == 6);
}

TEST_CASE("hand-written vacuum document") {
  const auto path = scratch_file("vacuum.json");
  write_text(path, R"({
  "schema_version": 1,
  "kind": "QUADRATURE",
  "basis": "INTRACAVITY_XY",
  "entries": {"m_xx": 1.0, "m_yy": 1.0, "m_xy": 0.0}
})");
  const CMDocument doc = load_cm(path);
  CHECK(doc.quadrature().m_xx == 1.0);
  CHECK(doc.quadrature().basis == QuadratureBasis::IntracavityXY);
  CHECK_FALSE(doc.mode.has_value());
  CHECK(purity(doc.quadrature()) == 1.0);
}

TEST_CASE("loading rejects invalid documents with precise errors") {
  const auto path = scratch_file("bad.json");

  SUBCASE("negative diagonal names the constraint") {
    write_text(path, R"({"schema_version": 1, "kind": "QUADRATURE", "basis": "SPECTRAL_PQ",
                         "entries": {"m_xx": -1.0, "m_yy": 1.0, "m_xy": 0.0}})");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("m_xx"), InvariantViolation);
  }

  SUBCASE("singular matrix") {
    write_text(path, R"({"schema_version": 1, "kind": "QUADRATURE", "basis": "SPECTRAL_PQ",
                         "entries": {"m_xx": 1.0, "m_yy": 1.0, "m_xy": 1.0}})");
    CHECK_THROWS_AS(load_cm(path), SingularCM);
  }

  SUBCASE("malformed json mentions the file") {
    write_text(path, "{ this is not json");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("bad.json"), ParseError);
  }

  SUBCASE("unknown kind") {
    write_text(path, R"({"schema_version": 1, "kind": "BOGUS", "entries": {}})");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("BOGUS"), ParseError);
  }

  SUBCASE("missing field is named") {
    write_text(path, R"({"schema_version": 1, "kind": "QUADRATURE", "basis": "SPECTRAL_PQ",
                         "entries": {"m_xx": 1.0, "m_yy": 1.0}})");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("m_xy"), ParseError);
  }

  SUBCASE("wrong schema version") {
    write_text(path, R"({"schema_version": 2, "kind": "QUADRATURE", "basis": "SPECTRAL_PQ",
                         "entries": {"m_xx": 1.0, "m_yy": 1.0, "m_xy": 0.0}})");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("schema_version"), ParseError);
  }

  SUBCASE("mode on a non-spectral document") {
    write_text(path, R"({"schema_version": 1, "kind": "QUADRATURE", "basis": "INTRACAVITY_XY",
                         "mode": 3, "entries": {"m_xx": 1.0, "m_yy": 1.0, "m_xy": 0.0}})");
    CHECK_THROWS_WITH_AS(load_cm(path), doctest::Contains("SPECTRAL_PQ"), ParseError);
  }

  SUBCASE("xy pair requires a positive bin") {
    write_text(path, R"({"schema_version": 1, "kind": "XY_PAIR", "mode": -2,
                         "entries": {"m_xx": 1.0, "m_yy": 1.0, "m_xy": 0.0}})");
    CHECK_THROWS_AS(load_cm(path), InvariantViolation);
  }

  SUBCASE("nonexistent path") {
    CHECK_THROWS_WITH_AS(load_cm(scratch_file("missing_file.json")),
                         doctest::Contains("cannot open"), ParseError);
  }
}

TEST_CASE("spectrum config files") {
  const auto path = scratch_file("spectrum.json");

  SUBCASE("full config loads") {
    write_text(path, R"({
      "schema_version": 1,
      "seed": 424242,
      "n_samples": 5000,
      "solo": [{"bin": 0, "a": 0.5, "b": 0.5, "c": 0.25, "mean_q": 3.0, "mean_p": -2.0}],
      "pairs": [{"bin": 4, "a": 0.8, "b": 0.8, "c": 0.0}]
    })");
    const auto cfg = load_spectrum_config(path);
    CHECK(cfg.seed == 424242);
    CHECK(cfg.n_samples == 5000);
    CHECK(cfg.solo.at(0).c == 0.25);
    CHECK(cfg.solo.at(0).mean_x == 3.0);
    CHECK(cfg.solo.at(0).mean_y == -2.0);
    CHECK(cfg.pairs.at(4).a == 0.8);
    CHECK_NOTHROW(homodyne::validate(cfg));
  }

  SUBCASE("duplicate solo bin") {
    write_text(path, R"({"schema_version": 1, "seed": 1, "n_samples": 100,
      "solo": [{"bin": 2, "a": 1, "b": 1, "c": 0}, {"bin": 2, "a": 1, "b": 1, "c": 0}]})");
    CHECK_THROWS_WITH_AS(load_spectrum_config(path), doctest::Contains("twice"),
                         ConfigInvalid);
  }

  SUBCASE("pair bin colliding with a solo bin") {
    write_text(path, R"({"schema_version": 1, "seed": 1, "n_samples": 100,
      "solo": [{"bin": -4, "a": 1, "b": 1, "c": 0}],
      "pairs": [{"bin": 4, "a": 1, "b": 1, "c": 0}]})");
    CHECK_THROWS_AS(load_spectrum_config(path), ConfigInvalid);
  }

  SUBCASE("degenerate parameters carry the bin label") {
    write_text(path, R"({"schema_version": 1, "seed": 1, "n_samples": 100,
      "solo": [{"bin": 5, "a": 1, "b": 1, "c": 1}]})");
    CHECK_THROWS_WITH_AS(load_spectrum_config(path), doctest::Contains("bin 5"),
                         ConfigInvalid);
  }

  SUBCASE("missing n_samples") {
    write_text(path, R"({"schema_version": 1, "seed": 1,
      "solo": [{"bin": 0, "a": 1, "b": 1, "c": 0}]})");
    CHECK_THROWS_WITH_AS(load_spectrum_config(path), doctest::Contains("n_samples"),
                         ParseError);
  }

  SUBCASE("seed must be an integer") {
    write_text(path, R"({"schema_version": 1, "seed": 1.5, "n_samples": 100,
      "solo": [{"bin": 0, "a": 1, "b": 1, "c": 0}]})");
    CHECK_THROWS_AS(load_spectrum_config(path), ParseError);
  }
}

TEST_CASE("shortest round-trip double rendering") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-0.30000000000000004) == "-0.30000000000000004");
  for (const double v : {1.0 / 3.0, 1e-17, 6.02214076e23, -123.456789012345678}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("ensemble table export") {
  homodyne::SpectrumConfig cfg;
  cfg.seed = 99;
  cfg.n_samples = 120;
  cfg.solo[0] = GaussianParams<double>{1, 1, 0};
  cfg.pairs[2] = TwoModeGaussianParams<double>{0.8, 0.8, 0};
  const auto ens = homodyne::sample_ensemble(cfg);
  const auto path = scratch_file("ensemble.tsv");
  write_ensemble_table(ens, path);

  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);

  REQUIRE(lines.size() == 5 + 3 * 120);  // 4 comment lines + header + 3 bins
  CHECK(lines[0] == "# field ensemble v1");
  CHECK(lines[1] == "# seed=99");
  CHECK(lines[2] == "# n_samples=120");
  CHECK(lines[3] == "# config_digest=" + ens.digest());
  CHECK(lines[4] == "bin\tsample_index\tq\tp");

  // bins appear in ascending order: -2, 0, 2
  CHECK(lines[5].substr(0, 3) == "-2\t");
  CHECK(lines[5 + 120].substr(0, 2) == "0\t");
  CHECK(lines[5 + 240].substr(0, 2) == "2\t");

  // values round-trip exactly through the text form
  const auto& d = ens.bin(-2);
  std::istringstream first(lines[5]);
  std::string bin_s, idx_s, q_s, p_s;
  std::getline(first, bin_s, '\t');
  std::getline(first, idx_s, '\t');
  std::getline(first, q_s, '\t');
  std::getline(first, p_s, '\t');
  CHECK(bin_s == "-2");
  CHECK(idx_s == "0");
  CHECK(std::strtod(q_s.c_str(), nullptr) == d.q[0]);
  CHECK(std::strtod(p_s.c_str(), nullptr) == d.p[0]);
}
