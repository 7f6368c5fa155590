// JSON documents for covariance matrices and simulation configs, plus the
// delimited-text ensemble export.
//
// A CM document is {schema_version, kind, entries, mode(s), provenance}. The
// four kinds are QUADRATURE (single 2x2, any basis), AMPLITUDE (m_abs, m_aa),
// TWO_MODE_PQ (two blocks + cross) and XY_PAIR (collective pair 2x2).
// Loading validates every invariant the in-memory types enforce, naming the
// offending field; saving renders doubles in shortest round-trip form, so
// load(save(doc)) reproduces the exact bits.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "errors.hpp"
#include "gaussian.hpp"
#include "homodyne.hpp"
#include "multimode.hpp"

namespace covkit::io {

using json = nlohmann::json;

enum class CMKind { Quadrature, Amplitude, TwoModePQ, XYPair };

inline const char* to_string(CMKind k) {
  switch (k) {
    case CMKind::Quadrature: return "QUADRATURE";
    case CMKind::Amplitude: return "AMPLITUDE";
    case CMKind::TwoModePQ: return "TWO_MODE_PQ";
    case CMKind::XYPair: return "XY_PAIR";
  }
  return "?";
}

inline CMKind kind_from_string(const std::string& s) {
  if (s == "QUADRATURE") return CMKind::Quadrature;
  if (s == "AMPLITUDE") return CMKind::Amplitude;
  if (s == "TWO_MODE_PQ") return CMKind::TwoModePQ;
  if (s == "XY_PAIR") return CMKind::XYPair;
  throw ParseError("unknown cm kind \"" + s +
                   "\" (expected QUADRATURE, AMPLITUDE, TWO_MODE_PQ or XY_PAIR)");
}

inline QuadratureBasis basis_from_string(const std::string& s) {
  if (s == "INTRACAVITY_XY") return QuadratureBasis::IntracavityXY;
  if (s == "SPECTRAL_PQ") return QuadratureBasis::SpectralPQ;
  if (s == "SPECTRAL_XY_PAIR") return QuadratureBasis::SpectralXYPair;
  throw ParseError("unknown quadrature basis \"" + s + "\"");
}

struct Provenance {
  std::string source;                         // free-form description
  std::string ensemble_digest;                // config fingerprint, if estimated
  std::map<std::string, double> std_errors;   // per-entry standard errors, if estimated
};

struct CMDocument {
  int schema_version{1};
  CMKind kind{CMKind::Quadrature};
  std::optional<ModeIndex> mode;  // spectral bin of a QUADRATURE document
  std::variant<QuadratureCM<double>, AmplitudeCM<double>, TwoModeCM<double>, XYPairCM<double>>
      payload{QuadratureCM<double>{}};
  Provenance provenance;

  const QuadratureCM<double>& quadrature() const { return expect<QuadratureCM<double>>(); }
  const AmplitudeCM<double>& amplitude() const { return expect<AmplitudeCM<double>>(); }
  const TwoModeCM<double>& two_mode() const { return expect<TwoModeCM<double>>(); }
  const XYPairCM<double>& xy_pair() const { return expect<XYPairCM<double>>(); }

 private:
  template <typename T>
  const T& expect() const {
    if (const T* p = std::get_if<T>(&payload)) return *p;
    throw UnsupportedKind(std::string("document of kind ") + to_string(kind) +
                          " does not hold the requested payload");
  }
};

namespace detail {

inline const json& field(const json& j, const char* name, const std::string& where) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(where + ": missing field \"" + name + "\"");
  }
  return *it;
}

inline double num(const json& j, const char* name, const std::string& where) {
  const json& f = field(j, name, where);
  if (!f.is_number()) {
    throw ParseError(where + ": field \"" + name + "\" must be a number");
  }
  return f.get<double>();
}

inline std::string str(const json& j, const char* name, const std::string& where) {
  const json& f = field(j, name, where);
  if (!f.is_string()) {
    throw ParseError(where + ": field \"" + name + "\" must be a string");
  }
  return f.get<std::string>();
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write " + path);
  }
  out << body;
  if (!out.good()) {
    throw ValidationError("failed writing " + path);
  }
}

inline json entries_2x2(double m_xx, double m_yy, double m_xy) {
  return json{{"m_xx", m_xx}, {"m_yy", m_yy}, {"m_xy", m_xy}};
}

template <typename CM>
CM cm_2x2(const json& e, const std::string& where) {
  CM m;
  m.m_xx = num(e, "m_xx", where);
  m.m_yy = num(e, "m_yy", where);
  m.m_xy = num(e, "m_xy", where);
  return m;
}

}  // namespace detail

// -- covariance-matrix documents --------------------------------------------------

inline json to_json(const CMDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["kind"] = to_string(doc.kind);
  switch (doc.kind) {
    case CMKind::Quadrature: {
      const auto& m = doc.quadrature();
      j["basis"] = to_string(m.basis);
      j["entries"] = detail::entries_2x2(m.m_xx, m.m_yy, m.m_xy);
      if (doc.mode) j["mode"] = *doc.mode;
      break;
    }
    case CMKind::Amplitude: {
      const auto& m = doc.amplitude();
      j["entries"] = json{{"m_abs", m.m_abs},
                          {"m_aa_re", m.m_aa.real()},
                          {"m_aa_im", m.m_aa.imag()}};
      break;
    }
    case CMKind::TwoModePQ: {
      const auto& m = doc.two_mode();
      j["modes"] = json::array({m.mode_1, m.mode_2});
      j["entries"] = json{
          {"block_1", detail::entries_2x2(m.block_1.m_xx, m.block_1.m_yy, m.block_1.m_xy)},
          {"block_2", detail::entries_2x2(m.block_2.m_xx, m.block_2.m_yy, m.block_2.m_xy)},
          {"cross", json::array({json::array({m.cross(0, 0), m.cross(0, 1)}),
                                 json::array({m.cross(1, 0), m.cross(1, 1)})})},
          {"cross_zeroed", m.cross_zeroed}};
      break;
    }
    case CMKind::XYPair: {
      const auto& m = doc.xy_pair();
      j["mode"] = m.mode;
      j["entries"] = detail::entries_2x2(m.m_xx, m.m_yy, m.m_xy);
      break;
    }
  }
  if (!doc.provenance.source.empty() || !doc.provenance.ensemble_digest.empty() ||
      !doc.provenance.std_errors.empty()) {
    json p;
    if (!doc.provenance.source.empty()) p["source"] = doc.provenance.source;
    if (!doc.provenance.ensemble_digest.empty()) {
      p["ensemble_digest"] = doc.provenance.ensemble_digest;
    }
    if (!doc.provenance.std_errors.empty()) p["std_errors"] = doc.provenance.std_errors;
    j["provenance"] = p;
  }
  return j;
}

inline CMDocument from_json(const json& j, const std::string& where) {
  CMDocument doc;
  const json& ver = detail::field(j, "schema_version", where);
  if (!ver.is_number_integer() || ver.get<int>() != 1) {
    throw ParseError(where + ": unsupported schema_version (expected 1)");
  }
  doc.kind = kind_from_string(detail::str(j, "kind", where));
  const json& e = detail::field(j, "entries", where);
  switch (doc.kind) {
    case CMKind::Quadrature: {
      auto m = detail::cm_2x2<QuadratureCM<double>>(e, where + ": entries");
      m.basis = basis_from_string(detail::str(j, "basis", where));
      if (j.contains("mode")) {
        if (m.basis != QuadratureBasis::SpectralPQ) {
          throw ParseError(where + ": \"mode\" is only valid for SPECTRAL_PQ documents");
        }
        doc.mode = j.at("mode").get<ModeIndex>();
      }
      validate(m);
      doc.payload = m;
      break;
    }
    case CMKind::Amplitude: {
      AmplitudeCM<double> m;
      m.m_abs = detail::num(e, "m_abs", where + ": entries");
      m.m_aa = {detail::num(e, "m_aa_re", where + ": entries"),
                detail::num(e, "m_aa_im", where + ": entries")};
      validate(m);
      doc.payload = m;
      break;
    }
    case CMKind::TwoModePQ: {
      const json& modes = detail::field(j, "modes", where);
      if (!modes.is_array() || modes.size() != 2) {
        throw ParseError(where + ": \"modes\" must be an array of two bins");
      }
      TwoModeCM<double> m;
      m.mode_1 = modes[0].get<ModeIndex>();
      m.mode_2 = modes[1].get<ModeIndex>();
      m.block_1 = detail::cm_2x2<QuadratureCM<double>>(
          detail::field(e, "block_1", where + ": entries"), where + ": entries.block_1");
      m.block_2 = detail::cm_2x2<QuadratureCM<double>>(
          detail::field(e, "block_2", where + ": entries"), where + ": entries.block_2");
      m.block_1.basis = m.block_2.basis = QuadratureBasis::SpectralPQ;
      const json& cross = detail::field(e, "cross", where + ": entries");
      if (!cross.is_array() || cross.size() != 2 || !cross[0].is_array() ||
          cross[0].size() != 2 || !cross[1].is_array() || cross[1].size() != 2) {
        throw ParseError(where + ": entries.cross must be a 2x2 array");
      }
      m.cross << cross[0][0].get<double>(), cross[0][1].get<double>(),
          cross[1][0].get<double>(), cross[1][1].get<double>();
      if (e.contains("cross_zeroed")) m.cross_zeroed = e.at("cross_zeroed").get<bool>();
      validate(m);
      doc.payload = m;
      break;
    }
    case CMKind::XYPair: {
      auto m = detail::cm_2x2<XYPairCM<double>>(e, where + ": entries");
      const json& mode = detail::field(j, "mode", where);
      if (!mode.is_number_integer()) {
        throw ParseError(where + ": \"mode\" must be an integer bin");
      }
      m.mode = mode.get<ModeIndex>();
      validate(m);
      doc.payload = m;
      break;
    }
  }
  if (j.contains("provenance")) {
    const json& p = j.at("provenance");
    if (p.contains("source")) doc.provenance.source = p.at("source").get<std::string>();
    if (p.contains("ensemble_digest")) {
      doc.provenance.ensemble_digest = p.at("ensemble_digest").get<std::string>();
    }
    if (p.contains("std_errors")) {
      for (const auto& [k, v] : p.at("std_errors").items()) {
        doc.provenance.std_errors[k] = v.get<double>();
      }
    }
  }
  return doc;
}

inline CMDocument load_cm(const std::string& path) {
  return from_json(detail::parse_file(path), path);
}

inline void save_cm(const CMDocument& doc, const std::string& path) {
  detail::write_file(path, to_json(doc).dump(2) + "\n");
}

// -- spectrum configs --------------------------------------------------------------

inline homodyne::SpectrumConfig load_spectrum_config(const std::string& path) {
  const json j = detail::parse_file(path);
  homodyne::SpectrumConfig cfg;
  try {
    const json& ver = detail::field(j, "schema_version", path);
    if (!ver.is_number_integer() || ver.get<int>() != 1) {
      throw ParseError(path + ": unsupported schema_version (expected 1)");
    }
    const json& seed = detail::field(j, "seed", path);
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw ParseError(path + ": \"seed\" must be an integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
    const json& n = detail::field(j, "n_samples", path);
    if (!n.is_number_unsigned() && !n.is_number_integer()) {
      throw ParseError(path + ": \"n_samples\" must be an integer");
    }
    cfg.n_samples = n.get<std::size_t>();
    if (j.contains("solo")) {
      for (const auto& s : j.at("solo")) {
        const ModeIndex bin = detail::field(s, "bin", path + ": solo entry").get<ModeIndex>();
        if (cfg.solo.count(bin)) {
          throw ConfigInvalid(path + ": solo bin " + std::to_string(bin) + " appears twice");
        }
        GaussianParams<double> p;
        p.a = detail::num(s, "a", path + ": solo bin " + std::to_string(bin));
        p.b = detail::num(s, "b", path + ": solo bin " + std::to_string(bin));
        p.c = detail::num(s, "c", path + ": solo bin " + std::to_string(bin));
        if (s.contains("mean_q")) p.mean_x = s.at("mean_q").get<double>();
        if (s.contains("mean_p")) p.mean_y = s.at("mean_p").get<double>();
        cfg.solo[bin] = p;
      }
    }
    if (j.contains("pairs")) {
      for (const auto& s : j.at("pairs")) {
        const ModeIndex bin = detail::field(s, "bin", path + ": pair entry").get<ModeIndex>();
        if (cfg.pairs.count(bin)) {
          throw ConfigInvalid(path + ": pair bin " + std::to_string(bin) + " appears twice");
        }
        TwoModeGaussianParams<double> p;
        p.a = detail::num(s, "a", path + ": pair bin " + std::to_string(bin));
        p.b = detail::num(s, "b", path + ": pair bin " + std::to_string(bin));
        p.c = detail::num(s, "c", path + ": pair bin " + std::to_string(bin));
        cfg.pairs[bin] = p;
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    homodyne::validate(cfg);
  } catch (const Error& e) {
    throw ConfigInvalid(path + ": " + e.what());
  }
  return cfg;
}

// -- ensemble export ----------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Tab-separated per-sample records, bins in ascending order:
//   bin  sample_index  q  p
inline void write_ensemble_table(const homodyne::FieldEnsemble& ens, const std::string& path) {
  std::ostringstream out;
  out << "# field ensemble v1\n";
  out << "# seed=" << ens.seed() << "\n";
  out << "# n_samples=" << ens.n_samples() << "\n";
  out << "# config_digest=" << ens.digest() << "\n";
  out << "bin\tsample_index\tq\tp\n";
  for (const ModeIndex bin : ens.bins()) {
    const auto& d = ens.bin(bin);
    for (std::size_t i = 0; i < ens.n_samples(); ++i) {
      out << bin << '\t' << i << '\t' << format_double(d.q[i]) << '\t'
          << format_double(d.p[i]) << '\n';
    }
  }
  detail::write_file(path, out.str());
}

}  // namespace covkit::io
