#pragma once

// Serialization: density matrices and reports as JSON, sweeps and count
// records as CSV. CSV numbers use 6 significant digits so fixtures stay
// byte-stable; JSON keeps full double precision.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/hierarchy.hpp"
#include "qcorr/linalg.hpp"
#include "qcorr/states.hpp"
#include "qcorr/steering.hpp"
#include "qcorr/tomography.hpp"

namespace qcorr::io {

using json = nlohmann::json;

inline constexpr const char* kReportSchema = "qcorr.report/1";
inline constexpr const char* kSteeringSchema = "qcorr.steering/1";
inline constexpr const char* kTomoSchema = "qcorr.tomo/1";
inline constexpr const char* kCountsSchema = "qcorr.counts/1";
inline constexpr const char* kThresholdSchema = "qcorr.thresholds/1";
inline constexpr const char* kTable3Schema = "qcorr.table3/1";
inline constexpr const char* kRegimesSchema = "qcorr.regimes/1";

/// %.6g, with negative zero printed as 0.
inline std::string fmt(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// States

inline json to_json(const ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"dim", m.rows()}, {"re", re}, {"im", im}};
}

inline json to_json(const DensityMatrix& rho) { return to_json(ComplexMatrix(rho.matrix())); }

/// Parses {"dim": 4, "re": [[...]], "im": [[...]]}. A missing "im" means a
/// real matrix. Malformed documents raise ParseError; well-formed matrices
/// that are not states raise InvalidState.
inline ComplexMatrix matrix_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("re")) throw ParseError("state JSON needs an object with \"re\"");
    const auto& re = j.at("re");
    const auto n = static_cast<Eigen::Index>(re.size());
    if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != n) throw ParseError("state JSON: dim does not match rows");
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    const bool has_im = j.contains("im");
    if (has_im && static_cast<Eigen::Index>(j.at("im").size()) != n) throw ParseError("state JSON: im has wrong shape");
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(re.at(r).size()) != n) throw ParseError("state JSON: re is not square");
      if (has_im && static_cast<Eigen::Index>(j.at("im").at(r).size()) != n)
        throw ParseError("state JSON: im is not square");
      for (Eigen::Index c = 0; c < n; ++c)
        m(r, c) = Complex(re.at(r).at(c).get<double>(), has_im ? j.at("im").at(r).at(c).get<double>() : 0.0);
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("state JSON: ") + e.what());
  }
}

inline DensityMatrix state_from_json(const json& j, const Tolerances& tol = {}) {
  return DensityMatrix::from_matrix(matrix_from_json(j), tol);
}

inline DensityMatrix state_from_json_text(const std::string& text, const Tolerances& tol = {}) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("state JSON: ") + e.what());
  }
  return state_from_json(j, tol);
}

inline json to_json(const GwsParams& g) { return {{"p", g.p}, {"q", g.q}}; }

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RegimeLabel& r) {
  return {{"id", r.id},
          {"entangled", r.entangled},
          {"s3_steerable", r.s3_steerable},
          {"s2_steerable", r.s2_steerable},
          {"bell_nonlocal", r.bell_nonlocal}};
}

inline json to_json(const SteeringReport& s) {
  json j = {{"schema", kSteeringSchema}, {"S3", s.s3},     {"S2_XY", s.s2_xy},
            {"S2_XZ", s.s2_xz},          {"S2_YZ", s.s2_yz}, {"S2", s.s2}};
  j["S2_optimized"] = s.s2_optimized ? json(*s.s2_optimized) : json(nullptr);
  return j;
}

inline json to_json(const CorrelationReport& r) {
  json j = {{"schema", kReportSchema}, {"N", r.n},         {"C", r.c},         {"B", r.b},
            {"S2_XY", r.s2_xy},        {"S2_XZ", r.s2_xz}, {"S2_YZ", r.s2_yz}, {"S2", r.s2},
            {"S3", r.s3}};
  if (r.s2_optimized) j["S2_optimized"] = *r.s2_optimized;
  j["regime"] = to_json(r.regime);
  return j;
}

// ---------------------------------------------------------------------------
// Count records

inline void write_counts_csv(std::ostream& os, const CountRecord& rec) {
  os << "# schema=" << kCountsSchema << " exposure=" << fmt(rec.exposure) << " rng=" << rec.rng << "\n";
  os << "alice_state,bob_state,count\n";
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b)
      os << kPolarizationLabels[a] << ',' << kPolarizationLabels[b] << ',' << rec.counts[6 * a + b] << "\n";
}

inline json counts_to_json(const CountRecord& rec) {
  json rows = json::array();
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b)
      rows.push_back({{"alice_state", std::string(1, kPolarizationLabels[a])},
                      {"bob_state", std::string(1, kPolarizationLabels[b])},
                      {"count", rec.counts[6 * a + b]}});
  return {{"exposure", rec.exposure}, {"rng", rec.rng}, {"rows", rows}};
}

/// Reads the format written by write_counts_csv. Rows may come in any order
/// but every one of the 36 label pairs must appear exactly once.
inline CountRecord read_counts_csv(std::istream& is) {
  CountRecord rec;
  rec.exposure = 0.0;
  std::array<bool, kNumProjections> seen{};
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        if (tok.rfind("exposure=", 0) == 0) {
          try {
            rec.exposure = std::stod(tok.substr(9));
          } catch (const std::exception&) {
            throw ParseError("counts CSV: bad exposure");
          }
        } else if (tok.rfind("rng=", 0) == 0) {
          rec.rng = tok.substr(4);
        }
      }
      continue;
    }
    if (!header) {
      if (line != "alice_state,bob_state,count") throw ParseError("counts CSV: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto c1 = line.find(','), c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 != 1 || c2 != 3) throw ParseError("counts CSV: malformed row '" + line + "'");
    const int a = polarization_index(line[0]), b = polarization_index(line[2]);
    if (a < 0 || b < 0) throw ParseError("counts CSV: unknown label in '" + line + "'");
    const std::string n = line.substr(4);
    if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("counts CSV: count must be a nonnegative integer in '" + line + "'");
    const std::size_t k = 6 * static_cast<std::size_t>(a) + static_cast<std::size_t>(b);
    if (seen[k]) throw ParseError("counts CSV: duplicate row '" + line + "'");
    seen[k] = true;
    rec.counts[k] = std::stoull(n);
  }
  for (bool s : seen)
    if (!s) throw ParseError("counts CSV: expected 36 rows");
  if (!(rec.exposure > 0.0)) throw ParseError("counts CSV: missing exposure metadata");
  return rec;
}

// ---------------------------------------------------------------------------
// Sweeps

inline void write_threshold_csv(std::ostream& os, const std::vector<ThresholdCurve>& curves) {
  os << "# schema=" << kThresholdSchema << "\n";
  os << "measure,q,p_threshold\n";
  for (const auto& c : curves)
    for (const auto& s : c.samples) os << to_string(c.measure) << ',' << fmt(s.q) << ',' << fmt(s.p) << "\n";
}

inline void write_table3_csv(std::ostream& os, const std::vector<TransitionRow>& rows) {
  os << "# schema=" << kTable3Schema << "\n";
  os << "Transition,q_opt,p_i(q_opt),p_f(q_opt),Delta_if(q_opt),Delta_if(1/2),Delta_if(q_opt)-Delta_if(1/2)\n";
  for (const auto& r : rows)
    os << r.label << " p_" << to_string(r.initial) << "->p_" << to_string(r.final) << ',' << fmt(r.q_opt) << ','
       << fmt(r.p_initial) << ',' << fmt(r.p_final) << ',' << fmt(r.delta_opt) << ',' << fmt(r.delta_half) << ','
       << fmt(r.delta_gain) << "\n";
}

/// Parses "p,q" rows; blank lines, '#' comments and a "p,q" header are skipped.
inline std::vector<GwsParams> read_pq_csv(std::istream& is) {
  std::vector<GwsParams> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "p,q") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("pq CSV: expected 'p,q' in '" + line + "'");
    GwsParams g;
    try {
      std::size_t used = 0;
      const std::string ps = line.substr(0, comma), qs = line.substr(comma + 1);
      g.p = std::stod(ps, &used);
      if (used != ps.size()) throw ParseError("");
      g.q = std::stod(qs, &used);
      if (used != qs.size()) throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError("pq CSV: malformed row '" + line + "'");
    }
    out.push_back(g);
  }
  return out;
}

inline void write_regimes_csv(std::ostream& os, const std::vector<GwsParams>& pqs,
                              const std::vector<CorrelationReport>& reports) {
  os << "# schema=" << kRegimesSchema << "\n";
  os << "p,q,N,B,S2,S3,regime\n";
  for (std::size_t i = 0; i < pqs.size(); ++i) {
    const auto& r = reports.at(i);
    os << fmt(pqs[i].p) << ',' << fmt(pqs[i].q) << ',' << fmt(r.n) << ',' << fmt(r.b) << ',' << fmt(r.s2) << ','
       << fmt(r.s3) << ',' << r.regime.id << "\n";
  }
}

}  // namespace qcorr::io
