#ifndef FKT_IO_HPP
#define FKT_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkt/dynamics.hpp"

namespace fkt {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Text formatting (shortest round-trip)
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// "re+imj" / "re-imj"
inline std::string format_complex(cplx z) {
  const double im = z.imag();
  return format_double(z.real()) + (std::signbit(im) ? "-" : "+") + format_double(std::abs(im)) + "j";
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Block2& b) {
  return json::array({json::array({to_json(b(0, 0)), to_json(b(0, 1))}), json::array({to_json(b(1, 0)), to_json(b(1, 1))})});
}

inline json to_json(const std::vector<cplx>& v) {
  json out = json::array();
  for (cplx z : v) out.push_back(to_json(z));
  return out;
}

inline json to_json(const std::vector<Block2>& v) {
  json out = json::array();
  for (const Block2& b : v) out.push_back(to_json(b));
  return out;
}

inline json to_json(const LatticeState& s) {
  json out = {{"t", s.t}, {"truncation", s.blocks()}};
  for (Coef k : kAllCoefs) out[coef_name(k)] = to_json(s.sequence(k));
  return out;
}

inline json to_json(const BlockJacobi& j) {
  return {{"t", j.t}, {"blocks", j.blocks}, {"a1", to_json(j.a1)}, {"A", to_json(j.A)}, {"B", to_json(j.B)},
          {"C", to_json(j.C)}};
}

inline json to_json(const VectorPoly& p) { return {{"top", to_json(p.top)}, {"bot", to_json(p.bot)}}; }

inline json to_json(const ReconstructionReport& r) {
  json bs = json::array();
  for (const VectorPoly& b : r.bs) bs.push_back(to_json(b));
  json flags = json::array();
  for (bool f : r.condition_flags) flags.push_back(f);
  return {{"jacobi", to_json(r.jacobi)},       {"B", bs},
          {"delta", to_json(r.delta)},         {"condition_flags", flags},
          {"residual", r.residual},            {"structure_defect", r.structure_defect}};
}

inline json to_json(const Residual& r) { return {{"value", r.value}, {"sampling", r.sampling}}; }

inline json to_json(const VerificationReport& r) {
  json res = json::object();
  for (const Residual& x : r.residuals) res[x.name] = to_json(x);
  return {{"residuals", res},
          {"isospectral_drift", r.isospectral.drift},
          {"initial_spectrum", to_json(r.isospectral.initial)},
          {"theorem2", r.theorem2},
          {"theorem5", r.theorem5},
          {"interior_margin", r.interior_margin},
          {"constant_trajectory", r.constant_trajectory},
          {"z_samples", to_json(r.z_samples)}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string trajectory_header(int blocks) {
  std::string h = "t";
  for (Coef k : kAllCoefs)
    for (int n = 1; n <= LatticeState::length(k, blocks); ++n) h += std::string(",") + coef_name(k) + "_" + std::to_string(n);
  return h;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  if (traj.empty()) return "t\n";
  std::string out = trajectory_header(traj.front().blocks()) + "\n";
  for (const LatticeState& s : traj) {
    out += format_double(s.t);
    for (Coef k : kAllCoefs)
      for (cplx z : s.sequence(k)) out += "," + format_complex(z);
    out += "\n";
  }
  return out;
}

/// Columns t, then one per residual, then the isospectral drift.
inline std::string residual_csv(const VerificationReport& r) {
  std::string out = "t";
  for (const Residual& x : r.residuals) out += "," + x.name;
  out += ",drift\n";
  // Residual series cover samples 1..K-2; the drift series covers all K.
  const auto& drift = r.isospectral.series;
  for (std::size_t k = 0; k < drift.size(); ++k) {
    out += format_double(drift[k].first);
    for (const Residual& x : r.residuals) {
      out += ",";
      if (k >= 1 && k - 1 < x.series.size()) out += format_double(x.series[k - 1].second);
    }
    out += "," + format_double(drift[k].second) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot data: two whitespace-separated columns per file.
// ---------------------------------------------------------------------------

inline std::string two_columns(const std::vector<std::pair<double, double>>& xy) {
  std::string out;
  for (const auto& [x, y] : xy) out += format_double(x) + " " + format_double(y) + "\n";
  return out;
}

/// coef_<name>_<n>.dat with (t, Re); a matching _im file when any sample has
/// a nonzero imaginary part.
inline void emit_trajectory_plotdata(const Trajectory& traj, const std::filesystem::path& dir) {
  if (traj.empty()) return;
  ensure_dir(dir);
  for (Coef k : kAllCoefs) {
    for (int n = 1; n <= traj.front().length(k); ++n) {
      std::vector<std::pair<double, double>> re, im;
      bool complex_valued = false;
      for (const LatticeState& s : traj) {
        const cplx z = s.get(k, n);
        re.emplace_back(s.t, z.real());
        im.emplace_back(s.t, z.imag());
        complex_valued = complex_valued || z.imag() != 0.0;
      }
      const std::string stem = std::string("coef_") + coef_name(k) + "_" + std::to_string(n);
      write_text(dir / (stem + ".dat"), two_columns(re));
      if (complex_valued) write_text(dir / (stem + "_im.dat"), two_columns(im));
    }
  }
}

inline void emit_eigenvalue_plotdata(const std::vector<cplx>& eig, const std::filesystem::path& path) {
  std::vector<std::pair<double, double>> xy;
  for (cplx z : eig) xy.emplace_back(z.real(), z.imag());
  write_text(path, two_columns(xy));
}

inline void emit_report_plotdata(const VerificationReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  for (const Residual& x : r.residuals) write_text(dir / ("residual_" + x.name + ".dat"), two_columns(x.series));
  write_text(dir / "residual_drift.dat", two_columns(r.isospectral.series));
  emit_eigenvalue_plotdata(r.isospectral.initial, dir / "eigenvalues.dat");
}

}  // namespace fkt

#endif  // FKT_IO_HPP
