// Command-line front end: evolve, verify, reconstruct, weyl, spectrum, moments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fkt/config.hpp"
#include "fkt/io.hpp"

namespace {

using namespace fkt;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Options {
  std::string config_path;
  std::optional<double> t;
  std::vector<std::string> z;
  std::string out;
  std::vector<std::string> formats;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cplx parse_z(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) return std::stod(text);
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--z", "cannot parse '" + text + "' as re,im");
  }
}

struct Context {
  RunConfig cfg;
  fs::path out;
  std::vector<cplx> z_override;
  double t = 0.0;

  bool wants(const char* f) const { return cfg.formats.count(f) > 0; }
};

Context make_context(const Options& o, std::optional<double> default_t) {
  Context ctx;
  ctx.cfg = parse_config(read_file(o.config_path));
  if (!o.out.empty()) ctx.cfg.output_dir = o.out;
  if (!o.formats.empty()) {
    ctx.cfg.formats.clear();
    for (const std::string& f : o.formats) {
      if (f != "csv" && f != "json" && f != "plotdata") throw ConfigError("--format", "unknown format '" + f + "'");
      ctx.cfg.formats.insert(f);
    }
  }
  for (const std::string& z : o.z) ctx.z_override.push_back(parse_z(z));
  if (!ctx.z_override.empty()) ctx.cfg.z_samples = ctx.z_override;
  ctx.t = o.t.value_or(default_t.value_or(0.0));
  if (!(ctx.t >= 0.0)) throw ConfigError("--t", "must be nonnegative");
  ctx.out = ctx.cfg.output_dir;
  return ctx;
}

/// Flow settings that end exactly at time t.
FlowConfig flow_to(const RunConfig& cfg, double t) {
  FlowConfig f = cfg.flow;
  f.t_end = t;
  try {
    f.steps();
  } catch (const std::invalid_argument&) {
    throw ConfigError("--t", "t = " + format_double(t) + " is not a whole multiple of flow.h");
  }
  return f;
}

LatticeState state_at(const RunConfig& cfg, double t) {
  const LatticeState s0 = cfg.initial_state();
  if (t == 0.0) return s0;
  FlowConfig f = flow_to(cfg, t);
  f.record_every = static_cast<int>(std::max(1L, f.steps()));
  return evolve_lattice(s0, f).back();
}

// ---------------------------------------------------------------------------

int cmd_evolve(const Context& ctx) {
  const Trajectory traj = evolve_lattice(ctx.cfg.initial_state(), ctx.cfg.flow);
  if (ctx.wants("csv")) write_text(ctx.out / "trajectory.csv", trajectory_csv(traj));
  if (ctx.wants("json")) {
    json samples = json::array();
    for (const LatticeState& s : traj) samples.push_back(to_json(s));
    write_json(ctx.out / "trajectory.json", {{"samples", samples}});
  }
  if (ctx.wants("plotdata")) emit_trajectory_plotdata(traj, ctx.out / "plotdata");
  std::printf("evolve: %zu samples, t_end = %s, max |coefficient| = %s\n", traj.size(),
              format_double(traj.back().t).c_str(), format_double(traj.back().max_abs_coefficient()).c_str());
  return kOk;
}

int cmd_verify(const Context& ctx) {
  const LatticeState s0 = ctx.cfg.initial_state();
  VerifyOptions opts;
  opts.moment_order = ctx.cfg.orders.moment;
  opts.poly_order = ctx.cfg.orders.polynomial;
  opts.z_samples = ctx.cfg.z_samples_for(lattice_to_blocks(s0));

  json doc = {{"config", {{"truncation", ctx.cfg.truncation}, {"h", ctx.cfg.flow.h}, {"t_end", ctx.cfg.flow.t_end}}}};
  auto flush = [&]() {
    if (ctx.wants("json")) write_json(ctx.out / "verify_report.json", doc);
  };
  try {
    const Trajectory traj = evolve_lattice(s0, ctx.cfg.flow);
    const VerificationReport rep = verify_trajectory(traj, ctx.cfg.flow, opts);
    doc["report"] = to_json(rep);
    flush();
    const VerificationReport frozen = verify_trajectory(frozen_trajectory(s0, ctx.cfg.flow), ctx.cfg.flow, opts);
    json control = json::object();
    for (const Residual& r : frozen.residuals) control[r.name] = r.value;
    doc["negative_control"] = control;
    flush();
    if (ctx.wants("csv")) write_text(ctx.out / "verify_residuals.csv", residual_csv(rep));
    if (ctx.wants("plotdata")) emit_report_plotdata(rep, ctx.out / "plotdata");

    std::printf("verify: %s\n", rep.constant_trajectory ? "trajectory is constant" : "trajectory evolves");
    for (std::size_t k = 0; k < rep.residuals.size(); ++k) {
      std::printf("  %-5s residual %-24s frozen %s\n", rep.residuals[k].name.c_str(),
                  format_double(rep.residuals[k].value).c_str(), format_double(frozen.residuals[k].value).c_str());
    }
    std::printf("  isospectral drift %s\n  theorem2 %s\n  theorem5 %s\n", format_double(rep.isospectral.drift).c_str(),
                format_double(rep.theorem2).c_str(), format_double(rep.theorem5).c_str());
  } catch (const NumericalError& e) {
    doc["error"] = e.what();
    flush();
    throw;
  }
  return kOk;
}

int cmd_reconstruct(const Context& ctx) {
  const LatticeState s0 = ctx.cfg.initial_state();
  const int m_max = ctx.cfg.orders.reconstruction;
  if (m_max > ctx.cfg.truncation - 1 - ctx.cfg.flow.interior_margin) {
    throw ConfigError("orders.reconstruction", "exceeds the interior orders of the truncation");
  }
  const Theorem4Report rep =
      theorem4_cross_check(s0, ctx.t, flow_to(ctx.cfg, ctx.t), m_max, ctx.cfg.orders.moment_count);

  if (ctx.wants("csv")) {
    std::string csv = "order,block,row,col,spectral,direct,difference\n";
    auto rows = [&](int m, const char* name, const Block2& s, const Block2& d) {
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          csv += std::to_string(m) + "," + name + "," + std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
                 format_complex(s(r, c)) + "," + format_complex(d(r, c)) + "," + format_double(std::abs(s(r, c) - d(r, c))) +
                 "\n";
        }
    };
    csv += "0,a1,1,1," + format_complex(rep.spectral.a1) + "," + format_complex(rep.direct.a1) + "," +
           format_double(std::abs(rep.spectral.a1 - rep.direct.a1)) + "\n";
    for (int m = 0; m <= m_max; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      rows(m, "A", rep.spectral.A[mi], rep.direct.A[mi]);
      rows(m, "B", rep.spectral.B[mi], rep.direct.B[mi]);
      rows(m, "C", rep.spectral.C[mi], rep.direct.C[mi]);
    }
    write_text(ctx.out / "reconstruct.csv", csv);
  }
  if (ctx.wants("json")) {
    write_json(ctx.out / "reconstruct.json", {{"t", rep.t},
                                              {"m_max", rep.m_max},
                                              {"spectral", to_json(rep.spectral)},
                                              {"direct", to_json(rep.direct)},
                                              {"max_difference", rep.max_difference},
                                              {"reconstruction_residual", rep.reconstruction_residual}});
  }
  std::printf("reconstruct: t = %s, orders <= %d, max |spectral - direct| = %s\n", format_double(rep.t).c_str(), m_max,
              format_double(rep.max_difference).c_str());
  return kOk;
}

int cmd_weyl(const Context& ctx) {
  const LatticeState s0 = ctx.cfg.initial_state();
  FlowConfig f = flow_to(ctx.cfg, ctx.t);
  f.record_every = 1;
  const Trajectory traj = evolve_lattice(s0, f);
  const LatticeState& st = traj.back();
  const BlockJacobi j = lattice_to_blocks(st);
  const std::vector<cplx> zs = ctx.cfg.z_samples_for(lattice_to_blocks(s0));
  std::optional<ClosedFormWeyl> closed;
  if (traj.size() >= 2) closed.emplace(traj);
  const VectorFunctional u = moments_from_operator(j, 119, MomentWindow::finite_section);
  MarkovOptions mo;
  mo.radius = operator_norm_bound(j);

  std::string csv = "z,method,r11,r12,r21,r22\n";
  json rows = json::array();
  auto emit = [&](cplx z, const char* method, const Block2& r) {
    csv += format_complex(z) + "," + method;
    for (int e = 0; e < 4; ++e) csv += "," + format_complex(r(e / 2, e % 2));
    csv += "\n";
    rows.push_back({{"z", to_json(z)}, {"method", method}, {"value", to_json(r)}});
  };
  for (cplx z : zs) {
    emit(z, "finite_section", weyl_function(j, z));
    try {
      emit(z, "series", weyl_function(j, z, WeylMethod::series));
      emit(z, "markov_conjugated", j.gauge() * markov_function(u, z, mo) * j.gauge().inverse());
    } catch (const SeriesNotConverged& e) {
      std::fprintf(stderr, "weyl: z = %s: %s\n", format_complex(z).c_str(), e.what());
    }
    if (closed) emit(z, "closed_form", (*closed)(z, st.t));
  }
  if (ctx.wants("csv")) write_text(ctx.out / "weyl.csv", csv);
  if (ctx.wants("json")) write_json(ctx.out / "weyl.json", {{"t", st.t}, {"values", rows}});
  std::printf("weyl: t = %s, %zu z samples\n", format_double(st.t).c_str(), zs.size());
  return kOk;
}

int cmd_spectrum(const Context& ctx) {
  const LatticeState st = state_at(ctx.cfg, ctx.t);
  const std::vector<cplx> eig = spectrum(lattice_to_blocks(st));
  if (ctx.wants("csv")) {
    std::string csv = "index,re,im\n";
    for (std::size_t k = 0; k < eig.size(); ++k) {
      csv += std::to_string(k) + "," + format_double(eig[k].real()) + "," + format_double(eig[k].imag()) + "\n";
    }
    write_text(ctx.out / "spectrum.csv", csv);
  }
  if (ctx.wants("json")) write_json(ctx.out / "spectrum.json", {{"t", st.t}, {"eigenvalues", to_json(eig)}});
  if (ctx.wants("plotdata")) emit_eigenvalue_plotdata(eig, ctx.out / "plotdata" / "eigenvalues.dat");
  std::printf("spectrum: t = %s, %zu eigenvalues\n", format_double(st.t).c_str(), eig.size());
  return kOk;
}

int cmd_moments(const Context& ctx) {
  const LatticeState st = state_at(ctx.cfg, ctx.t);
  const BlockJacobi j = lattice_to_blocks(st);
  const int n_max = 2 * j.blocks - 1;
  const VectorFunctional u = moments_from_operator(j, n_max);
  const std::vector<Block2> um = u.block_moments();
  const std::vector<bool> flags = quasidefinite_check(u, (u.k_max() - 1) / 4);
  if (ctx.wants("csv")) {
    std::string csv = "n,u11,u12,u21,u22\n";
    for (std::size_t n = 0; n < um.size(); ++n) {
      csv += std::to_string(n);
      for (int e = 0; e < 4; ++e) csv += "," + format_complex(um[n](e / 2, e % 2));
      csv += "\n";
    }
    write_text(ctx.out / "moments.csv", csv);
  }
  if (ctx.wants("json")) {
    json f = json::array();
    for (bool b : flags) f.push_back(b);
    write_json(ctx.out / "moments.json",
               {{"t", st.t}, {"a1", to_json(j.a1)}, {"moments", to_json(um)}, {"quasi_definite", f}});
  }
  std::printf("moments: t = %s, U_0..U_%d\n", format_double(st.t).c_str(), n_max);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full Kostant-Toda lattice and 2x2 matrix orthogonal polynomials"};
  app.require_subcommand(1);
  Options opts;

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Context&);
    std::optional<double> default_t;  // nullopt: the flow's t_end
    bool uses_t;
  };
  const Sub subs[] = {
      {"evolve", "integrate the lattice and write the trajectory", cmd_evolve, 0.0, false},
      {"verify", "integrate and check every equivalent evolution law", cmd_verify, 0.0, false},
      {"reconstruct", "spectral path (moments, exp modulation, reconstruction) vs direct RK4", cmd_reconstruct,
       std::nullopt, true},
      {"weyl", "Weyl function by finite section, series, Markov conjugation and closed form", cmd_weyl, 0.0, true},
      {"spectrum", "eigenvalues of the truncated operator", cmd_spectrum, 0.0, true},
      {"moments", "block moments and quasi-definiteness flags", cmd_moments, 0.0, true},
  };
  std::vector<CLI::App*> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    if (s.uses_t) sub->add_option("--t", opts.t, "evaluation time");
    sub->add_option("--z", opts.z, "complex sample re,im (repeatable)");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--format", opts.formats, "csv, json or plotdata (repeatable)");
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (std::size_t k = 0; k < apps.size(); ++k) {
      if (!apps[k]->parsed()) continue;
      std::optional<double> default_t = subs[k].default_t;
      Context ctx = make_context(opts, std::nullopt);
      if (!opts.t) ctx.t = default_t ? *default_t : ctx.cfg.flow.t_end;
      return subs[k].run(ctx);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kUsage;
}
