// Command-line front end: exact dark states, Lindblad time evolution,
// drive-angle optimization, parameter sweeps, and laboratory-parameter
// translation.  Output is deterministic CSV or JSON; identical config and
// seed give identical bytes.
//
// Exit codes: 0 success (including converged:false), 2 malformed
// configuration, 3 domain errors (odd N, capacity, undefined sensitivity),
// 4 integration failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqz/dark_state.hpp"
#include "sqz/io.hpp"
#include "sqz/lindblad.hpp"
#include "sqz/mean_field.hpp"
#include "sqz/optimizer.hpp"
#include "sqz/phys_params.hpp"

#ifndef SPINSQUEEZE_PRESET_DIR
#define SPINSQUEEZE_PRESET_DIR "presets"
#endif

namespace {

using namespace sqz;

double parse_number(const std::string& s, const std::string& what) {
  if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + what + ": '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  if (!(v >= 1) || v != std::floor(v) || v > 2e9)
    throw ConfigError(what + " must be a positive integer, got '" + s + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok =
        s.substr(start, comma == std::string::npos ? comma : comma - start);
    if (tok.empty()) throw ConfigError("empty entry in " + what + " list");
    out.push_back(parse_number(tok, what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(what + " list is empty");
  return out;
}

Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  try {
    Json j;
    f >> j;
    return j;
  } catch (const std::exception& e) {
    throw ConfigError("parse error in " + path + ": " + e.what());
  }
}

std::string preset_path(const std::string& name) {
  for (const std::string dir : {std::string(SPINSQUEEZE_PRESET_DIR), std::string("presets")}) {
    const std::string p = dir + "/" + name + ".json";
    if (std::ifstream(p).good()) return p;
  }
  throw ConfigError("preset " + name + ".json not found");
}

int env_threads() {
  const char* v = std::getenv("SPINSQUEEZE_THREADS");
  if (!v || !*v) return 1;
  return parse_int(v, "SPINSQUEEZE_THREADS");
}

// One string slot per overridable field; presence = the flag was given.
struct SubOpts {
  CLI::App* app = nullptr;
  std::string config, output, format;
  std::string n, ratio, theta, chi, gamma_cav, gamma_spont;
  std::string t_max, sample_dt, seed, initial, initial_file, random_kind;
  std::string rtol, atol, conv_tol;
  std::string ratio_list;
  bool amplitudes = false;
  bool fig2 = false, fig3a = false, fig3b = false, fig4 = false;

  bool given(const std::string& flag) const {
    const CLI::Option* opt = app->get_option_no_throw(flag);
    return opt && opt->count() > 0;
  }
};

void add_common(CLI::App* sub, SubOpts& o) {
  o.app = sub;
  sub->add_option("--config", o.config, "JSON config file; flags override its fields");
  sub->add_option("-o,--output", o.output, "output path (default stdout)");
  sub->add_option("--format", o.format, "csv or json");
}

void add_tolerances(CLI::App* sub, SubOpts& o) {
  sub->add_option("--rtol", o.rtol, "integrator relative tolerance");
  sub->add_option("--atol", o.atol, "integrator absolute tolerance");
  sub->add_option("--conv-tol", o.conv_tol,
                  "steady-state residual threshold (rate units; 0 disables)");
}

RunConfig build_config(Command cmd, const SubOpts& o) {
  std::vector<std::string> presets;
  if (o.fig2) presets.push_back("fig2");
  if (o.fig3a) presets.push_back("fig3a");
  if (o.fig3b) presets.push_back("fig3b");
  if (o.fig4) presets.push_back("fig4");
  if (presets.size() > 1) throw ConfigError("give at most one preset flag");
  if (!presets.empty() && !o.config.empty())
    throw ConfigError("give a preset flag or --config, not both");

  RunConfig cfg;
  if (!presets.empty())
    cfg = config_from_json(load_json(preset_path(presets[0])));
  else if (!o.config.empty())
    cfg = config_from_json(load_json(o.config));

  if (cfg.command != Command::none && cfg.command != cmd)
    throw ConfigError(std::string("config file is for command '") +
                      to_string(cfg.command) + "', invoked as '" +
                      to_string(cmd) + "'");
  cfg.command = cmd;

  if (o.given("--n")) {
    if (cmd == Command::sweep)
      cfg.n_list = parse_list(o.n, "n");
    else
      cfg.n = parse_int(o.n, "n");
  }
  if (o.given("--ratio")) {
    if (cmd == Command::sweep)
      cfg.ratio_list = parse_list(o.ratio_list, "ratio");
    else {
      cfg.ratio = parse_number(o.ratio, "ratio");
      cfg.theta.reset();
    }
  }
  if (o.given("--theta")) {
    cfg.theta = parse_number(o.theta, "theta");
    cfg.ratio.reset();
  }
  if (o.given("--chi")) {
    if (cmd == Command::sweep)
      cfg.chi_list = parse_list(o.chi, "chi");
    else {
      cfg.chi = parse_number(o.chi, "chi");
      cfg.gamma_cav.reset();
      cfg.gamma_spont.reset();
    }
  }
  if (o.given("--gamma-cav")) {
    cfg.gamma_cav = parse_number(o.gamma_cav, "gamma_cav");
    cfg.chi.reset();
  }
  if (o.given("--gamma-spont")) {
    cfg.gamma_spont = parse_number(o.gamma_spont, "gamma_spont");
    cfg.chi.reset();
  }
  if (o.given("--t-max")) cfg.t_max = parse_number(o.t_max, "t_max");
  if (o.given("--sample-dt")) cfg.sample_dt = parse_number(o.sample_dt, "sample_dt");
  if (o.given("--seed")) {
    const double v = parse_number(o.seed, "seed");
    if (!(v >= 0) || v != std::floor(v)) throw ConfigError("seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  if (o.given("--initial")) cfg.initial = parse_initial(o.initial);
  if (o.given("--initial-file")) {
    cfg.initial_file = o.initial_file;
    cfg.initial = InitialKind::file;
  }
  if (o.given("--random-kind")) cfg.random_kind = parse_random_kind(o.random_kind);
  if (o.given("--rtol")) cfg.rtol = parse_number(o.rtol, "rtol");
  if (o.given("--atol")) cfg.atol = parse_number(o.atol, "atol");
  if (o.given("--conv-tol")) cfg.conv_tol = parse_number(o.conv_tol, "conv_tol");
  if (o.given("--format")) cfg.output_format = parse_format(o.format);
  if (o.given("--output")) cfg.output_path = o.output;
  if (o.amplitudes) cfg.amplitudes = true;
  return cfg;
}

void emit(const RunConfig& cfg, const Table& t, Json result,
          const std::vector<std::string>& csv_extra = {}) {
  if (cfg.output_format == OutputFormat::json)
    write_output(document_json(cfg, std::move(result)), cfg.output_path);
  else
    write_output(document_csv(cfg, t, csv_extra), cfg.output_path);
}

int cmd_darkstate(const RunConfig& cfg) {
  const EnsembleSize n(*cfg.n);
  const double theta = config_theta(cfg);
  const double r = cfg.ratio ? *cfg.ratio : std::tan(theta);
  const auto st = dark_state(n, r);
  const auto m = moments(st);
  const double sql = sql_limit(n), heis = heisenberg_limit(n);

  Json res;
  res["n"] = n.n_atoms;
  res["ratio"] = r;
  res["theta"] = theta;
  res["Sz"] = m.sz;
  res["dSz"] = m.d_sz;
  res["Sx2"] = m.sx2;
  res["Sy2"] = m.sy2;
  res["S2"] = m.s_total_sq;
  res["dphi"] = m.dphi;
  res["sql"] = sql;
  res["heisenberg"] = heis;
  if (cfg.amplitudes) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < st.c.size(); ++i) a.push_back(st.c[i].real());
    res["amplitudes"] = a;
  }

  if (cfg.amplitudes && cfg.output_format == OutputFormat::csv) {
    // amplitude ladder as the table; moments ride in a comment
    Table t({"m", "amplitude"});
    for (Eigen::Index i = 0; i < st.c.size(); ++i)
      t.add_row({static_cast<double>(i), st.c[i].real()});
    Json sum = res;
    sum.erase("amplitudes");
    emit(cfg, t, std::move(res), {"summary " + sum.dump()});
    return 0;
  }
  Table t({"n", "ratio", "theta", "Sz", "dSz", "Sx2", "Sy2", "S2", "dphi",
           "sql", "heisenberg"});
  t.add_row({static_cast<double>(n.n_atoms), r, theta, m.sz, m.d_sz, m.sx2,
             m.sy2, m.s_total_sq, m.dphi, sql, heis});
  emit(cfg, t, std::move(res));
  return 0;
}

int cmd_evolve(const RunConfig& cfg) {
  const auto [rho0, ch, opt] = prepare_evolve(cfg);
  const auto tr = evolve(ch, rho0.rho, opt);

  const Table t = trajectory_table(tr);
  const Json summary = trajectory_summary_json(tr);
  Json res;
  res["summary"] = summary;
  res["trajectory"] = table_to_json(t);
  emit(cfg, t, std::move(res), {"summary " + summary.dump()});
  return 0;
}

int cmd_optimize(const RunConfig& cfg) {
  const double n = *cfg.n;
  const double chi = config_chi(cfg);
  const auto r = optimize_theta(n, chi);

  Table t({"n", "chi", "theta_opt", "dphi_opt", "dphi_over_sql",
           "asymptotic_small", "asymptotic_large", "regime", "iterations",
           "boundary"});
  t.add_row({n, chi, r.theta_opt, r.dphi_opt, r.dphi_over_sql,
             asymptotic_small(n, chi), asymptotic_large(n, chi),
             std::string(to_string(r.regime)), static_cast<double>(r.iterations),
             static_cast<double>(r.boundary)});

  Json res;
  res["n"] = n;
  res["chi"] = detail::finite_or_string(chi);
  res["theta_opt"] = r.theta_opt;
  res["ratio_opt"] = std::tan(r.theta_opt);
  res["dphi_opt"] = r.dphi_opt;
  res["dphi_over_sql"] = r.dphi_over_sql;
  res["asymptotic_small"] = detail::json_value(asymptotic_small(n, chi));
  res["asymptotic_large"] = detail::json_value(asymptotic_large(n, chi));
  res["regime"] = to_string(r.regime);
  res["iterations"] = r.iterations;
  res["boundary"] = r.boundary;
  res["bracket"] = Json::array({r.bracket_lo, r.bracket_hi});
  emit(cfg, t, std::move(res));
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  SweepGrid grid{cfg.n_list, cfg.chi_list, cfg.ratio_list};
  const Table t = sweep(grid, env_threads());
  emit(cfg, t, table_to_json(t));
  return 0;
}

int cmd_params(const RunConfig& cfg) {
  Table t({"quantity", "value"});
  Json res;
  if (cfg.physical) {
    const auto r = derive_rates(*cfg.physical);
    Json d;
    d["g"] = cfg.physical->g;
    d["gamma_cav"] = r.gamma_cav;
    d["gamma_spont"] = r.gamma_spont;
    d["chi"] = r.chi;
    d["theta"] = r.theta;
    d["ratio"] = std::tan(r.theta);
    d["detuning_dominates_linewidth"] = r.detuning_dominates_linewidth;
    d["kappa_dominates_detuning"] = r.kappa_dominates_detuning;
    d["delta_asymmetry"] = r.delta_asymmetry;
    res["derived"] = d;
    t.add_row({std::string("g"), cfg.physical->g});
    t.add_row({std::string("gamma_cav"), r.gamma_cav});
    t.add_row({std::string("gamma_spont"), r.gamma_spont});
    t.add_row({std::string("chi"), r.chi});
    t.add_row({std::string("theta"), r.theta});
    t.add_row({std::string("ratio"), std::tan(r.theta)});
    t.add_row({std::string("detuning_dominates_linewidth"),
               static_cast<double>(r.detuning_dominates_linewidth)});
    t.add_row({std::string("kappa_dominates_detuning"),
               static_cast<double>(r.kappa_dominates_detuning)});
    t.add_row({std::string("delta_asymmetry"), r.delta_asymmetry});
  }
  if (cfg.raman) {
    const auto& a = *cfg.raman;
    const double total = raman_rate_total(a.g, a.g2, a.omega_ctrl,
                                          a.omega_ctrl2, a.delta, a.delta_hfs);
    res["raman_rate_total"] = total;
    t.add_row({std::string("raman_rate_total"), total});
  }
  if (cfg.repump) {
    const auto& a = *cfg.repump;
    const auto r = repump_populations(a.omega_repump, a.gamma0, a.gamma_plus,
                                      a.gamma_minus, a.omega_plus,
                                      a.omega_minus, a.delta_plus, a.delta_minus);
    Json d;
    d["gamma_out_plus"] = r.gamma_out_plus;
    d["gamma_out_minus"] = r.gamma_out_minus;
    d["gamma_repump"] = r.gamma_repump;
    d["external_fraction"] = detail::json_value(r.external_fraction);
    d["weak_driving_ok"] = r.weak_driving_ok;
    res["repump"] = d;
    t.add_row({std::string("gamma_out_plus"), r.gamma_out_plus});
    t.add_row({std::string("gamma_out_minus"), r.gamma_out_minus});
    t.add_row({std::string("gamma_repump"), r.gamma_repump});
    t.add_row({std::string("external_fraction"), r.external_fraction});
    t.add_row({std::string("weak_driving_ok"),
               static_cast<double>(r.weak_driving_ok)});
  }
  emit(cfg, t, std::move(res));
  return 0;
}

int dispatch(const RunConfig& cfg) {
  validate(cfg);
  switch (cfg.command) {
    case Command::darkstate: return cmd_darkstate(cfg);
    case Command::evolve: return cmd_evolve(cfg);
    case Command::optimize: return cmd_optimize(cfg);
    case Command::sweep: return cmd_sweep(cfg);
    case Command::params: return cmd_params(cfg);
    default: throw ConfigError("no command given");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative spin-squeezing toolkit: dark states, Lindblad "
               "evolution, drive optimization, parameter sweeps"};
  app.require_subcommand(1);

  SubOpts od, oe, oo, os, op, orun;

  auto* sd = app.add_subcommand("darkstate", "exact dark state and its phase sensitivity");
  add_common(sd, od);
  sd->add_option("--n", od.n, "atom count (even)");
  auto* d_ratio = sd->add_option("--ratio", od.ratio, "drive ratio tan(theta)");
  sd->add_option("--theta", od.theta, "mixing angle")->excludes(d_ratio);
  sd->add_flag("--amplitudes", od.amplitudes, "include the m-ladder amplitudes");

  auto* se = app.add_subcommand("evolve", "integrate the master equation");
  add_common(se, oe);
  se->add_option("--n", oe.n, "atom count");
  auto* e_ratio = se->add_option("--ratio", oe.ratio, "drive ratio tan(theta)");
  se->add_option("--theta", oe.theta, "mixing angle")->excludes(e_ratio);
  auto* e_chi = se->add_option("--chi", oe.chi, "cooperativity; inf = cavity-only");
  se->add_option("--gamma-cav", oe.gamma_cav, "collective rate")->excludes(e_chi);
  se->add_option("--gamma-spont", oe.gamma_spont, "single-atom rate")->excludes(e_chi);
  se->add_option("--t-max", oe.t_max, "integration span (rate units)");
  se->add_option("--sample-dt", oe.sample_dt, "sample spacing");
  se->add_option("--initial", oe.initial, "polarized, random, or file");
  se->add_option("--initial-file", oe.initial_file, "density-matrix JSON file");
  se->add_option("--random-kind", oe.random_kind, "haar or product");
  se->add_option("--seed", oe.seed, "random initial-state seed");
  add_tolerances(se, oe);
  se->add_flag("--fig3a", oe.fig3a, "preset: cavity-only pumping from the pole");
  se->add_flag("--fig3b", oe.fig3b, "preset: chi=1 from a seeded random state");

  auto* so = app.add_subcommand("optimize", "minimize dphi over the mixing angle");
  add_common(so, oo);
  so->add_option("--n", oo.n, "atom count");
  auto* o_chi = so->add_option("--chi", oo.chi, "cooperativity");
  so->add_option("--gamma-cav", oo.gamma_cav, "collective rate")->excludes(o_chi);
  so->add_option("--gamma-spont", oo.gamma_spont, "single-atom rate")->excludes(o_chi);

  auto* ss = app.add_subcommand("sweep", "grid evaluation over N, chi, ratio");
  add_common(ss, os);
  ss->add_option("--n", os.n, "comma list of atom counts");
  ss->add_option("--chi", os.chi, "comma list of cooperativities (inf allowed)");
  ss->add_option("--ratio", os.ratio_list, "comma list of drive ratios");
  ss->add_flag("--fig2", os.fig2, "preset: dark state vs mean field over the ratio");
  ss->add_flag("--fig4", os.fig4, "preset: optimized sensitivity vs cooperativity");

  auto* sp = app.add_subcommand("params", "laboratory parameters to model rates");
  add_common(sp, op);

  auto* sr = app.add_subcommand("run", "execute a config file's command");
  add_common(sr, orun);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (sd->parsed()) cfg = build_config(Command::darkstate, od);
    else if (se->parsed()) cfg = build_config(Command::evolve, oe);
    else if (so->parsed()) cfg = build_config(Command::optimize, oo);
    else if (ss->parsed()) cfg = build_config(Command::sweep, os);
    else if (sp->parsed()) cfg = build_config(Command::params, op);
    else {
      if (orun.config.empty()) throw ConfigError("run needs --config");
      cfg = config_from_json(load_json(orun.config));
      if (orun.given("--format")) cfg.output_format = parse_format(orun.format);
      if (orun.given("--output")) cfg.output_path = orun.output;
    }
    return dispatch(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const BasisMismatchError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IntegrationError& e) {
    std::fprintf(stderr, "integration error: %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
}
