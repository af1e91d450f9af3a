#pragma once
// Run configuration and serialized output: canonical JSON echo, versioned
// CSV, trajectory and table writers, and initial-state files.  Identical
// config and seed must give identical output bytes, so field order is fixed,
// formatting is locale-free, and nothing time- or host-dependent is written.
//
// JSON has no non-finite numbers: payload values degrade to null, while
// config fields that are legitimately infinite (chi for the cavity-only
// model) are written as the string "inf" and accepted back in either
// spelling.  CSV spells them inf/-inf/nan.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/errors.hpp"
#include "sqz/lindblad.hpp"
#include "sqz/phys_params.hpp"
#include "sqz/table.hpp"

namespace sqz {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCsvSchema = "sqz-csv-1";
inline constexpr const char* kJsonSchema = "sqz-json-1";

enum class Command { none, darkstate, evolve, optimize, sweep, params };
enum class InitialKind { polarized, random, file };
enum class OutputFormat { csv, json };

struct RamanInputs {
  double g = 0, g2 = 0;
  double omega_ctrl = 0, omega_ctrl2 = 0;
  double delta = 0, delta_hfs = 0;
};

struct RepumpInputs {
  double omega_repump = 0, gamma0 = 0;
  double gamma_plus = 0, gamma_minus = 0;
  double omega_plus = 0, omega_minus = 0;
  double delta_plus = 0, delta_minus = 0;
};

struct RunConfig {
  Command command = Command::none;
  std::optional<int> n;
  std::optional<double> ratio, theta;          // exactly one where an angle is used
  std::optional<double> chi;                   // exactly one of chi / rate pair
  std::optional<double> gamma_cav, gamma_spont;
  std::optional<double> t_max, sample_dt;
  std::optional<std::uint64_t> seed;
  InitialKind initial = InitialKind::polarized;
  std::optional<std::string> initial_file;
  RandomKind random_kind = RandomKind::haar_pure;
  std::optional<double> rtol, atol, conv_tol;
  OutputFormat output_format = OutputFormat::csv;
  std::optional<std::string> output_path;
  std::vector<double> n_list, chi_list, ratio_list;  // sweep grids
  std::optional<CavityAtomParams> physical;
  std::optional<RamanInputs> raman;
  std::optional<RepumpInputs> repump;
  bool amplitudes = false;  // darkstate: include the m-ladder amplitudes
};

// ---- enum spellings ----

inline const char* to_string(Command c) {
  switch (c) {
    case Command::darkstate: return "darkstate";
    case Command::evolve: return "evolve";
    case Command::optimize: return "optimize";
    case Command::sweep: return "sweep";
    case Command::params: return "params";
    default: return "none";
  }
}

inline Command parse_command(const std::string& s) {
  for (Command c : {Command::darkstate, Command::evolve, Command::optimize,
                    Command::sweep, Command::params})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown command: " + s);
}

inline const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::random: return "random";
    case InitialKind::file: return "file";
    default: return "polarized";
  }
}

inline InitialKind parse_initial(const std::string& s) {
  if (s == "polarized") return InitialKind::polarized;
  if (s == "random") return InitialKind::random;
  if (s == "file") return InitialKind::file;
  throw ConfigError("unknown initial state kind: " + s);
}

inline const char* to_string(OutputFormat f) {
  return f == OutputFormat::json ? "json" : "csv";
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("unknown output format: " + s);
}

inline const char* to_string(RandomKind k) {
  return k == RandomKind::product_random ? "product" : "haar";
}

inline RandomKind parse_random_kind(const std::string& s) {
  if (s == "haar") return RandomKind::haar_pure;
  if (s == "product") return RandomKind::product_random;
  throw ConfigError("unknown random state kind: " + s);
}

// ---- config serialization ----

namespace detail {

// chi may be infinite; JSON numbers cannot.
inline Json finite_or_string(double v) {
  if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
  if (std::isnan(v)) return Json("nan");
  return Json(v);
}

inline double number_or_string(const Json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("config field '" + key + "' is not a number");
}

}  // namespace detail

inline Json config_to_json(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  if (c.n) j["n"] = *c.n;
  if (c.ratio) j["ratio"] = *c.ratio;
  if (c.theta) j["theta"] = *c.theta;
  if (c.chi) j["chi"] = detail::finite_or_string(*c.chi);
  if (c.gamma_cav) j["gamma_cav"] = *c.gamma_cav;
  if (c.gamma_spont) j["gamma_spont"] = *c.gamma_spont;
  if (c.t_max) j["t_max"] = *c.t_max;
  if (c.sample_dt) j["sample_dt"] = *c.sample_dt;
  if (c.seed) j["seed"] = *c.seed;
  if (c.command == Command::evolve) {
    j["initial"] = to_string(c.initial);
    if (c.initial == InitialKind::random) j["random_kind"] = to_string(c.random_kind);
    if (c.initial_file) j["initial_file"] = *c.initial_file;
  }
  if (c.rtol) j["rtol"] = *c.rtol;
  if (c.atol) j["atol"] = *c.atol;
  if (c.conv_tol) j["conv_tol"] = *c.conv_tol;
  j["output_format"] = to_string(c.output_format);
  if (c.output_path) j["output_path"] = *c.output_path;
  if (!c.n_list.empty()) j["n_list"] = c.n_list;
  if (!c.chi_list.empty()) {
    Json a = Json::array();
    for (double v : c.chi_list) a.push_back(detail::finite_or_string(v));
    j["chi_list"] = a;
  }
  if (!c.ratio_list.empty()) j["ratio_list"] = c.ratio_list;
  if (c.physical) {
    const auto& p = *c.physical;
    Json pj;
    pj["g"] = p.g;
    pj["kappa"] = p.kappa;
    pj["gamma"] = p.gamma;
    pj["gamma0"] = p.gamma0;
    pj["delta"] = p.delta;
    if (!std::isnan(p.delta_prime)) pj["delta_prime"] = p.delta_prime;
    pj["omega_plus"] = p.omega_plus;
    pj["omega_minus"] = p.omega_minus;
    j["physical"] = pj;
  }
  if (c.raman) {
    const auto& r = *c.raman;
    j["raman"] = Json{{"g", r.g},
                      {"g2", r.g2},
                      {"omega_ctrl", r.omega_ctrl},
                      {"omega_ctrl2", r.omega_ctrl2},
                      {"delta", r.delta},
                      {"delta_hfs", detail::finite_or_string(r.delta_hfs)}};
  }
  if (c.repump) {
    const auto& r = *c.repump;
    j["repump"] = Json{{"omega_repump", r.omega_repump},
                       {"gamma0", r.gamma0},
                       {"gamma_plus", r.gamma_plus},
                       {"gamma_minus", r.gamma_minus},
                       {"omega_plus", r.omega_plus},
                       {"omega_minus", r.omega_minus},
                       {"delta_plus", r.delta_plus},
                       {"delta_minus", r.delta_minus}};
  }
  if (c.amplitudes) j["amplitudes"] = true;
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "command", "n", "ratio", "theta", "chi", "gamma_cav", "gamma_spont",
      "t_max", "sample_dt", "seed", "initial", "random_kind", "initial_file",
      "rtol", "atol", "conv_tol", "output_format", "output_path", "n_list",
      "chi_list", "ratio_list", "physical", "raman", "repump", "amplitudes"};
  for (const auto& [key, val] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw ConfigError("unknown config field: " + key);
  }

  RunConfig c;
  if (j.contains("command")) c.command = parse_command(j["command"].get<std::string>());
  auto num = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k)) return std::nullopt;
    return detail::number_or_string(j.at(k), k);
  };
  if (j.contains("n")) {
    const double v = detail::number_or_string(j.at("n"), "n");
    if (!(v >= 1) || v != std::floor(v) || v > 2e9)
      throw ConfigError("config field 'n' must be a positive integer");
    c.n = static_cast<int>(v);
  }
  c.ratio = num("ratio");
  c.theta = num("theta");
  c.chi = num("chi");
  c.gamma_cav = num("gamma_cav");
  c.gamma_spont = num("gamma_spont");
  c.t_max = num("t_max");
  c.sample_dt = num("sample_dt");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("initial")) c.initial = parse_initial(j.at("initial").get<std::string>());
  if (j.contains("random_kind"))
    c.random_kind = parse_random_kind(j.at("random_kind").get<std::string>());
  if (j.contains("initial_file")) c.initial_file = j.at("initial_file").get<std::string>();
  c.rtol = num("rtol");
  c.atol = num("atol");
  c.conv_tol = num("conv_tol");
  if (j.contains("output_format"))
    c.output_format = parse_format(j.at("output_format").get<std::string>());
  if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  auto numlist = [&](const char* k) {
    std::vector<double> out;
    if (!j.contains(k)) return out;
    if (!j.at(k).is_array()) throw ConfigError(std::string("config field '") + k + "' must be an array");
    for (const auto& e : j.at(k)) out.push_back(detail::number_or_string(e, k));
    return out;
  };
  c.n_list = numlist("n_list");
  c.chi_list = numlist("chi_list");
  c.ratio_list = numlist("ratio_list");
  if (j.contains("physical")) {
    const auto& pj = j.at("physical");
    CavityAtomParams p;
    if (pj.contains("dipole") || pj.contains("mode_volume") || pj.contains("omega_a")) {
      if (!(pj.contains("dipole") && pj.contains("mode_volume") && pj.contains("omega_a")))
        throw ConfigError("physical: dipole, mode_volume, omega_a must come together");
      p.g = coupling_from_dipole(pj.at("dipole").get<double>(),
                                 pj.at("mode_volume").get<double>(),
                                 pj.at("omega_a").get<double>());
      if (pj.contains("g")) throw ConfigError("physical: give g or the dipole triple, not both");
    } else if (pj.contains("g")) {
      p.g = pj.at("g").get<double>();
    }
    p.kappa = pj.value("kappa", 0.0);
    p.gamma = pj.value("gamma", 0.0);
    p.gamma0 = pj.value("gamma0", 0.0);
    p.delta = pj.value("delta", 0.0);
    if (pj.contains("delta_prime")) p.delta_prime = pj.at("delta_prime").get<double>();
    p.omega_plus = pj.value("omega_plus", 0.0);
    p.omega_minus = pj.value("omega_minus", 0.0);
    c.physical = p;
  }
  if (j.contains("raman")) {
    const auto& rj = j.at("raman");
    RamanInputs r;
    r.g = rj.value("g", 0.0);
    r.g2 = rj.value("g2", 0.0);
    r.omega_ctrl = rj.value("omega_ctrl", 0.0);
    r.omega_ctrl2 = rj.value("omega_ctrl2", 0.0);
    r.delta = rj.value("delta", 0.0);
    r.delta_hfs = rj.contains("delta_hfs")
                      ? detail::number_or_string(rj.at("delta_hfs"), "delta_hfs")
                      : 0.0;
    c.raman = r;
  }
  if (j.contains("repump")) {
    const auto& rj = j.at("repump");
    RepumpInputs r;
    r.omega_repump = rj.value("omega_repump", 0.0);
    r.gamma0 = rj.value("gamma0", 0.0);
    r.gamma_plus = rj.value("gamma_plus", 0.0);
    r.gamma_minus = rj.value("gamma_minus", 0.0);
    r.omega_plus = rj.value("omega_plus", 0.0);
    r.omega_minus = rj.value("omega_minus", 0.0);
    r.delta_plus = rj.value("delta_plus", 0.0);
    r.delta_minus = rj.value("delta_minus", 0.0);
    c.repump = r;
  }
  if (j.contains("amplitudes")) c.amplitudes = j.at("amplitudes").get<bool>();
  return c;
}

// ---- validation and derived quantities ----

inline void validate(const RunConfig& c) {
  auto need_angle = [&] {
    if (c.ratio.has_value() == c.theta.has_value())
      throw ConfigError("give exactly one of ratio / theta");
    if (c.ratio && !(*c.ratio >= 0)) throw ConfigError("ratio must be >= 0");
    if (c.theta && !(*c.theta >= 0)) throw ConfigError("theta must be >= 0");
  };
  auto need_rates = [&] {
    const bool pair = c.gamma_cav || c.gamma_spont;
    if (c.chi.has_value() == pair)
      throw ConfigError("give exactly one of chi / (gamma_cav, gamma_spont)");
    if (pair && !(c.gamma_cav && c.gamma_spont))
      throw ConfigError("gamma_cav and gamma_spont must come together");
    if (c.chi && !(*c.chi > 0)) throw ConfigError("chi must be positive");
    if (pair && (!(*c.gamma_cav >= 0) || !(*c.gamma_spont >= 0)))
      throw ConfigError("rates must be >= 0");
  };
  auto need_n = [&] {
    if (!c.n) throw ConfigError("n is required");
  };

  switch (c.command) {
    case Command::darkstate:
      need_n();
      need_angle();
      break;
    case Command::evolve:
      need_n();
      need_angle();
      need_rates();
      if (c.initial == InitialKind::file && !c.initial_file)
        throw ConfigError("initial=file needs initial_file");
      if (c.t_max && !(*c.t_max > 0)) throw ConfigError("t_max must be positive");
      if (c.sample_dt && !(*c.sample_dt > 0)) throw ConfigError("sample_dt must be positive");
      break;
    case Command::optimize:
      need_n();
      need_rates();
      if (c.ratio || c.theta)
        throw ConfigError("optimize searches the angle; ratio/theta must not be given");
      break;
    case Command::sweep:
      if (c.n_list.empty() || c.chi_list.empty())
        throw ConfigError("sweep needs n_list and chi_list");
      for (double v : c.n_list)
        if (!(v >= 1) || v != std::floor(v)) throw ConfigError("n_list entries must be integers >= 1");
      for (double v : c.chi_list)
        if (!(v > 0)) throw ConfigError("chi_list entries must be positive");
      for (double v : c.ratio_list)
        if (!(v >= 0)) throw ConfigError("ratio_list entries must be >= 0");
      break;
    case Command::params:
      if (!c.physical && !c.raman && !c.repump)
        throw ConfigError("params needs a physical, raman, or repump block");
      break;
    default:
      throw ConfigError("no command given");
  }
  for (auto [v, name] : {std::pair{c.rtol, "rtol"}, {c.atol, "atol"}, {c.conv_tol, "conv_tol"}})
    if (v && !(*v > 0) && !(name == std::string("conv_tol") && *v == 0))
      throw ConfigError(std::string(name) + " must be positive");
}

inline double config_theta(const RunConfig& c) {
  if (c.theta) return *c.theta;
  if (!c.ratio) throw ConfigError("no angle given");
  return std::atan(*c.ratio);
}

// Rate normalization when only chi is given: the spontaneous rate is the
// unit (gamma_spont = 1, gamma_cav = chi); cavity-only runs use gamma_cav
// = 1 instead.
inline std::pair<double, double> config_rates(const RunConfig& c) {
  if (c.chi) {
    if (std::isinf(*c.chi)) return {1.0, 0.0};
    return {*c.chi, 1.0};
  }
  if (c.gamma_cav && c.gamma_spont) return {*c.gamma_cav, *c.gamma_spont};
  throw ConfigError("no rates given");
}

inline double config_chi(const RunConfig& c) {
  if (c.chi) return *c.chi;
  if (c.gamma_cav && c.gamma_spont) {
    if (*c.gamma_spont == 0) return std::numeric_limits<double>::infinity();
    return *c.gamma_cav / *c.gamma_spont;
  }
  throw ConfigError("no rates given");
}

// ---- CSV ----

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string csv_cell(const Cell& c) {
  if (std::holds_alternative<double>(c)) return fmt_double(std::get<double>(c));
  return csv_quote(std::get<std::string>(c));
}

}  // namespace detail

// First line carries the schema tag; further comment lines (config echo,
// convergence summary) precede the header row.
inline std::string table_to_csv(const Table& t,
                                const std::vector<std::string>& comments = {}) {
  std::string out = std::string("# ") + kCsvSchema + "\n";
  for (const auto& cl : comments) out += "# " + cl + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out += (i ? "," : "") + detail::csv_quote(t.columns[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out += (i ? "," : "") + detail::csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = {
      "t", "Sz", "dSz", "Sx2", "Sy2", "S2", "dphi", "purity", "trace_err"};
  return cols;
}

inline Table trajectory_table(const Trajectory& tr) {
  Table t(trajectory_columns());
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto& m = tr.moments[i];
    t.add_row({tr.times[i], m.sz, m.d_sz, m.sx2, m.sy2, m.s_total_sq, m.dphi,
               tr.purity[i], tr.trace_err[i]});
  }
  return t;
}

// ---- JSON ----

namespace detail {

inline Json json_value(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(nullptr);
}

inline Json json_cell(const Cell& c) {
  if (std::holds_alternative<double>(c)) return json_value(std::get<double>(c));
  return Json(std::get<std::string>(c));
}

}  // namespace detail

inline Json table_to_json(const Table& t) {
  Json j;
  j["columns"] = t.columns;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::array();
    for (const auto& c : row) r.push_back(detail::json_cell(c));
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

inline Json trajectory_summary_json(const Trajectory& tr) {
  Json s;
  s["converged"] = tr.converged;
  s["t_max_used"] = tr.t_max_used;
  s["sample_dt_used"] = tr.sample_dt_used;
  s["conv_tol_used"] = tr.conv_tol_used;
  s["final_residual"] = detail::json_value(tr.final_residual);
  s["max_trace_err"] = detail::json_value(tr.max_trace_err);
  s["max_herm_err"] = detail::json_value(tr.max_herm_err);
  s["s2_drift"] = detail::json_value(tr.s2_drift);
  s["min_diag"] = detail::json_value(tr.min_diag);
  s["final_min_eig"] = detail::json_value(tr.final_min_eig);
  s["steps_accepted"] = tr.stats.accepted;
  s["steps_rejected"] = tr.stats.rejected;
  s["rhs_evals"] = tr.stats.rhs_evals;
  Json st;
  st["Sz"] = detail::json_value(tr.steady.sz);
  st["dSz"] = detail::json_value(tr.steady.d_sz);
  st["Sx2"] = detail::json_value(tr.steady.sx2);
  st["Sy2"] = detail::json_value(tr.steady.sy2);
  st["S2"] = detail::json_value(tr.steady.s_total_sq);
  st["dphi"] = detail::json_value(tr.steady.dphi);
  s["steady"] = st;
  return s;
}

// ---- result documents ----

inline std::string document_json(const RunConfig& c, Json payload) {
  Json j;
  j["schema"] = kJsonSchema;
  j["config"] = config_to_json(c);
  j["result"] = std::move(payload);
  return j.dump(2) + "\n";
}

inline std::string document_csv(const RunConfig& c, const Table& t,
                                const std::vector<std::string>& extra = {}) {
  std::vector<std::string> comments = {"config " + config_to_json(c).dump()};
  comments.insert(comments.end(), extra.begin(), extra.end());
  return table_to_csv(t, comments);
}

inline void write_output(const std::string& text, const std::optional<std::string>& path) {
  if (!path || path->empty() || *path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + *path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw ConfigError("write failed: " + *path);
}

// ---- initial-state files ----
// {"n": int, "basis": "symmetric"|"full", "rho_re": [[...]], "rho_im": [[...]]}

inline DensityMatrix state_from_json(const Json& j) {
  if (!j.contains("n") || !j.contains("basis") || !j.contains("rho_re"))
    throw ConfigError("state file needs n, basis, rho_re");
  const int n = j.at("n").get<int>();
  const std::string bs = j.at("basis").get<std::string>();
  Basis basis;
  if (bs == "symmetric") basis = Basis::symmetric;
  else if (bs == "full") basis = Basis::full;
  else throw ConfigError("state file: unknown basis " + bs);
  const int dim = basis == Basis::symmetric ? n + 1 : checked_full_dim(EnsembleSize{n});

  auto load = [&](const char* key, bool required) {
    DMat m = DMat::Zero(dim, dim);
    if (!j.contains(key)) {
      if (required) throw ConfigError(std::string("state file needs ") + key);
      return m;
    }
    const auto& a = j.at(key);
    if (!a.is_array() || static_cast<int>(a.size()) != dim)
      throw ConfigError(std::string("state file: ") + key + " must be a " +
                        std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    for (int r = 0; r < dim; ++r) {
      if (!a[r].is_array() || static_cast<int>(a[r].size()) != dim)
        throw ConfigError(std::string("state file: ragged row in ") + key);
      for (int cc = 0; cc < dim; ++cc) m(r, cc) = a[r][cc].get<double>();
    }
    return m;
  };
  DMat re = load("rho_re", true);
  DMat im = load("rho_im", false);

  DensityMatrix out;
  out.n = EnsembleSize{n};
  out.basis = basis;
  out.rho = re + cd(0, 1) * im;
  const double asym = (out.rho - out.rho.adjoint().eval()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) throw ConfigError("state file: matrix is not hermitian");
  const double tr = out.rho.real().trace();
  if (!(std::abs(tr) > 1e-12)) throw ConfigError("state file: vanishing trace");
  out.rho /= tr;
  return out;
}

inline DensityMatrix state_from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open state file: " + path);
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("state file parse error: " + std::string(e.what()));
  }
  return state_from_json(j);
}

// Config to ready-to-integrate pieces.  Polarized cavity-only runs stay in
// the symmetric sector; random states mix S sectors and single-atom decay
// leaves the ladder, so everything else gets the full space.  State files
// carry their own basis.
inline std::tuple<DensityMatrix, ChannelSet, EvolveOptions> prepare_evolve(
    const RunConfig& c) {
  const EnsembleSize n{*c.n};
  const double theta = config_theta(c);
  const auto [gc, gs] = config_rates(c);

  DensityMatrix rho0;
  if (c.initial == InitialKind::file) {
    rho0 = state_from_file(*c.initial_file);
    if (rho0.n.n_atoms != n.n_atoms)
      throw ConfigError("initial state file is for N = " +
                        std::to_string(rho0.n.n_atoms));
  } else if (c.initial == InitialKind::random) {
    rho0 = random_state(n, c.seed.value_or(0), c.random_kind);
  } else {
    rho0 = polarized_state(n, gs == 0 ? Basis::symmetric : Basis::full);
  }
  ChannelSet ch = make_channels(n, rho0.basis, theta, gc, gs);

  EvolveOptions opt;
  if (c.t_max) opt.t_max = *c.t_max;
  if (c.sample_dt) opt.sample_dt = *c.sample_dt;
  if (c.conv_tol) opt.conv_tol_rate = *c.conv_tol;
  if (c.rtol) opt.integ.rtol = *c.rtol;
  if (c.atol) opt.integ.atol = *c.atol;
  return {std::move(rho0), std::move(ch), opt};
}

}  // namespace sqz
