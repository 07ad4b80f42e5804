#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "delaychain/analysis.hpp"
#include "delaychain/csv.hpp"
#include "delaychain/errors.hpp"
#include "delaychain/integrate.hpp"
#include "delaychain/parallel.hpp"
#include "delaychain/stability.hpp"
#include "json.hpp"

namespace delaychain::cli {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kSystemKeys = {
    "system", "alpha", "beta", "gamma", "a",   "b",  "c",
    "T",      "delays", "weights",      "N",   "dde"};
const std::vector<std::string> kRunKeys = {
    "dt", "transient", "sample-dt", "phi", "t-end", "seed",
    "workers", "out", "print-config", "config"};
const std::vector<std::string> kFamilyKeys = {
    "transient-periods", "measure-periods", "period-factor",
    "lyap-span", "lyap-renorm", "lyap-warmup"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// Stream selection: --out file, or stdout.
class Output {
public:
  explicit Output(const KeyValueConfig& cfg) {
    if (const auto path = cfg.get(std::string("out")); path && *path != "-") {
      file_.open(*path);
      if (!file_) throw ConfigError("cannot open output file: " + *path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

void normalize_system_keys(KeyValueConfig& cfg) {
  if (cfg.get_string_or("dde", "false") == "true") cfg.set("N", "dde");
  cfg.set_default("system", "mackey-glass");
  const std::string name = cfg.get_string("system");
  if (name == "mackey-glass") {
    cfg.set_default("alpha", "0.2");
    cfg.set_default("beta", "0.1");
    cfg.set_default("gamma", "10");
    cfg.set_default("phi", "0.9");
  } else if (name == "linear") {
    cfg.set_default("c", "0");
    cfg.set_default("phi", "0.5");
  }
  cfg.set_default("N", "dde");
}

FamilyOptions family_options(KeyValueConfig& cfg) {
  cfg.set_default("transient-periods", "150");
  cfg.set_default("measure-periods", "60");
  cfg.set_default("period-factor", "2.9");
  cfg.set_default("lyap-span", "20000");
  cfg.set_default("lyap-renorm", "1");
  cfg.set_default("lyap-warmup", "100");
  cfg.set_default("sample-dt", "0.05");
  cfg.set_default("dt", "0.01");
  cfg.set_default("workers", "1");
  FamilyOptions opts;
  opts.dt = cfg.get_double("dt");
  opts.sample_dt = cfg.get_double("sample-dt");
  opts.transient_periods = cfg.get_double("transient-periods");
  opts.measure_periods = cfg.get_double("measure-periods");
  opts.period_factor = cfg.get_double("period-factor");
  opts.lyapunov.span = cfg.get_double("lyap-span");
  opts.lyapunov.renorm_interval = cfg.get_double("lyap-renorm");
  opts.lyapunov.warmup = cfg.get_double("lyap-warmup");
  opts.workers = cfg.get_int("workers");
  return opts;
}

/// Family over the average delay; scans vary a single delay only.
SystemFamily family_from_config(KeyValueConfig& cfg) {
  normalize_system_keys(cfg);
  const std::string name = cfg.get_string("system");
  std::optional<int> order;
  const std::string n = cfg.get_string("N");
  if (n != "dde") order = parse_int(n, "N");
  FamilyOptions opts = family_options(cfg);
  SystemFamily fam;
  if (name == "mackey-glass") {
    MackeyGlassParams p{cfg.get_double("alpha"), cfg.get_double("beta"),
                        cfg.get_double("gamma")};
    fam = SystemFamily::mackey_glass(p, order, opts);
  } else if (name == "linear") {
    LinearDelayParams p{cfg.get_double("a"), cfg.get_double("b"),
                        cfg.get_double("c")};
    fam = SystemFamily::linear(p, order, opts);
  } else {
    throw ConfigError("unknown system: " + name);
  }
  fam.phi = InitialFunction::constant(cfg.get_double("phi"));
  return fam;
}

void echo_header(CsvWriter& w, const std::string& command,
                 const KeyValueConfig& cfg) {
  w.comment("delaychain " + command);
  for (const auto& [k, v] : cfg.sorted_entries())
    if (k != "print-config") w.keyval(k, v);
}

bool maybe_print_config(const std::string& command, KeyValueConfig& cfg) {
  if (cfg.get_string_or("print-config", "false") != "true") return false;
  CsvWriter w(std::cout);
  echo_header(w, command, cfg);
  return true;
}

std::string order_label(const SystemFamily& fam) {
  return fam.is_dde() ? "dde" : std::to_string(*fam.order);
}

json bifurcation_json(const BifurcationPoint& pt) {
  json j;
  j["kind"] = to_string(pt.kind);
  if (std::isinf(pt.order))
    j["order"] = "dde";
  else
    j["order"] = static_cast<int>(pt.order);
  j["T_c"] = pt.T_c;
  j["bracket_lo"] = pt.bracket_lo;
  j["bracket_hi"] = pt.bracket_hi;
  j["bracket_width"] = pt.bracket_width();
  j["diag_lo"] = pt.diag_lo;
  j["diag_hi"] = pt.diag_hi;
  return j;
}

json verdict_json(const ChaosVerdict& v) {
  json j;
  j["class"] = to_string(v.cls);
  json e;
  e["lambda_max"] = v.evidence.lambda_max;
  e["lambda_std_error"] = v.evidence.lambda_std_error;
  e["s2"] = v.evidence.s2;
  e["mean"] = v.evidence.mean;
  e["c12_tail"] = v.evidence.c12_tail;
  e["distance_delta_slope"] = v.evidence.distance_delta_slope;
  e["delta"] = v.evidence.delta;
  e["pairs"] = v.evidence.pairs;
  e["seed"] = v.evidence.seed;
  j["evidence"] = e;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

int run_simulate(KeyValueConfig cfg) {
  cfg.require_known(concat({kSystemKeys, kRunKeys}));
  normalize_system_keys(cfg);
  cfg.set_default("seed", "0");
  cfg.set_default("workers", "1");
  cfg.set_default("sample-dt", "0.05");

  const SystemConfig sc = system_from_config(cfg);
  const double max_delay = sc.system.max_delay();

  double dt = cfg.get_double_or("dt", 0.01);
  std::optional<ChainSystem> chain;
  if (!sc.use_dde) {
    chain.emplace(sc.system, sc.orders);
    dt = std::min(dt, chain->step_hint());
  }
  cfg.set("dt", format_double(dt));
  const double transient = cfg.get_double_or("transient", 10.0 * max_delay);
  cfg.set("transient", format_double(transient));
  const double t_end =
      cfg.get_double_or("t-end", transient + 100.0 * max_delay);
  cfg.set("t-end", format_double(t_end));
  const double phi_value = cfg.get_double("phi");

  if (maybe_print_config("simulate", cfg)) return kOk;

  IntegrationOptions opts;
  opts.transient = transient;
  opts.stride =
      std::max(1, static_cast<int>(std::round(cfg.get_double("sample-dt") / dt)));

  Output out(cfg);
  CsvWriter w(out.stream());
  echo_header(w, "simulate", cfg);

  const InitialFunction phi = InitialFunction::constant(phi_value);
  if (sc.use_dde) {
    const Trajectory traj = integrate_dde(sc.system, phi, t_end, dt, opts);
    const std::vector<std::string> cols{"t", "x"};
    w.header(cols);
    for (std::size_t i = 0; i < traj.samples(); ++i) {
      const double row[2] = {traj.time(i), traj.value(i, 0)};
      w.row(row);
    }
  } else {
    const Trajectory traj =
        integrate_chain(*chain, init_chain_state(*chain, phi), t_end, dt, opts);
    const std::vector<std::string> cols{"t", "x0", "xN"};
    w.header(cols);
    for (std::size_t i = 0; i < traj.samples(); ++i) {
      const double row[3] = {traj.time(i), traj.value(i, 0), traj.value(i, 1)};
      w.row(row);
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run_hopf(KeyValueConfig cfg) {
  cfg.require_known(concat({{"a", "b", "N", "out", "seed", "workers",
                             "print-config", "trace-out", "trace-N", "T-min",
                             "T-max", "T-step"}}));
  cfg.set_default("a", "0.4");
  cfg.set_default("b", "0.1");
  cfg.set_default("N", "10,30,100,300,1000");
  cfg.set_default("seed", "0");
  cfg.set_default("workers", "1");
  if (maybe_print_config("hopf", cfg)) return kOk;

  const double a = cfg.get_double("a");
  const double b = cfg.get_double("b");
  const auto orders = cfg.get_int_list("N");
  const HopfResult sharp = hopf_analytic(a, b);
  const double k1 = hopf_perturbation_k1(a, b);

  Output out(cfg);
  CsvWriter w(out.stream());
  echo_header(w, "hopf", cfg);
  w.keyval("T_hopf_analytic", sharp.T_hopf);
  w.keyval("q_hopf", sharp.q_hopf);
  w.keyval("k1", k1);
  std::vector<std::string> cols{"N",  "T_hopf", "mu",
                                "T_perturbation", "mu_perturbation", "status"};
  w.header(cols);

  struct Row {
    double values[5];
    bool no_hopf;
  };
  std::vector<Row> rows(orders.size());
  parallel_for(orders.size(), cfg.get_int("workers"), [&](std::size_t i) {
    Row& r = rows[i];
    const int n = orders[i];
    const HopfResult pert = hopf_perturbation(a, b, n);
    r.values[0] = n;
    r.values[3] = pert.T_hopf;
    r.values[4] = relative_deviation(sharp.T_hopf, pert.T_hopf);
    try {
      const HopfResult h = hopf_chain(a, b, n);
      r.values[1] = h.T_hopf;
      r.values[2] = relative_deviation(sharp.T_hopf, h.T_hopf);
      r.no_hopf = false;
    } catch (const NoHopfError&) {
      r.values[1] = kNaN;
      r.values[2] = kNaN;
      r.no_hopf = true;
    }
  });
  for (const auto& r : rows) {
    std::ostringstream line;
    for (double v : r.values) line << format_double(v) << ",";
    line << (r.no_hopf ? "no-hopf" : "ok");
    out.stream() << line.str() << "\n";
  }

  if (const auto trace_path = cfg.get("trace-out")) {
    std::ofstream tf(*trace_path);
    if (!tf) throw ConfigError("cannot open output file: " + *trace_path);
    CsvWriter tw(tf);
    echo_header(tw, "hopf-trace", cfg);
    const double t_min = cfg.get_double_or("T-min", 1.0);
    const double t_max = cfg.get_double_or("T-max", 10.0);
    const double t_step = cfg.get_double_or("T-step", 0.1);
    std::vector<std::string> tcols{"T", "order", "re_lambda", "im_lambda"};
    tw.header(tcols);
    auto emit = [&](double order, const std::vector<BranchPoint>& pts) {
      for (const auto& p : pts) {
        const double row[4] = {p.T, order, p.lambda.real(), p.lambda.imag()};
        tw.row(row);
      }
    };
    emit(kInf, trace_dde_branch(a, b, t_min, t_max, t_step));
    if (cfg.has("trace-N"))
      for (int n : cfg.get_int_list("trace-N"))
        emit(n, trace_chain_branch(a, b, n, t_min, t_max, t_step));
  }
  return kOk;
}

// ---------------------------------------------------------------------------

namespace {

struct ScanRow {
  double T = 0.0;
  double lambda = kNaN;
  double lambda_err = kNaN;
  double multiplicity = kNaN;
  double aperiodic = kNaN;
};

}  // namespace

int run_scan(KeyValueConfig cfg) {
  cfg.require_known(concat({kSystemKeys, kRunKeys, kFamilyKeys,
                            {"T-min", "T-max", "T-step", "diagnostics",
                             "refine", "refined-out", "bracket-tol"}}));
  cfg.set_default("seed", "0");
  cfg.set_default("diagnostics", "multiplicity,lyapunov");
  cfg.set_default("bracket-tol", "0.01");
  SystemFamily fam = family_from_config(cfg);
  if (maybe_print_config("scan", cfg)) return kOk;

  const double t_min = cfg.get_double("T-min");
  const double t_max = cfg.get_double("T-max");
  const double t_step = cfg.get_double("T-step");
  if (!(t_min > 0.0) || !(t_max > t_min) || !(t_step > 0.0))
    throw ConfigError("scan: need 0 < T-min < T-max and T-step > 0");

  bool want_mult = false, want_lyap = false;
  for (const auto& d : split_list(cfg.get_string("diagnostics"))) {
    if (d == "multiplicity")
      want_mult = true;
    else if (d == "lyapunov")
      want_lyap = true;
    else
      throw ConfigError("unknown diagnostic: " + d);
  }

  std::vector<double> grid;
  for (double T = t_min; T <= t_max + 1e-9; T += t_step) grid.push_back(T);

  std::vector<ScanRow> rows(grid.size());
  parallel_for(grid.size(), fam.opts.workers, [&](std::size_t i) {
    ScanRow& r = rows[i];
    r.T = grid[i];
    if (want_lyap) {
      const LyapunovResult lr = fam.lyapunov(r.T);
      r.lambda = lr.lambda_max();
      r.lambda_err = lr.std_error;
    }
    if (want_mult) {
      try {
        const MultiplicityResult m = multiplicity_at(fam, r.T);
        r.multiplicity = m.clusters;
        r.aperiodic = m.aperiodic ? 1.0 : 0.0;
      } catch (const InsufficientDataError&) {
        r.multiplicity = 0.0;  // fixpoint regime
        r.aperiodic = 0.0;
      }
    }
  });

  Output out(cfg);
  CsvWriter w(out.stream());
  echo_header(w, "scan", cfg);
  w.keyval("order", order_label(fam));
  std::vector<std::string> cols{"T", "lambda_max", "lambda_std_error",
                                "multiplicity", "aperiodic"};
  w.header(cols);
  for (const auto& r : rows) {
    const double row[5] = {r.T, r.lambda, r.lambda_err, r.multiplicity,
                           r.aperiodic};
    w.row(row);
  }

  // bisection refinement of the requested transitions; a bad bracket is
  // reported and the scan result stays valid
  if (cfg.has("refine")) {
    RefineOptions ropts;
    ropts.bracket_tol = cfg.get_double("bracket-tol");
    json refined = json::array();
    for (const auto& kind_name : split_list(cfg.get_string("refine"))) {
      BifurcationKind kind;
      if (kind_name == "PD1")
        kind = BifurcationKind::PD1;
      else if (kind_name == "PD2")
        kind = BifurcationKind::PD2;
      else if (kind_name == "ChaosOnset")
        kind = BifurcationKind::ChaosOnset;
      else if (kind_name == "Hopf")
        kind = BifurcationKind::Hopf;
      else
        throw ConfigError("unknown bifurcation kind: " + kind_name);

      // bracket from the grid diagnostics
      std::optional<std::pair<double, double>> bracket;
      if (kind == BifurcationKind::ChaosOnset) {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i)
          if (rows[i].lambda <= ropts.lyapunov_tol &&
              rows[i + 1].lambda > ropts.lyapunov_tol) {
            bracket = {rows[i].T, rows[i + 1].T};
            break;
          }
      } else if (kind == BifurcationKind::Hopf) {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i)
          if (rows[i].multiplicity == 0.0 && rows[i + 1].multiplicity > 0.0) {
            bracket = {rows[i].T, rows[i + 1].T};
            break;
          }
      } else {
        const int which = kind == BifurcationKind::PD1 ? 1 : 2;
        int seen = 0;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
          const double m0 = rows[i].multiplicity, m1 = rows[i + 1].multiplicity;
          if (m0 >= 1 && rows[i].aperiodic == 0.0 && m1 >= 2 * m0 &&
              rows[i + 1].aperiodic == 0.0) {
            if (++seen == which) {
              bracket = {rows[i].T, rows[i + 1].T};
              break;
            }
          }
        }
      }

      json entry;
      entry["kind"] = kind_name;
      if (!bracket) {
        entry["error"] = "no bracket found on the scan grid";
        std::cerr << "scan: no bracket for " << kind_name << "\n";
      } else {
        try {
          const BifurcationPoint pt =
              find_bifurcation(fam, kind, bracket->first, bracket->second, ropts);
          entry = bifurcation_json(pt);
        } catch (const BracketError& e) {
          entry["error"] = e.what();
          std::cerr << "scan: " << e.what() << "\n";
        }
      }
      refined.push_back(entry);
    }
    if (const auto path = cfg.get("refined-out"))
      write_json_file(*path, refined);
    else
      std::cerr << refined.dump(2) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run_crosscorr(KeyValueConfig cfg) {
  cfg.require_known(concat({kSystemKeys, kRunKeys, kFamilyKeys,
                            {"delta", "pairs", "horizon", "verdict-out"}}));
  cfg.set_default("seed", "0");
  cfg.set_default("delta", "1e-06");
  cfg.set_default("pairs", "100");
  cfg.set_default("horizon", "5000");
  SystemFamily fam = family_from_config(cfg);
  if (maybe_print_config("crosscorr", cfg)) return kOk;

  const double T = cfg.get_double("T");
  const double delta = cfg.get_double("delta");
  const int pairs = cfg.get_int("pairs");
  const double horizon = cfg.get_double("horizon");
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed"));

  const LyapunovResult lyap = fam.lyapunov(T);
  const CrossCorrelation cc =
      cross_correlation(fam, T, delta, pairs, horizon, seed);

  Output out(cfg);
  CsvWriter w(out.stream());
  echo_header(w, "crosscorr", cfg);
  w.keyval("order", order_label(fam));
  w.keyval("s2", cc.s2);
  w.keyval("mean", cc.mean);
  w.keyval("lambda_max", lyap.lambda_max());
  std::vector<std::string> cols{"t", "C12", "D12"};
  w.header(cols);
  for (std::size_t i = 0; i < cc.time.size(); ++i) {
    const double row[3] = {cc.time[i], cc.c12[i], cc.d12[i]};
    w.row(row);
  }

  ClassifyOptions copts;
  copts.horizon = horizon;
  const ChaosVerdict verdict = classify_given(fam, T, cc, lyap, copts);
  std::cerr << "verdict: " << to_string(verdict.cls)
            << " (lambda_max = " << format_double(verdict.evidence.lambda_max)
            << ")\n";
  if (const auto path = cfg.get("verdict-out"))
    write_json_file(*path, verdict_json(verdict));
  return kOk;
}

// ---------------------------------------------------------------------------

int run_project(KeyValueConfig cfg) {
  cfg.require_known(concat({kSystemKeys, kRunKeys, kFamilyKeys}));
  cfg.set_default("seed", "0");
  SystemFamily fam = family_from_config(cfg);
  if (maybe_print_config("project", cfg)) return kOk;

  const double T = cfg.get_double("T");
  const Trajectory traj = fam.primary_series(T);
  const auto points = stroboscopic(traj, T);

  Output out(cfg);
  CsvWriter w(out.stream());
  echo_header(w, "project", cfg);
  w.keyval("order", order_label(fam));
  std::vector<std::string> cols{"x0", "x_delayed"};
  w.header(cols);
  for (const auto& [x0, xd] : points) {
    const double row[2] = {x0, xd};
    w.row(row);
  }
  return kOk;
}

}  // namespace delaychain::cli
