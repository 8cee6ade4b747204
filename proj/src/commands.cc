#include "lqgbound/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lqgbound {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// Below this many rollouts Monte Carlo checks are reported as WIDE_CI.
constexpr int kMinRolloutsForVerdict = 100;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw Error(ErrorCode::kInvalidInput, "cannot write " + path.string());
  outf << text;
}

fs::path prepare_output(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kInvalidInput, "cannot create output dir " + cfg.output_dir);
  return dir;
}

std::string provenance_comment(const RunConfig& cfg, const std::string& instance_hash) {
  return "# lqgbound " + std::string(kVersion) + " seed=" + std::to_string(cfg.seed) +
         " instance_fnv1a=" + instance_hash + "\n";
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// JSON numbers must be finite.
ordered_json num(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

// Integer horizon grid 100, 200, ..., 3200 for the sqrt(T) demonstration.
std::vector<int> doubling_grid(int first, int last) {
  std::vector<int> g;
  for (int t = first; t <= last; t *= 2) g.push_back(t);
  return g;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) return std::nan("");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Matrix perturbed_gain(const LqgInstance& inst, double shift) {
  return inst.K() + Matrix::Constant(inst.d_u(), inst.d_x(), shift);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

PolicySpec parse_policy(const std::string& text, const LqgInstance& inst) {
  if (text == "optimal") return PolicySpec::Optimal();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "feedback") {
    if (arg.empty()) throw Error(ErrorCode::kInvalidInput, "policy feedback needs a file");
    Matrix K = parse_matrix_text(read_file(arg), "feedback");
    if (K.rows() != inst.d_u() || K.cols() != inst.d_x()) {
      throw Error(ErrorCode::kInvalidDimensions, "feedback gain must be d_u x d_x");
    }
    return PolicySpec::LinearFeedback(std::move(K));
  }
  if (head == "ce-dither") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kInvalidInput, "policy ce-dither expects sigma0,beta");
    }
    try {
      return PolicySpec::CeDither(std::stod(arg.substr(0, comma)), std::stod(arg.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidInput, "policy ce-dither expects numbers sigma0,beta");
    }
  }
  throw Error(ErrorCode::kInvalidInput, "unknown policy '" + text + "'");
}

SweepRequest parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4) {
    throw Error(ErrorCode::kInvalidInput, "sweep must look like kind:start:stop:points");
  }
  SweepRequest req;
  if (parts[0] == "marginal") {
    req.kind = SweepKind::kMarginalStability;
  } else if (parts[0] == "observability") {
    req.kind = SweepKind::kPoorObservability;
  } else if (parts[0] == "unit-root") {
    req.kind = SweepKind::kNearUnitRoot;
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown sweep kind '" + parts[0] + "'");
  }
  double start, stop;
  int points;
  try {
    start = std::stod(parts[1]);
    stop = std::stod(parts[2]);
    points = std::stoi(parts[3]);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidInput, "sweep start/stop/points must be numbers");
  }
  if (points <= 0) throw Error(ErrorCode::kInvalidInput, "sweep grid is empty");
  if (!(start > 0.0 && stop > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "log grid needs positive start and stop");
  }
  if (points == 1) {
    req.grid = {start};
  } else {
    const double ls = std::log10(start), le = std::log10(stop);
    for (int i = 0; i < points; ++i) {
      req.grid.push_back(std::pow(10.0, ls + (le - ls) * i / (points - 1)));
    }
  }
  return req;
}

std::string report_to_json(const HardnessReport& r, const LoadedInstance& loaded,
                           double eps) {
  ordered_json j;
  j["version"] = kVersion;
  j["instance_fnv1a"] = hex64(loaded.hash);
  j["mode"] = loaded.inst.mode() == Mode::kStateFeedback ? "StateFeedback" : "PartiallyObserved";
  j["parametrization"] = std::string(ParamKindName(loaded.param.kind()));
  j["eps"] = eps;
  j["uninformative"] = r.uninformative;
  j["dim_U"] = r.dim_U;
  ordered_json basis = ordered_json::array();
  for (Eigen::Index c = 0; c < r.U_basis.dim(); ++c) {
    ordered_json col = ordered_json::array();
    for (Eigen::Index i = 0; i < r.U_basis.ambient_dim(); ++i) {
      col.push_back(r.U_basis.columns()(i, c));
    }
    basis.push_back(std::move(col));
  }
  j["U_basis_columns"] = std::move(basis);
  j["L"] = num(r.L);
  j["c_main"] = num(r.c_main);
  j["c_sf"] = r.c_sf ? num(*r.c_sf) : ordered_json(nullptr);
  j["c_po"] = r.c_po ? num(*r.c_po) : ordered_json(nullptr);
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"sigma_min_P", num(d.sigma_min_P)},
                      {"sigma_min_Gamma", num(d.sigma_min_Gamma)},
                      {"ker_KKT_dim", d.ker_KKT_dim},
                      {"cond_BPBR", num(d.cond_BPBR)},
                      {"spectral_radius_closed_loop", num(d.spectral_radius_closed_loop)}};
  j["riccati"] = {{"P", matrix_json(loaded.inst.P())},
                  {"K", matrix_json(loaded.inst.K())},
                  {"S", matrix_json(loaded.inst.filter.S)},
                  {"Sigma_nu", matrix_json(loaded.inst.filter.Sigma_nu)},
                  {"Gamma", matrix_json(loaded.inst.gamma)}};
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const LoadedInstance loaded = load_instance_file(cfg.instance_path);
  const HardnessReport report = analyze(loaded.inst, loaded.param, cfg.eps);
  const fs::path dir = prepare_output(cfg);
  write_file(dir / "report.json", report_to_json(report, loaded, cfg.eps));
  out << "uninformative=" << (report.uninformative ? "true" : "false")
      << " dim_U=" << report.dim_U << " L=" << format_number(report.L)
      << " c_main=" << format_number(report.c_main);
  if (report.c_sf) out << " c_sf=" << format_number(*report.c_sf);
  if (report.c_po) out << " c_po=" << format_number(*report.c_po);
  out << "\n";
  return report.dim_U == 0 ? kExitNegative : kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const LoadedInstance loaded = load_instance_file(cfg.instance_path);
  const PolicySpec policy = parse_policy(cfg.policy, loaded.inst);
  if (cfg.horizons.empty()) throw Error(ErrorCode::kInvalidInput, "no horizons given");
  std::string csv = provenance_comment(cfg, hex64(loaded.hash));
  csv += "T,regret_direct,se_direct,regret_repr,se_repr,n_rollouts,seed\n";
  std::string tsv;
  for (int T : cfg.horizons) {
    const PairedRegret r = regret_paired(loaded.inst, policy, T, cfg.n_rollouts, cfg.seed);
    csv += std::to_string(T) + "," + format_number(r.direct.value) + "," +
           format_number(r.direct.std_error) + "," + format_number(r.representation.value) +
           "," + format_number(r.representation.std_error) + "," +
           std::to_string(cfg.n_rollouts) + "," + std::to_string(cfg.seed) + "\n";
    tsv += std::to_string(T) + "\t" + format_number(r.direct.value) + "\n";
  }
  const fs::path dir = prepare_output(cfg);
  write_file(dir / "regret.csv", csv);
  write_file(dir / "regret_direct.tsv", tsv);
  out << "wrote " << (dir / "regret.csv").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const SweepRequest req = parse_sweep(cfg.sweep);
  SweepFamily family;
  if (req.kind == SweepKind::kNearUnitRoot) family.b = 0.5;
  const std::vector<SweepRow> rows = failure_sweep(req.kind, req.grid, family);

  std::string csv = provenance_comment(cfg, "none");
  csv += "parameter,p,k,closed_loop,gamma,sigma_nu2,bound,asymptote_ratio\n";
  const char* names[] = {"p", "k", "closed_loop", "gamma", "sigma_nu2", "bound", "asymptote_ratio"};
  std::vector<std::string> tsv(7);
  for (const SweepRow& r : rows) {
    const double vals[] = {r.p, r.k, r.closed_loop, r.gamma, r.sigma_nu2, r.bound, r.asymptote_ratio};
    csv += format_number(r.parameter);
    for (int i = 0; i < 7; ++i) {
      csv += "," + format_number(vals[i]);
      tsv[i] += format_number(r.parameter) + "\t" + format_number(vals[i]) + "\n";
    }
    csv += "\n";
  }
  const fs::path dir = prepare_output(cfg);
  write_file(dir / "sweep.csv", csv);
  for (int i = 0; i < 7; ++i) {
    write_file(dir / ("sweep_" + std::string(names[i]) + ".tsv"), tsv[i]);
  }
  out << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows, "
      << SweepKindName(req.kind) << ")\n";
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const LoadedInstance loaded = load_instance_file(cfg.instance_path);
  const LqgInstance& inst = loaded.inst;
  const Parametrization& param = loaded.param;
  const int n = cfg.n_rollouts;
  const int T = cfg.horizons.empty() ? 50 : cfg.horizons.front();
  const bool wide = n < kMinRolloutsForVerdict;
  const bool sf = inst.mode() == Mode::kStateFeedback;

  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, bool monte_carlo,
                    ordered_json values, const std::string& tolerance) {
    std::string status = pass ? "PASS" : "FAIL";
    if (monte_carlo && wide) status = "WIDE_CI";
    if (status == "FAIL") all_pass = false;
    checks.push_back({{"name", name}, {"status", status}, {"values", std::move(values)},
                      {"tolerance", tolerance}});
  };
  auto skip = [&](const std::string& name, const std::string& why) {
    checks.push_back({{"name", name}, {"status", "SKIPPED"}, {"reason", why}});
  };

  {
    const auto& s = inst.sys;
    const double rc = control_dare_residual(s.A, s.B, s.Q, s.R, inst.P());
    const double rf = filter_dare_residual(s.A, s.C, s.Sigma_w, s.Sigma_v, inst.filter.S);
    record("riccati_residuals", rc <= 1e-9 && rf <= 1e-9, false,
           {{"control", rc}, {"filter", rf}}, "<= 1e-9 relative");
  }

  const PolicySpec feedback = PolicySpec::LinearFeedback(perturbed_gain(inst, 0.1));
  const PolicySpec dither = PolicySpec::CeDither(0.5, 0.25);
  for (const auto& [label, pol] :
       {std::pair<const char*, const PolicySpec*>{"feedback", &feedback}, {"ce_dither", &dither}}) {
    const PairedRegret r = regret_paired(inst, *pol, T, n, cfg.seed);
    record(std::string("regret_identity_") + label,
           std::abs(r.difference) <= 3.0 * r.difference_se, true,
           {{"T", T},
            {"regret_direct", num(r.direct.value)},
            {"se_direct", num(r.direct.std_error)},
            {"regret_repr", num(r.representation.value)},
            {"se_repr", num(r.representation.std_error)},
            {"difference", num(r.difference)},
            {"difference_se", num(r.difference_se)}},
           "|direct - repr| <= 3 SE(paired difference)");
  }

  if (sf && param.d_theta() > 0) {
    const OracleComparison c = compare_with_score_oracle(inst, param, feedback, 20, n, cfg.seed);
    record("fisher_score_oracle", c.max_abs_z <= 3.0, true,
           {{"T", 20}, {"max_abs_z", num(c.max_abs_z)},
            {"analytic", matrix_json(c.analytic.matrix)},
            {"oracle", matrix_json(c.oracle.matrix)}},
           "entrywise |difference| <= 3 SE");
  } else {
    skip("fisher_score_oracle", "score oracle needs a state-feedback instance");
  }

  const UninformativeCertificate cert = certify_uninformative(inst, param, cfg.eps);
  if (cert.uninformative) {
    const PolicySpec optimal = PolicySpec::Optimal();
    for (const auto& [label, pol] :
         {std::pair<const char*, const PolicySpec*>{"optimal", &optimal},
          {"feedback", &feedback}, {"ce_dither", &dither}}) {
      const InequalityCheck c = info_regret_inequality_check(inst, param, *pol, T, n, cfg.seed, cfg.eps);
      record(std::string("info_regret_inequality_") + label, c.holds, true,
             {{"T", T}, {"lhs", num(c.lhs)}, {"lhs_se", num(c.lhs_se)}, {"L", num(c.L)},
              {"regret", num(c.regret)}, {"rhs", num(c.rhs)},
              {"difference_se", num(c.difference_se)}},
             "lhs <= L * regret + 3 SE");
    }
  } else {
    skip("info_regret_inequality", "instance is not certified uninformative");
  }

  {
    const double delta = cfg.delta.value_or(0.5 * sigma_min(inst.filter.Sigma_nu));
    const int lln_n = std::min(n, 500);
    const LlnCheck c = covariance_lln_check(inst, PolicySpec::Optimal(), 2000, cfg.alpha,
                                            delta, lln_n, cfg.seed);
    record("covariance_lln", c.probability >= 0.9, true,
           {{"T", 2000}, {"alpha", cfg.alpha}, {"delta", delta}, {"n_rollouts", lln_n},
            {"probability", c.probability}, {"block_length", c.block_length},
            {"n_blocks", c.n_blocks}},
           "probability >= 0.9");
  }

  {
    const CosineBumpPrior prior;
    for (double sigma : {0.3, 1.0, 3.0}) {
      const VanTreesResult v = van_trees_check(sigma, prior, n, cfg.seed);
      record("van_trees_sigma_" + format_number(sigma),
             v.bayes_mse + 3.0 * v.bayes_mse_se >= v.bound, true,
             {{"bayes_mse", v.bayes_mse}, {"se", v.bayes_mse_se}, {"bound", v.bound},
              {"location_integral", v.location_integral}},
             "bayes_mse + 3 SE >= bound");
    }
  }

  {
    // Informational only: no upper bound is claimed for this baseline.
    const std::vector<int> grid = doubling_grid(100, 3200);
    const int demo_n = std::max(2, std::min(n, 200));
    std::vector<double> ts, regrets;
    ordered_json rows = ordered_json::array();
    for (int t : grid) {
      const RegretEstimate r = regret_representation(inst, dither, t, demo_n, cfg.seed);
      ts.push_back(t);
      regrets.push_back(r.value);
      rows.push_back({{"T", t}, {"regret", num(r.value)}, {"se", num(r.std_error)}});
    }
    const double slope = loglog_slope(ts, regrets);
    checks.push_back({{"name", "sqrt_t_demonstration"},
                      {"status", "INFO"},
                      {"values", {{"exponent", num(slope)},
                                  {"in_band_0.4_0.7", slope >= 0.4 && slope <= 0.7},
                                  {"n_rollouts", demo_n},
                                  {"rows", std::move(rows)}}}});
  }

  ordered_json j;
  j["version"] = kVersion;
  j["instance_fnv1a"] = hex64(loaded.hash);
  j["seed"] = cfg.seed;
  j["n_rollouts"] = n;
  j["all_pass"] = all_pass;
  j["checks"] = std::move(checks);
  const fs::path dir = prepare_output(cfg);
  write_file(dir / "validation.json", j.dump(2) + "\n");
  for (const auto& c : j["checks"]) {
    out << c["status"].get<std::string>() << "  " << c["name"].get<std::string>() << "\n";
  }
  return all_pass ? kExitOk : kExitNegative;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "analyze") return cmd_analyze(cfg, out, err);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "validate") return cmd_validate(cfg, out, err);
    err << "unknown command '" << cfg.command << "'\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace lqgbound
