#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "latdeconv/budget.hpp"
#include "latdeconv/common.hpp"
#include "latdeconv/deconv.hpp"
#include "latdeconv/fracdiff.hpp"
#include "latdeconv/green.hpp"
#include "latdeconv/models.hpp"

namespace latdeconv::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
}

std::string csv_of(const LatticeFunction& f) {
  std::ostringstream os;
  write_csv(f, os);
  return os.str();
}

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(s);
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw PreconditionError(std::string(what) + " must be two comma-separated numbers, got '" + s + "'");
  }
}

MultiIndex parse_alpha(const std::string& s, int d) {
  MultiIndex a = MultiIndex::zero(d);
  if (s.empty()) return a;
  std::vector<int> orders;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      orders.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw PreconditionError("alpha entries must be integers, got '" + item + "'");
    }
    if (orders.back() < 0) throw PreconditionError("alpha entries must be nonnegative");
  }
  if (static_cast<int>(orders.size()) != d)
    throw PreconditionError("alpha needs " + std::to_string(d) + " entries, got " + std::to_string(orders.size()));
  a.orders = orders;
  return a;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const DecayFit& f) {
  return {{"directions", to_string(f.directions)}, {"r_min", f.r_min},
          {"r_max", f.r_max},                      {"exponent", number_or_null(f.exponent)},
          {"amplitude", f.amplitude},              {"r_squared", f.r_squared},
          {"envelope_exponent", number_or_null(f.envelope_exponent)},
          {"points", f.points},                    {"radii", f.radii},
          {"zero_function", f.zero_function}};
}

json budget_json(const ExponentBudget& b) {
  return {{"d", b.d},
          {"rho", to_string(b.rho)},
          {"rho_lower_limit", to_string(rho_lower_limit(b.d))},
          {"in_range", b.in_range},
          {"s_sup", to_string(b.s_sup)},
          {"s0", b.s0},
          {"n_d", b.n_d},
          {"n_d_bound", to_string(b.n_d_bound)}};
}

json holder_json(const HolderBudget& hb) {
  double worst = 0.0;
  for (const SplitBudget& s : hb.splits) worst = std::max(worst, s.inv_r_lower);
  return {{"sigma", hb.sigma},
          {"eta", hb.eta},
          {"splits", hb.splits.size()},
          {"max_inv_r_lower", worst},
          {"all_feasible", hb.all_feasible()}};
}

json assumption_json(const AssumptionReport& r) {
  json reasons = json::array();
  for (const auto& s : r.reasons) reasons.push_back(s);
  json infrared = {{"K2_est", r.infrared.K2_est}, {"argmin_node", r.infrared.argmin_node},
                   {"f_hat_zero", r.infrared.f_hat_zero}};
  return {{"pass", r.pass},
          {"symmetric", r.symmetric},
          {"symmetry_witness", r.symmetry_witness},
          {"envelope", {{"K", r.envelope.K},
                        {"b", r.envelope.b},
                        {"r_min", r.envelope.r_min},
                        {"r_max", r.envelope.r_max},
                        {"max_violation", r.envelope.max_violation},
                        {"compact_support", r.envelope_compact}}},
          {"required_b", r.required_b},
          {"F_hat_zero", r.F_hat_zero},
          {"infrared", infrared},
          {"rho_range_ok", r.rho_range_ok},
          {"reasons", reasons}};
}

/// Exact rho for the exponent arithmetic: the shortest decimal that reads back as the double.
Rational rational_rho(double rho) {
  std::ostringstream os;
  os << std::setprecision(15) << rho;
  return parse_rational(os.str());
}

void write_manifest(const std::filesystem::path& path, const std::string& command, const json& config,
                    std::optional<int> M, std::optional<int> R, const std::vector<std::string>& outputs,
                    const json& deltas) {
  json m;
  m["command"] = command;
  m["config"] = config;
  if (M) m["grid"] = {{"M", *M}, {"shifted", true}};
  if (R) m["box"] = *R;
  m["outputs"] = outputs;
  m["doubling_deltas"] = deltas;
  write_text(path, m.dump(2) + "\n");
}

// green ---------------------------------------------------------------------

struct GreenArgs {
  int dim = 3;
  double mu = 1.0;
  int radius = 16;
  int grid = 0;
  std::string method = "spectral";
  int walk_steps = 0;
  std::string annulus;
  std::string out, manifest;
};

int cmd_green(const GreenArgs& a, std::ostream& out) {
  if (a.dim <= 2) throw PreconditionError("d > 2 required");
  GreenSpec spec;
  spec.dim = a.dim;
  spec.mu = a.mu;
  spec.box_radius = a.radius;
  spec.walk_steps = a.walk_steps;
  if (a.method == "walk")
    spec.method = GreenMethod::walk_sum;
  else if (a.method != "spectral")
    throw PreconditionError("method must be spectral or walk");
  const int M = a.grid > 0 ? a.grid : 4 * a.radius;
  const TorusGrid grid(a.dim, M, true);
  const LatticeFunction C = green_function(spec, grid);

  json summary;
  summary["command"] = "green";
  summary["d"] = a.dim;
  summary["mu"] = a.mu;
  summary["radius"] = a.radius;
  summary["grid"] = {{"M", M}, {"shifted", true}};
  summary["method"] = a.method;
  summary["C0"] = C(std::vector<int>(a.dim, 0));
  const double ad = a_d(a.dim);
  summary["a_d"] = ad;
  json deltas = json::object();

  if (a.mu == 1.0) {
    auto [r_min, r_max] = a.annulus.empty() ? std::pair{a.radius / 4.0, a.radius / 2.0}
                                            : parse_pair(a.annulus, "--annulus");
    const AsymptoticReport rep = asymptotic_report(C, a.dim, r_min, r_max);
    summary["asymptotics"] = {{"r_min", rep.r_min},
                              {"r_max", rep.r_max},
                              {"fitted_amplitude", rep.fitted_amplitude},
                              {"amplitude_ratio", rep.fitted_amplitude / ad},
                              {"fitted_exponent", rep.fitted_exponent},
                              {"expected_exponent", a.dim - 2},
                              {"r_squared", rep.r_squared},
                              {"max_scaled_residual", rep.max_scaled_residual},
                              {"residual_trend", rep.residual_trend},
                              {"points", rep.points}};
  }
  if (spec.method == GreenMethod::walk_sum) {
    // compare with the spectral route on the same box
    GreenSpec s2 = spec;
    s2.method = GreenMethod::spectral;
    const LatticeFunction Cs = green_function(s2, grid);
    const WalkSumBox wb = walk_sum_box(a.mu, a.dim, a.radius, spec.walk_steps > 0 ? spec.walk_steps
                                                                                     : default_walk_steps(a.mu));
    const double delta = (C - Cs).sup_norm();
    const double tail = wb.tail.sup_norm();
    // the spectral side carries periodic images, estimated from the doubled grid, and rounding
    const double images = (green_function(s2, TorusGrid(a.dim, 2 * M, true)) - Cs).sup_norm();
    const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * Cs.sup_norm();
    const bool within = delta <= tail + images + rounding;
    summary["cross_method"] = {{"max_delta", delta},   {"tail_bound", tail},
                               {"image_estimate", images}, {"within_tail_bound", within},
                               {"walk_steps", wb.n_max}};
    deltas["walk_vs_spectral"] = delta;
    // for mu < 1 the tail bound is rigorous; at mu = 1 it is an estimate
    if (!within && a.mu < 1.0)
      throw InvariantError("walk sum and spectral C_mu differ by more than the tail bound plus the image estimate");
  }

  std::vector<std::string> outputs;
  if (!a.out.empty()) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int j = 0; j < a.dim; ++j) os << 'x' << j + 1 << ',';
    os << "r,C,asymptote,scaled_residual\n";
    C.for_each([&](std::span<const int> x, double, double v) {
      double r2 = 0.0;
      for (int c : x) {
        os << c << ',';
        r2 += static_cast<double>(c) * c;
      }
      const double r = std::sqrt(r2), rv = std::max(r, 1.0);
      const double asym = ad / std::pow(rv, a.dim - 2);
      os << r << ',' << v << ',' << asym << ',' << std::abs(v - asym) * std::pow(rv, a.dim) << '\n';
    });
    write_text(a.out, os.str());
    outputs.push_back(a.out);
  }
  if (!a.manifest.empty()) {
    const json config = {{"dim", a.dim},         {"mu", a.mu},           {"radius", a.radius},
                         {"grid", M},            {"method", a.method},   {"walk_steps", a.walk_steps},
                         {"annulus", a.annulus}};
    write_manifest(a.manifest, "green", config, M, a.radius, outputs, deltas);
  }
  out << summary.dump(2) << '\n';
  return 0;
}

// deconv --------------------------------------------------------------------

struct DeconvArgs {
  std::string config;
  std::string out_dir = ".";
  bool exploratory = false;
  bool no_csv = false;
};

int cmd_deconv(const DeconvArgs& a, std::ostream& out) {
  const std::string text = read_text(a.config);
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PreconditionError(std::string("config does not parse: ") + e.what());
  }
  ModelSpec spec = model_spec_from_json(text);
  spec.exploratory = spec.exploratory || a.exploratory;
  const int R = cfg.value("R", 16);
  const int M = cfg.value("M", 4 * R);

  // rho range and exponent budget; throws outside the admissible range unless exploratory
  const ExponentBudget budget = admissible_s(spec.d, rational_rho(spec.rho), spec.exploratory);

  double eps_used = spec.epsilon;
  int halvings = 0;
  LatticeFunction F;
  if (spec.kind == ModelKind::perturbed) {
    const PerturbedKernel pk = perturbed_kernel(spec);
    F = pk.F;
    eps_used = pk.epsilon;
    halvings = pk.halvings;
  } else {
    F = make_kernel(spec);
  }
  const AssumptionReport assumptions = assumption_report(F, spec.rho);

  DeconvOptions opt;
  if (cfg.contains("annulus")) {
    const auto ann = cfg["annulus"].get<std::vector<double>>();
    if (ann.size() != 2) throw PreconditionError("annulus must be [r_min, r_max]");
    opt.r_min = ann[0];
    opt.r_max = ann[1];
  }
  if (cfg.contains("amplitude_radius")) opt.amplitude_radius = cfg["amplitude_radius"].get<double>();
  opt.refine = cfg.value("refine", true);

  const DeconvolutionResult r = deconvolve(F, R, TorusGrid(spec.d, M, true), opt);

  json res;
  res["model"] = json::parse(model_spec_to_json(spec));
  res["epsilon_used"] = eps_used;
  res["halvings"] = halvings;
  res["R"] = R;
  res["grid"] = {{"M", M}, {"shifted", true}};
  res["constants"] = {{"lambda", r.constants.lambda},
                      {"mu", r.constants.mu},
                      {"K_F_second", r.constants.K_F_second},
                      {"F_hat_zero", r.constants.F_hat_zero},
                      {"critical", r.constants.critical}};
  res["moments"] = {{"zeroth", r.error.zeroth}, {"second", r.error.second}, {"scale", r.error.scale},
                    {"E_sup", r.error.E.sup_norm()}};
  res["f_sup"] = r.f_sup;
  res["torus_residual"] = {{"sup", r.torus_residual},
                           {"points", r.residual_points},
                           {"complete", r.residual_complete}};
  res["split_residual"] = r.split_residual;
  json fits = json::object();
  if (r.fit_all) fits["all"] = fit_json(*r.fit_all);
  if (r.fit_axis) fits["axis"] = fit_json(*r.fit_axis);
  if (r.fit_diagonal) fits["diagonal"] = fit_json(*r.fit_diagonal);
  res["fits"] = fits;
  res["amplitude"] = {{"radius", r.amplitude.radius},
                      {"predicted", r.amplitude.predicted},
                      {"axis_ratio", r.amplitude.axis_ratio},
                      {"shell_ratio", r.amplitude.shell_ratio}};
  json deltas = json::object();
  if (r.refinement) {
    deltas["amplitude"] = r.refinement.value().amplitude_change;
    deltas["f_exponent"] = number_or_null(r.refinement.value().exponent_change);
  }
  res["doubling_deltas"] = deltas;
  res["budget"] = budget_json(budget);
  if (cfg.contains("sigma")) {
    const double sigma = cfg["sigma"].get<double>(), eta = cfg.value("eta", 0.0);
    res["holder_budget"] = holder_json(holder_budget(spec.d, spec.rho, sigma, eta, all_splits(budget.n_d)));
  }
  res["assumptions"] = assumption_json(assumptions);

  const std::filesystem::path dir(a.out_dir);
  // names relative to the output directory, so reruns elsewhere produce identical manifests
  std::vector<std::string> outputs{"result.json"};
  write_text(dir / "result.json", res.dump(2) + "\n");
  if (!a.no_csv) {
    write_text(dir / "G.csv", csv_of(r.G));
    write_text(dir / "f.csv", csv_of(r.f));
    outputs.push_back("G.csv");
    outputs.push_back("f.csv");
  }
  write_manifest(dir / "manifest.json", "deconv", cfg, M, R, outputs, deltas);

  json summary = {{"lambda", r.constants.lambda},
                  {"mu", r.constants.mu},
                  {"f_sup", r.f_sup},
                  {"torus_residual", r.torus_residual},
                  {"f_exponent", r.fit_all ? number_or_null(r.fit_all->exponent) : json(nullptr)},
                  {"amplitude_ratio", r.amplitude.axis_ratio},
                  {"result", (dir / "result.json").string()}};
  out << summary.dump(2) << '\n';
  return 0;
}

// exponents -----------------------------------------------------------------

struct ExponentArgs {
  bool table = false;
  std::optional<int> dim;
  std::string rho;
  std::optional<double> sigma;
  double eta = 0.0;
  bool exploratory = false;
};

int cmd_exponents(const ExponentArgs& a, std::ostream& out) {
  if (a.table) {
    out << "name,d_min,rho_formula,rho_at_d_min,s_sup,s0,n_d,note\n";
    for (const ModelRow& row : model_table())
      out << row.name << ',' << row.d_min << ',' << row.rho_formula << ',' << to_string(row.rho_at_d_min) << ','
          << to_string(row.budget.s_sup) << ',' << row.budget.s0 << ',' << row.budget.n_d << ",\"" << row.note
          << "\"\n";
    return 0;
  }
  if (!a.dim || a.rho.empty()) throw PreconditionError("exponents needs --table or both --dim and --rho");
  const ExponentBudget b = admissible_s(*a.dim, parse_rational(a.rho), a.exploratory);
  json j = budget_json(b);
  if (a.sigma) j["holder_budget"] = holder_json(holder_budget(*a.dim, to_double(b.rho), *a.sigma, a.eta,
                                                              all_splits(b.n_d)));
  out << j.dump(2) << '\n';
  return 0;
}

// fracnorm ------------------------------------------------------------------

struct FracArgs {
  std::string model;
  std::string alpha;
  double u_min = 0.0;
  double u_max = 1.0;
  int grid = 64;
  std::string field = "f";
  double eta = 0.5;
  std::string out;
};

int cmd_fracnorm(const FracArgs& a, std::ostream& out) {
  ModelSpec spec = model_spec_from_json(read_text(a.model));
  const LatticeFunction F = make_kernel(spec);
  const TorusGrid grid(spec.d, a.grid, true);
  const MultiIndex alpha = parse_alpha(a.alpha, spec.d);
  std::vector<double> u;
  for (double v : aligned_u_values(grid, a.u_max))
    if (v >= a.u_min * (1.0 - 1e-12)) u.push_back(v);

  HolderCurve curve;
  if (a.field == "f") {
    for (int j = 1; j < spec.d; ++j)
      if (alpha.orders[j] != 0) throw PreconditionError("--field f supports alpha along the first axis only");
    curve = error_term_holder_curve(F, alpha.orders[0], u, grid).curve;
  } else if (a.field == "F") {
    curve = holder_curve(F, alpha, u, grid);
  } else if (a.field == "E") {
    curve = holder_curve(error_kernel(F, critical_constants(F)).E, alpha, u, grid);
  } else {
    throw PreconditionError("--field must be f, F or E");
  }
  std::ostringstream os;
  os << std::setprecision(17) << "u,norm,ratio\n";
  for (std::size_t j = 0; j < curve.u_values.size(); ++j)
    os << curve.u_values[j] << ',' << curve.norms[j] << ',' << curve.norms[j] / std::pow(curve.u_values[j], a.eta)
       << '\n';
  if (a.out.empty()) {
    out << os.str();
  } else {
    write_text(a.out, os.str());
    const json summary = {{"fitted_eta", number_or_null(curve.fitted_eta)},
                          {"constant", curve.constant(a.eta)},
                          {"eta", a.eta},
                          {"points", curve.u_values.size()},
                          {"out", a.out}};
    out << summary.dump(2) << '\n';
  }
  return 0;
}

// verify-assumptions --------------------------------------------------------

int cmd_verify(const std::string& model, int grid_points, std::ostream& out) {
  ModelSpec spec = model_spec_from_json(read_text(model));
  spec.exploratory = true;  // build the kernel without the range gate, then report
  const AssumptionReport r = assumption_report(make_kernel(spec), spec.rho, grid_points);
  out << assumption_json(r).dump(2) << '\n';
  return r.pass ? 0 : 2;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"latdeconv: Gaussian deconvolution on Z^d"};
  app.require_subcommand(1);
  std::optional<int> threads;
  std::optional<double> cell_cap;
  app.add_option("--threads", threads, "worker threads (overrides LATDECONV_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--cell-cap", cell_cap, "largest number of stored cells per array")->check(CLI::PositiveNumber);

  GreenArgs ga;
  CLI::App* green = app.add_subcommand("green", "lattice Green function C_mu");
  green->add_option("--dim", ga.dim, "dimension d")->required();
  green->add_option("--mu", ga.mu, "mu in (0, 1]");
  green->add_option("--radius", ga.radius, "box radius R");
  green->add_option("--grid", ga.grid, "torus points M (default 4R)");
  green->add_option("--method", ga.method, "spectral or walk");
  green->add_option("--walk-steps", ga.walk_steps, "walk length for --method walk");
  green->add_option("--annulus", ga.annulus, "fit window r_min,r_max (default R/4,R/2)");
  green->add_option("--out", ga.out, "CSV output path");
  green->add_option("--manifest", ga.manifest, "run manifest path");

  DeconvArgs da;
  CLI::App* deconv = app.add_subcommand("deconv", "solve F * G = delta and split G = lambda C_mu + f");
  deconv->add_option("--config", da.config, "run config JSON")->required();
  deconv->add_option("--out-dir", da.out_dir, "directory for result.json, CSVs and manifest");
  deconv->add_flag("--exploratory", da.exploratory, "allow rho outside the admissible range");
  deconv->add_flag("--no-csv", da.no_csv, "skip the G and f CSV files");

  ExponentArgs ea;
  CLI::App* exponents = app.add_subcommand("exponents", "admissible decay exponents and Hoelder budgets");
  exponents->add_flag("--table", ea.table, "print the model table");
  exponents->add_option("--dim", ea.dim, "dimension d");
  exponents->add_option("--rho", ea.rho, "tail exponent, decimal or p/q");
  exponents->add_option("--sigma", ea.sigma, "error-kernel exponent sigma for the Hoelder budget");
  exponents->add_option("--eta", ea.eta, "Hoelder exponent eta");
  exponents->add_flag("--exploratory", ea.exploratory, "report instead of rejecting rho out of range");

  FracArgs fa;
  CLI::App* frac = app.add_subcommand("fracnorm", "Hoelder curve ||U_u h^_alpha||_1");
  frac->add_option("--model", fa.model, "model JSON")->required();
  frac->add_option("--alpha", fa.alpha, "multi-index a1,...,ad (default 0)");
  frac->add_option("--u-min", fa.u_min, "smallest u");
  frac->add_option("--u-max", fa.u_max, "largest u, at most 1");
  frac->add_option("--grid", fa.grid, "torus points M");
  frac->add_option("--field", fa.field, "f (error term), F or E");
  frac->add_option("--eta", fa.eta, "exponent in the ratio column norm / u^eta");
  frac->add_option("--out", fa.out, "CSV output path (default stdout)");

  double delta = 0.5;
  CLI::App* cdelta = app.add_subcommand("cdelta", "c_delta = int_0^inf sin u / u^{1+delta} du");
  cdelta->add_option("--delta", delta, "delta in (0, 1)")->required();

  std::string vmodel;
  int vgrid = 0;
  CLI::App* verify = app.add_subcommand("verify-assumptions", "check a model kernel against the assumptions");
  verify->add_option("--model", vmodel, "model JSON")->required();
  verify->add_option("--grid", vgrid, "infrared grid points (default from the support)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads) set_thread_count(*threads);
    if (cell_cap) set_cell_cap(static_cast<std::size_t>(*cell_cap));
    set_warning_handler([&err](std::string_view m) { err << "warning: " << m << '\n'; });
    if (*green) return cmd_green(ga, out);
    if (*deconv) return cmd_deconv(da, out);
    if (*exponents) return cmd_exponents(ea, out);
    if (*frac) return cmd_fracnorm(fa, out);
    if (*cdelta) {
      out << std::setprecision(17) << c_delta(delta) << '\n';
      return 0;
    }
    if (*verify) return cmd_verify(vmodel, vgrid, out);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    err << "invariant breach: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace latdeconv::cli
