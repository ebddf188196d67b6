#include "latdeconv/models.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

#include "latdeconv/common.hpp"
#include "latdeconv/parallel.hpp"

namespace latdeconv {

const char* to_string(ModelKind kind) { return kind == ModelKind::srw ? "srw" : "perturbed"; }

ModelSpec model_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw PreconditionError(std::string("model JSON does not parse: ") + e.what());
  }
  if (!j.is_object()) throw PreconditionError("model JSON must be an object");
  ModelSpec s;
  try {
    const std::string kind = j.value("model", std::string("srw"));
    if (kind == "srw")
      s.kind = ModelKind::srw;
    else if (kind == "perturbed")
      s.kind = ModelKind::perturbed;
    else
      throw PreconditionError("unknown model '" + kind + "' (expected srw or perturbed)");
    s.d = j.value("d", s.d);
    s.mu0 = j.value("mu0", s.mu0);
    s.rho = j.value("rho", s.rho);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.tail_radius = j.value("tail_radius", s.tail_radius);
    if (j.contains("seed") && !j["seed"].is_null()) s.seed = j["seed"].get<std::uint64_t>();
    s.exploratory = j.value("exploratory", false);
  } catch (const nlohmann::json::type_error& e) {
    throw PreconditionError(std::string("model JSON has a field of the wrong type: ") + e.what());
  }
  return s;
}

std::string model_spec_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["model"] = to_string(spec.kind);
  j["d"] = spec.d;
  j["mu0"] = spec.mu0;
  j["rho"] = spec.rho;
  j["epsilon"] = spec.epsilon;
  j["tail_radius"] = spec.tail_radius;
  j["seed"] = spec.seed ? nlohmann::ordered_json(*spec.seed) : nlohmann::ordered_json(nullptr);
  j["exploratory"] = spec.exploratory;
  return j.dump();
}

LatticeFunction srw_kernel(int d, double mu0) {
  if (d < 1) throw PreconditionError("d >= 1 required");
  if (!(mu0 > 0.0 && mu0 <= 1.0)) throw PreconditionError("mu0 must lie in (0, 1]");
  return LatticeFunction::delta(d) - mu0 * LatticeFunction::nearest_neighbour(d);
}

namespace {

int default_infrared_grid(int R) {
  const int m = std::max(16, 2 * R + 2);
  return (m + 3) / 4 * 4;
}

std::string node_string(const std::vector<double>& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? ", " : "") << k[i];
  os << ')';
  return os.str();
}

LatticeFunction build_perturbed(const ModelSpec& spec, double eps) {
  const int d = spec.d;
  const int T = spec.tail_radius;
  const double b = d + 2 + spec.rho;
  LatticeFunction F = LatticeFunction::zeros(d, T, Layout::orbits);
  auto v = F.mutable_values();
  std::mt19937_64 rng(spec.seed.value_or(0));
  std::vector<int> x(d);
  const long long T2 = static_cast<long long>(T) * T;
  for (std::size_t i = 0; i < v.size(); ++i) {
    F.point_of(i, x);
    long long r2 = 0;
    for (int c : x) r2 += static_cast<long long>(c) * c;
    if (r2 == 1) {
      v[i] = -1.0 / (2.0 * d);
    } else if (r2 >= 4 && r2 <= T2) {
      // one sign per orbit keeps the pattern symmetric
      const double chi = spec.seed ? ((rng() >> 63) ? 1.0 : -1.0) : 1.0;
      v[i] = eps * chi * std::pow(static_cast<double>(r2), -0.5 * b);
    }
  }
  // the origin absorbs the total mass so that F^(0) vanishes
  KahanSum rest;
  for (std::size_t i = 1; i < v.size(); ++i) rest += F.weight_of(i) * v[i];
  v[0] = -rest.value();
  return F;
}

}  // namespace

PerturbedKernel perturbed_kernel(const ModelSpec& spec) {
  if (spec.d <= 2) throw PreconditionError("d > 2 required");
  if (!(spec.epsilon >= 0.0)) throw PreconditionError("epsilon must be nonnegative");
  if (!(spec.rho > 0.0)) throw PreconditionError("rho must be positive");
  if (spec.tail_radius < 2) throw PreconditionError("tail_radius must be at least 2");
  if (!spec.exploratory && !(spec.rho > to_double(rho_lower_limit(spec.d))))
    throw PreconditionError("rho must exceed (d-8)/2 v 0 = " + to_string(rho_lower_limit(spec.d)) +
                            " unless exploratory mode is set");
  PerturbedKernel out;
  out.epsilon = spec.epsilon;
  if (spec.epsilon == 0.0) {
    out.F = srw_kernel(spec.d, 1.0);
    return out;
  }
  const TorusGrid grid(spec.d, default_infrared_grid(spec.tail_radius), true);
  for (;;) {
    out.F = build_perturbed(spec, out.epsilon);
    if (spec.exploratory) break;
    const InfraredReport ir = infrared_check(out.F, grid);
    if (ir.K2_est > 0.0) break;
    if (out.halvings == 20)
      throw PreconditionError("no epsilon down to " + std::to_string(out.epsilon) +
                              " gives an infrared bound; failing node " + node_string(ir.argmin_node));
    out.epsilon *= 0.5;
    ++out.halvings;
  }
  if (out.halvings > 0) warn("epsilon halved " + std::to_string(out.halvings) + " times to " + std::to_string(out.epsilon));
  if (!spec.exploratory) {
    const AssumptionReport rep = assumption_report(out.F, spec.rho);
    if (!rep.pass) {
      std::string why;
      for (const auto& r : rep.reasons) why += "; " + r;
      throw InvariantError("constructed kernel fails the assumption check" + why);
    }
  }
  return out;
}

LatticeFunction make_kernel(const ModelSpec& spec) {
  return spec.kind == ModelKind::srw ? srw_kernel(spec.d, spec.mu0) : perturbed_kernel(spec).F;
}

AssumptionReport assumption_report(const LatticeFunction& F, double declared_rho, int grid_points) {
  AssumptionReport rep;
  const int d = F.dim();
  const int R = F.radius();

  const SymmetryReport sym = check_symmetry(F);
  rep.symmetric = sym.symmetric;
  if (!sym.symmetric) {
    std::ostringstream os;
    os << "x = (";
    for (int i = 0; i < d; ++i) os << (i ? ", " : "") << sym.witness_point->coords[i];
    os << "), " << sym.witness_element->describe();
    rep.symmetry_witness = os.str();
    rep.reasons.push_back("not symmetric: " + rep.symmetry_witness);
  }

  rep.required_b = d + 2 + declared_rho;
  if (R >= 2) {
    try {
      rep.envelope = fit_envelope(F, 2.0, R);
      rep.envelope_compact = rep.envelope.zero_window;
    } catch (const PreconditionError&) {
      rep.envelope_compact = true;
    }
  } else {
    rep.envelope_compact = true;
  }
  if (!rep.envelope_compact) {
    if (!rep.envelope.holds()) rep.reasons.push_back("decay envelope violated");
    if (rep.envelope.b < rep.required_b - 1e-9) {
      std::ostringstream os;
      os << "fitted decay exponent " << rep.envelope.b << " below d + 2 + rho = " << rep.required_b;
      rep.reasons.push_back(os.str());
    }
  }

  rep.F_hat_zero = moment(F, 0.0);
  if (rep.F_hat_zero < -1e-12) rep.reasons.push_back("F^(0) < 0");

  const int M = grid_points > 0 ? grid_points : default_infrared_grid(R);
  rep.infrared = infrared_check(F, TorusGrid(d, M, true));
  if (!(rep.infrared.K2_est > 0.0))
    rep.reasons.push_back("infrared bound fails at node " + node_string(rep.infrared.argmin_node));

  rep.rho_range_ok = d > 2 && declared_rho > to_double(rho_lower_limit(d));
  if (!rep.rho_range_ok) rep.reasons.push_back("rho outside (d-8)/2 v 0 < rho");

  rep.pass = rep.reasons.empty();
  return rep;
}

std::vector<ModelRow> model_table() {
  struct Raw {
    const char* name;
    int d_min, coeff, offset;
    const char* formula;
    const char* note;
  };
  const Raw raw[] = {
      {"self-avoiding walk", 5, 2, -8, "2(d-4)", ""},
      {"Ising", 5, 2, -8, "2(d-4)", "valid for d sufficiently large; d_min shows the first dimension where the formula is in range"},
      {"weakly coupled phi^4 (1 or 2 components)", 5, 2, -8, "2(d-4)", ""},
      {"percolation", 11, 1, -6, "d-6", ""},
      {"lattice trees and lattice animals", 27, 1, -10, "d-10", ""},
  };
  std::vector<ModelRow> rows;
  for (const Raw& r : raw) {
    ModelRow row;
    row.name = r.name;
    row.d_min = r.d_min;
    row.rho_formula = r.formula;
    row.note = r.note;
    row.rho_coeff = r.coeff;
    row.rho_offset = r.offset;
    row.rho_at_d_min = Rational(r.coeff * r.d_min + r.offset);
    // every row must sit inside the admissible rho range
    row.budget = admissible_s(r.d_min, row.rho_at_d_min);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace latdeconv
