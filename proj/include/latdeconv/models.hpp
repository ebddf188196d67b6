#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latdeconv/budget.hpp"
#include "latdeconv/lattice.hpp"
#include "latdeconv/spectral.hpp"

namespace latdeconv {

enum class ModelKind { srw, perturbed };

struct ModelSpec {
  ModelKind kind = ModelKind::srw;
  int d = 3;
  double mu0 = 1.0;      ///< srw only
  double rho = 1.0;      ///< declared tail exponent
  double epsilon = 0.0;  ///< perturbed only
  int tail_radius = 8;   ///< perturbed only; support of the tail is 2 <= |x| <= tail_radius
  std::optional<std::uint64_t> seed;  ///< random orbit signs; all +1 when absent
  bool exploratory = false;  ///< allow rho outside the admissible range and skip the verdict gate
};

/// JSON object with keys model ("srw" or "perturbed"), d, mu0, rho, epsilon,
/// tail_radius, seed and exploratory. Missing keys keep their defaults; other
/// keys are ignored, so a run config can be passed whole.
ModelSpec model_spec_from_json(const std::string& text);
std::string model_spec_to_json(const ModelSpec& spec);
const char* to_string(ModelKind kind);

/// delta - mu0 D on radius 1.
LatticeFunction srw_kernel(int d, double mu0);

struct PerturbedKernel {
  LatticeFunction F;      ///< orbit layout, verified symmetric, F^(0) = 0
  double epsilon = 0.0;   ///< after any halving
  int halvings = 0;
};

/// delta - D + eps (J - (sum J) delta) with J(x) = chi(x) <x>^{-(d+2+rho)} on
/// 2 <= |x| <= tail_radius. eps is halved (up to 20 times) until the infrared
/// check passes. Unless exploratory, the result must pass assumption_report.
PerturbedKernel perturbed_kernel(const ModelSpec& spec);

/// Builds the kernel a ModelSpec describes.
LatticeFunction make_kernel(const ModelSpec& spec);

struct AssumptionReport {
  bool symmetric = false;
  std::string symmetry_witness;
  DecayEnvelope envelope;
  bool envelope_compact = false;  ///< too few radii to fit; finite support satisfies any decay
  double required_b = 0.0;        ///< d + 2 + rho
  double F_hat_zero = 0.0;
  InfraredReport infrared;
  bool rho_range_ok = false;
  bool pass = false;
  std::vector<std::string> reasons;
};

/// Symmetry, decay envelope over [2, R], F^(0) >= -1e-12, infrared bound on a
/// shifted grid (M = 0 picks max(16, 2R+2) rounded up to a multiple of 4) and the rho range.
AssumptionReport assumption_report(const LatticeFunction& F, double declared_rho, int grid_points = 0);

struct ModelRow {
  std::string name;
  int d_min = 0;
  std::string rho_formula;
  std::string note;
  int rho_coeff = 0, rho_offset = 0;  ///< rho = coeff d + offset
  Rational rho_at_d_min;
  ExponentBudget budget;  ///< admissible_s at d_min
};

std::vector<ModelRow> model_table();

}  // namespace latdeconv
