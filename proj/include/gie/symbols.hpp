#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gie/polynomial.hpp"

namespace gie {

// Derivative slots of one unknown, in the order u, x, y, z, xx, xy, xz, yy, yz, zz.
enum class Deriv { U, X, Y, Z, XX, XY, XZ, YY, YZ, ZZ };
constexpr int kSlots = 10;

std::string deriv_name(Deriv d);
Exponent deriv_exponent(Deriv d);
// slot index of the second derivative d^2/dx_j dx_k, 1 <= j <= k <= 3
int second_derivative_index(int j, int k);

struct Slot {
  int component = 0;  // 0-based unknown index
  Deriv d = Deriv::U;
  friend bool operator==(const Slot&, const Slot&) = default;
};

// Equation j is solved for resolved[j]. The remaining 9m slots form Z1 in
// derivative-major order (all components of a derivative, then the next one).
struct ResolutionSpec {
  int m = 1;
  std::vector<Slot> resolved;

  void validate() const;  // throws InvalidSpec
  std::vector<Slot> unresolved() const;
  int z1_position(const Slot& s) const;  // -1 if resolved
  int resolved_equation(const Slot& s) const;  // -1 if unresolved
};

// "u_xx" for m = 1; "u2_x" / "u1" for component-indexed slots
Slot parse_slot(const std::string& name, int m);
std::string slot_name(const Slot& s, int m);
ResolutionSpec spec_from_json(const nlohmann::json& j);

// Equation j: resolved[j] = sum_k (C_k Z1_k)_j + S_j, with Z1_k the k-th
// derivative block of Z1.
struct ParameterSet {
  std::vector<Eigen::MatrixXd> C;  // 9 matrices, m x m
  static ParameterSet zeros(int m);
};

struct SymbolMatrices {
  PolyMatrix B1;      // 9m x 9m
  PolyMatrix B2;      // 9m x m
  PolyMatrix alpha0;  // 9m x m, row (i, d) holds s^d in column i
  QMatrix A0;         // m x 9m, Z1 part of the u rows
  QMatrix A;          // 9m x 9m, so that B1 = alpha0 A0 - A
  std::vector<Slot> row_slots;  // slot producing each row of B1
};

SymbolMatrices build_symbol_matrices(const ResolutionSpec& spec, const ParameterSet& params);

struct SymbolicInverse {
  Polynomial det;
  Polynomial a1;            // det scaled to unit grlex-leading coefficient
  Rational scale;           // det = scale * a1
  PolyMatrix a1_B1_inv;     // a1 * B1^{-1}
  std::string route;        // "woodbury" or "schur"
};

// det(B1) = det(A) det(A0 A^{-1} alpha0 - E) when A is invertible, otherwise a
// Schur complement on the constant columns. Verifies a1 B1^{-1} B1 = a1 E.
SymbolicInverse symbolic_det_and_inverse_factor(const SymbolMatrices& sm);
// Generic entry point for a bare B1: Schur complement on constant columns.
SymbolicInverse symbolic_det_and_inverse_factor(const PolyMatrix& B1);

// C_k = -(C''_1)^{-1} C''_{k+1} with C'' = (E, -C') P^T.
ParameterSet derive_parameters(const ResolutionSpec& spec, const std::vector<Eigen::MatrixXd>& Cprime);

// P applied to [A0; A_natural] (10m x 9m, Z1 columns) must give [C rows; E].
bool permutation_coherent(const ResolutionSpec& spec, const ParameterSet& params);

struct SobolevBudget {
  int a = 0;
  int m1 = 6;
};

struct ConditionOptions {
  int directions = 300;
  int radial_points = 400;
  double radius = 3.0;
  double sublevel_threshold = 1.25;  // exponent of vol{|a1| < t} needed
  // sublevel volumes are estimated from uniform samples in the ball and taken
  // at these fractions of its volume
  int volume_samples = 200000;
  std::vector<double> quantiles = {0.001, 0.002, 0.004, 0.008};
  unsigned seed = 7;
};

struct ConditionReport {
  SobolevBudget budget;
  int det_degree = 0;
  bool local_integrability = false;  // |a1|^{-1} locally integrable
  bool weighted_decay = false;       // (1+|xi|^2)^{-a-3} |B1^{-1}| integrable
  double sublevel_exponent = 0.0;  // +inf when no sample is near a zero of a1
  double tail_exponent = 0.0;
  double radial_integral = 0.0;
  double min_abs_a1 = 0.0, max_abs_a1 = 0.0;
  nlohmann::json samples;  // a few a1 evaluations
};

// Throws ConditionFailed on failure unless throw_on_failure is false.
ConditionReport check_conditions(const Polynomial& a1, const PolyMatrix& a1_B1_inv, const PolyMatrix& a1_B1_inv_B2,
                                 const ConditionOptions& opt = {}, bool throw_on_failure = true);

nlohmann::json to_json(const ConditionReport& r);

}  // namespace gie
