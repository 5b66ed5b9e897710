#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "equimorse/field.hpp"
#include "equimorse/hamflow.hpp"
#include "equimorse/iterthy.hpp"
#include "json.hpp"

namespace equimorse::prodsdm {

struct GradedClass {
  int degree = 0;
  std::string label;
  int period = 1;
};

// Degree sum minus (m-1) n, periods add.
GradedClass product_degree(const std::vector<GradedClass>& classes, int n);
// (-1)^{|a||b|}
int supercommutativity_sign(int deg_a, int deg_b);
// Smallest r >= 1 with r i - (r-1) n outside [r delta - n, r delta + n];
// nullopt when the degree never leaves the interval.
std::optional<int> vanishing_threshold(int degree, double delta, int n, int r_max = 1000);

enum class Condition { None, A, B, C };
const char* condition_name(Condition c);

struct SpecialProduct {
  bool nonzero = false;
  bool indeterminate = false;
  Condition failing = Condition::None;
  std::string reason;
  int k = 1, n = 1;
  int degree_hm = 0;  // n + k n in the Morse grading of A_{K,k,1}
  int degree = 0;     // n in the shifted grading
  double hessian_norm = 0;   // |D^2 S(0)|
  double max_drop = 0;       // max over the test spheres of S - S(0) (< 0 for a strict max)
  double min_eig_L = 0;      // smallest eigenvalue of the restricted Hessian on L
};

// S on R^{2n} in variables (x, Y), S(0) critical.
SpecialProduct special_case_product(const Field& S, int k, double radius = 0.05);
// S from the generating function of the time-one map of K.
SpecialProduct special_case_product(const hamflow::HamiltonianGerm& K, int k, double radius = 0.05);

struct SdmReport {
  bool sdm = false;
  double delta = 0, tolerance = 0;
  bool delta_zero = false;
  bool totally_degenerate = false;
  iterthy::FloerHomology homology;
  bool hn_nonzero = false;
};
SdmReport check_sdm(const hamflow::HamiltonianGerm& g, const iterthy::FloerOptions& opt = {});

nlohmann::json to_json(const GradedClass& c);
nlohmann::json to_json(const SpecialProduct& p);
nlohmann::json to_json(const SdmReport& r);

}  // namespace equimorse::prodsdm
