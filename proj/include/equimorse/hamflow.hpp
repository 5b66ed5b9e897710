#pragma once

#include <string>
#include <vector>

#include "equimorse/common.hpp"
#include "json.hpp"

namespace equimorse::hamflow {

enum class TimeMode { Const, Cos, Sin };

struct HTerm {
  double c = 0;
  std::vector<int> m;  // exponents over z = (x_1..x_n, y_1..y_n)
  TimeMode mode = TimeMode::Const;
  int freq = 0;        // time factor cos(2 pi freq t) or sin(2 pi freq t)
};

// 1-periodic polynomial Hamiltonian with dH_t(0) = 0.
class HamiltonianGerm {
 public:
  HamiltonianGerm() = default;
  HamiltonianGerm(int n, std::vector<HTerm> terms, std::string label = "");

  int n() const { return n_; }
  const std::vector<HTerm>& terms() const { return terms_; }
  const std::string& label() const { return label_; }

  double value(double t, const Vec& z) const;
  Vec gradient(double t, const Vec& z) const;
  Mat hessian(double t, const Vec& z) const;

  HamiltonianGerm linearization() const;  // quadratic part only
  bool is_quadratic() const;
  bool is_zero() const { return terms_.empty(); }

  static HamiltonianGerm from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  static HamiltonianGerm zero(int n);
  // Counterclockwise rotation R(2 pi alpha t) in the (x,y) plane.
  static HamiltonianGerm rotation(double alpha);
  // H = lambda x y, time-one map diag(e^lambda, e^-lambda).
  static HamiltonianGerm hyperbolic(double lambda);
  // H = s |z|^4 / 4 for n = 1.
  static HamiltonianGerm quartic(double s);
  // Sum of germs with the same n.
  HamiltonianGerm operator+(const HamiltonianGerm& o) const;

 private:
  int n_ = 1;
  std::vector<HTerm> terms_;
  std::string label_;
};

struct FlowResult {
  Vec z;
  Mat jac;
  double action = 0;  // integral of y.xdot - H along the trajectory
};

// Flow from t0 to t1 with the variational equation. trust < 0 uses the
// configured default radius.
FlowResult integrate_flow(const HamiltonianGerm& g, double t0, double t1, const Vec& z, bool with_jac = true,
                          double trust = -1);

// Jacobian of the flow at the origin.
Mat linear_flow(const HamiltonianGerm& g, double t0, double t1);
// Jacobians at the origin at t0 + (t1-t0) i/m, i = 0..m.
std::vector<Mat> linear_flow_samples(const HamiltonianGerm& g, double t0, double t1, int m);

double gen1_det(const Mat& dpsi);
bool check_gen1(const Mat& dpsi);
bool adapted_N(const HamiltonianGerm& g, int N);
// Gen1 with det d of fixed sign along every partial step t0 -> t, t <= t0 + 1/N.
// This is what the index identity for the discrete action needs.
bool step_homotopy_ok(const HamiltonianGerm& g, int N);

// D^2 S from a linear step map by implicit differentiation.
Mat hessian_from_step(const Mat& dpsi);
// D^2 S(0) = -J0^{-1} (dpsi - I) dT^{-1}; throws Gen1 when dT is singular.
Mat lemma_hessian(const Mat& dpsi, double* asym_residual = nullptr);

enum class SValueMethod { Quadrature, Trajectory };

class GeneratingFunction {
 public:
  GeneratingFunction(HamiltonianGerm g, double t0, double t1, double trust = -1);

  struct Solve {
    Vec y, X;
    Mat dpsi;
    double action = 0;
  };
  struct Eval {
    double S = 0;
    Vec d1, d2;  // grad_1 S = y - Y, grad_2 S = X - x
  };

  int n() const { return g_.n(); }
  double trust() const { return trust_; }
  Solve solve(const Vec& x, const Vec& Y) const;
  Eval eval(const Vec& x, const Vec& Y, SValueMethod m = SValueMethod::Quadrature) const;
  Eval eval_gradient(const Vec& x, const Vec& Y) const;  // S left at 0
  Mat hessian(const Vec& x, const Vec& Y) const;
  Mat hessian_at_zero(double* asym_residual = nullptr) const;
  const Mat& dpsi_at_zero() const { return dpsi0_; }
  double gen2_residual(const Vec& x, const Vec& Y) const;

 private:
  double value_quadrature(const Vec& x, const Vec& Y) const;
  HamiltonianGerm g_;
  double t0_, t1_, trust_;
  Mat dpsi0_;
};

}  // namespace equimorse::hamflow
