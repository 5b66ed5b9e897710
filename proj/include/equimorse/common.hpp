#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace equimorse {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  Shape,
  Validation,
  Configuration,
  Domain,
  Stiffness,
  Resolution,
  TrustRegion,
  Gen1,
  Budget,
  Ambiguity,
  Degeneracy,
  Isolation,
  Parameter,
  Boundary,
  NonMorseSmale,
  Radius,
  Unsupported,
  Instability,
  Pipeline,
  Usage,
};

const char* error_kind_name(ErrorKind k);

// Validation-type failures map to CLI exit 2, numerical ones to exit 3.
bool is_numerical(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

// Global tolerance table. Overridable with EQUIMORSE_TOL="key=value,key=value"
// or a JSON object string.
struct Tolerances {
  double eig_rel = 1e-8;        // relative eigenvalue / singular value threshold
  double gen1_det = 1e-8;       // |det| floor for the Gen1 matrix
  double symplectic = 1e-7;     // flow Jacobian residual
  double path_symplectic = 1e-8;
  double ode = 1e-12;           // integrator abs/rel tolerance
  double newton = 1e-13;        // generating-function Newton residual
  double trust_radius = 0.5;
  double root_of_unity = 1e-8;  // classify_iteration
  double root_ambiguity = 1e-6;
};

Tolerances& tolerances();
// Re-reads EQUIMORSE_TOL; throws Configuration on malformed input.
void reload_tolerances();
// Applies one override string (same syntax as the environment variable).
void apply_tolerance_overrides(const std::string& spec);

// Sign convention for Hamiltonian vector fields, echoed in reports.
// z = (x, y); xdot = dH/dy, ydot = -dH/dx, i.e. zdot = -J0 grad H with
// J0 = [[0,-I],[I,0]].
inline constexpr const char* kHamiltonianConvention =
    "i_{X_H} w0 = dH, w0 = sum dx^dy: xdot = dH/dy, ydot = -dH/dx";

Mat J0(int n);

}  // namespace equimorse
