#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "equimorse/common.hpp"
#include "json.hpp"

namespace equimorse {

// Scalar function on R^d with derivatives. Defaults use central differences.
class Field {
 public:
  virtual ~Field() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& z) const = 0;
  virtual Vec gradient(const Vec& z) const;
  virtual Mat hessian(const Vec& z) const;
};

class Polynomial : public Field {
 public:
  struct Term {
    double c;
    std::vector<int> e;
  };
  Polynomial() = default;
  Polynomial(int d, std::vector<Term> terms);

  int dim() const override { return d_; }
  double value(const Vec& z) const override;
  Vec gradient(const Vec& z) const override;
  Mat hessian(const Vec& z) const override;

  const std::vector<Term>& terms() const { return terms_; }
  int min_degree() const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial scaled(double s) const;

  static Polynomial from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  int d_ = 0;
  std::vector<Term> terms_;
};

class LambdaField : public Field {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;
  LambdaField(int d, ValueFn v, GradFn g = nullptr, HessFn h = nullptr)
      : d_(d), v_(std::move(v)), g_(std::move(g)), h_(std::move(h)) {}
  int dim() const override { return d_; }
  double value(const Vec& z) const override { return v_(z); }
  Vec gradient(const Vec& z) const override { return g_ ? g_(z) : Field::gradient(z); }
  Mat hessian(const Vec& z) const override { return h_ ? h_(z) : Field::hessian(z); }

 private:
  int d_;
  ValueFn v_;
  GradFn g_;
  HessFn h_;
};

// Orthogonal A with A^k = I.
struct CyclicAction {
  Mat A;
  int k = 1;
  void validate() const;
  Mat power(int j) const;
  bool is_signed_permutation(double tol = 1e-12) const;
  static CyclicAction trivial(int d) { return {Mat::Identity(d, d), 1}; }
  static CyclicAction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct FunctionSpec {
  std::shared_ptr<const Field> f;
  std::optional<CyclicAction> action;
  int dim() const { return f->dim(); }
  // Samples |f(Az) - f(z)| and |grad f(0)|; throws Validation on failure.
  void validate(double radius = 0.5, int samples = 64, unsigned seed = 0) const;
  static FunctionSpec from_json(const nlohmann::json& j);
};

Mat rotation2(double angle);

}  // namespace equimorse
