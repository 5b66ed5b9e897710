#pragma once

#include <vector>

#include "equimorse/common.hpp"

namespace equimorse {

struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

// Inertia of a symmetric matrix. Eigenvalues with |l| <= rel*max(1,rho) count
// as zero; anything in (thr, 10 thr) raises an ambiguity error.
Inertia inertia(const Mat& s, double rel = -1);

// Dimension of ker(a) with singular-value threshold rel*max(1,||a||).
int kernel_dim(const Mat& a, double rel = -1);

// Orthonormal basis of ker(a) (columns).
Mat kernel_basis(const Mat& a, double rel = -1);

// Orthonormal basis of the negative eigenspace of a symmetric matrix.
Mat negative_eigenspace(const Mat& s);

double symplectic_residual(const Mat& m);
Mat symmetrize(const Mat& m);

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);

long gcd_l(long a, long b);
long lcm_l(long a, long b);
std::vector<int> divisors(int n);
int totient(int n);

}  // namespace equimorse
