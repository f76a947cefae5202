#include "couder/kernels.h"

namespace couder::kernels::scalar {

void Axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

// Lane layout mirrors a 4-wide register: lane l accumulates indices
// congruent to l mod 4, the tail is added serially after the horizontal
// reduction ((l0 + l2) + (l1 + l3)).
double Dot(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      double prod = x[i + l] * y[i + l];
      lane[l] = lane[l] + prod;
    }
  }
  double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; i < n; ++i) {
    double prod = x[i] * y[i];
    sum = sum + prod;
  }
  return sum;
}

double SquaredDistance(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      double diff = x[i + l] - y[i + l];
      double sq = diff * diff;
      lane[l] = lane[l] + sq;
    }
  }
  double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; i < n; ++i) {
    double diff = x[i] - y[i];
    double sq = diff * diff;
    sum = sum + sq;
  }
  return sum;
}

void ElementwiseMax(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // Same operand order as maxpd: returns the second operand on ties/NaN.
    y[i] = (y[i] > x[i]) ? y[i] : x[i];
  }
}

void Scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] * a;
}

}  // namespace couder::kernels::scalar
