#include <arm_neon.h>

#include "couder/kernels.h"

// Two float64x2 registers emulate the 4-lane layout of the other variants:
// acc_lo holds lanes (0, 1), acc_hi holds lanes (2, 3).
namespace couder::kernels::neon {
namespace {

inline double ReduceLanes(float64x2_t acc_lo, float64x2_t acc_hi) {
  float64x2_t pair = vaddq_f64(acc_lo, acc_hi);  // (l0 + l2, l1 + l3)
  return vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
}

}  // namespace

void Axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) {
    double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

double Dot(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double sum = ReduceLanes(lo, hi);
  for (; i < n; ++i) {
    double prod = x[i] * y[i];
    sum = sum + prod;
  }
  return sum;
}

double SquaredDistance(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  double sum = ReduceLanes(lo, hi);
  for (; i < n; ++i) {
    double diff = x[i] - y[i];
    double sq = diff * diff;
    sum = sum + sq;
  }
  return sum;
}

void ElementwiseMax(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    float64x2_t vx = vld1q_f64(x + i);
    uint64x2_t gt = vcgtq_f64(vy, vx);
    vst1q_f64(y + i, vbslq_f64(gt, vy, vx));
  }
  for (; i < n; ++i) y[i] = (y[i] > x[i]) ? y[i] : x[i];
}

void Scale(double a, double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] = x[i] * a;
}

}  // namespace couder::kernels::neon
