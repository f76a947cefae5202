#pragma once

// Dense double-precision kernels used by the simplex updates, k-means and
// load accumulation. Every ISA variant produces bit-identical results: the
// scalar reference accumulates in four interleaved lanes and reduces them in
// the same order as the vector code, and no variant uses fused multiply-add.

#include <cstddef>
#include <span>
#include <string_view>

namespace couder::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view IsaName(Isa isa);

// Table of kernel entry points for one instruction set.
struct KernelTable {
  Isa isa;
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum (x[i] - y[i])^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  // y[i] = max(y[i], x[i])
  void (*elementwise_max)(const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
};

namespace scalar {
void Axpy(double a, const double* x, double* y, std::size_t n);
double Dot(const double* x, const double* y, std::size_t n);
double SquaredDistance(const double* x, const double* y, std::size_t n);
void ElementwiseMax(const double* x, double* y, std::size_t n);
void Scale(double a, double* x, std::size_t n);
}  // namespace scalar

#if defined(COUDER_BUILD_AVX2)
namespace avx2 {
void Axpy(double a, const double* x, double* y, std::size_t n);
double Dot(const double* x, const double* y, std::size_t n);
double SquaredDistance(const double* x, const double* y, std::size_t n);
void ElementwiseMax(const double* x, double* y, std::size_t n);
void Scale(double a, double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(COUDER_BUILD_NEON)
namespace neon {
void Axpy(double a, const double* x, double* y, std::size_t n);
double Dot(const double* x, const double* y, std::size_t n);
double SquaredDistance(const double* x, const double* y, std::size_t n);
void ElementwiseMax(const double* x, double* y, std::size_t n);
void Scale(double a, double* x, std::size_t n);
}  // namespace neon
#endif

// Table for the given ISA, or nullptr when it was not compiled in or the
// running CPU lacks it.
const KernelTable* TableFor(Isa isa);

// Best table for this host. The environment variable COUDER_SIMD=scalar
// forces the scalar reference. Resolved once.
const KernelTable& Active();

inline void Axpy(double a, std::span<const double> x, std::span<double> y) {
  Active().axpy(a, x.data(), y.data(), x.size());
}
inline double Dot(std::span<const double> x, std::span<const double> y) {
  return Active().dot(x.data(), y.data(), x.size());
}
inline double SquaredDistance(std::span<const double> x,
                              std::span<const double> y) {
  return Active().squared_distance(x.data(), y.data(), x.size());
}
inline void ElementwiseMax(std::span<const double> x, std::span<double> y) {
  Active().elementwise_max(x.data(), y.data(), x.size());
}
inline void Scale(double a, std::span<double> x) {
  Active().scale(a, x.data(), x.size());
}

}  // namespace couder::kernels
