#include <cstdlib>
#include <cstring>

#include "couder/kernels.h"

namespace couder::kernels {
namespace {

constexpr KernelTable kScalarTable = {Isa::kScalar,         scalar::Axpy,
                                      scalar::Dot,          scalar::SquaredDistance,
                                      scalar::ElementwiseMax, scalar::Scale};

#if defined(COUDER_BUILD_AVX2)
constexpr KernelTable kAvx2Table = {Isa::kAvx2,           avx2::Axpy,
                                    avx2::Dot,            avx2::SquaredDistance,
                                    avx2::ElementwiseMax, avx2::Scale};
#endif

#if defined(COUDER_BUILD_NEON)
constexpr KernelTable kNeonTable = {Isa::kNeon,           neon::Axpy,
                                    neon::Dot,            neon::SquaredDistance,
                                    neon::ElementwiseMax, neon::Scale};
#endif

const KernelTable& Resolve() {
  const char* forced = std::getenv("COUDER_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
    return kScalarTable;
  }
  if (const KernelTable* t = TableFor(Isa::kAvx2)) return *t;
  if (const KernelTable* t = TableFor(Isa::kNeon)) return *t;
  return kScalarTable;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* TableFor(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &kScalarTable;
    case Isa::kAvx2:
#if defined(COUDER_BUILD_AVX2)
      if (__builtin_cpu_supports("avx2")) return &kAvx2Table;
#endif
      return nullptr;
    case Isa::kNeon:
#if defined(COUDER_BUILD_NEON)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& Active() {
  static const KernelTable& table = Resolve();
  return table;
}

}  // namespace couder::kernels
