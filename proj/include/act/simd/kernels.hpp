#pragma once

// Data-parallel fp64 kernels behind the tensor engine.
//
// Every kernel has a scalar reference implementation; wider variants (AVX2+FMA
// on x86-64, NEON on aarch64) are selected once at startup. Elementwise kernels
// are bit-identical across ISAs. Reductions (dot, sum, gemm) may differ in the
// last bits because lane-wise partial sums and FMA change rounding order.
//
// Selection order: ACT_SIMD environment variable (scalar|avx2|neon|auto), then
// the best ISA the CPU reports.

#include <cstddef>
#include <string_view>

namespace act::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a (op) b, elementwise; out may alias a or b.
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = alpha * x
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);

  // Row-major accumulating matrix products, all of the form C += op(A) op(B):
  //   gemm_nn: A is m x k, B is k x n
  //   gemm_nt: A is m x k, B is n x k
  //   gemm_tn: A is k x m, B is k x n
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Best table supported by this CPU, honoring ACT_SIMD.
Isa detect();

// The table used by the tensor engine.
const KernelTable& kernels();

// Overrides the active table. Throws std::invalid_argument if the ISA is
// unavailable on this machine. Not thread-safe; call before any tensor work.
void select(Isa isa);

// RAII override, used by equivalence tests.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace act::simd
