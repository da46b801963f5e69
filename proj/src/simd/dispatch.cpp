#include <cstdlib>
#include <stdexcept>
#include <string>

#include "act/simd/kernels.hpp"

namespace act::simd {

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_table();
    case Isa::avx2:
      return avx2_table();
    case Isa::neon:
      return neon_table();
  }
  return nullptr;
}

Isa best_available() {
  if (avx2_table() != nullptr) return Isa::avx2;
  if (neon_table() != nullptr) return Isa::neon;
  return Isa::scalar;
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = table_for(detect());
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa detect() {
  const char* env = std::getenv("ACT_SIMD");
  if (env != nullptr) {
    const std::string requested(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (requested == isa_name(isa) && table_for(isa) != nullptr) return isa;
    }
    // Unknown or unavailable requests (including "auto") fall through.
  }
  return best_available();
}

const KernelTable& kernels() { return *active_slot(); }

void select(Isa isa) {
  const KernelTable* table = table_for(isa);
  if (table == nullptr) {
    throw std::invalid_argument("SIMD variant not available on this CPU: " +
                                std::string(isa_name(isa)));
  }
  active_slot() = table;
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(kernels().isa) { select(isa); }

ScopedIsa::~ScopedIsa() { select(previous_); }

}  // namespace act::simd
