#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "residue_lab/error.hpp"

namespace residue_lab::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(RESIDUE_LAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

const KernelSet* best_available() {
  if (const KernelSet* wide = avx2()) return wide;
  return &kScalarKernels;
}

const KernelSet* select(std::string_view name) {
  if (name == "auto" || name.empty()) return best_available();
  if (name == "scalar") return &kScalarKernels;
  if (name == "avx2") {
    if (const KernelSet* wide = avx2()) return wide;
    throw InvalidArgument("avx2 kernels are not available on this build or CPU");
  }
  throw InvalidArgument("unknown kernel set: " + std::string(name));
}

const KernelSet* initial() {
  const char* env = std::getenv("RESIDUE_LAB_KERNELS");
  if (env == nullptr) return best_available();
  try {
    return select(env);
  } catch (const InvalidArgument&) {
    return best_available();
  }
}

std::atomic<const KernelSet*>& current() {
  static std::atomic<const KernelSet*> slot{initial()};
  return slot;
}

}  // namespace

const KernelSet* avx2() {
#ifdef RESIDUE_LAB_HAVE_AVX2
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2Kernels : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active() { return *current().load(std::memory_order_acquire); }

void force(std::string_view name) { current().store(select(name), std::memory_order_release); }

}  // namespace residue_lab::kernels
