#include "dnode/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace dnode::kernels {
namespace {

const Ops* g_active = nullptr;

const Ops& pick_default() {
    if (const char* env = std::getenv("DNODE_KERNELS")) {
        const std::string name(env);
        if (name == "scalar") return scalar();
#if defined(DNODE_HAVE_AVX2_TU)
        if (name == "avx2" && cpu_has_avx2()) return avx2();
#endif
        // Unknown or unsupported env value: fall through to autodetection.
    }
#if defined(DNODE_HAVE_AVX2_TU)
    if (cpu_has_avx2()) return avx2();
#endif
    return scalar();
}

} // namespace

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const Ops& active() {
    if (!g_active) g_active = &pick_default();
    return *g_active;
}

void select(const std::string& name) {
    if (name == "scalar") {
        g_active = &scalar();
        return;
    }
#if defined(DNODE_HAVE_AVX2_TU)
    if (name == "avx2") {
        if (!cpu_has_avx2()) {
            throw std::runtime_error("kernels: CPU does not support AVX2");
        }
        g_active = &avx2();
        return;
    }
#endif
    throw std::runtime_error("kernels: unknown backend '" + name + "'");
}

} // namespace dnode::kernels
