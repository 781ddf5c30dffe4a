#include "recf/kernels.hpp"

#include <stdexcept>
#include <string>

namespace recf::kernels {

namespace detail {
const KernelOps* g_active = nullptr;
}

namespace {

Backend g_backend = Backend::scalar;

// Selects the best backend once, before main() touches the kernels.
struct Init {
    Init() {
        Backend b = best_available();
        detail::g_active = (b == Backend::avx2) ? avx2_ops() : &scalar_ops();
        g_backend = b;
    }
};
const Init g_init;

}  // namespace

Backend best_available() { return avx2_ops() ? Backend::avx2 : Backend::scalar; }

bool available(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && avx2_ops() != nullptr);
}

Backend active() { return g_backend; }

void use(Backend b) {
    if (b == Backend::scalar) {
        detail::g_active = &scalar_ops();
    } else if (const KernelOps* ops = avx2_ops()) {
        detail::g_active = ops;
    } else {
        throw std::runtime_error("kernel backend 'avx2' is not available on this machine");
    }
    g_backend = b;
}

std::string_view name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

std::optional<Backend> parse_backend(std::string_view s) {
    if (s == "scalar") return Backend::scalar;
    if (s == "avx2") return Backend::avx2;
    return std::nullopt;
}

}  // namespace recf::kernels
