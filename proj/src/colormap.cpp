#include "plad/postprocess.hpp"

namespace plad {

namespace {

constexpr std::array<std::array<float, 3>, 256> make_table() {
    std::array<std::array<float, 3>, 256> t{};
    for (int i = 0; i < 256; ++i) {
        const float s = static_cast<float>(i) / 255.0f;
        if (s < 0.5f) {
            const float u = s / 0.5f;  // blue (0,0,1) -> yellow (1,1,0)
            t[i] = {u, u, 1.0f - u};
        } else {
            const float u = (s - 0.5f) / 0.5f;  // yellow -> red (1,0,0)
            t[i] = {1.0f, 1.0f - u, 0.0f};
        }
    }
    return t;
}

constexpr auto kHeatTable = make_table();

}  // namespace

const std::array<std::array<float, 3>, 256>& heat_colormap() { return kHeatTable; }

}  // namespace plad
