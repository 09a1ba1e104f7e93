#include <fmt/format.h>

#include "hamext/sampler.hpp"

namespace hamext {

Sampler::Sampler(SamplerConfig config) : config_(std::move(config)), rng_(config_.seed) {}

cplx Sampler::draw_value(std::string_view name)
{
    auto it = config_.boxes.find(name);
    const Box box = it == config_.boxes.end() ? config_.default_box : it->second;
    std::uniform_real_distribution<double> re(box.lo, box.hi);
    const double x = re(rng_);
    if (!config_.complex) {
        return {x, 0.0};
    }
    std::uniform_real_distribution<double> im(-config_.imag_scale, config_.imag_scale);
    return {x, im(rng_)};
}

Binding Sampler::draw(const std::vector<std::string> &names, const Binding &base)
{
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        Binding b = base;
        for (const auto &n : names) {
            b.set(n, draw_value(n));
        }
        bool ok = true;
        for (const auto &e : config_.avoid) {
            try {
                const cplx v = eval(e, b);
                if (!(std::abs(v) > config_.margin) || !std::isfinite(std::abs(v))) {
                    ok = false;
                    break;
                }
            } catch (const PoleError &) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return b;
        }
    }
    throw SamplerExhausted(fmt::format("no admissible sample after {} attempts", config_.max_attempts));
}

} // namespace hamext
