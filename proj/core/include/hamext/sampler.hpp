#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hamext/expr.hpp"

namespace hamext {

struct Box {
    double lo = 0.25;
    double hi = 1.75;
};

/// Where and how random points are drawn. A draw is rejected when any of the
/// `avoid` expressions is within `margin` of zero (or has a pole) there.
struct SamplerConfig {
    std::map<std::string, Box, std::less<>> boxes;
    Box default_box;
    std::vector<Expr> avoid;
    double margin = 1e-2;
    std::uint64_t seed = 20120;
    bool complex = false;
    /// Imaginary parts are drawn from [-imag_scale, imag_scale] in complex mode.
    double imag_scale = 0.5;
    int max_attempts = 2000;
};

class SamplerExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Sampler {
public:
    explicit Sampler(SamplerConfig config);

    /// Draws values for `names` on top of `base`; retries until no avoided set is hit.
    Binding draw(const std::vector<std::string> &names, const Binding &base = {});
    /// One scalar from the box of `name`.
    cplx draw_value(std::string_view name);
    std::mt19937_64 &rng() { return rng_; }
    [[nodiscard]] const SamplerConfig &config() const { return config_; }
    void avoid(const Expr &e) { config_.avoid.push_back(e); }

private:
    SamplerConfig config_;
    std::mt19937_64 rng_;
};

} // namespace hamext
