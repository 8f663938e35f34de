#pragma once

#include "wdma/scene.hpp"

#include <random>

namespace wdma::testing {

inline PinchingLayout random_layout(const SystemConfig& config, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> x(0.0, config.strip_length);
    PinchingLayout layout;
    layout.positions.resize(config.num_users, config.pas_per_waveguide);
    for (Eigen::Index i = 0; i < layout.positions.size(); ++i) layout.positions(i) = x(rng);
    layout.sort_rows();
    return layout;
}

inline Deployment random_users(const SystemConfig& config, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point3> users;
    for (int k = 0; k < config.num_users; ++k) {
        const auto [lo, hi] = service_strip(k, config);
        users.push_back({config.strip_length * unit(rng), lo + (hi - lo) * unit(rng), 0.0});
    }
    return make_deployment(config, std::move(users));
}

inline Vector random_powers(const SystemConfig& config, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector p(config.num_users);
    for (int k = 0; k < config.num_users; ++k) p(k) = unit(rng);
    return p * (config.max_power * unit(rng) / p.sum());
}

} // namespace wdma::testing
