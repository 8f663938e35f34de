#pragma once

// Reference schemes: a conventional fixed-position antenna array with digital
// beamforming, and the two-stage "MRT, continuous" PA activation.

#include "wdma/power_alloc.hpp"
#include "wdma/scene.hpp"

namespace wdma {

struct ConventionalResult {
    std::vector<Point3> antennas;
    Matrix gains;          // upsilon(j, k) = |h_k^T w_j|^2 after beamforming
    Vector powers;
    Vector rates;
    double sum_rate = 0.0;
    bool zf_fallback = false; // channel rank-deficient, MRT directions used
    bool feasible = false;    // minimum rates met
};

// K antennas spaced Delta, centred above (L/2, 0) at height d. Zero-forcing
// directions with unit-norm columns, powers by SCA; each user sees sigma_k^2.
ConventionalResult conventional_fixed(const Deployment& deployment, const SystemConfig& config,
                                      const ScaParams& params = {});

// Stage 1 centres the N PAs of waveguide k on user k's x with spacing
// max(Delta, lambda_g), shifted into [0, L]. Stage 2 moves each PA, within
// lambda/2, to the nearest position where its composite phase at user k
// equals that of the middle PA modulo 2 pi.
PinchingLayout mrt_continuous(const Deployment& deployment, const SystemConfig& config);

// Stage 1 alone, exposed for tests.
PinchingLayout mrt_coarse(const Deployment& deployment, const SystemConfig& config);

} // namespace wdma
