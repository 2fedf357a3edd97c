#pragma once

#include <cstdint>

#include "crossguard/simulator.hpp"

namespace crossguard::testing {

/// Randomized world for the safety harness: random ROI, tracks crossing the
/// frame, 1-4 detector sources with random noise, 0-3 train windows, noisy
/// masks and a random controller configuration.
Scenario random_scenario(std::uint64_t seed, std::uint64_t frames = 1000);

/// Deterministic noise-free world: a car crossing the ROI during the first
/// train window, a person and a parked truck that never touch it, two train
/// windows and three perfect sources.
Scenario zero_noise_scenario();

}  // namespace crossguard::testing
