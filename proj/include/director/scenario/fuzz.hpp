#pragma once

#include <cstdint>

#include "director/scenario/scenario.hpp"

namespace director::scenario {

struct FuzzLimits {
    int max_groups = 15;
    int max_events = 40;
    int max_states = 3;
};

/// Random but valid scenario for seed. Subtasks only point at groups declared
/// later, so the generated graphs are acyclic.
ScenarioFile generate_fuzz_scenario(std::uint64_t seed, const FuzzLimits& limits = {});

}  // namespace director::scenario
