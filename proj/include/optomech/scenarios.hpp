#pragma once

#include "optomech/config.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/observables.hpp"
#include "optomech/output.hpp"

namespace optomech {

struct ScenarioOutput {
    std::vector<SweepResult> tables;
    bool has_rwa = false;
    RwaReport rwa;
};

// One runner per figure-style scenario. Each consumes its keys from the
// config (unknown keys fail in finish()) and embeds the resolved values in
// every output table.
ScenarioOutput run_param_map(ConfigMap& cfg);
ScenarioOutput run_blockade_sweep(ConfigMap& cfg);
ScenarioOutput run_rwa_check(ConfigMap& cfg);
ScenarioOutput run_phase_sweep(ConfigMap& cfg);
ScenarioOutput run_cat_wigner(ConfigMap& cfg);
ScenarioOutput run_custom(ConfigMap& cfg);

/// Dispatch by scenario name (param_map, blockade, rwa_check, phase_sweep,
/// cat_wigner, custom). Throws UnknownScenario.
ScenarioOutput run_scenario(const std::string& name, ConfigMap& cfg);

/// Shared parameter resolution (Fig. 3 caption defaults).
SystemParams resolve_base_params(ConfigMap& cfg, bool consume_g0 = true);

}  // namespace optomech
