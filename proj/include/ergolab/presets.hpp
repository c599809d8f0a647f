#pragma once

#include "ergolab/config.hpp"

#include <string>
#include <vector>

namespace ergolab {

struct PresetInfo {
    std::string name;
    std::string command;
};

std::vector<PresetInfo> list_presets();

/// Fully populated config for a named preset, including its fixed seed and
/// the analytic justification of its expected numbers. Unknown names raise
/// ConfigError.
ExperimentConfig preset_config(const std::string& name);

} // namespace ergolab
