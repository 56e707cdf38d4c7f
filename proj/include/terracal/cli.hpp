#pragma once

#include <stdexcept>
#include <string>

#include "terracal/io.hpp"

namespace terracal::cli {

// paper-scale experiment definitions; every rig constant has a named key
io::Config base_defaults();
// reduced geometry applied when `desk_scale = true`
io::Config desk_scale_overrides();

// defaults -> desk overrides (when enabled) -> user file -> CLI overrides.
// An empty path skips the file; a missing file throws ConfigMissing.
struct ConfigMissing : std::runtime_error {
    using std::runtime_error::runtime_error;
};
io::Config resolve_config(const std::string& config_path, const io::Config& cli_overrides);

// subcommands: settle, sink, shear, calibrate, wheel, compare
int run(int argc, const char* const* argv);

}  // namespace terracal::cli
