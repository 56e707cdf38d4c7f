#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace terracal::io {

inline constexpr const char* kToolVersion = "0.1.0";

// Run provenance: resolved config, seed, digests of everything read and written.
// Written next to the outputs even when the run fails.
struct RunManifest {
    std::string subcommand;
    std::string version = kToolVersion;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;   // path -> content digest
    std::map<std::string, std::string> outputs;  // path -> content digest
    double wall_clock_s = 0.0;
    std::string error;  // empty on success

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    std::string to_json() const;
    void write(const std::string& path) const;
};

}  // namespace terracal::io
