#include "terracal/manifest.hpp"

#include <json.hpp>

#include "terracal/io.hpp"

namespace terracal::io {

void RunManifest::add_input(const std::string& path) { inputs[path] = digest_file(path); }
void RunManifest::add_output(const std::string& path) { outputs[path] = digest_file(path); }

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["version"] = version;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_clock_s"] = wall_clock_s;
    j["status"] = error.empty() ? "ok" : "error";
    if (!error.empty()) j["error"] = error;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const { write_file(path, to_json()); }

}  // namespace terracal::io
