#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace rotorsim {

/// Every setting of one rotorsim invocation. Serialized into the metadata
/// sidecar; replaying a sidecar rebuilds the same RunConfig.
struct RunConfig {
    std::string command;
    int d = 2;
    std::string order;              // "ccw", "cw" or an explicit cycle
    std::string rule = "rho0";      // "rho0", "uniform-up" or "table:<path>"
    std::uint64_t n = 1000;
    double r = 20.0;
    double rho = 0.0;               // ball: shell radius, 0 = r / 2
    std::vector<std::uint64_t> checkpoints;
    std::string regime = "return";  // escape-rate: "return" or "escape-only"
    std::string engine = "sparse";
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    double radius = 1000.0;
    unsigned threads = 1;
    bool accelerate = true;
    std::uint64_t fuzz = 0;
    int max_vertices = 12;
    std::uint64_t max_particles = 8;
    bool directed = false;
    std::string graph;              // abelian: fixture path instead of fuzzing
    std::string out;                // artifact directory (empty: derived name)
    std::uint64_t budget = 1'000'000'000'000ULL;
    std::string calibration;        // calibration file (empty: built-in default)
    bool skip_d3 = false;           // calibrate: skip the large d = 3 solve
    std::string grid;               // batch: grid file

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& config);
/// Throws std::invalid_argument on unknown keys or wrong types.
RunConfig from_json(const nlohmann::json& j);

/// "key = value" lines ('#' comments) turned into "--key=value" tokens.
std::vector<std::string> config_file_tokens(const std::string& text);

}  // namespace rotorsim
