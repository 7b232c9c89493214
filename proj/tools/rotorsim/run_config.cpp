#include "run_config.hpp"

#include <sstream>
#include <stdexcept>

namespace rotorsim {

using nlohmann::json;

#define ROTORSIM_FIELDS(X)                                                                         \
    X(command) X(d) X(order) X(rule) X(n) X(r) X(rho) X(checkpoints) X(regime) X(engine) X(seed)   \
    X(trials) X(radius) X(threads) X(accelerate) X(fuzz) X(max_vertices) X(max_particles)          \
    X(directed) X(graph) X(out) X(budget) X(calibration) X(skip_d3) X(grid)

json to_json(const RunConfig& c) {
    json j = json::object();
#define X(name) j[#name] = c.name;
    ROTORSIM_FIELDS(X)
#undef X
    return j;
}

RunConfig from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        bool known = false;
#define X(name)                                                                            \
    if (key == #name) {                                                                    \
        try {                                                                              \
            value.get_to(c.name);                                                          \
        } catch (const json::exception&) {                                                 \
            throw std::invalid_argument("run config field '" + key + "' has the wrong type"); \
        }                                                                                  \
        known = true;                                                                      \
    }
        ROTORSIM_FIELDS(X)
#undef X
        if (!known) throw std::invalid_argument("unknown run config field '" + key + "'");
    }
    return c;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> config_file_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        for (char& ch : key) {
            if (ch == '_') ch = '-';
        }
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

}  // namespace rotorsim
