#include "rotor/initial_rule.hpp"

#include <algorithm>
#include <sstream>

#include "rotor/error.hpp"

namespace rotor {

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::rho0:
            return "rho0";
        case RuleKind::uniform_up:
            return "uniform-up";
        case RuleKind::custom:
            return "custom";
    }
    return "?";
}

InitialRule InitialRule::custom(int d, Overrides overrides, RuleKind fallback) {
    if (fallback == RuleKind::custom) {
        throw InvalidArgument("custom rule needs a rho0 or uniform-up fallback");
    }
    InitialRule rule(RuleKind::custom);
    rule.fallback_ = fallback;
    for (const auto& [site, dir] : overrides) {
        if (static_cast<int>(site.size()) != d) {
            throw InvalidArgument("override site has wrong dimension");
        }
        if (dir.axis >= d) throw InvalidArgument("override direction out of range");
        if (rule.box_min_.empty()) {
            rule.box_min_ = site;
            rule.box_max_ = site;
        }
        for (int i = 0; i < d; ++i) {
            rule.box_min_[i] = std::min(rule.box_min_[i], site[i]);
            rule.box_max_[i] = std::max(rule.box_max_[i], site[i]);
        }
    }
    rule.overrides_ = std::move(overrides);
    return rule;
}

Direction InitialRule::at(std::span<const std::int64_t> x) const {
    if (kind_ == RuleKind::custom && !overrides_.empty()) {
        auto it = overrides_.find(std::vector<std::int64_t>(x.begin(), x.end()));
        if (it != overrides_.end()) return it->second;
    }
    return fallback_at(fallback_, x);
}

std::string InitialRule::describe() const {
    if (kind_ != RuleKind::custom) return to_string(kind_);
    return "custom(" + std::to_string(overrides_.size()) + " overrides, default " +
           to_string(fallback_) + ")";
}

InitialRule parse_rule(std::string_view spec) {
    if (spec == "rho0") return InitialRule::rho0();
    if (spec == "uniform-up" || spec == "uniform_up") return InitialRule::uniform_up();
    throw InvalidArgument("unknown initial rule '" + std::string(spec) +
                          "' (expected rho0 or uniform-up)");
}

InitialRule parse_rule_table(std::string_view text, int d) {
    std::istringstream in{std::string(text)};
    std::string line;
    RuleKind fallback = RuleKind::rho0;
    InitialRule::Overrides overrides;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) continue;
        if (first == "default") {
            std::string kind;
            fields >> kind;
            if (kind.empty()) throw InvalidArgument("rule table line " + std::to_string(line_no) + ": missing default rule");
            fallback = parse_rule(kind).kind();
            continue;
        }
        std::vector<std::int64_t> site;
        try {
            site.push_back(std::stoll(first));
            for (int i = 1; i < d; ++i) {
                std::int64_t v;
                if (!(fields >> v)) throw InvalidArgument("short coordinate list");
                site.push_back(v);
            }
        } catch (const std::exception&) {
            throw InvalidArgument("rule table line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(d) + " coordinates");
        }
        std::string dir;
        if (!(fields >> dir)) {
            throw InvalidArgument("rule table line " + std::to_string(line_no) +
                                  ": missing direction");
        }
        if (std::string extra; fields >> extra) {
            throw InvalidArgument("rule table line " + std::to_string(line_no) +
                                  ": unexpected '" + extra + "'");
        }
        overrides[site] = parse_direction(dir, d);
    }
    return InitialRule::custom(d, std::move(overrides), fallback);
}

}  // namespace rotor
