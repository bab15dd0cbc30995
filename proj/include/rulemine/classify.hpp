#pragma once

#include <vector>

#include "rulemine/datamodel.hpp"
#include "rulemine/rules.hpp"

namespace rulemine {

inline constexpr Percent kMustHaveFloor{95, 100};
inline constexpr Percent kShouldHaveFloor{90, 100};

// must_have on [95%, 100%], should_have on [90%, 95%), rejected below.
inline RuleClass classify_confidence(const Percent& confidence) {
    if (confidence >= kMustHaveFloor) return RuleClass::must_have;
    if (confidence >= kShouldHaveFloor) return RuleClass::should_have;
    return RuleClass::rejected;
}

struct ClassifiedRule {
    Rule rule;
    RuleClass rule_class;
};

inline std::vector<ClassifiedRule> classify(const std::vector<Rule>& rules) {
    std::vector<ClassifiedRule> out;
    out.reserve(rules.size());
    for (const auto& r : rules) out.push_back({r, classify_confidence(r.confidence())});
    return out;
}

struct Tiers {
    std::vector<ClassifiedRule> must;
    std::vector<ClassifiedRule> should;
    std::vector<ClassifiedRule> rejected;
};

// Stable: each tier keeps the input order.
inline Tiers partition_rules(const std::vector<ClassifiedRule>& rules) {
    Tiers t;
    for (const auto& r : rules) {
        switch (r.rule_class) {
            case RuleClass::must_have: t.must.push_back(r); break;
            case RuleClass::should_have: t.should.push_back(r); break;
            case RuleClass::rejected: t.rejected.push_back(r); break;
        }
    }
    return t;
}

}  // namespace rulemine
