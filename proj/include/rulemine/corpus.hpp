#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rulemine/classify.hpp"
#include "rulemine/datamodel.hpp"
#include "rulemine/ingest.hpp"
#include "rulemine/report.hpp"
#include "rulemine/sum_solver.hpp"
#include "rulemine/text.hpp"

namespace rulemine {

// Three company characteristics plus the twenty website checklist questions, in
// questionnaire order.
inline constexpr std::string_view kAppendixASchema = R"schema(# Website facility checklist for the top-100 company study.
# Company characteristics (rule antecedents)
attribute age numeric antecedent bins: 0-10=below10, 11-29=11to29, 30-=above30
attribute ownership categorical antecedent values: governmental, private, semiprivate
attribute industry categorical antecedent values: products, services

# Basic and technical facilities (questions 1-5)
facility load_time "Reasonable load-time (under 30 s on a 56 kbps connection)"
facility search "Search-inside facility"
facility detailed_submenus "Detailed submenus for easier access to different parts"
facility site_map "Site map for easier navigation"
facility page_titles "Specific page titles rather than codes or numbers"

# Information-providing facilities (questions 6-15)
facility about_us "About Us page"
facility general_field_intro "General introduction of its field"
facility detailed_description "Detailed description of products/services"
facility research_department "Separate research department section"
facility company_at_glance "Company at a glance section"
facility company_at_glance_english "Company at a glance page in English"
facility english_homepage "English homepage"
facility english_contents "Selected contents in English"
facility branches_info "Contact info and introduction of branches"
facility advertises_products "Advertising of own products/services"

# Service-delivering facilities (questions 16-20)
facility contact_us "Contact info page"
facility related_links "Related links section"
facility links_to_others "Links to other sites"
facility news_links "Links to news and related information"
facility personnel_login "Personnel log-in facility"
)schema";

// The 68 published rules. support_pct is the antecedent coverage as printed.
inline constexpr std::string_view kAppendixBCsv = R"(rule_id,antecedent,consequent,confidence_pct,support_pct
1,age=below10,facility=about_us,100.00,12.08
2,age=below10,facility=contact_us,100.00,12.08
3,age=above30,facility=contact_us,100.00,49.45
4,ownership=semiprivate,facility=company_at_glance,100.00,15.38
5,ownership=semiprivate,facility=about_us,100.00,15.38
6,ownership=private,facility=contact_us,100.00,30.76
7,industry=products,facility=contact_us,100.00,48.35
8,age=above30 AND ownership=private,facility=contact_us,100.00,12.08
9,age=11to29 AND ownership=governmental,facility=general_field_intro,100.00,21.97
10,age=11to29 AND ownership=governmental,facility=about_us,100.00,21.97
11,age=above30 AND ownership=governmental,facility=contact_us,100.00,30.76
12,age=11to29 AND industry=products,facility=about_us,100.00,16.48
13,age=11to29 AND industry=products,facility=contact_us,100.00,16.48
14,age=above30 AND industry=products,facility=contact_us,100.00,28.57
15,age=above30 AND industry=services,facility=contact_us,100.00,20.87
16,ownership=private AND industry=services,facility=contact_us,100.00,20.87
17,ownership=governmental AND industry=products,facility=contact_us,100.00,32.96
18,ownership=governmental AND industry=services,facility=load_time,100.00,20.87
19,ownership=governmental AND industry=services,facility=general_field_intro,100.00,20.87
20,ownership=governmental AND industry=services,facility=about_us,100.00,20.87
21,ownership=governmental,facility=about_us,97.95,53.84
22,industry=products,facility=about_us,97.72,48.35
23,age=11to29,facility=about_us,97.14,38.46
24,ownership=governmental AND industry=products,facility=about_us,96.66,32.96
25,age=above30 AND ownership=governmental,facility=load_time,96.42,30.76
26,age=above30 AND ownership=governmental,facility=about_us,96.42,30.76
27,age=above30 AND industry=products,facility=company_at_glance,96.15,28.57
28,age=above30 AND industry=products,facility=about_us,96.15,28.57
29,ownership=governmental,facility=general_field_intro,95.91,53.84
30,ownership=governmental,facility=contact_us,95.91,53.84
31,industry=services,facility=contact_us,95.74,51.64
32,age=11to29 AND industry=services,facility=company_at_glance,95.00,21.97
33,age=11to29 AND industry=services,facility=about_us,95.00,21.97
34,age=above30 AND industry=services,facility=english_homepage,94.73,20.87
35,age=above30 AND industry=services,facility=general_field_intro,94.73,20.87
36,ownership=governmental AND industry=services,facility=english_contents,94.73,20.87
37,ownership=governmental AND industry=services,facility=english_homepage,94.73,20.87
38,age=11to29,facility=contact_us,94.28,38.46
39,industry=services,facility=about_us,93.61,51.64
40,age=above30,facility=general_field_intro,93.33,49.45
41,age=above30,facility=about_us,93.33,49.45
42,age=11to29 AND industry=products,facility=general_field_intro,93.33,16.48
43,ownership=governmental AND industry=products,facility=general_field_intro,93.33,32.96
44,industry=products,facility=general_field_intro,93.18,48.35
45,ownership=semiprivate,facility=research_department,92.85,15.38
46,ownership=semiprivate,facility=related_links,92.85,15.38
47,ownership=semiprivate,facility=detailed_submenus,92.85,15.38
48,age=above30 AND ownership=governmental,facility=general_field_intro,92.85,30.76
49,age=above30 AND ownership=governmental,facility=company_at_glance,92.85,30.76
50,age=above30 AND industry=products,facility=general_field_intro,92.30,28.57
51,ownership=governmental,facility=load_time,91.83,53.84
52,industry=services,facility=company_at_glance,91.48,51.64
53,age=11to29,facility=general_field_intro,91.42,38.46
54,age=above30,facility=company_at_glance,91.11,49.45
55,age=below10,facility=related_links,90.90,12.08
56,age=below10,facility=company_at_glance,90.90,12.08
57,age=above30 AND ownership=private,facility=page_titles,90.90,12.08
58,age=above30 AND ownership=private,facility=detailed_submenus,90.90,12.08
59,age=above30 AND ownership=private,facility=general_field_intro,90.90,12.08
60,age=11to29 AND ownership=governmental,facility=english_contents,90.00,21.97
61,age=11to29 AND ownership=governmental,facility=english_homepage,90.00,21.97
62,age=11to29 AND ownership=governmental,facility=contact_us,90.00,21.97
63,age=11to29 AND industry=services,facility=english_contents,90.00,21.97
64,age=11to29 AND industry=services,facility=english_homepage,90.00,21.97
65,age=11to29 AND industry=services,facility=related_links,90.00,21.97
66,age=11to29 AND industry=services,facility=load_time,90.00,21.97
67,age=11to29 AND industry=services,facility=general_field_intro,90.00,21.97
68,age=11to29 AND industry=services,facility=contact_us,90.00,21.97
)";

inline Schema appendix_a_schema() { return parse_schema(kAppendixASchema); }
inline std::vector<GoldenRule> appendix_b_rules() { return parse_golden_rules(kAppendixBCsv); }

// Nearest integer to published_h/10000 * denominator, ties upward.
inline std::uint64_t count_from_percent(std::uint64_t published_h, std::uint64_t denominator) {
    return (2 * published_h * denominator + 10000) / 20000;
}

// Group size taken from a printed coverage figure (truncated two decimals).
struct PublishedCount {
    std::vector<std::string> items;  // a transaction is counted if it holds all of them
    std::uint64_t count = 0;
    std::uint64_t published_h = 0;
};

// Frequency-table cell; published figures are rounded two decimals.
struct FrequencyCell {
    std::string group;
    std::vector<std::string> any_of;  // member if it holds any of these; empty = everyone
    std::uint64_t published_h = 0;
    std::uint64_t count = 0;
    std::uint64_t group_size = 0;
};

struct FrequencyCounts {
    std::string facility;
    std::vector<FrequencyCell> cells;  // cells[0] is the overall column
};

struct StudyCounts {
    std::uint64_t m = 0;
    std::vector<PublishedCount> singles;
    std::vector<PublishedCount> pairs;
    std::vector<FrequencyCounts> frequency;
};

// Every integrality and family-consistency violation, one message each.
inline std::vector<std::string> integrality_problems(const StudyCounts& pc) {
    std::vector<std::string> problems;
    auto check_coverage = [&](const PublishedCount& c) {
        std::string name;
        for (const auto& i : c.items) name += (name.empty() ? "" : " AND ") + i;
        if (count_from_percent(c.published_h, pc.m) != c.count)
            problems.push_back(name + ": count " + std::to_string(c.count) + " is not round(" +
                               format_hundredths(c.published_h) + "% of " + std::to_string(pc.m) + ")");
        else if (percent_hundredths(Percent(c.count, pc.m), Rounding::truncate) != c.published_h)
            problems.push_back(name + ": " + std::to_string(c.count) + "/" + std::to_string(pc.m) +
                               " does not truncate to " + format_hundredths(c.published_h));
    };
    for (const auto& c : pc.singles) check_coverage(c);
    for (const auto& c : pc.pairs) check_coverage(c);

    std::map<std::string, std::uint64_t> by_attribute, single_count;
    for (const auto& c : pc.singles) {
        if (c.items.size() != 1) {
            problems.push_back("single count with " + std::to_string(c.items.size()) + " items");
            continue;
        }
        by_attribute[c.items[0].substr(0, c.items[0].find('='))] += c.count;
        single_count[c.items[0]] = c.count;
    }
    for (const auto& [attr, total] : by_attribute)
        if (total != pc.m)
            problems.push_back(attr + " counts sum to " + std::to_string(total) + ", not " + std::to_string(pc.m));
    for (const auto& c : pc.pairs)
        for (const auto& item : c.items) {
            auto it = single_count.find(item);
            if (it != single_count.end() && c.count > it->second)
                problems.push_back("pair count for " + item + " exceeds its single count");
        }

    for (const auto& row : pc.frequency)
        for (const auto& cell : row.cells) {
            const std::string name = row.facility + "/" + cell.group;
            std::uint64_t size = cell.any_of.empty() ? pc.m : 0;
            for (const auto& item : cell.any_of) size += single_count.count(item) ? single_count[item] : 0;
            if (size != cell.group_size)
                problems.push_back(name + ": group size " + std::to_string(cell.group_size) + " != " + std::to_string(size));
            if (cell.group_size == 0 || cell.count > cell.group_size) {
                problems.push_back(name + ": count out of range");
                continue;
            }
            if (count_from_percent(cell.published_h, cell.group_size) != cell.count)
                problems.push_back(name + ": count " + std::to_string(cell.count) + " is not round(" +
                                   format_hundredths(cell.published_h) + "% of " + std::to_string(cell.group_size) + ")");
            else if (percent_hundredths(Percent(cell.count, cell.group_size), Rounding::round) != cell.published_h)
                problems.push_back(name + ": " + std::to_string(cell.count) + "/" + std::to_string(cell.group_size) +
                                   " does not round to " + format_hundredths(cell.published_h));
        }
    return problems;
}

// Group counts recovered from the printed percentages of the 91 accessible companies.
inline StudyCounts study_group_counts() {
    StudyCounts pc;
    pc.m = 91;
    pc.singles = {
        {{"age=below10"}, 11, 1208},          {{"age=11to29"}, 35, 3846},
        {{"age=above30"}, 45, 4945},          {{"ownership=governmental"}, 49, 5384},
        {{"ownership=private"}, 28, 3076},    {{"ownership=semiprivate"}, 14, 1538},
        {{"industry=products"}, 44, 4835},    {{"industry=services"}, 47, 5164},
    };
    pc.pairs = {
        {{"age=11to29", "ownership=governmental"}, 20, 2197},
        {{"age=above30", "ownership=governmental"}, 28, 3076},
        {{"age=above30", "ownership=private"}, 11, 1208},
        {{"age=11to29", "industry=products"}, 15, 1648},
        {{"age=above30", "industry=products"}, 26, 2857},
        {{"age=above30", "industry=services"}, 19, 2087},
        {{"ownership=private", "industry=services"}, 19, 2087},
        {{"ownership=governmental", "industry=products"}, 30, 3296},
        {{"ownership=governmental", "industry=services"}, 19, 2087},
        {{"age=11to29", "industry=services"}, 20, 2197},
    };

    struct Column {
        const char* group;
        std::vector<std::string> any_of;
        std::uint64_t size;
    };
    const std::vector<Column> columns = {
        {"total", {}, 91},
        {"ownership=governmental", {"ownership=governmental"}, 49},
        {"ownership=private+semiprivate", {"ownership=private", "ownership=semiprivate"}, 42},
        {"industry=products", {"industry=products"}, 44},
        {"industry=services", {"industry=services"}, 47},
        {"age=below10", {"age=below10"}, 11},
        {"age=11to29", {"age=11to29"}, 35},
        {"age=above30", {"age=above30"}, 45},
    };
    using Cells = std::vector<std::pair<std::uint64_t, std::uint64_t>>;  // (published_h, count)
    const std::vector<std::pair<const char*, Cells>> rows = {
        {"about_us", {{9560, 87}, {9796, 48}, {9286, 39}, {9773, 43}, {9362, 44}, {10000, 11}, {9714, 34}, {9333, 42}}},
        {"contact_us", {{9780, 89}, {9592, 47}, {10000, 42}, {10000, 44}, {9574, 45}, {10000, 11}, {9429, 33}, {10000, 45}}},
        {"search", {{7473, 68}, {7551, 37}, {7381, 31}, {7273, 32}, {7660, 36}, {8182, 9}, {8571, 30}, {6444, 29}}},
        {"english_homepage", {{7692, 70}, {8980, 44}, {6905, 29}, {7045, 31}, {8298, 39}, {3636, 4}, {8857, 31}, {7778, 35}}},
        {"english_contents", {{7473, 68}, {8163, 40}, {6667, 28}, {7045, 31}, {7872, 37}, {2727, 3}, {8857, 31}, {7556, 34}}},
        {"related_links", {{7692, 70}, {8571, 42}, {7143, 30}, {7045, 31}, {8298, 39}, {9091, 10}, {8286, 29}, {6889, 31}}},
        {"news_links", {{6813, 62}, {6531, 32}, {7143, 30}, {6364, 28}, {7234, 34}, {7273, 8}, {7429, 26}, {6222, 28}}},
        {"personnel_login", {{6374, 58}, {5306, 26}, {7619, 32}, {5909, 26}, {6809, 32}, {8182, 9}, {5143, 18}, {6889, 31}}},
        {"research_department", {{5824, 53}, {5714, 28}, {5952, 25}, {6591, 29}, {5106, 24}, {5455, 6}, {4571, 16}, {6889, 31}}},
        {"links_to_others", {{7033, 64}, {6939, 34}, {7143, 30}, {6591, 29}, {7447, 35}, {7273, 8}, {8000, 28}, {6222, 28}}},
        {"site_map", {{7253, 66}, {7143, 35}, {7143, 30}, {6364, 28}, {7872, 37}, {6364, 7}, {7429, 26}, {7111, 32}}},
        {"page_titles", {{6154, 56}, {5510, 27}, {6905, 29}, {6136, 27}, {6170, 29}, {6364, 7}, {6000, 21}, {6222, 28}}},
        {"load_time", {{8681, 79}, {9184, 45}, {8095, 34}, {8409, 37}, {8936, 42}, {8182, 9}, {8857, 31}, {8889, 40}}},
        {"general_field_intro", {{9121, 83}, {9592, 47}, {8571, 36}, {9318, 41}, {8936, 42}, {8182, 9}, {9143, 32}, {9333, 42}}},
        {"detailed_description", {{5714, 52}, {5306, 26}, {6190, 26}, {5909, 26}, {5532, 26}, {5455, 6}, {5429, 19}, {6000, 27}}},
        {"detailed_submenus", {{7912, 72}, {6939, 34}, {9048, 38}, {7955, 35}, {7872, 37}, {7273, 8}, {7714, 27}, {8222, 37}}},
        {"branches_info", {{6264, 57}, {5714, 28}, {6905, 29}, {4773, 21}, {7660, 36}, {6364, 7}, {6286, 22}, {6222, 28}}},
        {"advertises_products", {{7033, 64}, {6735, 33}, {7381, 31}, {6818, 30}, {7234, 34}, {7273, 8}, {6286, 22}, {7556, 34}}},
        {"company_at_glance", {{9011, 82}, {8776, 43}, {9286, 39}, {8864, 39}, {9149, 43}, {9091, 10}, {8857, 31}, {9111, 41}}},
        {"company_at_glance_english", {{6813, 62}, {7143, 35}, {6429, 27}, {5909, 26}, {7660, 36}, {5455, 6}, {7714, 27}, {6444, 29}}},
    };
    for (const auto& [facility, cells] : rows) {
        FrequencyCounts row{facility, {}};
        for (std::size_t k = 0; k < columns.size(); ++k)
            row.cells.push_back({columns[k].group, columns[k].any_of, cells[k].first, cells[k].second, columns[k].size});
        pc.frequency.push_back(std::move(row));
    }

    if (auto problems = integrality_problems(pc); !problems.empty()) {
        std::string msg = "embedded study counts fail integrality checks:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw Error(msg);
    }
    return pc;
}

// ---------------------------------------------------------------------------
// Arithmetic consistency of the published rules.

struct ConsistencyEntry {
    int rule_id = 0;
    std::uint64_t antecedent_count = 0;  // round(support% * m / 100)
    std::uint64_t joint_count = 0;       // nearest integer to the estimate
    std::int64_t deviation_e4 = 0;       // (estimate - joint) in units of 1e-4 transactions
    bool consistent = false;

    double estimate() const { return static_cast<double>(joint_count) + static_cast<double>(deviation_e4) / 1e4; }
};

struct ConsistencyReport {
    std::vector<ConsistencyEntry> entries;
    std::vector<int> violations;
    bool ok() const { return violations.empty(); }
};

// For each rule: n_A from the coverage column, estimate = confidence% * n_A / 100, and
// the estimate must lie within 0.01 of an integer.
inline ConsistencyReport arithmetic_consistency_check(const std::vector<GoldenRule>& golden, const StudyCounts& counts) {
    ConsistencyReport report;
    for (const auto& g : golden) {
        ConsistencyEntry e;
        e.rule_id = g.rule_id;
        e.antecedent_count = count_from_percent(g.support_h, counts.m);
        const std::uint64_t est_e4 = g.confidence_h * e.antecedent_count;  // estimate * 10^4
        e.joint_count = (est_e4 + 5000) / 10000;
        e.deviation_e4 = static_cast<std::int64_t>(est_e4) - static_cast<std::int64_t>(e.joint_count * 10000);
        e.consistent = std::llabs(e.deviation_e4) <= 100 && e.joint_count <= e.antecedent_count && e.antecedent_count > 0;
        if (!e.consistent) report.violations.push_back(g.rule_id);
        report.entries.push_back(e);
    }
    return report;
}

inline Itemset resolve_items(const ItemCatalog& catalog, const std::vector<ItemRef>& refs) {
    std::vector<ItemId> ids;
    for (const auto& r : refs) ids.push_back(catalog.require_label(r.label()));
    auto set = Itemset::from_unsorted(ids);
    if (set.size() != refs.size()) throw Error("repeated item in rule");
    return set;
}

// Published rules as exact count rules, using the counts implied by their percentages.
inline std::vector<Rule> golden_to_rules(const std::vector<GoldenRule>& golden, const ItemCatalog& catalog,
                                         const StudyCounts& counts) {
    auto check = arithmetic_consistency_check(golden, counts);
    std::vector<Rule> out;
    for (std::size_t k = 0; k < golden.size(); ++k) {
        const auto& e = check.entries[k];
        out.emplace_back(resolve_items(catalog, golden[k].antecedent), resolve_items(catalog, {golden[k].consequent}),
                         e.antecedent_count, e.joint_count, counts.m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixture reconstruction.

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, std::vector<std::string> conflict)
        : Error(what), conflict_(std::move(conflict)) {}
    const std::vector<std::string>& conflict() const noexcept { return conflict_; }

private:
    std::vector<std::string> conflict_;
};

struct UnmetCell {
    std::string facility;
    std::string group;
    std::uint64_t published_h = 0;
    std::uint64_t target = 0;
    std::uint64_t achieved = 0;
    std::uint64_t group_size = 0;
};

struct ConstructionReport {
    std::vector<std::pair<std::string, std::uint64_t>> profile_counts;  // joint demographic cells
    std::size_t tables_examined = 0;
    std::size_t mandatory_constraints = 0;
    std::size_t frequency_cells = 0;
    std::size_t frequency_met = 0;
    std::size_t unmet_lower_bound = 0;
    std::vector<UnmetCell> unmet;
};

struct Fixture {
    Schema schema;
    TransactionDatabase db;
    ConstructionReport report;
};

namespace detail {

// Joint demographic profiles: one per combination of antecedent-attribute values, the
// first attribute varying slowest.
struct ProfileSpace {
    std::vector<std::vector<ItemId>> profiles;

    explicit ProfileSpace(const ItemCatalog& catalog) {
        profiles.push_back({});
        for (const auto& attr : catalog.attributes()) {
            if (attr.item_class != ItemClass::demographic) continue;
            std::vector<std::vector<ItemId>> next;
            for (const auto& p : profiles)
                for (std::size_t k = 0; k < attr.values.size(); ++k) {
                    auto q = p;
                    q.push_back(ItemId{static_cast<std::uint32_t>(attr.first_item + k)});
                    next.push_back(std::move(q));
                }
            profiles = std::move(next);
        }
    }

    std::size_t size() const { return profiles.size(); }

    bool holds(std::size_t p, ItemId id) const {
        return std::find(profiles[p].begin(), profiles[p].end(), id) != profiles[p].end();
    }

    std::vector<std::size_t> matching_all(const std::vector<ItemId>& ids) const {
        std::vector<std::size_t> out;
        for (std::size_t p = 0; p < size(); ++p)
            if (std::all_of(ids.begin(), ids.end(), [&](ItemId id) { return holds(p, id); })) out.push_back(p);
        return out;
    }

    std::vector<std::size_t> matching_any(const std::vector<ItemId>& ids) const {
        if (ids.empty()) {
            std::vector<std::size_t> all(size());
            for (std::size_t p = 0; p < size(); ++p) all[p] = p;
            return all;
        }
        std::vector<std::size_t> out;
        for (std::size_t p = 0; p < size(); ++p)
            if (std::any_of(ids.begin(), ids.end(), [&](ItemId id) { return holds(p, id); })) out.push_back(p);
        return out;
    }
};

struct FacilitySpec {
    ItemId item;
    std::vector<solver::SumConstraint> mandatory;
    std::vector<solver::SumConstraint> frequency;  // [0] is the overall count
    std::vector<const FrequencyCell*> cells;
    std::size_t min_unmet = 0;  // group cells that no plan can meet together
};

struct FacilityPlan {
    std::vector<std::int64_t> per_profile;
    std::vector<std::size_t> unmet;  // indices into FacilitySpec::frequency
    std::size_t penalty = 0;
};

// Missing the overall count costs more than any number of group cells.
inline constexpr std::size_t kOverallPenalty = 1000;

inline void for_each_combination(std::size_t n, std::size_t k, const std::function<bool(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        if (!fn(idx)) return;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Cheapest per-profile counts meeting every mandatory constraint. frequency-table cells are
// dropped fewest-first, combinations in lexicographic order; nullopt if the cost would
// exceed max_penalty or the mandatory set alone is infeasible.
inline std::optional<FacilityPlan> plan_facility(const FacilitySpec& spec, const std::vector<std::int64_t>& sizes,
                                                 std::size_t max_penalty) {
    solver::Problem base;
    for (auto n : sizes) base.add_var(0, n);
    base.constraints = spec.mandatory;
    if (!solver::feasible(base)) return std::nullopt;
    const std::size_t groups = spec.frequency.size() - 1;
    for (int drop_overall = 0; drop_overall < 2; ++drop_overall) {
        for (std::size_t k = drop_overall ? 0 : spec.min_unmet; k <= groups; ++k) {
            const std::size_t cost = k + (drop_overall ? kOverallPenalty : 0);
            if (cost > max_penalty) return std::nullopt;
            std::optional<FacilityPlan> found;
            for_each_combination(groups, k, [&](const std::vector<std::size_t>& dropped) {
                auto problem = base;
                std::vector<std::size_t> unmet;
                if (drop_overall)
                    unmet.push_back(0);
                else
                    problem.constraints.push_back(spec.frequency[0]);
                for (std::size_t g = 1; g <= groups; ++g) {
                    if (std::find(dropped.begin(), dropped.end(), g - 1) != dropped.end())
                        unmet.push_back(g);
                    else
                        problem.constraints.push_back(spec.frequency[g]);
                }
                auto sol = solver::first_solution(problem, solver::ValueOrder::descending);
                if (!sol) return true;
                found = FacilityPlan{std::move(*sol), std::move(unmet), cost};
                return false;
            });
            if (found) return found;
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Reconstructs a database consistent with the published constraints: demographic single
// and pairwise counts, every published rule's antecedent and joint counts (mandatory),
// and frequency-table cells as far as they can be met together. Joint profile tables are tried
// in depth-first order (smallest profile index first, ascending counts); the first table
// with the fewest unmet frequency-table cells wins.
inline Fixture build_fixture(const StudyCounts& counts, const std::vector<GoldenRule>& golden) {
    if (auto problems = integrality_problems(counts); !problems.empty())
        throw Error("study counts fail integrality checks: " + problems.front());
    Schema schema = appendix_a_schema();
    const auto& catalog = *schema.catalog;
    const detail::ProfileSpace space(catalog);
    const auto m = static_cast<std::int64_t>(counts.m);

    auto ids_of = [&](const std::vector<std::string>& labels) {
        std::vector<ItemId> ids;
        for (const auto& l : labels) ids.push_back(catalog.require_label(l));
        return ids;
    };
    auto join = [](const std::vector<std::string>& labels) {
        std::string s;
        for (const auto& l : labels) s += (s.empty() ? "" : " AND ") + l;
        return s;
    };

    // Demographic profile table.
    solver::Problem demo;
    for (std::size_t p = 0; p < space.size(); ++p) demo.add_var(0, m);
    std::vector<std::size_t> all_profiles = space.matching_any({});
    demo.constraints.push_back({all_profiles, m, "total=" + std::to_string(m)});
    for (const auto* family : {&counts.singles, &counts.pairs})
        for (const auto& c : *family)
            demo.constraints.push_back({space.matching_all(ids_of(c.items)), static_cast<std::int64_t>(c.count),
                                        "count(" + join(c.items) + ")=" + std::to_string(c.count)});

    // Published rules: antecedent coverage is a demographic constraint, the joint count a
    // facility one.
    std::map<ItemId, detail::FacilitySpec> specs;
    for (auto f : catalog.items_of_class(ItemClass::facility)) specs[f].item = f;
    const auto consistency = arithmetic_consistency_check(golden, counts);
    for (std::size_t k = 0; k < golden.size(); ++k) {
        const auto& g = golden[k];
        std::vector<std::string> labels;
        for (const auto& r : g.antecedent) labels.push_back(r.label());
        auto ante = ids_of(labels);
        for (auto id : ante)
            if (catalog.item(id).item_class != ItemClass::demographic)
                throw Error("rule " + std::to_string(g.rule_id) + " has a non-demographic antecedent");
        const auto f = catalog.require_label(g.consequent.label());
        if (catalog.attribute_of(f).kind != AttributeKind::binary)
            throw Error("rule " + std::to_string(g.rule_id) + " consequent is not a facility");
        const auto& e = consistency.entries[k];
        auto profiles = space.matching_all(ante);
        const std::string tag = "rule " + std::to_string(g.rule_id) + ": ";
        demo.constraints.push_back({profiles, static_cast<std::int64_t>(e.antecedent_count),
                                    tag + "count(" + join(labels) + ")=" + std::to_string(e.antecedent_count)});
        specs[f].mandatory.push_back({profiles, static_cast<std::int64_t>(e.joint_count),
                                      tag + "count(" + join(labels) + " AND " + g.consequent.label() +
                                          ")=" + std::to_string(e.joint_count)});
    }

    std::size_t lower_bound = 0, frequency_cells = 0;
    for (const auto& row : counts.frequency) {
        auto& spec = specs.at(catalog.require_label("facility=" + row.facility));
        for (const auto& cell : row.cells) {
            spec.frequency.push_back({space.matching_any(ids_of(cell.any_of)), static_cast<std::int64_t>(cell.count),
                                   row.facility + "/" + cell.group});
            spec.cells.push_back(&cell);
        }
        frequency_cells += row.cells.size();
        spec.min_unmet = 0;
        // Group columns that partition one attribute must add up to the overall count;
        // each partition that does not forces at least one unmet cell.
        for (const auto& attr : catalog.attributes()) {
            if (attr.item_class != ItemClass::demographic) continue;
            std::multiset<std::string> covered;
            std::uint64_t sum = 0;
            for (std::size_t c = 1; c < row.cells.size(); ++c) {
                const auto& any = row.cells[c].any_of;
                if (any.empty() || !std::all_of(any.begin(), any.end(), [&](const std::string& l) {
                        return catalog.item(catalog.require_label(l)).attribute == attr.name;
                    }))
                    continue;
                covered.insert(any.begin(), any.end());
                sum += row.cells[c].count;
            }
            if (covered.size() == attr.values.size() &&
                std::set<std::string>(covered.begin(), covered.end()).size() == attr.values.size() &&
                sum != row.cells[0].count)
                ++spec.min_unmet;
        }
    }
    for (const auto& [id, spec] : specs) lower_bound += spec.min_unmet;
    for (const auto& [id, spec] : specs)
        if (spec.frequency.empty()) throw Error("no frequency row for " + catalog.label(id));

    std::optional<std::vector<std::int64_t>> best_table;
    std::map<ItemId, detail::FacilityPlan> best_plans;
    std::size_t best_penalty = std::numeric_limits<std::size_t>::max();
    std::size_t examined = 0;
    solver::enumerate(demo, solver::ValueOrder::ascending, [&](const std::vector<std::int64_t>& table) {
        ++examined;
        for (const auto& [id, spec] : specs) {
            solver::Problem p;
            for (auto n : table) p.add_var(0, n);
            p.constraints = spec.mandatory;
            if (!solver::feasible(p)) return true;
        }
        std::size_t penalty = 0;
        std::map<ItemId, detail::FacilityPlan> plans;
        for (const auto& [id, spec] : specs) {
            if (best_table && penalty >= best_penalty) return true;
            const std::size_t budget = best_table ? best_penalty - 1 - penalty : std::numeric_limits<std::size_t>::max();
            auto plan = detail::plan_facility(spec, table, budget);
            if (!plan) return true;
            penalty += plan->penalty;
            plans.emplace(id, std::move(*plan));
        }
        if (best_table && penalty >= best_penalty) return true;
        best_table = table;
        best_plans = std::move(plans);
        best_penalty = penalty;
        return penalty > lower_bound;
    });

    if (!best_table) {
        std::vector<std::string> conflict;
        auto core = solver::minimal_conflict(demo);
        if (!core.empty()) {
            for (auto c : core) conflict.push_back(demo.constraints[c].name);
        } else {
            auto first = solver::first_solution(demo);
            for (const auto& [id, spec] : specs) {
                solver::Problem p;
                for (auto n : *first) p.add_var(0, n);
                p.constraints = spec.mandatory;
                for (auto c : solver::minimal_conflict(p)) conflict.push_back(p.constraints[c].name);
                if (!conflict.empty()) break;
            }
        }
        std::string msg = "mandatory constraints are infeasible; minimal conflicting set:";
        for (const auto& c : conflict) msg += "\n  " + c;
        throw InfeasibleError(msg, conflict);
    }

    ConstructionReport report;
    report.tables_examined = examined;
    report.frequency_cells = frequency_cells;
    report.unmet_lower_bound = lower_bound;
    report.mandatory_constraints = demo.constraints.size();
    for (const auto& [id, spec] : specs) report.mandatory_constraints += spec.mandatory.size();
    for (std::size_t p = 0; p < space.size(); ++p) {
        std::string name;
        for (auto id : space.profiles[p]) name += (name.empty() ? "" : " AND ") + catalog.label(id);
        report.profile_counts.emplace_back(name, static_cast<std::uint64_t>((*best_table)[p]));
    }
    for (const auto& row : counts.frequency) {
        const auto id = catalog.require_label("facility=" + row.facility);
        const auto& spec = specs.at(id);
        const auto& plan = best_plans.at(id);
        for (auto u : plan.unmet) {
            std::int64_t achieved = 0;
            for (auto p : spec.frequency[u].vars) achieved += plan.per_profile[p];
            const auto* cell = spec.cells[u];
            report.unmet.push_back({row.facility, cell->group, cell->published_h, cell->count,
                                    static_cast<std::uint64_t>(achieved), cell->group_size});
        }
    }
    report.frequency_met = frequency_cells - report.unmet.size();

    // Materialise: profile by profile; within a profile the first k companies carry a
    // facility whose planned count there is k.
    std::vector<Transaction> rows;
    const std::size_t width = std::max<std::size_t>(2, std::to_string(counts.m).size());
    for (std::size_t p = 0; p < space.size(); ++p) {
        for (std::int64_t j = 0; j < (*best_table)[p]; ++j) {
            std::string id = std::to_string(rows.size() + 1);
            id.insert(0, width - id.size(), '0');
            BitVector members(catalog.size());
            for (auto d : space.profiles[p]) members.set(d.index);
            for (const auto& [f, plan] : best_plans)
                if (j < plan.per_profile[p]) members.set(f.index);
            rows.push_back({"co" + id, std::move(members)});
        }
    }
    TransactionDatabase db(schema.catalog, std::move(rows), 0);
    return Fixture{std::move(schema), std::move(db), std::move(report)};
}

inline std::string render_construction_report(const ConstructionReport& r) {
    std::ostringstream out;
    out << "fixture construction report\n";
    out << "joint profile tables examined: " << r.tables_examined << '\n';
    out << "mandatory constraints satisfied: " << r.mandatory_constraints << '\n';
    out << "frequency-table cells met: " << r.frequency_met << " of " << r.frequency_cells << '\n';
    out << "frequency-table cells unmet: " << r.unmet.size() << " (lower bound from frequency-table marginals: " << r.unmet_lower_bound
        << ")\n";
    out << "\nprofile counts:\n";
    for (const auto& [name, n] : r.profile_counts) out << "  " << name << ": " << n << '\n';
    out << "\nunmet frequency-table cells:\n";
    if (r.unmet.empty()) out << "  none\n";
    for (const auto& u : r.unmet)
        out << "  " << u.facility << " / " << u.group << ": published " << format_hundredths(u.published_h) << " ("
            << u.target << "/" << u.group_size << "), fixture " << u.achieved << "/" << u.group_size << " = "
            << format_percent(Percent(u.achieved, u.group_size), Rounding::round) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Validation against the published rules.

// A rule as it appears in a rule CSV; percentages in hundredths (truncated).
struct RuleRecord {
    int rule_id = 0;
    std::set<std::string> antecedent;
    std::string consequent;
    std::uint64_t confidence_h = 0;
    std::uint64_t coverage_h = 0;
};

inline std::vector<RuleRecord> records_from_rules(const std::vector<ClassifiedRule>& rules, const ItemCatalog& catalog) {
    std::vector<RuleRecord> out;
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const auto& r = rules[k].rule;
        RuleRecord rec;
        rec.rule_id = static_cast<int>(k + 1);
        for (auto id : r.antecedent()) rec.antecedent.insert(catalog.label(id));
        rec.consequent = join_labels(catalog, r.consequent());
        rec.confidence_h = percent_hundredths(r.confidence(), Rounding::truncate);
        rec.coverage_h = percent_hundredths(r.coverage(), Rounding::truncate);
        out.push_back(std::move(rec));
    }
    return out;
}

// Rule CSV as written by render_rules. A file with no lines at all has no rules.
inline std::vector<RuleRecord> parse_rule_records(std::string_view csv) {
    std::vector<RuleRecord> out;
    bool header_seen = false;
    for (const auto& [number, content] : text::lines(csv)) {
        if (text::trim(content).empty()) continue;
        if (!header_seen) {
            if (text::trim(content) != kRuleCsvHeader)
                throw ParseError(number, "expected header '" + std::string(kRuleCsvHeader) + "'");
            header_seen = true;
            continue;
        }
        auto cells = text::split(content, ',');
        if (cells.size() != 7) throw ParseError(number, "expected 7 fields");
        RuleRecord rec;
        auto id = text::parse_int<int>(cells[0]);
        auto conf = text::parse_hundredths(cells[3]);
        auto cover = text::parse_hundredths(cells[4]);
        if (!id || !conf || !cover || *conf > 10000 || *cover > 10000) throw ParseError(number, "malformed rule row");
        rec.rule_id = *id;
        for (const auto& ref : parse_antecedent(cells[1], number)) rec.antecedent.insert(ref.label());
        auto consequent = parse_item_ref(cells[2]);
        if (!consequent) throw ParseError(number, "malformed consequent");
        rec.consequent = consequent->label();
        rec.confidence_h = *conf;
        rec.coverage_h = *cover;
        out.push_back(std::move(rec));
    }
    return out;  // an empty file holds no rules
}

struct ValidationReport {
    std::vector<std::pair<GoldenRule, RuleRecord>> matched;  // same antecedent set and consequent
    std::vector<GoldenRule> missing;
    std::vector<RuleRecord> extra;
    std::vector<std::pair<GoldenRule, RuleRecord>> metric_mismatches;  // subset of matched

    bool passed() const { return missing.empty() && metric_mismatches.empty(); }
};

inline const text::Decimal kDefaultTolerance{11, 3};  // 0.011 percentage points

inline std::vector<GoldenRule> single_antecedent_subset(const std::vector<GoldenRule>& golden) {
    std::vector<GoldenRule> out;
    for (const auto& g : golden)
        if (g.antecedent.size() == 1) out.push_back(g);
    return out;
}

// Set-based matching on (antecedent, consequent). Confidence and coverage must agree
// with the printed two-decimal figures to within tolerance (percentage points).
inline ValidationReport validate_against_golden(const std::vector<RuleRecord>& mined, const std::vector<GoldenRule>& golden,
                                                const text::Decimal& tolerance = kDefaultTolerance) {
    using Key = std::pair<std::set<std::string>, std::string>;
    std::map<Key, const RuleRecord*> index;
    for (const auto& r : mined) index.emplace(Key{r.antecedent, r.consequent}, &r);
    auto within = [&](std::uint64_t a_h, std::uint64_t b_h) {
        const std::uint64_t diff = a_h > b_h ? a_h - b_h : b_h - a_h;
        using Wide = unsigned __int128;
        return Wide{diff} * tolerance.denominator() <= Wide{tolerance.digits} * 100;
    };

    ValidationReport report;
    std::set<Key> golden_keys;
    for (const auto& g : golden) {
        Key key;
        for (const auto& r : g.antecedent) key.first.insert(r.label());
        key.second = g.consequent.label();
        golden_keys.insert(key);
        auto it = index.find(key);
        if (it == index.end()) {
            report.missing.push_back(g);
            continue;
        }
        report.matched.emplace_back(g, *it->second);
        if (!within(it->second->confidence_h, g.confidence_h) || !within(it->second->coverage_h, g.support_h))
            report.metric_mismatches.emplace_back(g, *it->second);
    }
    for (const auto& r : mined)
        if (!golden_keys.count(Key{r.antecedent, r.consequent})) report.extra.push_back(r);
    return report;
}

inline ValidationReport validate_against_golden(const std::vector<ClassifiedRule>& mined, const ItemCatalog& catalog,
                                                const std::vector<GoldenRule>& golden,
                                                const text::Decimal& tolerance = kDefaultTolerance) {
    return validate_against_golden(records_from_rules(mined, catalog), golden, tolerance);
}

inline std::string render_validation(const ValidationReport& r) {
    auto name = [](const std::set<std::string>& a, const std::string& c) {
        std::string s;
        for (const auto& x : a) s += (s.empty() ? "" : " AND ") + x;
        return s + " => " + c;
    };
    auto golden_name = [&](const GoldenRule& g) {
        std::set<std::string> a;
        for (const auto& x : g.antecedent) a.insert(x.label());
        return name(a, g.consequent.label());
    };
    std::ostringstream out;
    out << "matched=" << r.matched.size() << " missing=" << r.missing.size() << " extra=" << r.extra.size()
        << " metric_mismatches=" << r.metric_mismatches.size() << '\n';
    out << "result: " << (r.passed() ? "PASS" : "FAIL") << '\n';
    for (const auto& g : r.missing) out << "missing: rule " << g.rule_id << ": " << golden_name(g) << '\n';
    for (const auto& [g, m] : r.metric_mismatches)
        out << "mismatch: rule " << g.rule_id << ": " << golden_name(g) << " published "
            << format_hundredths(g.confidence_h) << "/" << format_hundredths(g.support_h) << ", mined "
            << format_hundredths(m.confidence_h) << "/" << format_hundredths(m.coverage_h) << '\n';
    for (const auto& e : r.extra)
        out << "extra: " << name(e.antecedent, e.consequent) << " (" << format_hundredths(e.confidence_h) << "/"
            << format_hundredths(e.coverage_h) << ")\n";
    return out.str();
}

}  // namespace rulemine
