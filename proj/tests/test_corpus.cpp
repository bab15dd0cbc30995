#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "rulemine/corpus.hpp"
#include "rulemine/engine.hpp"
#include "rulemine/sum_solver.hpp"

using namespace rulemine;

namespace {

// Built once; construction is deterministic.
const Fixture& fixture() {
    static const Fixture f = build_fixture(study_group_counts(), appendix_b_rules());
    return f;
}

std::uint64_t count_of(const TransactionDatabase& db, std::initializer_list<const char*> labels) {
    std::vector<ItemId> ids;
    for (auto l : labels) ids.push_back(db.catalog().require_label(l));
    return count_support(db, Itemset::from_unsorted(ids));
}

}  // namespace

TEST(SumSolver, EnumeratesAllSolutions) {
    solver::Problem p;
    for (int k = 0; k < 3; ++k) p.add_var(0, 3);
    p.constraints.push_back({{0, 1, 2}, 4, "sum"});
    p.constraints.push_back({{0, 1}, 2, "pair"});
    std::size_t n = 0;
    solver::enumerate(p, solver::ValueOrder::ascending, [&](const std::vector<std::int64_t>& s) {
        EXPECT_EQ(s[0] + s[1], 2);
        EXPECT_EQ(s[2], 2);
        ++n;
        return true;
    });
    EXPECT_EQ(n, 3u);
    auto first = solver::first_solution(p);
    ASSERT_TRUE(first);
    EXPECT_EQ((*first)[0], 0);
    auto last = solver::first_solution(p, solver::ValueOrder::descending);
    EXPECT_EQ((*last)[0], 2);
}

TEST(SumSolver, MatchesBruteForceCount) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 200; ++round) {
        solver::Problem p;
        const std::size_t n = rng() % 4 + 1;
        for (std::size_t v = 0; v < n; ++v) p.add_var(0, static_cast<std::int64_t>(rng() % 4));
        for (std::size_t c = 0, nc = rng() % 3 + 1; c < nc; ++c) {
            solver::SumConstraint sc;
            for (std::size_t v = 0; v < n; ++v)
                if (rng() & 1) sc.vars.push_back(v);
            sc.target = static_cast<std::int64_t>(rng() % 6);
            p.constraints.push_back(sc);
        }
        std::size_t expect = 0;
        std::vector<std::int64_t> x(n, 0);
        std::function<void(std::size_t)> rec = [&](std::size_t v) {
            if (v == n) {
                bool ok = true;
                for (const auto& c : p.constraints) {
                    std::int64_t s = 0;
                    for (auto i : c.vars) s += x[i];
                    ok &= s == c.target;
                }
                expect += ok;
                return;
            }
            for (x[v] = p.lo[v]; x[v] <= p.hi[v]; ++x[v]) rec(v + 1);
        };
        rec(0);
        std::size_t got = 0;
        solver::enumerate(p, solver::ValueOrder::ascending, [&](const auto&) {
            ++got;
            return true;
        });
        EXPECT_EQ(got, expect) << "round " << round;
        EXPECT_EQ(solver::feasible(p), expect > 0);
    }
}

TEST(SumSolver, MinimalConflictIsIrreducible) {
    solver::Problem p;
    for (int k = 0; k < 3; ++k) p.add_var(0, 5);
    p.constraints.push_back({{0}, 1, "a"});
    p.constraints.push_back({{2}, 4, "unrelated"});
    p.constraints.push_back({{0, 1}, 3, "b"});
    p.constraints.push_back({{1}, 1, "c"});
    auto core = solver::minimal_conflict(p);
    ASSERT_EQ(core.size(), 3u);
    EXPECT_EQ(p.constraints[core[0]].name, "a");
    EXPECT_EQ(p.constraints[core[1]].name, "b");
    EXPECT_EQ(p.constraints[core[2]].name, "c");
    p.constraints.pop_back();
    EXPECT_TRUE(solver::minimal_conflict(p).empty());
}

TEST(StudyCounts, EmbeddedCountsPassIntegrality) {
    auto pc = study_group_counts();
    EXPECT_EQ(pc.m, 91u);
    EXPECT_TRUE(integrality_problems(pc).empty());
    std::map<std::string, std::uint64_t> singles;
    for (const auto& s : pc.singles) singles[s.items[0]] = s.count;
    EXPECT_EQ(singles["ownership=governmental"], 49u);
    EXPECT_EQ(singles["age=below10"], 11u);
    EXPECT_EQ(singles["age=below10"] + singles["age=11to29"] + singles["age=above30"], 91u);
    EXPECT_EQ(pc.frequency.size(), 20u);
}

TEST(StudyCounts, TranscriptionErrorsAreReported) {
    auto pc = study_group_counts();
    pc.singles[0].count += 1;
    EXPECT_FALSE(integrality_problems(pc).empty());
    pc = study_group_counts();
    pc.frequency[1].cells[0].count = 88;  // contact_us total printed as 97.80
    EXPECT_FALSE(integrality_problems(pc).empty());
    pc = study_group_counts();
    pc.pairs[0].published_h = 2200;
    EXPECT_FALSE(integrality_problems(pc).empty());
}

TEST(ArithmeticConsistency, AllGoldenRulesConsistent) {
    auto report = arithmetic_consistency_check(appendix_b_rules(), study_group_counts());
    EXPECT_TRUE(report.ok());
    ASSERT_EQ(report.entries.size(), 68u);
    EXPECT_EQ(report.entries[22].antecedent_count, 35u);  // rule 23
    EXPECT_EQ(report.entries[22].joint_count, 34u);
    EXPECT_EQ(report.entries[67].antecedent_count, 20u);  // rule 68
    EXPECT_EQ(report.entries[67].joint_count, 18u);
    EXPECT_EQ(report.entries[67].deviation_e4, 0);
}

TEST(ArithmeticConsistency, FlagsFabricatedRule) {
    auto rules = parse_golden_rules(std::string(kGoldenHeader) + "\n99,age=below10,facility=about_us,93.00,12.08\n");
    auto report = arithmetic_consistency_check(rules, study_group_counts());
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0], 99);
    EXPECT_EQ(report.entries[0].antecedent_count, 11u);
}

TEST(BuildFixture, SatisfiesMandatoryConstraints) {
    const auto& db = fixture().db;
    EXPECT_EQ(db.size(), 91u);
    EXPECT_EQ(db.excluded_count(), 0u);
    EXPECT_EQ(count_of(db, {"age=11to29", "ownership=governmental"}), 20u);
    EXPECT_EQ(count_of(db, {"age=11to29", "ownership=governmental", "facility=general_field_intro"}), 20u);
    EXPECT_EQ(count_of(db, {"ownership=governmental"}), 49u);
    EXPECT_EQ(count_of(db, {"ownership=governmental", "facility=about_us"}), 48u);
    auto pc = study_group_counts();
    for (const auto* family : {&pc.singles, &pc.pairs})
        for (const auto& c : *family) {
            std::vector<ItemId> ids;
            for (const auto& l : c.items) ids.push_back(db.catalog().require_label(l));
            EXPECT_EQ(count_support(db, Itemset::from_unsorted(ids)), c.count);
        }
    auto check = arithmetic_consistency_check(appendix_b_rules(), pc);
    auto golden = appendix_b_rules();
    for (std::size_t k = 0; k < golden.size(); ++k) {
        std::vector<ItemId> a;
        for (const auto& r : golden[k].antecedent) a.push_back(db.catalog().require_label(r.label()));
        const auto n_a = count_support(db, Itemset::from_unsorted(a));
        a.push_back(db.catalog().require_label(golden[k].consequent.label()));
        EXPECT_EQ(n_a, check.entries[k].antecedent_count) << "rule " << golden[k].rule_id;
        EXPECT_EQ(count_support(db, Itemset::from_unsorted(a)), check.entries[k].joint_count)
            << "rule " << golden[k].rule_id;
    }
}

TEST(BuildFixture, ReportListsExactlyTheUnmetCells) {
    const auto& f = fixture();
    auto pc = study_group_counts();
    std::set<std::pair<std::string, std::string>> unmet;
    for (const auto& u : f.report.unmet) unmet.emplace(u.facility, u.group);
    std::size_t met = 0;
    for (const auto& row : pc.frequency) {
        const auto fac = f.db.catalog().require_label("facility=" + row.facility);
        for (const auto& cell : row.cells) {
            std::vector<ItemId> any;
            for (const auto& l : cell.any_of) any.push_back(f.db.catalog().require_label(l));
            const auto n = BitVector::and_count(group_tidset(f.db, any), f.db.tidset(fac));
            const bool ok = n == cell.count;
            met += ok;
            EXPECT_EQ(!ok, unmet.count({row.facility, cell.group}) == 1) << row.facility << "/" << cell.group;
        }
    }
    EXPECT_EQ(met, f.report.frequency_met);
    EXPECT_EQ(f.report.frequency_cells, 160u);
    // No table can do better than the marginal inconsistencies allow.
    EXPECT_EQ(f.report.unmet.size(), f.report.unmet_lower_bound);
    for (const auto& u : f.report.unmet) EXPECT_NE(u.group, "total");
}

TEST(BuildFixture, Deterministic) {
    auto again = build_fixture(study_group_counts(), appendix_b_rules());
    EXPECT_EQ(write_transactions(again.db), write_transactions(fixture().db));
    EXPECT_EQ(render_construction_report(again.report), render_construction_report(fixture().report));
}

TEST(BuildFixture, InfeasibleMandatorySetNamesConflict) {
    auto golden = appendix_b_rules();
    // Implies 13 of the 14 semiprivate companies have an About Us page; rule 5 says all 14 do.
    auto extra = parse_golden_rules(std::string(kGoldenHeader) + "\n69,ownership=semiprivate,facility=about_us,90.00,15.38\n");
    golden.push_back(extra[0]);
    try {
        build_fixture(study_group_counts(), golden);
        FAIL() << "expected infeasibility";
    } catch (const InfeasibleError& e) {
        ASSERT_FALSE(e.conflict().empty());
        bool names_69 = false, names_5 = false;
        for (const auto& c : e.conflict()) {
            names_69 |= c.rfind("rule 69:", 0) == 0;
            names_5 |= c.rfind("rule 5:", 0) == 0;
        }
        EXPECT_TRUE(names_69);
        EXPECT_TRUE(names_5);
    }
}

TEST(ValidateAgainstGolden, FixtureRulesMatchAll68) {
    const auto& f = fixture();
    auto mined = classify(canonical_sort(derive_rules(f.db, MiningConfig{})).rules);
    auto report = validate_against_golden(mined, f.db.catalog(), appendix_b_rules());
    EXPECT_EQ(report.matched.size(), 68u);
    EXPECT_TRUE(report.missing.empty());
    EXPECT_TRUE(report.metric_mismatches.empty());
    EXPECT_TRUE(report.passed());
    EXPECT_EQ(report.matched.size() + report.extra.size(), mined.size());
}

TEST(ValidateAgainstGolden, ToleranceAndMismatch) {
    auto golden = parse_golden_rules(std::string(kGoldenHeader) + "\n21,ownership=governmental,facility=about_us,97.95,53.84\n");
    RuleRecord r{1, {"ownership=governmental"}, "facility=about_us", 9795, 5384};
    EXPECT_TRUE(validate_against_golden({r}, golden).passed());
    r.confidence_h = 9796;  // 0.01 away
    EXPECT_TRUE(validate_against_golden({r}, golden).passed());
    r.confidence_h = 9797;  // 0.02 away
    auto rep = validate_against_golden({r}, golden);
    EXPECT_FALSE(rep.passed());
    EXPECT_EQ(rep.matched.size(), 1u);
    EXPECT_EQ(rep.metric_mismatches.size(), 1u);
    EXPECT_TRUE(validate_against_golden({r}, golden, text::Decimal{2, 2}).passed());
    r.confidence_h = 9795;
    r.coverage_h = 5382;
    EXPECT_FALSE(validate_against_golden({r}, golden).passed());
}

TEST(ValidateAgainstGolden, EmptyMinedSetMissesEverything) {
    auto rep = validate_against_golden(std::vector<RuleRecord>{}, appendix_b_rules());
    EXPECT_EQ(rep.missing.size(), 68u);
    EXPECT_FALSE(rep.passed());
}

TEST(ValidateAgainstGolden, MatchingIgnoresAntecedentOrder) {
    auto golden = parse_golden_rules(std::string(kGoldenHeader) +
                                     "\n8,ownership=private AND age=above30,facility=contact_us,100.00,12.08\n");
    RuleRecord r{1, {"age=above30", "ownership=private"}, "facility=contact_us", 10000, 1208};
    auto rep = validate_against_golden({r}, golden);
    EXPECT_TRUE(rep.passed());
    EXPECT_TRUE(rep.extra.empty());
}

TEST(RuleRecords, CsvRoundTrip) {
    const auto& f = fixture();
    auto mined = classify(canonical_sort(derive_rules(f.db, MiningConfig{})).rules);
    auto direct = records_from_rules(mined, f.db.catalog());
    auto parsed = parse_rule_records(render_rules(mined, f.db.catalog(), RuleFormat::csv));
    ASSERT_EQ(parsed.size(), direct.size());
    for (std::size_t k = 0; k < parsed.size(); ++k) {
        EXPECT_EQ(parsed[k].antecedent, direct[k].antecedent);
        EXPECT_EQ(parsed[k].consequent, direct[k].consequent);
        EXPECT_EQ(parsed[k].confidence_h, direct[k].confidence_h);
        EXPECT_EQ(parsed[k].coverage_h, direct[k].coverage_h);
    }
    EXPECT_TRUE(parse_rule_records("").empty());
    EXPECT_THROW(parse_rule_records("a,b,c\n"), ParseError);
    EXPECT_THROW(parse_rule_records(std::string(kRuleCsvHeader) + "\n1,x,y\n"), ParseError);
}

TEST(SingleAntecedentSubset, Has27Rules) {
    auto subset = single_antecedent_subset(appendix_b_rules());
    EXPECT_EQ(subset.size(), 27u);
    for (const auto& g : subset) EXPECT_EQ(g.antecedent.size(), 1u);
}
