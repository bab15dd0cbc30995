#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulemine/classify.hpp"
#include "rulemine/corpus.hpp"
#include "rulemine/datamodel.hpp"
#include "rulemine/ingest.hpp"
#include "rulemine/report.hpp"
#include "rulemine/rules.hpp"
#include "rulemine/text.hpp"

namespace rulemine::cli {

enum ExitStatus : int { ok = 0, mismatch = 1, usage = 2 };

// Usage, I/O and parse failures all map to exit status 2.
class UsageError : public Error {
public:
    using Error::Error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << content;
    else
        write_file(out_path, content);
}

// "95", "92.5", "90.00" -> Percent over 10000.
inline Percent parse_confidence_flag(const std::string& s) {
    auto h = text::parse_hundredths(s);
    if (!h || *h > 10000) throw UsageError("confidence must be in [0,100]");
    return Percent(*h, 10000);
}

struct MineArgs {
    std::string schema, data, min_conf = "90", format = "csv", out;
    std::uint64_t min_coverage_count = 1;
    std::size_t max_antecedent = 2;
    unsigned threads = 1;
};

inline int run_mine(const MineArgs& a, std::ostream& out) {
    MiningConfig config;
    config.min_confidence = parse_confidence_flag(a.min_conf);
    config.max_antecedent_size = a.max_antecedent;
    config.min_coverage_count = a.min_coverage_count;
    config.threads = a.threads;
    const auto schema = parse_schema(read_file(a.schema));
    const auto db = parse_transactions(schema, read_file(a.data));
    const auto rules = classify(canonical_sort(derive_rules(db, config)).rules);
    std::string rendered;
    if (a.format == "csv")
        rendered = render_rules(rules, db.catalog(), RuleFormat::csv);
    else if (a.format == "text")
        rendered = render_rules(rules, db.catalog(), RuleFormat::text);
    else
        rendered = render_groups(group_by_consequent(rules), db.catalog());
    emit(rendered, a.out, out);
    return ok;
}

struct StatsArgs {
    std::string schema, data, mode = "round", out;
    std::vector<std::string> merges;
};

// "ownership=private+semiprivate" -> {"ownership=private", "ownership=semiprivate"}
inline std::vector<std::string> parse_merge(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--merge expects attr=value+value, got '" + spec + "'");
    const std::string attr = spec.substr(0, eq);
    std::vector<std::string> labels;
    for (auto v : text::split(std::string_view(spec).substr(eq + 1), '+')) {
        if (text::trim(v).empty()) throw UsageError("--merge has an empty value in '" + spec + "'");
        labels.push_back(attr + "=" + std::string(text::trim(v)));
    }
    return labels;
}

inline int run_stats(const StatsArgs& a, std::ostream& out) {
    std::vector<std::vector<std::string>> aggregates;
    for (const auto& m : a.merges) aggregates.push_back(parse_merge(m));
    const auto schema = parse_schema(read_file(a.schema));
    const auto db = parse_transactions(schema, read_file(a.data));
    const auto table = stats_table(db, aggregates);
    emit(render_stats_csv(table, db.catalog(), a.mode == "truncate" ? Rounding::truncate : Rounding::round), a.out, out);
    return ok;
}

struct ValidateArgs {
    std::string mined, golden, tolerance = "0.011", subset = "all";
};

inline int run_validate(const ValidateArgs& a, std::ostream& out) {
    auto tolerance = text::parse_decimal(a.tolerance);
    if (!tolerance) throw UsageError("tolerance must be a non-negative decimal");
    const auto mined = parse_rule_records(read_file(a.mined));
    auto golden = parse_golden_rules(read_file(a.golden));
    if (a.subset == "single-antecedent") golden = single_antecedent_subset(golden);
    const auto report = validate_against_golden(mined, golden, *tolerance);
    out << render_validation(report);
    return report.passed() ? ok : mismatch;
}

struct FixtureArgs {
    std::string out_dir;
};

inline int run_fixture(const FixtureArgs& a, std::ostream& out) {
    const std::filesystem::path dir(a.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create '" + a.out_dir + "': " + ec.message());
    const auto fixture = build_fixture(study_group_counts(), appendix_b_rules());
    write_file(dir / "schema_appendix_a.txt", std::string(kAppendixASchema));
    write_file(dir / "fixture_data.csv", write_transactions(fixture.db));
    write_file(dir / "construction_report.txt", render_construction_report(fixture.report));
    out << "wrote " << fixture.db.size() << " transactions to " << (dir / "fixture_data.csv").string() << '\n';
    out << "frequency-table cells unmet: " << fixture.report.unmet.size() << '\n';
    return ok;
}

// args excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constrained association-rule mining for website facility checklists", "rulemine"};
    app.require_subcommand(1);

    MineArgs mine;
    auto* mine_cmd = app.add_subcommand("mine", "Mine demographic => facility rules");
    mine_cmd->add_option("--schema", mine.schema, "Schema file")->required();
    mine_cmd->add_option("--data", mine.data, "Transaction CSV")->required();
    mine_cmd->add_option("--min-conf", mine.min_conf, "Minimum confidence in percent (up to two decimals)");
    mine_cmd->add_option("--max-antecedent", mine.max_antecedent, "Maximum antecedent size")
        ->check(CLI::PositiveNumber);
    mine_cmd->add_option("--min-coverage-count", mine.min_coverage_count, "Minimum joint count")
        ->check(CLI::PositiveNumber);
    mine_cmd->add_option("--format", mine.format, "Output format")->check(CLI::IsMember({"csv", "text", "groups"}));
    mine_cmd->add_option("--out", mine.out, "Output file (default stdout)");
    mine_cmd->add_option("--threads", mine.threads, "Counting threads")->check(CLI::PositiveNumber);

    StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Facility frequency table by demographic group");
    stats_cmd->add_option("--schema", stats.schema, "Schema file")->required();
    stats_cmd->add_option("--data", stats.data, "Transaction CSV")->required();
    stats_cmd->add_option("--merge", stats.merges, "Extra merged column, e.g. ownership=private+semiprivate");
    stats_cmd->add_option("--mode", stats.mode, "Percent formatting")->check(CLI::IsMember({"round", "truncate"}));
    stats_cmd->add_option("--out", stats.out, "Output file (default stdout)");

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Compare mined rules with a golden rule file");
    validate_cmd->add_option("--mined", validate.mined, "Rule CSV written by mine")->required();
    validate_cmd->add_option("--golden", validate.golden, "Golden rule CSV")->required();
    validate_cmd->add_option("--tolerance", validate.tolerance, "Tolerance in percentage points");
    validate_cmd->add_option("--subset", validate.subset, "Golden rules to check")
        ->check(CLI::IsMember({"all", "single-antecedent"}));

    FixtureArgs fixture;
    auto* fixture_cmd = app.add_subcommand("fixture", "Write the reconstructed study database");
    fixture_cmd->add_option("--out-dir", fixture.out_dir, "Output directory")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (mine_cmd->parsed()) return run_mine(mine, out);
        if (stats_cmd->parsed()) return run_stats(stats, out);
        if (validate_cmd->parsed()) return run_validate(validate, out);
        if (fixture_cmd->parsed()) return run_fixture(fixture, out);
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return mismatch;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    return usage;
}

}  // namespace rulemine::cli
