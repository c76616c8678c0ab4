#include "ilw/errors.hpp"
#include "ilw/experiments.hpp"
#include "ilw/format.hpp"

#include <cstdlib>
#include <fstream>

#ifndef ILW_VERSION
#define ILW_VERSION "unknown"
#endif
#ifndef ILW_GIT_REVISION
#define ILW_GIT_REVISION "unknown"
#endif

namespace ilw {

std::string library_version() { return std::string(ILW_VERSION) + "+" + ILW_GIT_REVISION; }

void ExperimentReport::check_below(const std::string& what, double value, double limit, const std::string& note)
{
    checks.push_back({what, value, limit, "<", value < limit, note});
}

void ExperimentReport::check_at_least(const std::string& what, double value, double limit, const std::string& note)
{
    checks.push_back({what, value, limit, ">=", value >= limit, note});
}

void ExperimentReport::check_within(const std::string& what, double value, double lo, double hi,
                                    const std::string& note)
{
    Check c{what, value, hi, "in", value >= lo && value <= hi, note};
    if (c.note.empty())
        c.note = "interval [" + fmt_double(lo) + ", " + fmt_double(hi) + "]";
    checks.push_back(c);
}

void ExperimentReport::check_decreasing(const std::string& what, const std::vector<double>& values,
                                        const std::string& note)
{
    bool all_zero = true;
    for (double v : values)
        all_zero = all_zero && v == 0.0;
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        ok = ok && values[i] < values[i - 1];
        worst = std::max(worst, values[i - 1] != 0.0 ? values[i] / values[i - 1] : INFINITY);
    }
    // The zero field is ordered trivially.
    if (all_zero) {
        ok = true;
        worst = 0.0;
    }
    checks.push_back({what, worst, 1.0, "decreasing", ok, note});
}

void ExperimentReport::check_true(const std::string& what, bool ok, const std::string& note)
{
    checks.push_back({what, ok ? 1.0 : 0.0, 1.0, "true", ok, note});
}

bool ExperimentReport::passed() const
{
    for (const Check& c : checks)
        if (!c.passed)
            return false;
    return true;
}

Json ExperimentReport::to_json() const
{
    Json j;
    j["name"] = name;
    j["passed"] = passed();
    j["parameters"] = parameters;
    j["results"] = results;
    Json cs = Json::array();
    for (const Check& c : checks) {
        Json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["relation"] = c.relation;
        cj["limit"] = c.limit;
        cj["passed"] = c.passed;
        if (!c.note.empty())
            cj["note"] = c.note;
        cs.push_back(cj);
    }
    j["checks"] = cs;
    j["provenance"] = provenance;
    return j;
}

void ExperimentReport::write(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / (name + ".report.json"));
        if (!out)
            throw InvalidInput("cannot write " + (dir / (name + ".report.json")).string());
        out << to_json().dump(2) << '\n';
    }
    std::ofstream out(dir / (name + ".series.jsonl"));
    if (!out)
        throw InvalidInput("cannot write " + (dir / (name + ".series.jsonl")).string());
    Json head;
    head["provenance"] = provenance;
    out << head.dump() << '\n';
    for (const Json& row : series)
        out << row.dump() << '\n';
}

Json make_provenance(std::uint64_t seed, const Json& config)
{
    Json p;
    p["version"] = library_version();
    p["seed"] = seed;
    p["config"] = config;
    return p;
}

std::filesystem::path output_directory(const std::string& explicit_dir)
{
    if (!explicit_dir.empty())
        return explicit_dir;
    if (const char* env = std::getenv("ILW_LAB_OUTPUT_DIR"); env && *env)
        return env;
    return ".";
}

} // namespace ilw
