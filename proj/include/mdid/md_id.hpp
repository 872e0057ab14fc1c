#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mdid/fixing.hpp"
#include "mdid/missing_data.hpp"

namespace mdid {

struct SearchBudget {
    int max_set_size = 3;        // largest class the search builds by merging
    int max_latent_subsets = 64; // hiding variants tried per schedule shape
    int max_schedules = 5000;    // schedules evaluated per search layer
    double time_limit_s = 300;

    /// Overrides from MDID_BUDGET_MAX_SET_SIZE, MDID_BUDGET_MAX_LATENT_SUBSETS,
    /// MDID_BUDGET_MAX_SCHEDULES and MDID_BUDGET_TIME_LIMIT.
    static SearchBudget from_env(SearchBudget base);
    void check() const;
};

enum class Mode { target, full };

struct ScheduleVerdict {
    bool valid = true;
    std::size_t failing_class = 0;
    std::string condition;
    std::string detail;
};

/// Every class fixable in the graph built from its predecessors.
ScheduleVerdict validate_schedule(const MdDag& m, const FixingSchedule& s, const VSet& unpinned = {});

struct IndicatorResult {
    std::string indicator;
    bool identified = false;
    FixingSchedule schedule;
    Expr propensity;  // law variables, R-parents at 1 in target mode
    std::string method;
    std::string transcript;
    std::size_t explored = 0;
    std::string failure;
};

/// Checks a complete schedule for R_i (top class {R_i}, everything else
/// before it, parents of R_i visible) and reads off the propensity.
IndicatorResult check_indicator_schedule(const MdDag& m, const std::string& r, const FixingSchedule& s,
                                         Mode mode = Mode::target);

/// Searches for a schedule identifying p(R_i | pa(R_i)).
IndicatorResult identify_indicator(const MdDag& m, const std::string& r, const SearchBudget& budget,
                                   Mode mode = Mode::target);

enum class Verdict { identified, not_identified, unknown };
std::string verdict_name(Verdict v);

struct IdReport {
    Verdict status = Verdict::unknown;
    Expr functional;          // law variables
    Expr display;             // proxies renamed to X^(1) where the law is read at R=1
    std::map<std::string, Expr> propensities;
    std::map<std::string, IndicatorResult> indicators;
    std::vector<std::pair<std::string, std::string>> certificate;
    std::string transcript;
};

IdReport identify_target(const MdDag& m, const SearchBudget& budget);
IdReport identify_full(const MdDag& m, const SearchBudget& budget);

}  // namespace mdid
