#pragma once

#include "lexiscope/analyzer.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace lexiscope::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(F > f) for an F(d1, d2) variable.
double f_upper_tail(double f, double d1, double d2);

/// P(|T| > |t|) for Student's t with df degrees of freedom (df may be fractional).
double t_two_sided(double t, double df);

/// P(X > x) for chi-square with one degree of freedom.
double chi_square1_upper_tail(double x);

double mean(std::span<const double> x);

/// Sample variance (n - 1 denominator); 0 for a single value.
double variance(std::span<const double> x);

/// Sample correlation coefficient. Throws undefined_correlation on zero
/// variance and invalid_argument on mismatched or too-short inputs.
double pearson(std::span<const double> x, std::span<const double> y);

struct RateSummary {
    double mean_rate = 0.0;
    double variance = 0.0;
    std::size_t n_docs = 0;
    std::uint64_t raw_total = 0;    // summed category hits
    std::uint64_t token_total = 0;  // summed document lengths
};

struct GroupSummary {
    std::string group;
    std::map<std::string, RateSummary> per_category;
};

/// Summarizes per-document normalized rates; `rates[category]` holds one value per document.
RateSummary summarize_rates(std::span<const double> rates);

/// Builds one summary per group from analysis rows joined with doc -> group labels.
/// Groups are returned in order of first appearance.
std::vector<GroupSummary> summarize_groups(const std::vector<AnalysisRow>& rows,
                                           const std::map<std::string, std::string>& group_of);

enum class SignificanceTest { welch, chi_square };

struct ComparisonRow {
    std::string category;
    double odds_ratio = 1.0;
    double p_value = 1.0;
    bool significant = false;  // filled by compare_groups after correction
    bool degenerate = false;   // both group means zero
};

inline constexpr double odds_epsilon = 1e-9;

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

WelchResult welch_t_test(const RateSummary& a, const RateSummary& b);

/// (mean_a + eps) / (mean_b + eps) with a two-sided significance test.
/// Requires at least two documents per group.
ComparisonRow odds_ratio(const std::string& category, const GroupSummary& a, const GroupSummary& b,
                         SignificanceTest test = SignificanceTest::welch);

double bonferroni_threshold(std::size_t tests, double alpha = 0.05);

/// flag_i = p_i < alpha / m.
std::vector<bool> bonferroni(std::span<const double> p_values, double alpha = 0.05);

/// Every category present in both groups, ranked by odds ratio descending, with
/// Bonferroni flags over the whole table.
std::vector<ComparisonRow> compare_groups(const GroupSummary& a, const GroupSummary& b, double alpha = 0.05,
                                          SignificanceTest test = SignificanceTest::welch);

struct AnovaResult {
    double f = 0.0;
    double p_value = 1.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
};

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Per-category count vectors over a shared document list.
using CountTable = std::map<std::string, std::vector<double>>;

struct AgreementReport {
    std::vector<std::pair<std::string, double>> per_category;  // category order
    double overall = 0.0;                                       // unweighted mean
    std::vector<std::string> excluded;                          // zero variance in either tool
};

AgreementReport agreement(const CountTable& tool_a, const CountTable& tool_b);

enum class CountField { raw, normalized };

/// Joins two analysis outputs on (doc_id, category) over their shared documents
/// and categories. Returns the pair of tables in matching document order.
std::pair<CountTable, CountTable> align_tools(const std::vector<AnalysisRow>& a, const std::vector<AnalysisRow>& b,
                                              CountField field = CountField::normalized);

}  // namespace lexiscope::stats
