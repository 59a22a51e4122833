#include "lexiscope/stats.hpp"

#include "lexiscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace lexiscope::stats {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw Error(ErrorCode::invalid_argument, "incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::invalid_argument, "incomplete beta needs 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // the fraction converges fastest on this side of the mean
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0)) throw Error(ErrorCode::invalid_argument, "F distribution needs positive dfs");
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double t_two_sided(double t, double df) {
    if (!(df > 0)) throw Error(ErrorCode::invalid_argument, "t distribution needs df > 0");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double chi_square1_upper_tail(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

double mean(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::invalid_argument, "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "pearson: samples differ in length");
    if (x.size() < 2) throw Error(ErrorCode::invalid_argument, "pearson: need at least two observations");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::undefined_correlation, "pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

RateSummary summarize_rates(std::span<const double> rates) {
    RateSummary s;
    s.n_docs = rates.size();
    if (!rates.empty()) {
        s.mean_rate = mean(rates);
        s.variance = variance(rates);
    }
    return s;
}

std::vector<GroupSummary> summarize_groups(const std::vector<AnalysisRow>& rows,
                                           const std::map<std::string, std::string>& group_of) {
    std::vector<std::string> order;
    // group -> category -> per-document rates
    std::map<std::string, std::map<std::string, std::vector<double>>> rates;
    std::map<std::string, std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>> totals;
    for (const auto& r : rows) {
        auto g = group_of.find(r.doc_id);
        if (g == group_of.end()) continue;
        if (std::find(order.begin(), order.end(), g->second) == order.end()) order.push_back(g->second);
        rates[g->second][r.category].push_back(r.normalized);
        auto& t = totals[g->second][r.category];
        t.first += r.raw;
        t.second += r.tokens;
    }
    std::vector<GroupSummary> out;
    for (const auto& name : order) {
        GroupSummary gs;
        gs.group = name;
        for (const auto& [cat, values] : rates[name]) {
            RateSummary s = summarize_rates(values);
            s.raw_total = totals[name][cat].first;
            s.token_total = totals[name][cat].second;
            gs.per_category.emplace(cat, s);
        }
        out.push_back(std::move(gs));
    }
    return out;
}

WelchResult welch_t_test(const RateSummary& a, const RateSummary& b) {
    WelchResult r;
    const double na = static_cast<double>(a.n_docs);
    const double nb = static_cast<double>(b.n_docs);
    const double va = a.variance / na;
    const double vb = b.variance / nb;
    const double diff = a.mean_rate - b.mean_rate;
    const double se2 = va + vb;
    if (se2 == 0.0) {
        r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.df = na + nb - 2.0;
        r.p_value = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_value = t_two_sided(r.t, r.df);
    return r;
}

namespace {

// 2x2 contingency (hits vs other tokens per group), Pearson chi-square with df = 1.
double chi_square_p(const RateSummary& a, const RateSummary& b) {
    const double a1 = static_cast<double>(a.raw_total);
    const double a0 = static_cast<double>(a.token_total) - a1;
    const double b1 = static_cast<double>(b.raw_total);
    const double b0 = static_cast<double>(b.token_total) - b1;
    const double n = a1 + a0 + b1 + b0;
    const double rows[2] = {a1 + a0, b1 + b0};
    const double cols[2] = {a1 + b1, a0 + b0};
    if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) return 1.0;
    const double obs[2][2] = {{a1, a0}, {b1, b0}};
    double chi = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double e = rows[i] * cols[j] / n;
            chi += (obs[i][j] - e) * (obs[i][j] - e) / e;
        }
    return chi_square1_upper_tail(chi);
}

}  // namespace

ComparisonRow odds_ratio(const std::string& category, const GroupSummary& a, const GroupSummary& b,
                         SignificanceTest test) {
    auto ia = a.per_category.find(category);
    auto ib = b.per_category.find(category);
    if (ia == a.per_category.end() || ib == b.per_category.end())
        throw Error(ErrorCode::invalid_argument, "category '" + category + "' missing from a group");
    const RateSummary& ra = ia->second;
    const RateSummary& rb = ib->second;
    if (ra.n_docs < 2 || rb.n_docs < 2)
        throw Error(ErrorCode::invalid_argument, "odds ratio needs at least two documents per group");

    ComparisonRow row;
    row.category = category;
    if (ra.mean_rate == 0.0 && rb.mean_rate == 0.0) {
        row.degenerate = true;
        return row;
    }
    row.odds_ratio = (ra.mean_rate + odds_epsilon) / (rb.mean_rate + odds_epsilon);
    row.p_value = test == SignificanceTest::welch ? welch_t_test(ra, rb).p_value : chi_square_p(ra, rb);
    row.p_value = std::clamp(row.p_value, 0.0, 1.0);
    return row;
}

double bonferroni_threshold(std::size_t tests, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    if (tests == 0) return alpha;
    return alpha / static_cast<double>(tests);
}

std::vector<bool> bonferroni(std::span<const double> p_values, double alpha) {
    const double threshold = bonferroni_threshold(p_values.size(), alpha);
    std::vector<bool> flags;
    flags.reserve(p_values.size());
    for (double p : p_values) flags.push_back(p < threshold);
    return flags;
}

std::vector<ComparisonRow> compare_groups(const GroupSummary& a, const GroupSummary& b, double alpha,
                                          SignificanceTest test) {
    std::vector<ComparisonRow> rows;
    for (const auto& [cat, _] : a.per_category)
        if (b.per_category.count(cat)) rows.push_back(odds_ratio(cat, a, b, test));
    std::vector<double> p;
    for (const auto& r : rows) p.push_back(r.p_value);
    const auto flags = bonferroni(p, alpha);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].significant = flags[i];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ComparisonRow& x, const ComparisonRow& y) { return x.odds_ratio > y.odds_ratio; });
    return rows;
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::invalid_argument, "ANOVA needs at least two groups");
    std::size_t n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorCode::invalid_argument, "ANOVA group without observations");
        n += g.size();
        grand += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const std::size_t k = groups.size();
    if (n <= k) throw Error(ErrorCode::invalid_argument, "ANOVA needs more observations than groups");
    grand /= static_cast<double>(n);

    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        const double m = mean(g);
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    if (ssw == 0.0) throw Error(ErrorCode::infinite_f, "zero within-group variance makes F infinite");

    AnovaResult r;
    r.df_between = k - 1;
    r.df_within = n - k;
    r.f = (ssb / static_cast<double>(r.df_between)) / (ssw / static_cast<double>(r.df_within));
    r.p_value = f_upper_tail(r.f, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    return r;
}

AgreementReport agreement(const CountTable& tool_a, const CountTable& tool_b) {
    AgreementReport report;
    double sum = 0.0;
    for (const auto& [cat, xs] : tool_a) {
        auto it = tool_b.find(cat);
        if (it == tool_b.end()) continue;
        if (xs.size() != it->second.size())
            throw Error(ErrorCode::invalid_argument, "category '" + cat + "' covers different document counts");
        try {
            const double r = pearson(xs, it->second);
            report.per_category.emplace_back(cat, r);
            sum += r;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::undefined_correlation) throw;
            report.excluded.push_back(cat);
        }
    }
    if (!report.per_category.empty()) report.overall = sum / static_cast<double>(report.per_category.size());
    return report;
}

std::pair<CountTable, CountTable> align_tools(const std::vector<AnalysisRow>& a, const std::vector<AnalysisRow>& b,
                                              CountField field) {
    using Key = std::pair<std::string, std::string>;
    auto index = [&](const std::vector<AnalysisRow>& rows) {
        std::map<Key, double> out;
        for (const auto& r : rows)
            out[{r.category, r.doc_id}] = field == CountField::raw ? static_cast<double>(r.raw) : r.normalized;
        return out;
    };
    const auto ia = index(a);
    const auto ib = index(b);
    std::set<std::string> docs_a, docs_b, cats_a, cats_b;
    for (const auto& r : a) docs_a.insert(r.doc_id), cats_a.insert(r.category);
    for (const auto& r : b) docs_b.insert(r.doc_id), cats_b.insert(r.category);
    std::vector<std::string> docs;
    std::set_intersection(docs_a.begin(), docs_a.end(), docs_b.begin(), docs_b.end(), std::back_inserter(docs));
    std::vector<std::string> cats;
    std::set_intersection(cats_a.begin(), cats_a.end(), cats_b.begin(), cats_b.end(), std::back_inserter(cats));

    std::pair<CountTable, CountTable> out;
    for (const auto& c : cats) {
        auto& xa = out.first[c];
        auto& xb = out.second[c];
        for (const auto& d : docs) {
            auto fa = ia.find({c, d});
            auto fb = ib.find({c, d});
            if (fa == ia.end() || fb == ib.end())
                throw Error(ErrorCode::invalid_argument, "document '" + d + "' lacks category '" + c + "'");
            xa.push_back(fa->second);
            xb.push_back(fb->second);
        }
    }
    return out;
}

}  // namespace lexiscope::stats
