#ifndef OPACITY_STATS_HPP
#define OPACITY_STATS_HPP

#include <string>
#include <vector>

#include "opacity/corpus.hpp"
#include "opacity/prequential.hpp"

namespace opacity {

struct GroupSummary {
    std::string label;   // "<language>,<direction>"
    std::vector<double> values;
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;     // n-1 denominator
    double ci_lo = 0.0;  // t-based 95% interval
    double ci_hi = 0.0;
};

/// Mean, sd and t-based 95% CI of a group; requires >= 2 values.
GroupSummary summarize(std::string label, std::vector<double> values);

/// Groups results by (language, direction), in first-appearance order.
std::vector<GroupSummary> aggregate(
    const std::vector<CompressibilityResult>& results);

struct PairwiseEntry {
    std::string a;
    std::string b;
    double diff = 0.0;   // mean(a) - mean(b)
    double p = 1.0;      // Tukey-adjusted
};

struct PairwiseTable {
    std::vector<PairwiseEntry> entries;  // all ordered pairs, a != b
    /// CSV layout: row,col,diff,p
    std::string csv() const;
};

/// One-way Tukey HSD (Tukey-Kramer for unequal group sizes): pooled
/// within-group MSE, studentized-range statistic per pair, p-values from
/// the studentized-range distribution. Throws on all-zero within-group
/// variance.
PairwiseTable tukey_hsd(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups);

/// Unweighted mean over first-source-symbol groups of the Shannon
/// entropy (bits) of the first target symbol.
double onset_entropy(const PairedCorpus& corpus, Direction direction);

// Numeric building blocks, exposed for verification tests.

/// Student t quantile (inverse CDF).
double student_t_quantile(double p, double df);

/// CDF of the studentized range with k groups and df error degrees of
/// freedom, evaluated by adaptive Simpson quadrature (absolute accuracy
/// around 1e-6, stricter than the reporting needs).
double studentized_range_cdf(double q, int k, double df);

}  // namespace opacity

#endif
