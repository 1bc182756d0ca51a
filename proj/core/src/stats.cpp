#include "opacity/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace opacity {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0,
                                depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0,
                                depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// P(range of k iid standard normals <= w).
double normal_range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    if (w > 25.0) return 1.0;  // beyond any attainable range mass
    auto integrand = [&](double z) {
        double span = normal_cdf(z) - normal_cdf(z - w);
        return normal_pdf(z) * std::pow(span, k - 1);
    };
    double cdf = k * adaptive_simpson(integrand, -10.0, 10.0 + std::min(w, 8.0),
                                      1e-10);
    return std::clamp(cdf, 0.0, 1.0);
}

/// Regularized incomplete beta via Lentz continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    double x = df / (df + t * t);
    double tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw DomainError("t quantile: p must be in (0,1)");
    if (df < 1.0) throw DomainError("t quantile: df must be >= 1");
    double lo = -1e4, hi = 1e4;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw DomainError("studentized range: k must be >= 2");
    if (df < 1.0) throw DomainError("studentized range: df must be >= 1");
    if (q <= 0.0) return 0.0;
    if (df > 2e4) return normal_range_cdf(q, k);  // scale is essentially 1

    // Outer integral over the chi scale factor u = sqrt(chi^2_df / df):
    //   ln f(u) = ln 2 + (df/2) ln(df/2) - lgamma(df/2) + (df-1) ln u
    //             - df u^2 / 2
    double ln_norm = std::log(2.0) + 0.5 * df * std::log(0.5 * df) -
                     std::lgamma(0.5 * df);
    auto density = [&](double u) {
        if (u <= 0.0) return 0.0;
        return std::exp(ln_norm + (df - 1.0) * std::log(u) -
                        0.5 * df * u * u);
    };
    auto integrand = [&](double u) {
        double fu = density(u);
        return fu > 0.0 ? fu * normal_range_cdf(q * u, k) : 0.0;
    };
    // 12 sigma of the scale density on each side; the midpoint of the
    // interval sits on the density peak so the quadrature cannot miss it.
    double spread = 12.0 / std::sqrt(2.0 * df);
    double lo = std::max(0.0, 1.0 - spread);
    double hi = 1.0 + spread;
    double cdf = adaptive_simpson(integrand, lo, hi, 1e-8);
    return std::clamp(cdf, 0.0, 1.0);
}

GroupSummary summarize(std::string label, std::vector<double> values) {
    if (values.size() < 2)
        throw Error("group '" + label + "' needs at least 2 values");
    GroupSummary g;
    g.label = std::move(label);
    g.n = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    g.mean = sum / g.n;
    double ss = 0.0;
    for (double v : values) ss += (v - g.mean) * (v - g.mean);
    g.sd = std::sqrt(ss / (g.n - 1));
    double t = student_t_quantile(0.975, g.n - 1);
    double half = t * g.sd / std::sqrt(static_cast<double>(g.n));
    g.ci_lo = g.mean - half;
    g.ci_hi = g.mean + half;
    g.values = std::move(values);
    return g;
}

std::vector<GroupSummary> aggregate(
    const std::vector<CompressibilityResult>& results) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> grouped;
    for (const auto& r : results) {
        std::string key = r.language + "," + to_string(r.direction);
        if (!grouped.count(key)) order.push_back(key);
        grouped[key].push_back(r.c);
    }
    std::vector<GroupSummary> out;
    out.reserve(order.size());
    for (const auto& key : order)
        out.push_back(summarize(key, grouped[key]));
    return out;
}

std::string PairwiseTable::csv() const {
    std::string out = "row,col,diff,p\n";
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", e.diff, e.p);
        out += e.a + "," + e.b + "," + buf + "\n";
    }
    return out;
}

PairwiseTable tukey_hsd(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
    const int k = static_cast<int>(groups.size());
    if (k < 2) throw Error("tukey_hsd: need at least 2 groups");

    std::vector<double> means(k);
    std::size_t total_n = 0;
    double ss_within = 0.0;
    for (int i = 0; i < k; ++i) {
        const auto& vals = groups[i].second;
        if (vals.size() < 2)
            throw Error("tukey_hsd: group '" + groups[i].first +
                        "' needs at least 2 values");
        double sum = 0.0;
        for (double v : vals) sum += v;
        means[i] = sum / static_cast<double>(vals.size());
        for (double v : vals) ss_within += (v - means[i]) * (v - means[i]);
        total_n += vals.size();
    }
    double df = static_cast<double>(total_n - k);
    double mse = ss_within / df;
    if (!(mse > 0.0))
        throw Error("tukey_hsd: zero within-group variance in every group");

    PairwiseTable table;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            double ni = static_cast<double>(groups[i].second.size());
            double nj = static_cast<double>(groups[j].second.size());
            double se = std::sqrt(0.5 * mse * (1.0 / ni + 1.0 / nj));
            double qstat = std::abs(means[i] - means[j]) / se;
            double p = 1.0 - studentized_range_cdf(qstat, k, df);
            table.entries.push_back(
                {groups[i].first, groups[j].first, means[i] - means[j], p});
        }
    return table;
}

double onset_entropy(const PairedCorpus& corpus, Direction direction) {
    if (corpus.size() == 0) throw Error("onset_entropy: empty corpus");
    // first source symbol -> counts of first target symbols
    std::map<int, std::map<int, std::size_t>> groups;
    for (const auto& [orth, phon] : corpus.entries) {
        const SymbolSeq& src =
            direction == Direction::orth_to_phon ? orth : phon;
        const SymbolSeq& tgt =
            direction == Direction::orth_to_phon ? phon : orth;
        groups[src.ids.front()][tgt.ids.front()] += 1;
    }
    double sum_entropy = 0.0;
    for (const auto& [_, dist] : groups) {
        std::size_t total = 0;
        for (const auto& [_, c] : dist) total += c;
        double h = 0.0;
        for (const auto& [_, c] : dist) {
            double p = static_cast<double>(c) / static_cast<double>(total);
            h -= p * std::log2(p);
        }
        sum_entropy += h;
    }
    return sum_entropy / static_cast<double>(groups.size());
}

}  // namespace opacity
