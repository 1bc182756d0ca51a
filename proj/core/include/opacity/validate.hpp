#ifndef OPACITY_VALIDATE_HPP
#define OPACITY_VALIDATE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "opacity/prequential.hpp"
#include "opacity/synthetic.hpp"

namespace opacity {

/// Configuration of the synthetic validation harness: corpora with
/// controlled irregularity (exception rate) and rule complexity, measured
/// with the standard pipeline.
struct ValidateConfig {
    SynthConfig synth;                    // per-seed generation template
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<double> epsilons = {0.0, 0.25, 0.5};
    int level_low = 1;
    int level_high = 4;
    double identity_min_c = 0.8;
    double independence_max_abs_c = 0.05;
    ModelConfig model;
    ReplayConfig replay;
    int workers = 1;

    std::string to_json() const;
    static ValidateConfig from_json_text(std::string_view text);
};

struct PropertyCheck {
    std::string name;
    bool pass = false;
    std::string details;  // means, gaps, pooled SEs
};

struct ValidationReport {
    std::vector<PropertyCheck> checks;
    bool all_pass() const;
    std::string to_json() const;
    std::string text() const;  // one PASS/FAIL line per check
};

double mean_of(const std::vector<double>& xs);
double sd_of(const std::vector<double>& xs);
/// Standard error of the difference between two group means.
double pooled_se(const std::vector<double>& a, const std::vector<double>& b);

/// C values for `seeds.size()` paired runs on one corpus.
std::vector<double> measure_cs(const PairedCorpus& corpus, Direction direction,
                               const std::vector<std::uint64_t>& seeds,
                               const ModelConfig& model,
                               const ReplayConfig& replay, int workers = 1);

/// Runs all harness suites: identity compressibility in both directions,
/// independence near zero, irregularity monotonicity over the epsilon
/// grid, rule-complexity monotonicity, and direction symmetry for
/// bijective rules. Progress lines go to `log` when given.
ValidationReport run_validation(const ValidateConfig& config,
                                std::ostream* log = nullptr);

}  // namespace opacity

#endif
