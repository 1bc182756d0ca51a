#include "opacity/validate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace opacity {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

}  // namespace

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
    double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double pooled_se(const std::vector<double>& a, const std::vector<double>& b) {
    double va = sd_of(a) * sd_of(a) / static_cast<double>(a.size());
    double vb = sd_of(b) * sd_of(b) / static_cast<double>(b.size());
    return std::sqrt(va + vb);
}

std::vector<double> measure_cs(const PairedCorpus& corpus, Direction direction,
                               const std::vector<std::uint64_t>& seeds,
                               const ModelConfig& model,
                               const ReplayConfig& replay, int workers) {
    auto runs = run_suite(corpus, {direction}, seeds, model, replay, workers);
    std::vector<double> cs;
    cs.reserve(runs.size());
    for (const auto& r : runs) {
        if (!r.ok)
            throw Error("measurement failed (seed " + std::to_string(r.seed) +
                        "): " + r.error);
        cs.push_back(r.result.c);
    }
    return cs;
}

std::string ValidateConfig::to_json() const {
    nlohmann::json j;
    j["synth"] = nlohmann::json::parse(synth.to_json());
    j["seeds"] = seeds;
    j["epsilons"] = epsilons;
    j["level_low"] = level_low;
    j["level_high"] = level_high;
    j["identity_min_c"] = identity_min_c;
    j["independence_max_abs_c"] = independence_max_abs_c;
    j["model"] = nlohmann::json::parse(model.to_json());
    j["replay"] = {{"streams", replay.streams},
                   {"batch_size", replay.batch_size}};
    j["workers"] = workers;
    return j.dump(2);
}

ValidateConfig ValidateConfig::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("validate config: ") + e.what());
    }
    ValidateConfig c;
    try {
        if (j.contains("synth"))
            c.synth = SynthConfig::from_json_text(j["synth"].dump());
        if (j.contains("seeds"))
            c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("epsilons"))
            c.epsilons = j["epsilons"].get<std::vector<double>>();
        c.level_low = j.value("level_low", c.level_low);
        c.level_high = j.value("level_high", c.level_high);
        c.identity_min_c = j.value("identity_min_c", c.identity_min_c);
        c.independence_max_abs_c =
            j.value("independence_max_abs_c", c.independence_max_abs_c);
        if (j.contains("model"))
            c.model = ModelConfig::from_json_text(j["model"].dump());
        if (j.contains("replay")) {
            c.replay.streams = j["replay"].value("streams", c.replay.streams);
            c.replay.batch_size =
                j["replay"].value("batch_size", c.replay.batch_size);
        }
        c.workers = j.value("workers", c.workers);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("validate config: ") + e.what());
    }
    if (c.seeds.size() < 2)
        throw ParseError("validate config: need at least 2 seeds");
    if (c.epsilons.size() < 2)
        throw ParseError("validate config: need at least 2 epsilons");
    c.replay.validate();
    return c;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back(
            {{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    j["checks"] = std::move(arr);
    j["all_pass"] = all_pass();
    return j.dump(2);
}

std::string ValidationReport::text() const {
    std::string out;
    for (const auto& c : checks)
        out += std::string(c.pass ? "PASS" : "FAIL") + "  " + c.name + ": " +
               c.details + "\n";
    out += std::string(all_pass() ? "PASS" : "FAIL") + "  overall\n";
    return out;
}

ValidationReport run_validation(const ValidateConfig& config,
                                std::ostream* log) {
    auto alphabet = phoneme_alphabet(config.synth.alphabet_size);
    auto identity = RuleTable::identity(alphabet);

    struct Job {
        std::string condition;
        std::uint64_t seed = 0;
        Direction direction = Direction::orth_to_phon;
        PairedCorpus corpus;
        double c = 0.0;
        std::string error;
    };
    std::vector<Job> jobs;
    auto add = [&](std::string cond, std::uint64_t seed, Direction dir,
                   PairedCorpus corpus) {
        Job j;
        j.condition = std::move(cond);
        j.seed = seed;
        j.direction = dir;
        j.corpus = std::move(corpus);
        jobs.push_back(std::move(j));
    };

    for (std::uint64_t s : config.seeds) {
        SynthConfig sc = config.synth;
        sc.seed = s;
        auto phon = gen_phonology(sc);

        for (double eps : config.epsilons) {
            auto corpus = gen_orthography(phon, identity, eps, s);
            if (eps == 0.0) {
                // The epsilon = 0 corpus is the identity corpus.
                add("ident_o2p", s, Direction::orth_to_phon, corpus);
            }
            add("eps=" + fmt(eps), s, Direction::phon_to_orth,
                std::move(corpus));
        }
        add("indep_o2p", s, Direction::orth_to_phon,
            make_independent_corpus(sc));
        for (int level : {config.level_low, config.level_high}) {
            auto rules = gen_rule_table(level, alphabet, s);
            auto corpus = gen_orthography(phon, rules, 0.0, s);
            if (level == config.level_low)
                add("bij_o2p", s, Direction::orth_to_phon, corpus);
            add("level=" + std::to_string(level), s, Direction::phon_to_orth,
                std::move(corpus));
        }
    }

    auto work = [&](std::size_t i) {
        Job& j = jobs[i];
        try {
            j.c = run_direction(j.corpus, j.direction, config.model,
                                config.replay, j.seed)
                      .c;
        } catch (const std::exception& e) {
            j.error = e.what();
        }
    };
    int n_workers =
        std::max(1, std::min<int>(config.workers,
                                  static_cast<int>(jobs.size())));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            work(i);
            if (log)
                (*log) << jobs[i].condition << " seed=" << jobs[i].seed
                       << " dir=" << to_string(jobs[i].direction) << " C="
                       << (jobs[i].error.empty() ? fmt(jobs[i].c)
                                                 : jobs[i].error)
                       << std::endl;
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    work(i);
                }
            });
        for (auto& t : pool) t.join();
        if (log)
            for (const auto& j : jobs)
                (*log) << j.condition << " seed=" << j.seed
                       << " dir=" << to_string(j.direction) << " C="
                       << (j.error.empty() ? fmt(j.c) : j.error) << std::endl;
    }
    for (const auto& j : jobs)
        if (!j.error.empty())
            throw Error("validation run '" + j.condition + "' seed " +
                        std::to_string(j.seed) + " failed: " + j.error);

    std::map<std::string, std::vector<double>> values;
    for (const auto& j : jobs) values[j.condition].push_back(j.c);

    ValidationReport report;
    {
        double mo = mean_of(values["ident_o2p"]);
        double mp = mean_of(values["eps=" + fmt(0.0)]);
        bool pass = mo >= config.identity_min_c && mp >= config.identity_min_c;
        report.checks.push_back(
            {"identity_compressibility", pass,
             "mean C o2p=" + fmt(mo) + " p2o=" + fmt(mp) + " (threshold " +
                 fmt(config.identity_min_c) + ")"});
    }
    {
        double m = mean_of(values["indep_o2p"]);
        bool pass = std::abs(m) <= config.independence_max_abs_c;
        report.checks.push_back(
            {"independence_near_zero", pass,
             "mean C=" + fmt(m) + " (|C| threshold " +
                 fmt(config.independence_max_abs_c) + ")"});
    }
    {
        std::vector<double> eps_sorted = config.epsilons;
        std::sort(eps_sorted.begin(), eps_sorted.end());
        bool pass = true;
        std::string detail;
        for (std::size_t i = 0; i + 1 < eps_sorted.size(); ++i) {
            const auto& a = values["eps=" + fmt(eps_sorted[i])];
            const auto& b = values["eps=" + fmt(eps_sorted[i + 1])];
            double gap = mean_of(a) - mean_of(b);
            double se = pooled_se(a, b);
            pass = pass && gap > se;
            detail += "C(" + fmt(eps_sorted[i]) + ")=" + fmt(mean_of(a)) +
                      ">C(" + fmt(eps_sorted[i + 1]) + ")=" +
                      fmt(mean_of(b)) + " gap=" + fmt(gap) + " se=" +
                      fmt(se) + "; ";
        }
        report.checks.push_back({"irregularity_monotonicity", pass, detail});
    }
    {
        const auto& lo = values["level=" + std::to_string(config.level_low)];
        const auto& hi = values["level=" + std::to_string(config.level_high)];
        double gap = mean_of(lo) - mean_of(hi);
        double se = pooled_se(lo, hi);
        report.checks.push_back(
            {"complexity_monotonicity", gap > se,
             "C(level " + std::to_string(config.level_low) + ")=" +
                 fmt(mean_of(lo)) + " C(level " +
                 std::to_string(config.level_high) + ")=" +
                 fmt(mean_of(hi)) + " gap=" + fmt(gap) + " se=" + fmt(se)});
    }
    {
        const auto& o2p = values["bij_o2p"];
        const auto& p2o = values["level=" + std::to_string(config.level_low)];
        double diff = std::abs(mean_of(o2p) - mean_of(p2o));
        double se = pooled_se(o2p, p2o);
        report.checks.push_back(
            {"bijective_direction_symmetry", diff <= 2.0 * se,
             "|dC|=" + fmt(diff) + " 2*se=" + fmt(2.0 * se)});
    }
    return report;
}

}  // namespace opacity
