#include "opacity/prequential.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "opacity/rng.hpp"

namespace opacity {

namespace {

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string to_string(Direction d) {
    return d == Direction::orth_to_phon ? "o2p" : "p2o";
}

Direction direction_from_string(std::string_view s) {
    if (s == "o2p") return Direction::orth_to_phon;
    if (s == "p2o") return Direction::phon_to_orth;
    throw Error("unknown direction: " + std::string(s) +
                " (expected o2p or p2o)");
}

void ReplayConfig::validate() const {
    if (streams < 0) throw ConfigError("stream count must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

std::string ReplayConfig::digest() const {
    std::string repr = "streams=" + std::to_string(streams) +
                       ";batch_size=" + std::to_string(batch_size);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(repr)));
    return buf;
}

std::string CompressibilityResult::csv_header() {
    return "language,direction,seed,L_cond,L_uncond,C,I_bits";
}

std::string CompressibilityResult::csv_row() const {
    return language + "," + to_string(direction) + "," + std::to_string(seed) +
           "," + fmt_double(l_cond) + "," + fmt_double(l_uncond) + "," +
           fmt_double(c) + "," + fmt_double(i_bits);
}

double mutual_compressibility(double l_cond, double l_uncond) {
    if (!(l_uncond > 0.0))
        throw DomainError("mutual_compressibility: L_uncond must be > 0");
    return 1.0 - l_cond / l_uncond;
}

double mutual_information_bits(double l_cond, double l_uncond) {
    return l_uncond - l_cond;
}

std::vector<std::pair<SymbolSeq, SymbolSeq>> oriented_pairs(
    const PairedCorpus& corpus, Direction direction) {
    std::vector<std::pair<SymbolSeq, SymbolSeq>> pairs;
    pairs.reserve(corpus.size());
    for (const auto& [orth, phon] : corpus.entries) {
        if (direction == Direction::orth_to_phon)
            pairs.emplace_back(orth, phon);
        else
            pairs.emplace_back(phon, orth);
    }
    return pairs;
}

CodelengthTrace mirs_codelength(const PairedCorpus& corpus,
                                Direction direction,
                                const ModelFactory& factory,
                                const ReplayConfig& replay, bool masked,
                                std::uint64_t seed) {
    replay.validate();
    if (corpus.size() == 0) throw Error("mirs_codelength: empty corpus");

    auto pairs = oriented_pairs(corpus, direction);

    Pcg32 order_rng = Pcg32::from_seed(seed, "order");
    auto perm = random_permutation(pairs.size(), order_rng);

    const std::size_t bs = static_cast<std::size_t>(replay.batch_size);
    const std::size_t n_batches = (pairs.size() + bs - 1) / bs;
    std::vector<Batch> batches(n_batches);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Batch& b = batches[i / bs];
        const auto& [in, tgt] = pairs[perm[i]];
        b.inputs.push_back(masked ? mask_input(in) : in);
        b.targets.push_back(tgt);
        b.masked = masked;
    }

    auto model = factory(seed);
    Pcg32 reset_rng = Pcg32::from_seed(seed, "reset");

    CodelengthTrace trace;
    trace.direction = direction;
    trace.masked = masked;
    trace.seed = seed;
    trace.config_digest = model->config().digest();
    trace.batch_bits.reserve(n_batches);

    KahanSum total;
    std::vector<std::size_t> cursor(static_cast<std::size_t>(replay.streams),
                                    0);
    for (std::size_t i = 1; i <= n_batches; ++i) {
        const Batch& current = batches[i - 1];
        try {
            double bits = model->batch_codelength(current);
            std::size_t n_sym = current.scored_symbols(model->scores_eos());
            trace.batch_bits.push_back(bits);
            trace.batch_symbols.push_back(n_sym);
            total.add(bits);
            trace.total_bits = total.value();
            trace.symbol_count += n_sym;

            model->train_step(current);
            // Replay: each stream trains on its current seen batch and
            // advances cyclically over the i batches seen so far.
            for (auto& c : cursor) {
                model->train_step(batches[c]);
                c = (c + 1) % i;
            }
        } catch (const DivergenceError& e) {
            throw MirsAborted(
                "run aborted at iteration " + std::to_string(i) + ": " +
                    e.what(),
                trace);
        }
        double p_reset = 1.0 / static_cast<double>(i + 1);
        for (auto& c : cursor)
            if (reset_rng.next_double() < p_reset) c = 0;
    }
    return trace;
}

DirectionRun run_direction_traced(const PairedCorpus& corpus,
                                  Direction direction,
                                  const ModelConfig& base,
                                  const ReplayConfig& replay,
                                  std::uint64_t seed) {
    if (corpus.size() == 0) throw Error("run_direction: empty corpus");

    ModelConfig cfg = base;
    if (direction == Direction::orth_to_phon) {
        cfg.input_vocab = corpus.vocab_orth.size();
        cfg.output_vocab = corpus.vocab_phon.size();
    } else {
        cfg.input_vocab = corpus.vocab_phon.size();
        cfg.output_vocab = corpus.vocab_orth.size();
    }

    // Fail early with a clear message instead of mid-run.
    std::size_t max_in = 0, max_tgt = 0;
    for (const auto& [in, tgt] : oriented_pairs(corpus, direction)) {
        max_in = std::max(max_in, in.size());
        max_tgt = std::max(max_tgt, tgt.size());
    }
    if (max_in > static_cast<std::size_t>(cfg.max_seq_len) ||
        max_tgt + 1 > static_cast<std::size_t>(cfg.max_seq_len))
        throw ConfigError("corpus sequence length exceeds max_seq_len " +
                          std::to_string(cfg.max_seq_len));

    ModelFactory factory = [&cfg](std::uint64_t s) {
        ModelConfig c = cfg;
        c.seed = s;
        return std::make_unique<ConvSeq2Seq>(c);
    };

    // Same seed for both runs: identical initialization and presentation
    // order, so the two codelengths differ only through masking.
    DirectionRun run;
    run.conditional =
        mirs_codelength(corpus, direction, factory, replay, false, seed);
    run.unconditional =
        mirs_codelength(corpus, direction, factory, replay, true, seed);

    run.result.language = corpus.language;
    run.result.direction = direction;
    run.result.seed = seed;
    run.result.l_cond = run.conditional.total_bits;
    run.result.l_uncond = run.unconditional.total_bits;
    run.result.c = mutual_compressibility(run.result.l_cond,
                                          run.result.l_uncond);
    run.result.i_bits =
        mutual_information_bits(run.result.l_cond, run.result.l_uncond);
    run.result.corpus_digest = corpus.digest();
    return run;
}

CompressibilityResult run_direction(const PairedCorpus& corpus,
                                    Direction direction,
                                    const ModelConfig& base,
                                    const ReplayConfig& replay,
                                    std::uint64_t seed) {
    return run_direction_traced(corpus, direction, base, replay, seed).result;
}

std::vector<SuiteRun> run_suite(const PairedCorpus& corpus,
                                const std::vector<Direction>& directions,
                                const std::vector<std::uint64_t>& seeds,
                                const ModelConfig& base,
                                const ReplayConfig& replay, int workers) {
    {
        std::vector<std::uint64_t> sorted = seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw Error("run_suite: seeds must be distinct");
    }

    std::vector<SuiteRun> runs;
    for (Direction d : directions)
        for (std::uint64_t s : seeds) {
            SuiteRun r;
            r.direction = d;
            r.seed = s;
            runs.push_back(std::move(r));
        }

    auto work = [&](std::size_t idx) {
        SuiteRun& r = runs[idx];
        try {
            DirectionRun dr =
                run_direction_traced(corpus, r.direction, base, replay,
                                     r.seed);
            r.result = std::move(dr.result);
            r.conditional_trace = std::move(dr.conditional);
            r.unconditional_trace = std::move(dr.unconditional);
            r.ok = true;
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
        }
    };

    int n_workers = std::max(1, std::min<int>(workers,
                                              static_cast<int>(runs.size())));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < runs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= runs.size()) return;
                    work(i);
                }
            });
        for (auto& t : pool) t.join();
    }
    return runs;
}

std::vector<std::uint64_t> default_seeds() {
    std::vector<std::uint64_t> seeds(40);
    for (int i = 0; i < 40; ++i) seeds[i] = static_cast<std::uint64_t>(i + 1);
    return seeds;
}

std::string trace_csv(const CodelengthTrace& trace) {
    std::string out = "iteration,bits,cumulative_bits\n";
    KahanSum cum;
    for (std::size_t i = 0; i < trace.batch_bits.size(); ++i) {
        cum.add(trace.batch_bits[i]);
        out += std::to_string(i + 1) + "," + fmt_double(trace.batch_bits[i]) +
               "," + fmt_double(cum.value()) + "\n";
    }
    return out;
}

std::string results_csv(const std::vector<CompressibilityResult>& results) {
    std::string out = CompressibilityResult::csv_header() + "\n";
    for (const auto& r : results) out += r.csv_row() + "\n";
    return out;
}

}  // namespace opacity
