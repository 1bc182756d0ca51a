#ifndef OPACITY_PREQUENTIAL_HPP
#define OPACITY_PREQUENTIAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "opacity/corpus.hpp"
#include "opacity/seqmodel.hpp"

namespace opacity {

enum class Direction { orth_to_phon, phon_to_orth };

std::string to_string(Direction d);
Direction direction_from_string(std::string_view s);

/// MI/RS schedule. The reset law is fixed: each stream resets to the
/// first seen batch with probability 1/(i+1) at iteration i (1-indexed).
struct ReplayConfig {
    int streams = 25;    // k
    int batch_size = 32;

    void validate() const;
    std::string digest() const;
};

/// Per-batch code costs of one coding run.
struct CodelengthTrace {
    std::vector<double> batch_bits;
    std::vector<std::size_t> batch_symbols;  // scored positions per batch
    double total_bits = 0.0;  // compensated sum of batch_bits
    std::size_t symbol_count = 0;
    Direction direction = Direction::orth_to_phon;
    bool masked = false;
    std::uint64_t seed = 0;
    std::string config_digest;
};

/// Thrown when the model diverges mid-run; carries the partial trace.
class MirsAborted : public Error {
public:
    MirsAborted(const std::string& msg, CodelengthTrace trace)
        : Error(msg), trace_(std::move(trace)) {}
    const CodelengthTrace& partial_trace() const { return trace_; }

private:
    CodelengthTrace trace_;
};

struct CompressibilityResult {
    std::string language;
    Direction direction = Direction::orth_to_phon;
    std::uint64_t seed = 0;
    double l_cond = 0.0;    // bits, unmasked run
    double l_uncond = 0.0;  // bits, masked run
    double c = 0.0;         // 1 - l_cond / l_uncond
    double i_bits = 0.0;    // l_uncond - l_cond
    std::string corpus_digest;

    static std::string csv_header();  // language,direction,seed,...
    std::string csv_row() const;
};

/// C = 1 - L(x|y)/L(x). May be negative; throws DomainError when
/// l_uncond <= 0.
double mutual_compressibility(double l_cond, double l_uncond);

/// Prequential estimate of algorithmic mutual information: L(x) - L(x|y).
double mutual_information_bits(double l_cond, double l_uncond);

/// (input, target) views of the corpus entries for a direction.
std::vector<std::pair<SymbolSeq, SymbolSeq>> oriented_pairs(
    const PairedCorpus& corpus, Direction direction);

/// One MI/RS coding run:
///   1. shuffle entries (presentation order stream of `seed`),
///   2. cut into batches of replay.batch_size,
///   3. model = factory(seed),
///   4. k replay-stream cursors over the seen-batch list,
///   5. per iteration i: encode batch i, then train on batch i and on
///      each stream's current batch (cursors advance cyclically over the
///      seen list; each stream resets to the first seen batch with
///      probability 1/(i+1)).
/// Inputs are replaced by [MASK] when `masked` is set. All randomness
/// comes from Pcg32 streams derived from `seed`.
CodelengthTrace mirs_codelength(const PairedCorpus& corpus,
                                Direction direction,
                                const ModelFactory& factory,
                                const ReplayConfig& replay, bool masked,
                                std::uint64_t seed);

struct DirectionRun {
    CompressibilityResult result;
    CodelengthTrace conditional;    // unmasked
    CodelengthTrace unconditional;  // masked
};

/// Runs the paired masked/unmasked measurement with a shared seed
/// (identical initialization and presentation order) and combines the
/// totals. `base` supplies model hyperparameters; vocabulary sizes and
/// the seed are filled in per direction.
DirectionRun run_direction_traced(const PairedCorpus& corpus,
                                  Direction direction,
                                  const ModelConfig& base,
                                  const ReplayConfig& replay,
                                  std::uint64_t seed);

CompressibilityResult run_direction(const PairedCorpus& corpus,
                                    Direction direction,
                                    const ModelConfig& base,
                                    const ReplayConfig& replay,
                                    std::uint64_t seed);

struct SuiteRun {
    Direction direction = Direction::orth_to_phon;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    CompressibilityResult result;           // meaningful when ok
    CodelengthTrace conditional_trace;      // unmasked run
    CodelengthTrace unconditional_trace;    // masked run
};

/// One run per (direction, seed), in direction-major order. Failed runs
/// are reported in place and the suite continues. `workers` > 1 runs
/// measurements in parallel; results are ordered deterministically
/// regardless.
std::vector<SuiteRun> run_suite(const PairedCorpus& corpus,
                                const std::vector<Direction>& directions,
                                const std::vector<std::uint64_t>& seeds,
                                const ModelConfig& base,
                                const ReplayConfig& replay, int workers = 1);

/// The default seed list {1..40}.
std::vector<std::uint64_t> default_seeds();

std::string trace_csv(const CodelengthTrace& trace);
std::string results_csv(const std::vector<CompressibilityResult>& results);

}  // namespace opacity

#endif
