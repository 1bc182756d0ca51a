#ifndef OPACITY_SEQMODEL_HPP
#define OPACITY_SEQMODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opacity/corpus.hpp"

namespace opacity {

/// Row-major everywhere: activations are (batch*time, dim) with contiguous
/// rows, which keeps time-shifts and embedding scatter cheap.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct ModelConfig {
    int embed_dim = 100;
    int hidden_dim = 100;  // must equal embed_dim (residual connections)
    int encoder_layers = 1;
    int decoder_layers = 1;
    int kernel_width = 3;  // odd
    int input_vocab = 0;
    int output_vocab = 0;
    int max_seq_len = 128;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip_norm = 1.0;
    double laplace_alpha = 1.0;  // unigram oracle smoothing
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
    std::string to_json() const;
    static ModelConfig from_json_text(std::string_view text);
    /// FNV-1a digest of the canonical JSON form; recorded in traces.
    std::string digest() const;
    bool operator==(const ModelConfig&) const = default;
};

/// A list of (input, target) sequences scored/trained together. Sequences
/// stay ragged here; models pad internally and never score padding.
struct Batch {
    std::vector<SymbolSeq> inputs;
    std::vector<SymbolSeq> targets;
    bool masked = false;

    std::size_t size() const { return targets.size(); }
    /// Number of scored positions (data symbols, plus EOS when counted).
    std::size_t scored_symbols(bool count_eos) const;
};

/// Collapses any input to the single-token sequence [MASK]; the
/// conditional model then degenerates to an unconditional coder. The
/// length of x is deliberately not preserved.
SymbolSeq mask_input(const SymbolSeq& x);

/// Copy of `batch` with every input replaced by mask_input(input).
Batch masked_copy(const Batch& batch);

/// Interface shared by the convolutional model and the count oracle.
class SeqModel {
public:
    virtual ~SeqModel() = default;

    virtual const ModelConfig& config() const = 0;

    /// Whether codelengths include an end-of-sequence symbol. The neural
    /// coder must score EOS to emit proper prefix-code lengths for
    /// variable-length strings; the count oracle codes data symbols only
    /// so its totals match closed-form arithmetic.
    virtual bool scores_eos() const = 0;

    /// Natural-log distribution over the output vocabulary for the symbol
    /// following `target_prefix`. exp of the result sums to 1.
    virtual Vec next_symbol_logprobs(const SymbolSeq& input,
                                     const SymbolSeq& target_prefix) const = 0;

    /// Sum of -log2 p over all scored positions of the batch, under the
    /// current (pre-update) state.
    virtual double batch_codelength(const Batch& batch) const = 0;

    /// One training step. Returns the mean negative log-likelihood in
    /// bits per scored symbol, measured before the update.
    virtual double train_step(const Batch& batch) = 0;

    virtual std::string checkpoint_json() const = 0;
};

using ModelFactory =
    std::function<std::unique_ptr<SeqModel>(std::uint64_t seed)>;

/// Count-based unigram coder with Laplace smoothing over the data symbols
/// of the output vocabulary. Training accumulates counts; predictions
/// ignore the input entirely. Exact arithmetic makes it the reference
/// oracle for codelength tests.
class UnigramModel final : public SeqModel {
public:
    explicit UnigramModel(const ModelConfig& config);

    const ModelConfig& config() const override { return config_; }
    bool scores_eos() const override { return false; }
    Vec next_symbol_logprobs(const SymbolSeq& input,
                             const SymbolSeq& target_prefix) const override;
    double batch_codelength(const Batch& batch) const override;
    double train_step(const Batch& batch) override;
    std::string checkpoint_json() const override;

    const std::vector<double>& counts() const { return counts_; }
    void set_count(int symbol_id, double count);

private:
    double log2_prob(int symbol_id) const;

    ModelConfig config_;
    std::vector<double> counts_;  // indexed by output vocab id
    double total_ = 0.0;
};

/// Convolutional encoder-decoder: learned token + position embeddings,
/// one GLU convolution block on each side with residual connections,
/// single-head dot-product attention from decoder states to encoder
/// states, and a linear output layer. Trained with Adam and global-norm
/// gradient clipping. All arithmetic is double precision; given the same
/// (config, seed, batch sequence) the state is bit-identical on one
/// platform.
class ConvSeq2Seq final : public SeqModel {
public:
    explicit ConvSeq2Seq(const ModelConfig& config);

    const ModelConfig& config() const override { return config_; }
    bool scores_eos() const override { return true; }
    Vec next_symbol_logprobs(const SymbolSeq& input,
                             const SymbolSeq& target_prefix) const override;
    double batch_codelength(const Batch& batch) const override;
    double train_step(const Batch& batch) override;
    std::string checkpoint_json() const override;

    /// Forward-only mean loss in bits per scored symbol.
    double loss_bits(const Batch& batch) const;
    /// Natural-log next-symbol distributions at every position of one
    /// teacher-forced example: row t conditions on target[0..t).
    Mat position_logprobs(const SymbolSeq& input, const SymbolSeq& target) const;
    /// Runs forward + backward without updating; returns loss_bits.
    /// Exposed so gradient-check tests can compare against finite
    /// differences.
    double compute_gradients(const Batch& batch);

    struct Tensor {
        std::string name;
        Mat value;
        Mat grad;
        Mat adam_m;
        Mat adam_v;
    };
    std::vector<Tensor>& tensors() { return tensors_; }
    const std::vector<Tensor>& tensors() const { return tensors_; }
    std::int64_t step_count() const { return step_; }

    static std::unique_ptr<ConvSeq2Seq> from_checkpoint(std::string_view json);

private:
    struct Forward;  // activation cache
    void run_forward(const Batch& batch, Forward& f) const;
    double backward(const Batch& batch, const Forward& f);
    void apply_update();

    ModelConfig config_;
    std::vector<Tensor> tensors_;
    std::int64_t step_ = 0;
};

}  // namespace opacity

#endif
