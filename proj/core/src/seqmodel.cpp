#include "opacity/seqmodel.hpp"

#include <cmath>

#include "json.hpp"
#include "opacity/rng.hpp"

namespace opacity {

void ModelConfig::validate() const {
    if (embed_dim <= 0 || hidden_dim <= 0) throw ConfigError("dims must be > 0");
    if (hidden_dim != embed_dim)
        throw ConfigError("hidden_dim must equal embed_dim");
    if (encoder_layers != 1 || decoder_layers != 1)
        throw ConfigError("only single encoder/decoder layers are supported");
    if (kernel_width < 1 || kernel_width % 2 == 0)
        throw ConfigError("kernel_width must be a positive odd integer");
    if (input_vocab <= kNumReserved || output_vocab <= kNumReserved)
        throw ConfigError("vocabulary must contain at least one data symbol");
    if (max_seq_len < 2) throw ConfigError("max_seq_len must be >= 2");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (laplace_alpha <= 0) throw ConfigError("laplace_alpha must be > 0");
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["embed_dim"] = embed_dim;
    j["hidden_dim"] = hidden_dim;
    j["encoder_layers"] = encoder_layers;
    j["decoder_layers"] = decoder_layers;
    j["kernel_width"] = kernel_width;
    j["input_vocab"] = input_vocab;
    j["output_vocab"] = output_vocab;
    j["max_seq_len"] = max_seq_len;
    j["learning_rate"] = learning_rate;
    j["adam_beta1"] = adam_beta1;
    j["adam_beta2"] = adam_beta2;
    j["adam_eps"] = adam_eps;
    j["grad_clip_norm"] = grad_clip_norm;
    j["laplace_alpha"] = laplace_alpha;
    j["seed"] = seed;
    return j.dump();
}

ModelConfig ModelConfig::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
    ModelConfig c;
    try {
        c.embed_dim = j.at("embed_dim").get<int>();
        c.hidden_dim = j.at("hidden_dim").get<int>();
        c.encoder_layers = j.at("encoder_layers").get<int>();
        c.decoder_layers = j.at("decoder_layers").get<int>();
        c.kernel_width = j.at("kernel_width").get<int>();
        c.input_vocab = j.at("input_vocab").get<int>();
        c.output_vocab = j.at("output_vocab").get<int>();
        c.max_seq_len = j.at("max_seq_len").get<int>();
        c.learning_rate = j.at("learning_rate").get<double>();
        c.adam_beta1 = j.at("adam_beta1").get<double>();
        c.adam_beta2 = j.at("adam_beta2").get<double>();
        c.adam_eps = j.at("adam_eps").get<double>();
        c.grad_clip_norm = j.at("grad_clip_norm").get<double>();
        c.laplace_alpha = j.at("laplace_alpha").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
    return c;
}

std::string ModelConfig::digest() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json())));
    return buf;
}

std::size_t Batch::scored_symbols(bool count_eos) const {
    std::size_t n = 0;
    for (const auto& t : targets) n += t.size() + (count_eos ? 1 : 0);
    return n;
}

SymbolSeq mask_input(const SymbolSeq& x) {
    return SymbolSeq{{kMaskId}, x.kind};
}

Batch masked_copy(const Batch& batch) {
    Batch out;
    out.targets = batch.targets;
    out.masked = true;
    out.inputs.reserve(batch.inputs.size());
    for (const auto& x : batch.inputs) out.inputs.push_back(mask_input(x));
    return out;
}

UnigramModel::UnigramModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    counts_.assign(config_.output_vocab, 0.0);
}

double UnigramModel::log2_prob(int symbol_id) const {
    double alpha = config_.laplace_alpha;
    double denom =
        total_ + alpha * static_cast<double>(config_.output_vocab - kNumReserved);
    return std::log2(counts_[symbol_id] + alpha) - std::log2(denom);
}

Vec UnigramModel::next_symbol_logprobs(const SymbolSeq&,
                                       const SymbolSeq&) const {
    Vec lp(config_.output_vocab);
    lp.setConstant(-std::numeric_limits<double>::infinity());
    constexpr double kLn2 = 0.6931471805599453;
    for (int id = kNumReserved; id < config_.output_vocab; ++id)
        lp[id] = log2_prob(id) * kLn2;
    return lp;
}

double UnigramModel::batch_codelength(const Batch& batch) const {
    if (batch.size() == 0) throw Error("batch_codelength: empty batch");
    KahanSum bits;
    for (const auto& tgt : batch.targets)
        for (int id : tgt.ids) {
            if (id < kNumReserved)
                throw Error("reserved symbol in data position");
            bits.add(-log2_prob(id));
        }
    return bits.value();
}

double UnigramModel::train_step(const Batch& batch) {
    if (batch.size() == 0) throw Error("train_step: empty batch");
    double loss_bits =
        batch_codelength(batch) /
        static_cast<double>(batch.scored_symbols(/*count_eos=*/false));
    for (const auto& tgt : batch.targets)
        for (int id : tgt.ids) {
            counts_[id] += 1.0;
            total_ += 1.0;
        }
    return loss_bits;
}

std::string UnigramModel::checkpoint_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["model"] = "unigram";
    j["config"] = nlohmann::json::parse(config_.to_json());
    j["counts"] = counts_;
    return j.dump();
}

void UnigramModel::set_count(int symbol_id, double count) {
    total_ += count - counts_[symbol_id];
    counts_[symbol_id] = count;
}

}  // namespace opacity
