#include <cmath>
#include <limits>

#include "json.hpp"
#include "opacity/rng.hpp"
#include "opacity/seqmodel.hpp"

namespace opacity {

namespace {

constexpr double kLn2 = 0.6931471805599453;

enum TensorIdx {
    kEmbedIn = 0,  // (V_in, d)
    kPosIn,        // (max_len, d)
    kEmbedOut,     // (V_out, d)
    kPosOut,       // (max_len, d)
    kWEnc,         // (k*d, 2d), one d-row block per tap
    kBEnc,         // (1, 2d)
    kWDec,         // (k*d, 2d)
    kBDec,         // (1, 2d)
    kWAtt,         // (d, d)
    kWOut,         // (d, V_out)
    kBOut,         // (1, V_out)
    kTensorCount
};

/// Y.row(b*L+t) = X.row(b*L+t+o) where both t and t+o index real symbols
/// of example b, zero elsewhere.
void gather_shifted(const Mat& X, const std::vector<int>& len, int B, int L,
                    int o, Mat& Y) {
    Y.setZero(X.rows(), X.cols());
    for (int b = 0; b < B; ++b) {
        int t0 = std::max(0, -o);
        int t1 = len[b] - std::max(0, o);
        if (t1 > t0)
            Y.middleRows(b * L + t0, t1 - t0) =
                X.middleRows(b * L + t0 + o, t1 - t0);
    }
}

/// Transpose of gather_shifted: accumulates dY back into dX.
void scatter_shifted(const Mat& dY, const std::vector<int>& len, int B, int L,
                     int o, Mat& dX) {
    for (int b = 0; b < B; ++b) {
        int t0 = std::max(0, -o);
        int t1 = len[b] - std::max(0, o);
        if (t1 > t0)
            dX.middleRows(b * L + t0 + o, t1 - t0) +=
                dY.middleRows(b * L + t0, t1 - t0);
    }
}

void zero_invalid_rows(Mat& X, const std::vector<int>& len, int B, int L) {
    for (int b = 0; b < B; ++b)
        if (len[b] < L) X.middleRows(b * L + len[b], L - len[b]).setZero();
}

}  // namespace

struct ConvSeq2Seq::Forward {
    int B = 0, Ls = 0, Ld = 0;
    std::vector<int> src_len, dec_len;
    std::vector<int> src_ids, dec_ids;  // -1 where invalid
    std::vector<int> gold;              // scored symbol per decoder row, -1 invalid
    Mat Xe, Ue, SigE, Ze;
    Mat Xd, Ud, SigD, Sd;
    Mat Q, Alpha, Ctx, A;
    Mat P;  // softmax rows (valid rows only, others zero)
    double nll_nats = 0.0;
    std::size_t n_scored = 0;
};

ConvSeq2Seq::ConvSeq2Seq(const ModelConfig& config) : config_(config) {
    config_.validate();
    const int d = config_.embed_dim;
    const int k = config_.kernel_width;
    const int L = config_.max_seq_len;

    auto add = [&](const char* name, int rows, int cols, int fan_in) {
        Tensor t;
        t.name = name;
        t.value.setZero(rows, cols);
        if (fan_in > 0) {
            Pcg32 rng = Pcg32::from_seed(config_.seed,
                                         std::string("init:") + name);
            double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
            double* p = t.value.data();
            for (Eigen::Index i = 0; i < t.value.size(); ++i)
                p[i] = (2.0 * rng.next_double() - 1.0) * scale;
        }
        t.grad.setZero(rows, cols);
        t.adam_m.setZero(rows, cols);
        t.adam_v.setZero(rows, cols);
        tensors_.push_back(std::move(t));
    };

    add("embed_in", config_.input_vocab, d, d);
    add("pos_in", L, d, d);
    add("embed_out", config_.output_vocab, d, d);
    add("pos_out", L, d, d);
    add("w_enc", k * d, 2 * d, k * d);
    add("b_enc", 1, 2 * d, 0);
    add("w_dec", k * d, 2 * d, k * d);
    add("b_dec", 1, 2 * d, 0);
    add("w_att", d, d, d);
    add("w_out", d, config_.output_vocab, d);
    add("b_out", 1, config_.output_vocab, 0);
}

void ConvSeq2Seq::run_forward(const Batch& batch, Forward& f) const {
    if (batch.size() == 0) throw Error("empty batch");
    if (batch.inputs.size() != batch.targets.size())
        throw Error("batch inputs/targets length mismatch");

    const int d = config_.embed_dim;
    const int k = config_.kernel_width;
    const int B = static_cast<int>(batch.size());
    f.B = B;
    f.src_len.resize(B);
    f.dec_len.resize(B);
    f.Ls = 0;
    f.Ld = 0;
    for (int b = 0; b < B; ++b) {
        const auto& in = batch.inputs[b];
        const auto& tgt = batch.targets[b];
        if (in.ids.empty()) throw Error("empty input sequence");
        f.src_len[b] = static_cast<int>(in.size());
        f.dec_len[b] = static_cast<int>(tgt.size()) + 1;  // BOS shift
        f.Ls = std::max(f.Ls, f.src_len[b]);
        f.Ld = std::max(f.Ld, f.dec_len[b]);
    }
    if (f.Ls > config_.max_seq_len || f.Ld > config_.max_seq_len)
        throw Error("sequence length " + std::to_string(std::max(f.Ls, f.Ld)) +
                    " exceeds max_seq_len " +
                    std::to_string(config_.max_seq_len));

    // Token id grids; -1 marks padding slots, which are never embedded.
    f.src_ids.assign(static_cast<std::size_t>(B) * f.Ls, -1);
    f.dec_ids.assign(static_cast<std::size_t>(B) * f.Ld, -1);
    f.gold.assign(static_cast<std::size_t>(B) * f.Ld, -1);
    for (int b = 0; b < B; ++b) {
        const auto& in = batch.inputs[b].ids;
        for (int t = 0; t < f.src_len[b]; ++t) {
            int id = in[t];
            if (id < 0 || id >= config_.input_vocab)
                throw Error("input symbol id out of range");
            f.src_ids[b * f.Ls + t] = id;
        }
        const auto& tgt = batch.targets[b].ids;
        for (int t = 0; t < f.dec_len[b]; ++t) {
            int id = (t == 0) ? kBosId : tgt[t - 1];
            if (id < 0 || id >= config_.output_vocab)
                throw Error("target symbol id out of range");
            f.dec_ids[b * f.Ld + t] = id;
            int g = (t + 1 <= static_cast<int>(tgt.size())) ? tgt[t]
                                                            : kEosId;
            if (t < static_cast<int>(tgt.size()) &&
                g < kNumReserved)
                throw Error("reserved symbol in data position");
            f.gold[b * f.Ld + t] = g;
        }
    }

    const Mat& Ein = tensors_[kEmbedIn].value;
    const Mat& Pin = tensors_[kPosIn].value;
    const Mat& Eout = tensors_[kEmbedOut].value;
    const Mat& Pout = tensors_[kPosOut].value;

    // ---------- encoder ----------
    f.Xe.setZero(static_cast<Eigen::Index>(B) * f.Ls, d);
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < f.src_len[b]; ++t)
            f.Xe.row(b * f.Ls + t) =
                Ein.row(f.src_ids[b * f.Ls + t]) + Pin.row(t);

    const Mat& Wenc = tensors_[kWEnc].value;
    f.Ue = tensors_[kBEnc].value.replicate(f.Xe.rows(), 1);
    {
        Mat shifted;
        int half = k / 2;
        for (int oi = 0; oi < k; ++oi) {
            int o = oi - half;  // centered taps
            gather_shifted(f.Xe, f.src_len, B, f.Ls, o, shifted);
            f.Ue.noalias() += shifted * Wenc.middleRows(oi * d, d);
        }
    }
    f.SigE = (1.0 / (1.0 + (-f.Ue.rightCols(d).array()).exp())).matrix();
    f.Ze = f.Ue.leftCols(d).cwiseProduct(f.SigE) + f.Xe;
    zero_invalid_rows(f.Ze, f.src_len, B, f.Ls);

    // ---------- decoder convolution ----------
    f.Xd.setZero(static_cast<Eigen::Index>(B) * f.Ld, d);
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < f.dec_len[b]; ++t)
            f.Xd.row(b * f.Ld + t) =
                Eout.row(f.dec_ids[b * f.Ld + t]) + Pout.row(t);

    const Mat& Wdec = tensors_[kWDec].value;
    f.Ud = tensors_[kBDec].value.replicate(f.Xd.rows(), 1);
    {
        Mat shifted;
        for (int oi = 0; oi < k; ++oi) {
            int o = oi - (k - 1);  // causal taps: t-(k-1) .. t
            gather_shifted(f.Xd, f.dec_len, B, f.Ld, o, shifted);
            f.Ud.noalias() += shifted * Wdec.middleRows(oi * d, d);
        }
    }
    f.SigD = (1.0 / (1.0 + (-f.Ud.rightCols(d).array()).exp())).matrix();
    f.Sd = f.Ud.leftCols(d).cwiseProduct(f.SigD) + f.Xd;
    zero_invalid_rows(f.Sd, f.dec_len, B, f.Ld);

    // ---------- attention ----------
    const Mat& Watt = tensors_[kWAtt].value;
    f.Q = f.Sd * Watt;
    f.Alpha.setZero(static_cast<Eigen::Index>(B) * f.Ld, f.Ls);
    f.Ctx.setZero(static_cast<Eigen::Index>(B) * f.Ld, d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int b = 0; b < B; ++b) {
        int ls = f.src_len[b], ldn = f.dec_len[b];
        auto Zeb = f.Ze.middleRows(b * f.Ls, ls);
        auto Qb = f.Q.middleRows(b * f.Ld, ldn);
        Mat scores = Qb * Zeb.transpose() * inv_sqrt_d;  // (ldn, ls)
        for (int t = 0; t < ldn; ++t) {
            double m = scores.row(t).maxCoeff();
            Eigen::RowVectorXd e = (scores.row(t).array() - m).exp();
            f.Alpha.block(b * f.Ld + t, 0, 1, ls) = e / e.sum();
        }
        f.Ctx.middleRows(b * f.Ld, ldn).noalias() =
            f.Alpha.block(b * f.Ld, 0, ldn, ls) * Zeb;
    }
    f.A = f.Sd + f.Ctx;

    // ---------- output distribution + loss ----------
    const Mat& Wout = tensors_[kWOut].value;
    Mat logits = f.A * Wout;
    logits.rowwise() += tensors_[kBOut].value.row(0);

    f.P.setZero(logits.rows(), logits.cols());
    KahanSum nll;
    f.n_scored = 0;
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < f.dec_len[b]; ++t) {
            Eigen::Index r = b * f.Ld + t;
            double m = logits.row(r).maxCoeff();
            Eigen::RowVectorXd e = (logits.row(r).array() - m).exp();
            double z = e.sum();
            f.P.row(r) = e / z;
            nll.add(m + std::log(z) - logits(r, f.gold[r]));
            ++f.n_scored;
        }
    }
    f.nll_nats = nll.value();
    if (!std::isfinite(f.nll_nats))
        throw DivergenceError("non-finite loss in forward pass");
}

double ConvSeq2Seq::backward(const Batch&, const Forward& f) {
    const int d = config_.embed_dim;
    const int k = config_.kernel_width;
    const int B = f.B;
    // Objective: mean bits per scored symbol.
    const double scale = 1.0 / (static_cast<double>(f.n_scored) * kLn2);

    for (auto& t : tensors_) t.grad.setZero();

    // Output layer.
    Mat dLogits = f.P * scale;
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < f.dec_len[b]; ++t) {
            Eigen::Index r = b * f.Ld + t;
            dLogits(r, f.gold[r]) -= scale;
        }

    tensors_[kWOut].grad.noalias() = f.A.transpose() * dLogits;
    tensors_[kBOut].grad = dLogits.colwise().sum();
    Mat dA = dLogits * tensors_[kWOut].value.transpose();

    // Attention.
    Mat dSd = dA;  // residual branch
    Mat dQ;
    dQ.setZero(f.Q.rows(), d);
    Mat dZe;
    dZe.setZero(f.Ze.rows(), d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int b = 0; b < B; ++b) {
        int ls = f.src_len[b], ldn = f.dec_len[b];
        auto Zeb = f.Ze.middleRows(b * f.Ls, ls);
        auto Ab = f.Alpha.block(b * f.Ld, 0, ldn, ls);
        auto dCtxb = dA.middleRows(b * f.Ld, ldn);
        Mat dAlpha = dCtxb * Zeb.transpose();                  // (ldn, ls)
        dZe.middleRows(b * f.Ls, ls).noalias() += Ab.transpose() * dCtxb;
        Mat dScores(ldn, ls);
        for (int t = 0; t < ldn; ++t) {
            double dot = Ab.row(t).dot(dAlpha.row(t));
            dScores.row(t) =
                Ab.row(t).cwiseProduct(dAlpha.row(t)) - dot * Ab.row(t);
        }
        dQ.middleRows(b * f.Ld, ldn).noalias() =
            dScores * Zeb * inv_sqrt_d;
        dZe.middleRows(b * f.Ls, ls).noalias() +=
            dScores.transpose() * f.Q.middleRows(b * f.Ld, ldn) * inv_sqrt_d;
    }
    tensors_[kWAtt].grad.noalias() = f.Sd.transpose() * dQ;
    dSd.noalias() += dQ * tensors_[kWAtt].value.transpose();

    // Decoder GLU + causal convolution.
    Mat dXd = dSd;  // residual
    {
        Mat dU(f.Ud.rows(), 2 * d);
        dU.leftCols(d) = dSd.cwiseProduct(f.SigD);
        dU.rightCols(d) = dSd.cwiseProduct(f.Ud.leftCols(d))
                              .cwiseProduct(f.SigD)
                              .cwiseProduct((1.0 - f.SigD.array()).matrix());
        tensors_[kBDec].grad = dU.colwise().sum();
        Mat shifted, dXpart(dU.rows(), d);
        for (int oi = 0; oi < k; ++oi) {
            int o = oi - (k - 1);
            gather_shifted(f.Xd, f.dec_len, B, f.Ld, o, shifted);
            tensors_[kWDec].grad.middleRows(oi * d, d).noalias() =
                shifted.transpose() * dU;
            dXpart.noalias() = dU * tensors_[kWDec].value.middleRows(oi * d, d)
                                        .transpose();
            scatter_shifted(dXpart, f.dec_len, B, f.Ld, o, dXd);
        }
    }
    // Decoder embeddings.
    {
        Mat& dEout = tensors_[kEmbedOut].grad;
        Mat& dPout = tensors_[kPosOut].grad;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < f.dec_len[b]; ++t) {
                Eigen::Index r = b * f.Ld + t;
                dEout.row(f.dec_ids[r]) += dXd.row(r);
                dPout.row(t) += dXd.row(r);
            }
    }

    // Encoder GLU + centered convolution.
    Mat dXe = dZe;  // residual
    {
        Mat dU(f.Ue.rows(), 2 * d);
        dU.leftCols(d) = dZe.cwiseProduct(f.SigE);
        dU.rightCols(d) = dZe.cwiseProduct(f.Ue.leftCols(d))
                              .cwiseProduct(f.SigE)
                              .cwiseProduct((1.0 - f.SigE.array()).matrix());
        tensors_[kBEnc].grad = dU.colwise().sum();
        Mat shifted, dXpart(dU.rows(), d);
        int half = k / 2;
        for (int oi = 0; oi < k; ++oi) {
            int o = oi - half;
            gather_shifted(f.Xe, f.src_len, B, f.Ls, o, shifted);
            tensors_[kWEnc].grad.middleRows(oi * d, d).noalias() =
                shifted.transpose() * dU;
            dXpart.noalias() = dU * tensors_[kWEnc].value.middleRows(oi * d, d)
                                        .transpose();
            scatter_shifted(dXpart, f.src_len, B, f.Ls, o, dXe);
        }
    }
    // Encoder embeddings.
    {
        Mat& dEin = tensors_[kEmbedIn].grad;
        Mat& dPin = tensors_[kPosIn].grad;
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < f.src_len[b]; ++t) {
                Eigen::Index r = b * f.Ls + t;
                dEin.row(f.src_ids[r]) += dXe.row(r);
                dPin.row(t) += dXe.row(r);
            }
    }

    for (const auto& t : tensors_)
        if (!t.grad.allFinite())
            throw DivergenceError("non-finite gradient in tensor " + t.name);

    return f.nll_nats / (static_cast<double>(f.n_scored) * kLn2);
}

void ConvSeq2Seq::apply_update() {
    // Global-norm clipping, then Adam with bias correction.
    double sq = 0.0;
    for (const auto& t : tensors_) sq += t.grad.squaredNorm();
    double norm = std::sqrt(sq);
    double clip = config_.grad_clip_norm;
    double gscale = (clip > 0 && norm > clip) ? clip / norm : 1.0;

    ++step_;
    const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double lr = config_.learning_rate;
    for (auto& t : tensors_) {
        Mat g = t.grad * gscale;
        t.adam_m = b1 * t.adam_m + (1.0 - b1) * g;
        t.adam_v = b2 * t.adam_v + (1.0 - b2) * g.cwiseProduct(g);
        t.value.array() -=
            lr * (t.adam_m.array() / corr1) /
            ((t.adam_v.array() / corr2).sqrt() + config_.adam_eps);
    }
}

double ConvSeq2Seq::train_step(const Batch& batch) {
    Forward f;
    run_forward(batch, f);
    double loss = backward(batch, f);
    apply_update();
    return loss;
}

double ConvSeq2Seq::compute_gradients(const Batch& batch) {
    Forward f;
    run_forward(batch, f);
    return backward(batch, f);
}

double ConvSeq2Seq::loss_bits(const Batch& batch) const {
    Forward f;
    run_forward(batch, f);
    return f.nll_nats / (static_cast<double>(f.n_scored) * kLn2);
}

double ConvSeq2Seq::batch_codelength(const Batch& batch) const {
    Forward f;
    run_forward(batch, f);
    return f.nll_nats / kLn2;
}

Vec ConvSeq2Seq::next_symbol_logprobs(const SymbolSeq& input,
                                      const SymbolSeq& target_prefix) const {
    Batch b;
    b.inputs.push_back(input);
    b.targets.push_back(target_prefix);
    Forward f;
    run_forward(b, f);
    Eigen::Index r = static_cast<Eigen::Index>(target_prefix.size());
    return f.P.row(r).transpose().array().log().matrix();
}

Mat ConvSeq2Seq::position_logprobs(const SymbolSeq& input,
                                   const SymbolSeq& target) const {
    Batch b;
    b.inputs.push_back(input);
    b.targets.push_back(target);
    Forward f;
    run_forward(b, f);
    return f.P.array().log().matrix();
}

std::string ConvSeq2Seq::checkpoint_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["model"] = "conv_seq2seq";
    j["config"] = nlohmann::json::parse(config_.to_json());
    j["step"] = step_;
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& t : tensors_) {
        nlohmann::json entry;
        auto dump = [](const Mat& m) {
            return std::vector<double>(m.data(), m.data() + m.size());
        };
        entry["rows"] = t.value.rows();
        entry["cols"] = t.value.cols();
        entry["value"] = dump(t.value);
        entry["adam_m"] = dump(t.adam_m);
        entry["adam_v"] = dump(t.adam_v);
        tensors[t.name] = std::move(entry);
    }
    j["tensors"] = std::move(tensors);
    return j.dump();
}

std::unique_ptr<ConvSeq2Seq> ConvSeq2Seq::from_checkpoint(
    std::string_view json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    if (j.value("model", "") != "conv_seq2seq" ||
        j.value("format_version", 0) != 1)
        throw ParseError("checkpoint: unsupported model or version");
    auto cfg = ModelConfig::from_json_text(j.at("config").dump());
    auto model = std::make_unique<ConvSeq2Seq>(cfg);
    model->step_ = j.at("step").get<std::int64_t>();
    for (auto& t : model->tensors_) {
        const auto& entry = j.at("tensors").at(t.name);
        auto load = [&](const char* key, Mat& m) {
            auto vals = entry.at(key).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(vals.size()) != m.size())
                throw ParseError("checkpoint: tensor size mismatch for " +
                                 t.name);
            std::copy(vals.begin(), vals.end(), m.data());
        };
        load("value", t.value);
        load("adam_m", t.adam_m);
        load("adam_v", t.adam_v);
    }
    return model;
}

}  // namespace opacity
