#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vidcont/core/config.hpp"
#include "vidcont/core/image.hpp"
#include "vidcont/nn/optim.hpp"
#include "vidcont/nn/tensor.hpp"
#include "vidcont/tokenizer/lfq.hpp"

namespace vidcont::tok {

struct TokenizerConfig {
    int image_size = 64;
    int downsample_factor = 8;          // power of two; one conv stage per octave
    int bits_k = 10;                    // even, 4..18
    std::vector<int> channels = {32, 64, 96};  // stage widths, innermost last
    double w_rec = 1.0;
    double w_commit = 0.25;
    double w_entropy = 0.1;
    int epochs = 10;
    int steps_per_epoch = 120;
    int batch_size = 8;
    double lr = 1e-3;
    uint64_t seed = 0;
    double sem_fraction = 0.35;  // share of semantic renders in training draws

    int grid() const { return image_size / downsample_factor; }
    int64_t vocab() const { return int64_t{1} << bits_k; }
    int sub_vocab() const { return 1 << (bits_k / 2); }
    int stages() const;
    void validate() const;

    static TokenizerConfig from_config(const Config &cfg, const std::string &prefix = "tokenizer.");
    std::string to_text() const;
    static TokenizerConfig from_text(const std::string &text);
};

// Convolutional encoder/decoder around the lookup-free quantizer. Inference
// (encode/quantize/decode) is const and thread-safe; training mutates weights
// through the exposed parameter set.
class Tokenizer {
public:
    explicit Tokenizer(const TokenizerConfig &cfg);

    const TokenizerConfig &config() const { return cfg_; }

    // frame scaled to [-1,1]; returns the pre-quantization latent [K,h',w'].
    nn::Tensor encode(const Image &frame) const;
    nn::Tensor encode_tensor(const nn::Tensor &x) const;  // [N,3,H,W] -> [N,K,h',w']
    // Encoder features after `stage` stride-2 stages (flow-warp reference path).
    nn::Tensor encode_stage_features(const nn::Tensor &x, int stage) const;

    // sign quantization; returns ids and the +-1 code latent
    std::pair<TokenGrid, nn::Tensor> quantize(const nn::Tensor &latent) const;

    Image decode(const TokenGrid &ids) const;
    // decoder over batched code tensors [N,K,h',w'] -> [N,3,H,W]
    nn::Tensor decode_tensor(const nn::Tensor &codes) const;
    // decoder with an extra feature map added into the first decoder stage
    // (flow-warp path; `extra` is [N,C_warp,h',w'] passed through a learned
    // projection that starts at zero)
    nn::Tensor decode_tensor_with_extra(const nn::Tensor &codes, const nn::Tensor &extra) const;

    Image reconstruct(const Image &frame) const;  // decode(quantize(encode(x)))

    nn::ParamSet encoder_params();
    nn::ParamSet decoder_params();
    nn::ParamSet params();

    uint64_t encoder_hash() const;  // over encoder weight bytes

    void save(const std::string &path) const;
    static Tokenizer load(const std::string &path);
    // Load from an already-parsed container (shared with flow-warp weights).
    static Tokenizer from_checkpoint(const struct ::vidcont::Checkpoint &ck);
    void add_arrays(struct ::vidcont::Checkpoint &ck) const;

    // channel count of decoder stage-0 features (what the warp branch joins)
    int decoder_stage_channels() const { return cfg_.channels.back(); }
    int encoder_stage_channels(int stage) const;

private:
    friend struct TokenizerTrainer;

    struct Conv {
        nn::Tensor w, b;
    };
    struct Norm {
        nn::Tensor gamma, beta;
    };
    struct ResBlock {
        Norm n1;
        Conv c1;
        Norm n2;
        Conv c2;
    };

    nn::Tensor res_forward(const ResBlock &rb, const nn::Tensor &x) const;

    TokenizerConfig cfg_;
    // encoder: stem conv, per-stage downsampling conv (+res on inner stages),
    // head norm + conv to K channels
    Conv enc_stem_;
    std::vector<Conv> enc_down_;
    std::vector<ResBlock> enc_res_;  // stages with resolution <= image/4
    Norm enc_head_norm_;
    Conv enc_head_;
    // decoder mirror: in conv, res, per-stage upsample conv, final conv
    Conv dec_in_;
    std::vector<ResBlock> dec_res_;
    std::vector<Conv> dec_up_;
    Norm dec_head_norm_;
    Conv dec_head_;
    // zero-initialized projection for warped reference features
    Conv dec_extra_;
};

// Training statistics, one row per epoch.
struct TokenizerTrainLog {
    struct Row {
        int epoch;
        double total, rec_l2, rec_l1, commit, entropy, usage_entropy;
    };
    std::vector<Row> rows;
    std::vector<int64_t> code_histogram;  // usage counts over the full vocab
    std::string csv() const;
};

// Per-batch LFQ entropy regularizer value pieces (also used by tests):
// minimize per-cell code entropy, maximize batch usage entropy (nats).
nn::Tensor lfq_entropy_loss(const nn::Tensor &latent_nchw, double &usage_entropy_out);

TokenizerTrainLog train_tokenizer(Tokenizer &tokenizer, const std::vector<Image> &frames,
                                  std::ostream *progress = nullptr);

}  // namespace vidcont::tok
