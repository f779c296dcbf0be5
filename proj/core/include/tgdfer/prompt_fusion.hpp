#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tgdfer/encoders.hpp"
#include "tgdfer/ops.hpp"
#include "tgdfer/optim.hpp"
#include "tgdfer/random.hpp"
#include "tgdfer/tokenizer.hpp"

namespace tgdfer {

// Which text feeds the fine-grained prompt: the bare class name or the
// facial-movement descriptor.
enum class PromptSource { class_name, descriptor };
enum class VisualPromptMode { none, add, prepend };

std::string to_string(PromptSource source);
std::string to_string(VisualPromptMode mode);
PromptSource parse_prompt_source(const std::string& text);
VisualPromptMode parse_visual_prompt_mode(const std::string& text);

struct PromptConfig {
    PromptSource source = PromptSource::descriptor;
    bool learnable_context = true;
    std::size_t context_length = 8;  // shared across classes
    VisualPromptMode visual_prompt = VisualPromptMode::prepend;
    Activation activation = Activation::gelu;
    std::size_t mlp_mult = 4;
};

struct PromptSet {
    std::vector<TokenSequence> fine_tokens;    // one per class
    std::vector<TokenSequence> coarse_tokens;  // one per class (class name)
    Tensor context;                            // [M×token_dim], defined iff learnable_context
    PromptConfig config;

    std::size_t class_count() const { return fine_tokens.size(); }
};

struct LabelEmbeddings {
    Tensor x_fp;  // [C×d] fine prompts through the frozen text encoder
    Tensor x_cp;  // [C×d] class names through the frozen text encoder
};

// Two affine maps with an activation in between, d -> mult·d -> d.
struct LabelFusionMlp {
    Tensor w1, b1, w2, b2;
    Activation activation = Activation::gelu;

    static LabelFusionMlp init(Rng& rng, std::size_t dim, std::size_t mult, Activation activation);
    Tensor apply(const Tensor& x) const;
    void register_into(ParameterSet& params, const std::string& prefix, ParamGroup group) const;
};

struct EnhancedLabelMatrix {
    Tensor alignment;  // [T×C], undefined when the visual prompt is off
    Tensor v_p;        // [C×d], undefined when the visual prompt is off
    Tensor x_hat;      // [C×d]
    Tensor x_tilde;    // [C×d]
};

LabelEmbeddings embed_labels(const PromptSet& prompts, const FrozenTextEncoder& encoder);

// A[t,k] = cos(x_instance[t], x_fp[k]) / tau.
Tensor alignment_scores(const Tensor& x_instance, const Tensor& x_fp, double tau);
// Softmax of A over the frame axis; column k holds class k's frame weights.
Tensor visual_prompt_weights(const Tensor& alignment);
// v_p[k] = sum_t weights[t,k] · x_instance[t].
Tensor visual_prompt(const Tensor& alignment, const Tensor& x_instance);

class PromptFusion {
public:
    PromptFusion(PromptConfig config, std::shared_ptr<const FrozenTextEncoder> encoder,
                 const std::vector<std::string>& class_names, const std::vector<std::string>& descriptors,
                 Rng& rng);

    LabelEmbeddings embed_labels() const;
    // x_hat per the visual-prompt mode, then x_tilde = MLP(x_hat) + x_cp.
    EnhancedLabelMatrix enhance_labels(const Tensor& x_fp, const Tensor& x_cp, const Tensor& v_p) const;
    EnhancedLabelMatrix forward(const Tensor& x_instance, double tau_a) const;

    void register_parameters(ParameterSet& params) const;

    const PromptSet& prompts() const { return prompts_; }
    const PromptConfig& config() const { return prompts_.config; }
    const LabelFusionMlp& mlp() const { return mlp_; }
    const FrozenTextEncoder& encoder() const { return *encoder_; }
    std::size_t class_count() const { return prompts_.class_count(); }

private:
    std::shared_ptr<const FrozenTextEncoder> encoder_;
    PromptSet prompts_;
    LabelFusionMlp mlp_;
    Tensor cached_x_cp_;
    Tensor cached_x_fp_;  // only when the context is not learnable
};

}  // namespace tgdfer
