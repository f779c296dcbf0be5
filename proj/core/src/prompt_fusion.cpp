#include "tgdfer/prompt_fusion.hpp"

#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace {

constexpr double kInitStd = 0.02;

Tensor encode_rows(const FrozenTextEncoder& encoder, const std::vector<TokenSequence>& tokens, const Tensor& context) {
    std::vector<Tensor> rows;
    rows.reserve(tokens.size());
    for (const auto& seq : tokens) rows.push_back(encoder.encode(seq, context));
    return concat_rows(rows);
}

}  // namespace

std::string to_string(PromptSource source) { return source == PromptSource::class_name ? "class" : "descriptor"; }

std::string to_string(VisualPromptMode mode) {
    switch (mode) {
        case VisualPromptMode::none: return "none";
        case VisualPromptMode::add: return "add";
        case VisualPromptMode::prepend: return "prepend";
    }
    return "none";
}

PromptSource parse_prompt_source(const std::string& text) {
    if (text == "class") return PromptSource::class_name;
    if (text == "descriptor") return PromptSource::descriptor;
    throw ConfigError("unknown prompt source '" + text + "' (expected class or descriptor)");
}

VisualPromptMode parse_visual_prompt_mode(const std::string& text) {
    if (text == "none") return VisualPromptMode::none;
    if (text == "add") return VisualPromptMode::add;
    if (text == "prepend") return VisualPromptMode::prepend;
    throw ConfigError("invalid visual prompt mode '" + text + "' (expected none, add or prepend)");
}

LabelFusionMlp LabelFusionMlp::init(Rng& rng, std::size_t dim, std::size_t mult, Activation activation) {
    LabelFusionMlp m;
    m.w1 = truncated_normal_tensor(rng, {dim, dim * mult}, kInitStd, true);
    m.b1 = Tensor::zeros({dim * mult}, true);
    m.w2 = Tensor::zeros({dim * mult, dim}, true);
    m.b2 = Tensor::zeros({dim}, true);
    m.activation = activation;
    return m;
}

Tensor LabelFusionMlp::apply(const Tensor& x) const {
    Tensor h = activate(add_bias(matmul(x, w1), b1), activation);
    return add_bias(matmul(h, w2), b2);
}

void LabelFusionMlp::register_into(ParameterSet& params, const std::string& prefix, ParamGroup group) const {
    params.add(prefix + ".w1", w1, group);
    params.add(prefix + ".b1", b1, group);
    params.add(prefix + ".w2", w2, group);
    params.add(prefix + ".b2", b2, group);
}

LabelEmbeddings embed_labels(const PromptSet& prompts, const FrozenTextEncoder& encoder) {
    return {encode_rows(encoder, prompts.fine_tokens, prompts.context), encode_rows(encoder, prompts.coarse_tokens, {})};
}

Tensor alignment_scores(const Tensor& x_instance, const Tensor& x_fp, double tau) {
    if (!(tau > 0.0)) throw ConfigError("alignment temperature must be positive");
    return scale(cosine_rows(x_instance, x_fp), 1.0 / tau);
}

Tensor visual_prompt_weights(const Tensor& alignment) { return softmax(alignment, 0); }

Tensor visual_prompt(const Tensor& alignment, const Tensor& x_instance) {
    if (alignment.rank() != 2 || x_instance.rank() != 2 || alignment.dim(0) != x_instance.dim(0)) {
        throw ShapeError("visual_prompt: alignment " + shape_to_string(alignment.shape()) + " does not match frames " +
                         shape_to_string(x_instance.shape()));
    }
    return matmul(transpose(visual_prompt_weights(alignment)), x_instance);
}

PromptFusion::PromptFusion(PromptConfig config, std::shared_ptr<const FrozenTextEncoder> encoder,
                           const std::vector<std::string>& class_names, const std::vector<std::string>& descriptors,
                           Rng& rng)
    : encoder_(std::move(encoder)) {
    if (!encoder_) throw ConfigError("prompt fusion needs a text encoder");
    if (class_names.empty() || class_names.size() != descriptors.size()) {
        throw ConfigError("prompt fusion needs one descriptor per class");
    }
    if (config.learnable_context && config.context_length == 0) {
        throw ConfigError("learnable context needs at least one context token");
    }
    if (config.visual_prompt == VisualPromptMode::prepend && encoder_->token_dim() != encoder_->output_dim()) {
        throw ConfigError("prepend mode needs the encoder token width to equal the feature width");
    }
    const Tokenizer tokenizer(encoder_->config().vocab_size);
    prompts_.config = config;
    for (std::size_t k = 0; k < class_names.size(); ++k) {
        const auto& fine_text = config.source == PromptSource::descriptor ? descriptors[k] : class_names[k];
        prompts_.fine_tokens.push_back(tokenizer.tokenize(fine_text));
        prompts_.coarse_tokens.push_back(tokenizer.tokenize(class_names[k]));
    }
    if (config.learnable_context) {
        prompts_.context = truncated_normal_tensor(rng, {config.context_length, encoder_->token_dim()}, kInitStd, true);
    }
    mlp_ = LabelFusionMlp::init(rng, encoder_->output_dim(), config.mlp_mult, config.activation);

    cached_x_cp_ = encode_rows(*encoder_, prompts_.coarse_tokens, {});
    if (!config.learnable_context) cached_x_fp_ = encode_rows(*encoder_, prompts_.fine_tokens, {});
}

LabelEmbeddings PromptFusion::embed_labels() const {
    Tensor x_fp = cached_x_fp_.defined() ? cached_x_fp_ : encode_rows(*encoder_, prompts_.fine_tokens, prompts_.context);
    return {x_fp, cached_x_cp_};
}

EnhancedLabelMatrix PromptFusion::enhance_labels(const Tensor& x_fp, const Tensor& x_cp, const Tensor& v_p) const {
    EnhancedLabelMatrix out;
    out.v_p = v_p;
    switch (prompts_.config.visual_prompt) {
        case VisualPromptMode::none:
            out.x_hat = x_fp;
            break;
        case VisualPromptMode::add:
            if (!v_p.defined()) throw ConfigError("add mode needs a visual prompt");
            out.x_hat = add(x_fp, v_p);
            break;
        case VisualPromptMode::prepend: {
            if (!v_p.defined()) throw ConfigError("prepend mode needs a visual prompt");
            std::vector<Tensor> rows;
            for (std::size_t k = 0; k < class_count(); ++k) {
                Tensor token = reshape(slice_rows(v_p, k, 1), {v_p.dim(1)});
                rows.push_back(encoder_->encode(prompts_.fine_tokens[k], prompts_.context, token));
            }
            out.x_hat = concat_rows(rows);
            break;
        }
    }
    out.x_tilde = add(mlp_.apply(out.x_hat), x_cp);
    return out;
}

EnhancedLabelMatrix PromptFusion::forward(const Tensor& x_instance, double tau_a) const {
    const auto labels = embed_labels();
    if (prompts_.config.visual_prompt == VisualPromptMode::none) return enhance_labels(labels.x_fp, labels.x_cp, {});
    Tensor alignment = alignment_scores(x_instance, labels.x_fp, tau_a);
    // Frames enter the weighted sum at unit norm, the scale of the text side.
    auto out = enhance_labels(labels.x_fp, labels.x_cp, visual_prompt(alignment, l2_normalize(x_instance)));
    out.alignment = alignment;
    return out;
}

void PromptFusion::register_parameters(ParameterSet& params) const {
    if (prompts_.context.defined()) params.add("prompts.context", prompts_.context, ParamGroup::prompts);
    mlp_.register_into(params, "head.label_mlp", ParamGroup::head);
}

}  // namespace tgdfer
