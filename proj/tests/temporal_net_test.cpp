#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "tgdfer/autograd.hpp"
#include "tgdfer/errors.hpp"
#include "tgdfer/gradcheck.hpp"
#include "tgdfer/temporal_net.hpp"

using namespace tgdfer;
using tgdfer::testing::random_matrix;

namespace {

void set_values(const Tensor& t, const std::vector<double>& values) {
    Tensor handle = t;
    auto dst = handle.mutable_values();
    ASSERT_EQ(dst.size(), values.size());
    std::copy(values.begin(), values.end(), dst.begin());
}

void randomize(const Tensor& t, Rng& rng, double stddev) {
    std::normal_distribution<double> g(0.0, stddev);
    Tensor handle = t;
    for (auto& v : handle.mutable_values()) v = g(rng);
}

void randomize_layer(const EncoderLayerParams& p, Rng& rng) {
    for (const Tensor* t : {&p.wq, &p.bq, &p.wk, &p.bk, &p.wv, &p.bv, &p.wo, &p.bo, &p.w1, &p.b1, &p.w2, &p.b2,
                            &p.ln1_bias, &p.ln2_bias})
        randomize(*t, rng, 0.3);
}

void expect_close(const Tensor& a, const Tensor& b, double tol) {
    ASSERT_EQ(a.shape(), b.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a.at(i), b.at(i), tol) << "element " << i;
}

TemporalNetConfig small_config(std::size_t dim, std::size_t window, std::size_t stride, std::size_t fine,
                               std::size_t coarse) {
    TemporalNetConfig c;
    c.dim = dim;
    c.segmentation = {window, stride, true};
    c.fine_depth = fine;
    c.coarse_depth = coarse;
    c.heads = 2;
    c.max_frames = 32;
    return c;
}

}  // namespace

TEST(Segmentation, SixteenFramesWindowFourStrideOne) {
    const auto starts = segment_starts(16, {4, 1, true});
    ASSERT_EQ(starts.size(), 13u);
    for (std::size_t i = 0; i < 13; ++i) EXPECT_EQ(starts[i], i);
    for (auto c : coverage_counts(16, {4, 1, true})) EXPECT_GE(c, 1u);
}

TEST(Segmentation, WindowEqualsBag) {
    for (std::size_t s = 1; s <= 16; ++s) EXPECT_EQ(segment_starts(16, {16, s, true}).size(), 1u);
}

TEST(Segmentation, StrideThreeNeedsNoTail) {
    EXPECT_EQ(segment_starts(16, {4, 3, true}), (std::vector<std::size_t>{0, 3, 6, 9, 12}));
    EXPECT_EQ(segment_starts(16, {4, 3, false}), (std::vector<std::size_t>{0, 3, 6, 9, 12}));
}

TEST(Segmentation, TailWindowAppended) {
    EXPECT_EQ(segment_starts(17, {4, 3, false}), (std::vector<std::size_t>{0, 3, 6, 9, 12}));
    EXPECT_EQ(segment_starts(17, {4, 3, true}), (std::vector<std::size_t>{0, 3, 6, 9, 12, 13}));
}

TEST(Segmentation, Errors) {
    EXPECT_THROW(segment_starts(3, {4, 1, true}), ShapeError);
    EXPECT_THROW(segment_starts(8, {2, 3, true}), ConfigError);
    EXPECT_THROW(segment_starts(8, {2, 0, true}), ConfigError);
    try {
        segment_starts(3, {4, 1, true});
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("larger than the bag"), std::string::npos);
    }
}

TEST(Segmentation, CountMatchesBruteForceEnumeration) {
    for (std::size_t t = 1; t <= 32; ++t) {
        for (std::size_t w = 1; w <= t; ++w) {
            for (std::size_t s = 1; s <= w; ++s) {
                std::vector<std::size_t> brute;
                for (std::size_t start = 0; start + w <= t; start += s) brute.push_back(start);
                EXPECT_EQ(segment_starts(t, {w, s, false}), brute) << t << "/" << w << "/" << s;

                std::vector<int> covered(t, 0);
                for (auto start : segment_starts(t, {w, s, true}))
                    for (std::size_t i = start; i < start + w; ++i) covered[i] = 1;
                EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](int c) { return c == 1; }))
                    << t << "/" << w << "/" << s;
            }
        }
    }
}

TEST(Segmentation, SegmentSlicesRows) {
    Rng rng = make_rng(1);
    const auto x = random_matrix(rng, 7, 3);
    const auto seg = segment(x, {3, 2, true});
    ASSERT_EQ(seg.starts, (std::vector<std::size_t>{0, 2, 4}));
    for (std::size_t i = 0; i < seg.windows.size(); ++i)
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(seg.windows[i].at(r, c), x.at(seg.starts[i] + r, c));
}

TEST(EncoderLayer, IdentityAtInit) {
    Rng rng = make_rng(2);
    const auto layer = EncoderLayerParams::init(rng, 8);
    const auto x = random_matrix(rng, 5, 8);
    const auto y = encoder_layer(x, layer, {2, Activation::gelu}, 5);
    for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.at(i), x.at(i));
}

TEST(EncoderLayer, HeadsMustDivideWidth) {
    Rng rng = make_rng(2);
    const auto layer = EncoderLayerParams::init(rng, 6);
    EXPECT_THROW(encoder_layer(random_matrix(rng, 3, 6), layer, {4, Activation::gelu}, 3), ConfigError);
}

TEST(EncoderLayer, PermutationEquivariant) {
    Rng rng = make_rng(3);
    const auto layer = EncoderLayerParams::init(rng, 8);
    randomize_layer(layer, rng);
    const auto x = random_matrix(rng, 6, 8);
    const std::vector<std::size_t> perm{4, 0, 5, 2, 1, 3};
    for (auto act : {Activation::gelu, Activation::relu}) {
        const auto y = encoder_layer(x, layer, {4, act}, 6);
        const auto y_perm = encoder_layer(gather_rows(x, perm), layer, {4, act}, 6);
        expect_close(y_perm, gather_rows(y, perm), 1e-12);
    }
}

TEST(FineBranch, SingleWindowMatchesWholeSequenceEncoder) {
    Rng rng = make_rng(4);
    TemporalNet net(small_config(8, 6, 6, 1, 1), rng);
    randomize_layer(net.fine_layers()[0], rng);
    const auto x = random_matrix(rng, 6, 8);
    const auto expected =
        encoder_stack(add(x, net.fine_positional()), net.fine_layers(), {2, Activation::gelu}, 6);
    expect_close(net.fine_forward(x), expected, 1e-12);
}

TEST(FineBranch, CoverageCountsForOverlappingPairs) {
    EXPECT_EQ(coverage_counts(4, {2, 1, true}), (std::vector<std::size_t>{1, 2, 2, 1}));
}

TEST(FineBranch, IdentityLayersAverageThePositionalTable) {
    Rng rng = make_rng(5);
    TemporalNet net(small_config(4, 2, 1, 1, 1), rng);
    randomize(net.fine_positional(), rng, 1.0);
    const auto x = random_matrix(rng, 4, 4);
    const auto out = net.fine_forward(x);
    const auto& p = net.fine_positional();
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_NEAR(out.at(0, c), x.at(0, c) + p.at(0, c), 1e-15);
        EXPECT_NEAR(out.at(1, c), x.at(1, c) + 0.5 * (p.at(1, c) + p.at(0, c)), 1e-15);
        EXPECT_NEAR(out.at(2, c), x.at(2, c) + 0.5 * (p.at(1, c) + p.at(0, c)), 1e-15);
        EXPECT_NEAR(out.at(3, c), x.at(3, c) + p.at(1, c), 1e-15);
    }
}

TEST(FineBranch, ScatterAverageConservesWindowSums) {
    Rng rng = make_rng(6);
    TemporalNet net(small_config(8, 4, 3, 1, 1), rng);
    randomize_layer(net.fine_layers()[0], rng);
    const std::size_t frames = 11;
    const auto x = random_matrix(rng, frames, 8);
    const auto fine = net.fine_forward(x);
    const auto counts = coverage_counts(frames, net.config().segmentation);
    std::vector<double> lhs(8, 0.0), rhs(8, 0.0);
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t c = 0; c < 8; ++c) lhs[c] += static_cast<double>(counts[t]) * fine.at(t, c);
    for (auto start : segment_starts(frames, net.config().segmentation)) {
        const auto w = encoder_stack(add(slice_rows(x, start, 4), net.fine_positional()), net.fine_layers(),
                                     {2, Activation::gelu}, 4);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 8; ++c) rhs[c] += w.at(r, c);
    }
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(lhs[c], rhs[c], 1e-12);
}

TEST(CoarseBranch, ZeroDepthAddsPositional) {
    Rng rng = make_rng(7);
    TemporalNet net(small_config(4, 2, 1, 1, 0), rng);
    const auto x = random_matrix(rng, 5, 4);
    const auto out = net.coarse_forward(x);
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t c = 0; c < 4; ++c)
            EXPECT_EQ(out.at(t, c), x.at(t, c) + net.coarse_positional().at(t, c));
}

TEST(CoarseBranch, IdentityLayersDifferByPositional) {
    Rng rng = make_rng(8);
    TemporalNet net(small_config(4, 2, 1, 1, 2), rng);
    const auto x = random_matrix(rng, 6, 4);
    const auto out = net.coarse_forward(x);
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t c = 0; c < 4; ++c)
            EXPECT_NEAR(out.at(t, c) - x.at(t, c), net.coarse_positional().at(t, c), 1e-15);
}

TEST(CoarseBranch, ShapeSweepAndLengthLimit) {
    Rng rng = make_rng(9);
    TemporalNet net(small_config(4, 1, 1, 1, 1), rng);
    randomize_layer(net.coarse_layers()[0], rng);
    for (std::size_t t : {1u, 5u, 16u}) {
        const auto out = net.forward(random_matrix(rng, t, 4));
        EXPECT_EQ(out.x_fine.shape(), (Shape{t, 4}));
        EXPECT_EQ(out.x_coarse.shape(), (Shape{t, 4}));
        EXPECT_EQ(out.x_instance.shape(), (Shape{t, 4}));
    }
    EXPECT_THROW(net.coarse_forward(random_matrix(rng, 33, 4)), ShapeError);
}

TEST(Fusion, SelectsEitherBranch) {
    Rng rng = make_rng(10);
    TemporalNet net(small_config(2, 2, 1, 1, 1), rng);
    const auto a = random_matrix(rng, 4, 2), b = random_matrix(rng, 4, 2);
    std::vector<double> take_fine(8, 0.0), take_coarse(8, 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
        take_fine[i * 2 + i] = 1.0;
        take_coarse[(2 + i) * 2 + i] = 1.0;
    }
    set_values(net.fusion_weight(), take_fine);
    expect_close(net.fuse(a, b), a, 0.0);
    set_values(net.fusion_weight(), take_coarse);
    expect_close(net.fuse(a, b), b, 0.0);
}

TEST(Fusion, BlockMatrixIdentity) {
    Rng rng = make_rng(11);
    TemporalNet net(small_config(4, 2, 1, 1, 1), rng);
    randomize(net.fusion_weight(), rng, 1.0);
    randomize(net.fusion_bias(), rng, 1.0);
    const auto a = random_matrix(rng, 5, 4), b = random_matrix(rng, 5, 4);
    const auto w1 = slice_rows(net.fusion_weight(), 0, 4), w2 = slice_rows(net.fusion_weight(), 4, 4);
    expect_close(net.fuse(a, b), add_bias(add(matmul(a, w1), matmul(b, w2)), net.fusion_bias()), 1e-12);
    EXPECT_THROW(net.fuse(a, random_matrix(rng, 4, 4)), ShapeError);
}

TEST(Ablation, DisabledFineBranchIgnoresWindowConfig) {
    Rng rng_a = make_rng(12), rng_b = make_rng(13);
    TemporalNet a(small_config(4, 2, 1, 0, 1), rng_a);
    TemporalNet b(small_config(4, 5, 2, 0, 1), rng_b);
    Rng rng = make_rng(14);
    randomize_layer(a.coarse_layers()[0], rng);
    auto copy = [](const Tensor& from, const Tensor& to) {
        set_values(to, std::vector<double>(from.values().begin(), from.values().end()));
    };
    copy(a.coarse_positional(), b.coarse_positional());
    for (auto [from, to] : {std::pair{&a.coarse_layers()[0], &b.coarse_layers()[0]}}) {
        for (auto member : {&EncoderLayerParams::ln1_gain, &EncoderLayerParams::ln1_bias, &EncoderLayerParams::wq,
                            &EncoderLayerParams::bq, &EncoderLayerParams::wk, &EncoderLayerParams::bk,
                            &EncoderLayerParams::wv, &EncoderLayerParams::bv, &EncoderLayerParams::wo,
                            &EncoderLayerParams::bo, &EncoderLayerParams::ln2_gain, &EncoderLayerParams::ln2_bias,
                            &EncoderLayerParams::w1, &EncoderLayerParams::b1, &EncoderLayerParams::w2,
                            &EncoderLayerParams::b2})
            copy(from->*member, to->*member);
    }
    randomize(a.fusion_weight(), rng, 1.0);
    std::vector<double> w(a.fusion_weight().values().begin(), a.fusion_weight().values().end());
    std::fill(w.begin(), w.begin() + 16, 0.0);  // fine block
    set_values(a.fusion_weight(), w);
    set_values(b.fusion_weight(), w);
    const auto x = random_matrix(rng, 10, 4);
    expect_close(a.forward(x).x_instance, b.forward(x).x_instance, 0.0);
}

TEST(TemporalGradients, FineAndFusionMatchFiniteDifferences) {
    Rng rng = make_rng(15);
    TemporalNet net(small_config(8, 3, 1, 1, 1), rng);
    ParameterSet params;
    net.register_parameters(params);
    for (const auto& p : params) randomize(p.tensor, rng, p.name.ends_with("gain") ? 0.2 : 0.3);
    for (const auto& p : params) {
        if (!p.name.ends_with("gain")) continue;
        Tensor h = p.tensor;
        for (auto& v : h.mutable_values()) v += 1.0;
    }
    const auto x = random_matrix(rng, 6, 8);
    const auto probe = random_matrix(rng, 6, 8);
    const auto coarse = random_matrix(rng, 6, 8);
    ParameterSet fine_and_fusion;
    for (const auto& p : params)
        if (!p.name.starts_with("temporal.coarse")) fine_and_fusion.add(p.name, p.tensor, p.group);
    const auto report = check_gradients([&] { return sum(mul(net.fuse(net.fine_forward(x), coarse), probe)); },
                                        fine_and_fusion);
    for (const auto& e : report.entries) EXPECT_LT(e.relative_error, 1e-4) << e.name;
}

TEST(TemporalNet, RegistersEveryTensor) {
    Rng rng = make_rng(16);
    TemporalNet net(small_config(8, 4, 1, 2, 1), rng);
    ParameterSet params;
    net.register_parameters(params);
    EXPECT_EQ(params.size(), 3u * 16u + 4u);
    EXPECT_TRUE(params.contains("temporal.fine.1.attn.wq"));
    for (const auto& p : params) EXPECT_EQ(p.group, ParamGroup::temporal);
}
