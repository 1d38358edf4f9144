#include <algorithm>
#include <cmath>

#include "cli/commands.hpp"

namespace stpdft::cli {

namespace {

Mat random_matrix(SplitMix64& rng, std::size_t r, std::size_t c, double scale) {
    Mat m(r, c);
    for (auto& v : m.data()) v = rng.uniform(-scale, scale);
    return m;
}

HyperVec random_like(SplitMix64& rng, const Dims& dims, double scale) {
    std::vector<Vec> comps;
    for (auto d : dims) {
        Vec v(d);
        for (auto& e : v) e = rng.uniform(-scale, scale);
        comps.push_back(std::move(v));
    }
    return HyperVec(std::move(comps));
}

}  // namespace

HyperVec random_batch(SplitMix64& rng, std::size_t s, std::size_t dim_lo, std::size_t dim_hi) {
    if (s == 0 || dim_lo == 0 || dim_lo > dim_hi) {
        throw SchemaError("random batch needs batch size >= 1 and 1 <= lo <= hi for the dimension range");
    }
    Dims dims;
    for (std::size_t i = 0; i < s; ++i)
        dims.push_back(static_cast<std::size_t>(
            rng.integer(static_cast<std::int64_t>(dim_lo), static_cast<std::int64_t>(dim_hi))));
    return random_like(rng, dims, 1.0);
}

WeightsFile random_weights(SplitMix64& rng, const ModelConfig& cfg, const Dims& dims) {
    WeightsFile out{cfg, {}};
    const std::size_t s = cfg.batch_size;
    const std::size_t wn = cfg.qkv_convention == WeightConvention::feature ? cfg.nominal_dim : s;
    const double wscale = 1.0 / std::sqrt(static_cast<double>(wn));
    const double fscale = 1.0 / std::sqrt(static_cast<double>(s));
    for (std::size_t l = 0; l < std::max<std::size_t>(cfg.layers, 1); ++l) {
        BlockWeights b;
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            HeadWeights hw{random_matrix(rng, wn, wn, wscale), random_matrix(rng, wn, wn, wscale),
                           random_matrix(rng, wn, wn, wscale)};
            b.heads.push_back(std::move(hw));
        }
        b.ffn.w1 = random_matrix(rng, s, s, fscale);
        b.ffn.w2 = random_matrix(rng, s, s, fscale);
        b.ffn.b1 = random_like(rng, dims, 0.1);
        b.ffn.b2 = random_like(rng, dims, 0.1);
        out.blocks.push_back(std::move(b));
    }
    return out;
}

json forward(const ForwardOptions& opts) {
    SplitMix64 rng(opts.seed);
    const HyperVec x = opts.batch_path ? batch_from_json(parse_json_file(*opts.batch_path), "")
                                       : random_batch(rng, opts.batch_size, opts.dim_lo, opts.dim_hi);
    WeightsFile w;
    if (opts.weights_path) {
        w = weights_from_json(parse_json_file(*opts.weights_path));
    } else {
        ModelConfig cfg;
        cfg.batch_size = x.size();
        cfg.nominal_dim = opts.nominal.value_or(x.max_dim());
        cfg.heads = opts.heads;
        cfg.layers = opts.layers.value_or(1);
        if (opts.padding) cfg.padding = *opts.padding;
        w = random_weights(rng, cfg, x.dims());
    }
    ModelConfig& cfg = w.config;
    if (opts.padding) cfg.padding = *opts.padding;
    if (opts.scale) cfg.scale = *opts.scale;
    if (opts.mask) cfg.mask = *opts.mask;
    if (opts.layers) cfg.layers = *opts.layers;
    if (cfg.batch_size != x.size()) {
        throw ShapeError("batch has " + std::to_string(x.size()) + " sequences " + dims_str(x.dims()) +
                         " but the weights are for batch size " + std::to_string(cfg.batch_size));
    }

    ForwardTrace trace;
    const HyperVec y = encoder_stack(x, w.blocks, cfg, &trace);

    json attention = json::array();
    for (const auto& layer : trace.attention) {
        json heads = json::array();
        for (const auto& a : layer) {
            if (!is_stochastic_matrix(a.transpose(), 1e-9)) {
                throw std::logic_error("attention matrix rows are not stochastic");
            }
            heads.push_back(matrix_rows_json(a));
        }
        attention.push_back(std::move(heads));
    }
    return json{{"seed", opts.seed},
                {"config", config_to_json(cfg)},
                {"input", batch_to_json(x)},
                {"output", batch_to_json(y)},
                {"attention", std::move(attention)}};
}

}  // namespace stpdft::cli
