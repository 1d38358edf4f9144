#include "cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace stpdft::cli {

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const SchemaError*>(&e)) return exit_schema;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::shape:
            case ErrorKind::size_budget: return exit_shape;
            case ErrorKind::invalid_argument:
            case ErrorKind::non_factorizable:
            case ErrorKind::degenerate_row:
            case ErrorKind::non_finite: return exit_schema;
        }
    }
    return exit_internal;
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                          e.what() + ")");
    }
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path);
}

namespace {

[[noreturn]] void field_error(const std::string& where, const std::string& msg) {
    throw SchemaError("field " + where + ": " + msg);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) field_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) field_error(where + "/" + key, "missing");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) field_error(where, "expected a number, got " + std::string(j.type_name()));
    const double v = j.get<double>();
    if (!std::isfinite(v)) field_error(where, "number is not finite");
    return v;
}

std::size_t count(const json& j, const std::string& where, bool allow_zero = false) {
    if (!j.is_number_integer() || j.get<long long>() < (allow_zero ? 0 : 1)) {
        field_error(where, allow_zero ? "expected a non-negative integer" : "expected a positive integer");
    }
    const auto v = j.get<unsigned long long>();
    if (v > max_count) field_error(where, "value too large");
    return static_cast<std::size_t>(v);
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) field_error(where, "expected a string");
    return j.get<std::string>();
}

Dims dims_list(const json& j, const std::string& where) {
    if (!j.is_array()) field_error(where, "expected an array of positive integers");
    Dims d;
    for (std::size_t i = 0; i < j.size(); ++i) d.push_back(count(j[i], where + "/" + std::to_string(i)));
    return d;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key())) field_error(where + "/" + it.key(), "unknown field");
}

template <typename E>
E pick(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    std::string names;
    for (const auto& [name, value] : table) {
        if (s == name) return value;
        names += names.empty() ? name : std::string("|") + name;
    }
    throw SchemaError(std::string("invalid ") + what + " '" + s + "' (expected " + names + ")");
}

}  // namespace

HyperVec batch_from_json(const json& j, const std::string& where) {
    const json& seqs = require(j, "sequences", where);
    const std::string base = where + "/sequences";
    if (!seqs.is_array() || seqs.empty()) field_error(base, "expected a nonempty array of sequences");
    std::vector<Vec> comps;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const std::string at = base + "/" + std::to_string(i);
        if (!seqs[i].is_array() || seqs[i].empty()) field_error(at, "expected a nonempty array of numbers");
        std::vector<double> v;
        for (std::size_t k = 0; k < seqs[i].size(); ++k) v.push_back(number(seqs[i][k], at + "/" + std::to_string(k)));
        comps.emplace_back(std::move(v));
    }
    if (j.contains("dims")) {
        const Dims d = dims_list(j["dims"], where + "/dims");
        HyperVec x(std::move(comps));
        if (d != x.dims()) field_error(where + "/dims", dims_str(d) + " does not match sequences " + dims_str(x.dims()));
        return x;
    }
    return HyperVec(std::move(comps));
}

json batch_to_json(const HyperVec& x) {
    json seqs = json::array();
    for (const auto& c : x) seqs.push_back(c.values());
    return json{{"dims", x.dims()}, {"sequences", std::move(seqs)}};
}

Mat matrix_from_json(const json& j, const std::string& where) {
    const std::size_t r = count(require(j, "rows", where), where + "/rows");
    const std::size_t c = count(require(j, "cols", where), where + "/cols");
    const json& data = require(j, "data", where);
    if (!data.is_array()) field_error(where + "/data", "expected an array of numbers");
    const std::size_t n = checked_mul(r, c);
    if (data.size() != n) {
        field_error(where + "/data", "expected " + std::to_string(n) + " numbers for a " + std::to_string(r) + "x" +
                                         std::to_string(c) + " matrix, got " + std::to_string(data.size()));
    }
    std::vector<double> v;
    v.reserve(n);
    for (std::size_t k = 0; k < n; ++k) v.push_back(number(data[k], where + "/data/" + std::to_string(k)));
    return Mat(r, c, std::move(v));
}

json matrix_to_json(const Mat& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

json matrix_rows_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i).values());
    return rows;
}

PaddingMode padding_from_string(const std::string& s) {
    return pick<PaddingMode>(s, {{"zero", PaddingMode::zero}, {"projection", PaddingMode::projection}}, "padding");
}

ScaleMode scale_from_string(const std::string& s) {
    return pick<ScaleMode>(s, {{"sqrt-n", ScaleMode::sqrt_dim}, {"sqrt-s", ScaleMode::sqrt_batch}, {"n", ScaleMode::dim}},
                           "scale");
}

MaskMode mask_from_string(const std::string& s) {
    return pick<MaskMode>(
        s, {{"none", MaskMode::none}, {"causal", MaskMode::causal}, {"literal", MaskMode::literal}}, "mask");
}

NormMode norm_from_string(const std::string& s) {
    return pick<NormMode>(s, {{"vector-wise", NormMode::vector_wise}, {"layer-wise", NormMode::layer_wise}}, "norm");
}

WeightConvention convention_from_string(const std::string& s) {
    return pick<WeightConvention>(s, {{"feature", WeightConvention::feature}, {"batch", WeightConvention::batch}},
                                  "convention");
}

std::string to_string(PaddingMode m) { return m == PaddingMode::zero ? "zero" : "projection"; }

std::string to_string(ScaleMode m) {
    switch (m) {
        case ScaleMode::sqrt_dim: return "sqrt-n";
        case ScaleMode::sqrt_batch: return "sqrt-s";
        case ScaleMode::dim: return "n";
    }
    return "?";
}

std::string to_string(MaskMode m) {
    switch (m) {
        case MaskMode::none: return "none";
        case MaskMode::causal: return "causal";
        case MaskMode::literal: return "literal";
    }
    return "?";
}

std::string to_string(NormMode m) { return m == NormMode::vector_wise ? "vector-wise" : "layer-wise"; }

std::string to_string(WeightConvention c) { return c == WeightConvention::feature ? "feature" : "batch"; }

ModelConfig config_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) field_error(where, "expected an object");
    reject_unknown(j,
                   {"batch_size", "nominal_dim", "heads", "q_dims", "k_dims", "v_dims", "padding", "scale", "mask",
                    "layers", "norm", "epsilon", "convention"},
                   where);
    ModelConfig cfg;
    cfg.batch_size = count(require(j, "batch_size", where), where + "/batch_size");
    cfg.nominal_dim = count(require(j, "nominal_dim", where), where + "/nominal_dim");
    if (j.contains("heads")) cfg.heads = count(j["heads"], where + "/heads");
    if (j.contains("q_dims")) cfg.q_dims = dims_list(j["q_dims"], where + "/q_dims");
    if (j.contains("k_dims")) cfg.k_dims = dims_list(j["k_dims"], where + "/k_dims");
    if (j.contains("v_dims")) cfg.v_dims = dims_list(j["v_dims"], where + "/v_dims");
    auto with_field = [&](const char* key, auto parse) {
        try {
            parse(text(j[key], where + "/" + key));
        } catch (const SchemaError& e) {
            field_error(where + "/" + key, e.what());
        }
    };
    if (j.contains("padding")) with_field("padding", [&](const std::string& s) { cfg.padding = padding_from_string(s); });
    if (j.contains("scale")) with_field("scale", [&](const std::string& s) { cfg.scale = scale_from_string(s); });
    if (j.contains("mask")) with_field("mask", [&](const std::string& s) { cfg.mask = mask_from_string(s); });
    if (j.contains("norm")) with_field("norm", [&](const std::string& s) { cfg.norm = norm_from_string(s); });
    if (j.contains("convention")) {
        with_field("convention", [&](const std::string& s) { cfg.qkv_convention = convention_from_string(s); });
    }
    if (j.contains("layers")) cfg.layers = count(j["layers"], where + "/layers", true);
    if (j.contains("epsilon")) {
        cfg.epsilon = number(j["epsilon"], where + "/epsilon");
        if (!(cfg.epsilon > 0.0)) field_error(where + "/epsilon", "must be positive");
    }
    for (const auto& [key, dims] : {std::pair{"q_dims", &cfg.q_dims}, {"k_dims", &cfg.k_dims}, {"v_dims", &cfg.v_dims}}) {
        if (!dims->empty() && dims->size() != cfg.batch_size) {
            field_error(where + "/" + key, "has " + std::to_string(dims->size()) + " entries, batch_size is " +
                                               std::to_string(cfg.batch_size));
        }
    }
    return cfg;
}

json config_to_json(const ModelConfig& cfg) {
    json j{{"batch_size", cfg.batch_size},
           {"nominal_dim", cfg.nominal_dim},
           {"heads", cfg.heads},
           {"padding", to_string(cfg.padding)},
           {"scale", to_string(cfg.scale)},
           {"mask", to_string(cfg.mask)},
           {"layers", cfg.layers},
           {"norm", to_string(cfg.norm)},
           {"epsilon", cfg.epsilon},
           {"convention", to_string(cfg.qkv_convention)}};
    if (!cfg.q_dims.empty()) j["q_dims"] = cfg.q_dims;
    if (!cfg.k_dims.empty()) j["k_dims"] = cfg.k_dims;
    if (!cfg.v_dims.empty()) j["v_dims"] = cfg.v_dims;
    return j;
}

namespace {

BlockWeights block_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) field_error(where, "expected an object");
    reject_unknown(j, {"Wq", "Wk", "Wv", "heads", "head_weights", "M_W", "W1", "W2", "B1", "B2", "gamma", "beta"}, where);
    BlockWeights w;
    const bool single = j.contains("Wq") || j.contains("Wk") || j.contains("Wv");
    if (single && j.contains("heads")) field_error(where + "/heads", "give either Wq/Wk/Wv or heads, not both");
    if (single) {
        w.heads.push_back({matrix_from_json(require(j, "Wq", where), where + "/Wq"),
                           matrix_from_json(require(j, "Wk", where), where + "/Wk"),
                           matrix_from_json(require(j, "Wv", where), where + "/Wv")});
    } else {
        const json& heads = require(j, "heads", where);
        if (!heads.is_array() || heads.empty()) field_error(where + "/heads", "expected a nonempty array");
        for (std::size_t h = 0; h < heads.size(); ++h) {
            const std::string at = where + "/heads/" + std::to_string(h);
            reject_unknown(heads[h], {"Wq", "Wk", "Wv"}, at);
            w.heads.push_back({matrix_from_json(require(heads[h], "Wq", at), at + "/Wq"),
                               matrix_from_json(require(heads[h], "Wk", at), at + "/Wk"),
                               matrix_from_json(require(heads[h], "Wv", at), at + "/Wv")});
        }
    }
    if (j.contains("head_weights")) {
        const json& hw = j["head_weights"];
        if (!hw.is_array()) field_error(where + "/head_weights", "expected an array of numbers");
        for (std::size_t h = 0; h < hw.size(); ++h) {
            const double v = number(hw[h], where + "/head_weights/" + std::to_string(h));
            if (v < 0.0) field_error(where + "/head_weights/" + std::to_string(h), "must be >= 0");
            w.head_weights.push_back(v);
        }
    }
    if (j.contains("M_W")) {
        const json& maps = j["M_W"];
        if (!maps.is_array()) field_error(where + "/M_W", "expected an array of matrices, one per sequence");
        for (std::size_t k = 0; k < maps.size(); ++k)
            w.out_maps.push_back(matrix_from_json(maps[k], where + "/M_W/" + std::to_string(k)));
    }
    w.ffn.w1 = matrix_from_json(require(j, "W1", where), where + "/W1");
    w.ffn.w2 = matrix_from_json(require(j, "W2", where), where + "/W2");
    if (j.contains("B1")) w.ffn.b1 = batch_from_json(j["B1"], where + "/B1");
    if (j.contains("B2")) w.ffn.b2 = batch_from_json(j["B2"], where + "/B2");
    if (j.contains("gamma")) w.gamma = number(j["gamma"], where + "/gamma");
    if (j.contains("beta")) w.beta = number(j["beta"], where + "/beta");
    return w;
}

}  // namespace

WeightsFile weights_from_json(const json& j) {
    if (!j.is_object()) field_error("", "expected an object");
    reject_unknown(j, {"config", "matrices", "blocks"}, "");
    WeightsFile out;
    out.config = config_from_json(require(j, "config", ""), "/config");
    if (j.contains("matrices") == j.contains("blocks")) {
        field_error("/matrices", "give exactly one of 'matrices' (shared by all layers) or 'blocks' (one per layer)");
    }
    if (j.contains("matrices")) {
        out.blocks.push_back(block_from_json(j["matrices"], "/matrices"));
    } else {
        const json& blocks = j["blocks"];
        if (!blocks.is_array() || blocks.empty()) field_error("/blocks", "expected a nonempty array");
        for (std::size_t l = 0; l < blocks.size(); ++l)
            out.blocks.push_back(block_from_json(blocks[l], "/blocks/" + std::to_string(l)));
    }
    return out;
}

json block_to_json(const BlockWeights& w) {
    json j;
    if (w.heads.size() == 1) {
        j["Wq"] = matrix_to_json(w.heads[0].wq);
        j["Wk"] = matrix_to_json(w.heads[0].wk);
        j["Wv"] = matrix_to_json(w.heads[0].wv);
    } else {
        json heads = json::array();
        for (const auto& h : w.heads)
            heads.push_back({{"Wq", matrix_to_json(h.wq)}, {"Wk", matrix_to_json(h.wk)}, {"Wv", matrix_to_json(h.wv)}});
        j["heads"] = std::move(heads);
    }
    if (!w.head_weights.empty()) j["head_weights"] = w.head_weights;
    if (!w.out_maps.empty()) {
        json maps = json::array();
        for (const auto& m : w.out_maps) maps.push_back(matrix_to_json(m));
        j["M_W"] = std::move(maps);
    }
    j["W1"] = matrix_to_json(w.ffn.w1);
    j["W2"] = matrix_to_json(w.ffn.w2);
    if (w.ffn.b1) j["B1"] = batch_to_json(*w.ffn.b1);
    if (w.ffn.b2) j["B2"] = batch_to_json(*w.ffn.b2);
    j["gamma"] = w.gamma;
    j["beta"] = w.beta;
    return j;
}

json weights_to_json(const WeightsFile& w) {
    json j{{"config", config_to_json(w.config)}};
    if (w.blocks.size() == 1) {
        j["matrices"] = block_to_json(w.blocks[0]);
    } else {
        json blocks = json::array();
        for (const auto& b : w.blocks) blocks.push_back(block_to_json(b));
        j["blocks"] = std::move(blocks);
    }
    return j;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace stpdft::cli
