#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "stpdft/transformer.hpp"

namespace stpdft::cli {

using json = nlohmann::json;

enum ExitCode : int { exit_ok = 0, exit_schema = 2, exit_shape = 3, exit_internal = 4 };

/// Malformed input file or flag value.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maps an exception to the process exit code.
int exit_code_for(const std::exception& e) noexcept;

json parse_json_text(const std::string& text, const std::string& source);
json parse_json_file(const std::string& path);

/// {"sequences": [[...], ...]}
HyperVec batch_from_json(const json& j, const std::string& where);
json batch_to_json(const HyperVec& x);

/// {"rows": r, "cols": c, "data": [row-major]}
Mat matrix_from_json(const json& j, const std::string& where);
json matrix_to_json(const Mat& m);
/// Nested row arrays.
json matrix_rows_json(const Mat& m);

PaddingMode padding_from_string(const std::string& s);
ScaleMode scale_from_string(const std::string& s);
MaskMode mask_from_string(const std::string& s);
NormMode norm_from_string(const std::string& s);
WeightConvention convention_from_string(const std::string& s);
std::string to_string(PaddingMode m);
std::string to_string(ScaleMode m);
std::string to_string(MaskMode m);
std::string to_string(NormMode m);
std::string to_string(WeightConvention c);

ModelConfig config_from_json(const json& j, const std::string& where);
json config_to_json(const ModelConfig& cfg);

struct WeightsFile {
    ModelConfig config;
    std::vector<BlockWeights> blocks;  // one shared block, or one per layer
};

WeightsFile weights_from_json(const json& j);
json block_to_json(const BlockWeights& w);
json weights_to_json(const WeightsFile& w);

/// printf("%.17g").
std::string format_g17(double v);

}  // namespace stpdft::cli
