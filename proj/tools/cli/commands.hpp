#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cli/io.hpp"
#include "stpdft/prng.hpp"

namespace stpdft::cli {

// ---- examples ----

inline constexpr std::uint64_t default_example_seed = 20230705;

/// Report of the worked examples: {"items": [{name, status, expected, actual}]}.
/// status is "pass", "fail" or "printed-mismatch" (a printed formula that
/// disagrees with the recomputation; not a library failure).
json examples_report(std::uint64_t seed = default_example_seed);

/// Writes the report; returns exit_internal if any item has status "fail".
int run_examples(std::ostream& out, std::uint64_t seed = default_example_seed);

// ---- forward ----

struct ForwardOptions {
    std::optional<std::string> batch_path;
    std::optional<std::string> weights_path;
    std::optional<PaddingMode> padding;
    std::optional<ScaleMode> scale;
    std::optional<MaskMode> mask;
    std::optional<std::size_t> layers;
    std::uint64_t seed = 0;
    // Generated inputs (used when no batch / weights file is given).
    std::size_t batch_size = 4;
    std::size_t dim_lo = 2;
    std::size_t dim_hi = 6;
    std::optional<std::size_t> nominal;
    std::size_t heads = 1;
};

HyperVec random_batch(SplitMix64& rng, std::size_t s, std::size_t dim_lo, std::size_t dim_hi);
WeightsFile random_weights(SplitMix64& rng, const ModelConfig& cfg, const Dims& dims);

/// Runs the encoder stack and returns the output document.
json forward(const ForwardOptions& opts);

// ---- compare-padding ----

struct CompareOptions {
    std::size_t batches = 8;
    std::size_t batch_size = 4;
    std::size_t dim_lo = 2;
    std::size_t dim_hi = 8;
    std::optional<std::size_t> nominal;  // default dim_hi
    std::uint64_t seed = 0;
    bool timing = true;
};

struct PaddingRow {
    std::size_t batch = 0;
    std::size_t s = 0;
    std::size_t d = 0;
    Dims dims;
    double zero_error = 0.0;  // relative error of pad -> unpad
    double proj_error = 0.0;
    double zero_fraction = 0.0;  // padded zeros / (s d)
    double zero_time_us = 0.0;
    double proj_time_us = 0.0;
};

/// Pad/unpad round trip of one batch at nominal dimension d under both schemes.
PaddingRow compare_batch(const HyperVec& x, std::size_t d, bool timing = true);

std::vector<PaddingRow> compare_padding(const CompareOptions& opts);

inline constexpr const char* padding_csv_header =
    "batch,s,d,dims,zero_recon_error,proj_recon_error,zero_fraction,zero_time_us,proj_time_us";

void write_padding_csv(std::ostream& out, const std::vector<PaddingRow>& rows);

}  // namespace stpdft::cli
