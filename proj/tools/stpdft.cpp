#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli/commands.hpp"

using namespace stpdft;
using namespace stpdft::cli;

namespace {

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument(s);
        std::size_t used = 0;
        const auto lo = std::stoul(s.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(s);
        const auto hi = std::stoul(s.substr(colon + 1), &used);
        if (used != s.size() - colon - 1 || lo == 0 || lo > hi) throw std::invalid_argument(s);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw SchemaError("--dim-range '" + s + "': expected LO:HI with 1 <= LO <= HI");
    }
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError(path + ": cannot open for writing");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimension-free matrix algebra and transformer forward passes over ragged batches."};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;

    auto* ex = app.add_subcommand("examples", "Recompute the worked examples and write a JSON report.");
    std::uint64_t ex_seed = default_example_seed;
    ex->add_option("--seed", ex_seed, "Seed for the numeric substitutions")->capture_default_str();
    ex->add_option("--out", out_path, "Output file (default: stdout)");

    auto* fw = app.add_subcommand("forward", "Run the encoder stack on a ragged batch and write JSON.");
    ForwardOptions fo;
    std::string batch, weights, padding, scale, mask, dim_range = "2:6";
    std::size_t layers = 0, nominal = 0;
    fw->add_option("--batch", batch, "Ragged batch JSON {\"sequences\": [[...], ...]} (default: generated from --seed)");
    fw->add_option("--weights", weights, "Weights JSON {\"config\": {...}, \"matrices\": {...}} (default: generated)");
    fw->add_option("--padding", padding, "QKV padding: zero|projection (overrides the weights file)");
    fw->add_option("--scale", scale, "Score scaling: sqrt-n|sqrt-s|n (default sqrt-n)");
    fw->add_option("--mask", mask, "Attention mask: none|causal|literal (default none)");
    auto* layers_opt = fw->add_option("--layers", layers, "Number of encoder blocks N (default 1)");
    fw->add_option("--seed", seed, "PRNG seed for generated batch and weights")->capture_default_str();
    fw->add_option("--batch-size", fo.batch_size, "Generated batch size")->capture_default_str();
    fw->add_option("--dim-range", dim_range, "Generated sequence dimensions LO:HI")->capture_default_str();
    auto* nominal_opt = fw->add_option("--nominal", nominal, "Generated nominal dimension (default: longest sequence)");
    fw->add_option("--heads", fo.heads, "Generated head count")->capture_default_str();
    fw->add_option("--out", out_path, "Output file (default: stdout)");

    auto* cp = app.add_subcommand("compare-padding", "Compare zero padding with projection padding; writes CSV.");
    CompareOptions co;
    std::string cp_range = "2:8";
    cp->add_option("--batches", co.batches, "Number of random batches")->capture_default_str();
    cp->add_option("--batch-size", co.batch_size, "Sequences per batch")->capture_default_str();
    cp->add_option("--dim-range", cp_range, "Sequence dimensions LO:HI")->capture_default_str();
    auto* cp_nominal = cp->add_option("--nominal", nominal, "Nominal dimension d (default: HI)");
    cp->add_option("--seed", seed, "PRNG seed")->capture_default_str();
    auto* no_timing = cp->add_flag("--no-timing", "Write 0 in the timing columns");
    cp->add_option("--out", out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_schema;
    }

    try {
        if (*ex) {
            std::ostringstream buf;
            const int code = run_examples(buf, ex_seed);
            emit(buf.str(), out_path);
            return code;
        }
        if (*fw) {
            if (!batch.empty()) fo.batch_path = batch;
            if (!weights.empty()) fo.weights_path = weights;
            if (!padding.empty()) fo.padding = padding_from_string(padding);
            if (!scale.empty()) fo.scale = scale_from_string(scale);
            if (!mask.empty()) fo.mask = mask_from_string(mask);
            if (*layers_opt) fo.layers = layers;
            if (*nominal_opt) fo.nominal = nominal;
            std::tie(fo.dim_lo, fo.dim_hi) = parse_range(dim_range);
            fo.seed = seed;
            emit(forward(fo).dump(2) + "\n", out_path);
            return exit_ok;
        }
        if (*cp) {
            std::tie(co.dim_lo, co.dim_hi) = parse_range(cp_range);
            if (*cp_nominal) co.nominal = nominal;
            co.seed = seed;
            co.timing = no_timing->count() == 0;
            std::ostringstream buf;
            write_padding_csv(buf, compare_padding(co));
            emit(buf.str(), out_path);
            return exit_ok;
        }
    } catch (const std::exception& e) {
        std::cerr << "stpdft: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return exit_internal;
}
