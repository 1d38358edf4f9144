#include <chrono>
#include <cmath>

#include "cli/commands.hpp"

namespace stpdft::cli {

namespace {

double relative_error(const HyperVec& x, const HyperVec& y) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x[i].dim(); ++j) {
            num += (x[i][j] - y[i][j]) * (x[i][j] - y[i][j]);
            den += x[i][j] * x[i][j];
        }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

template <typename F>
HyperVec timed(F&& f, double& us, bool timing) {
    const auto t0 = std::chrono::steady_clock::now();
    HyperVec out = f();
    const auto t1 = std::chrono::steady_clock::now();
    us = timing ? std::chrono::duration<double, std::micro>(t1 - t0).count() : 0.0;
    return out;
}

}  // namespace

PaddingRow compare_batch(const HyperVec& x, std::size_t d, bool timing) {
    const std::size_t s = x.size();
    if (x.max_dim() > d) {
        throw ShapeError("compare-padding: nominal dim " + std::to_string(d) + " is below the longest sequence " +
                         std::to_string(x.max_dim()));
    }
    PaddingRow row;
    row.s = s;
    row.d = d;
    row.dims = x.dims();

    const HyperVec zero = timed(
        [&] {
            Mat padded(s, d);
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < x[i].dim(); ++j) padded(i, j) = x[i][j];
            std::vector<Vec> back;
            for (std::size_t i = 0; i < s; ++i) {
                const auto r = padded.row_span(i);
                back.emplace_back(std::vector<double>(r.begin(), r.begin() + x[i].dim()));
            }
            return HyperVec(std::move(back));
        },
        row.zero_time_us, timing);

    const HyperVec proj = timed(
        [&] {
            const DiamondPlan<double> plan(x.dims(), d);
            return plan.unpad(plan.pad(x));
        },
        row.proj_time_us, timing);

    row.zero_error = relative_error(x, zero);
    row.proj_error = relative_error(x, proj);
    std::size_t padded_zeros = 0;
    for (auto n : row.dims) padded_zeros += d - n;
    row.zero_fraction = static_cast<double>(padded_zeros) / static_cast<double>(s * d);
    return row;
}

std::vector<PaddingRow> compare_padding(const CompareOptions& opts) {
    const std::size_t d = opts.nominal.value_or(opts.dim_hi);
    if (d < opts.dim_hi) {
        throw SchemaError("--nominal " + std::to_string(d) + " must be at least the top of --dim-range (" +
                          std::to_string(opts.dim_hi) + ") so zero padding applies");
    }
    SplitMix64 rng(opts.seed);
    std::vector<PaddingRow> rows;
    for (std::size_t b = 0; b < opts.batches; ++b) {
        const HyperVec x = random_batch(rng, opts.batch_size, opts.dim_lo, opts.dim_hi);
        PaddingRow row = compare_batch(x, d, opts.timing);
        row.batch = b + 1;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_padding_csv(std::ostream& out, const std::vector<PaddingRow>& rows) {
    out << padding_csv_header << '\n';
    for (const auto& r : rows) {
        std::string dims;
        for (std::size_t i = 0; i < r.dims.size(); ++i) dims += (i ? ";" : "") + std::to_string(r.dims[i]);
        out << r.batch << ',' << r.s << ',' << r.d << ',' << dims << ',' << format_g17(r.zero_error) << ','
            << format_g17(r.proj_error) << ',' << format_g17(r.zero_fraction) << ',' << format_g17(r.zero_time_us)
            << ',' << format_g17(r.proj_time_us) << '\n';
    }
}

}  // namespace stpdft::cli
