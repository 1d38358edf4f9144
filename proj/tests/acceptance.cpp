// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails or runs over its time budget.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include <boost/rational.hpp>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "run_tool.hpp"

using namespace stpdft;
using Q = boost::rational<long long>;
using QMat = Matrix<Q>;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
    void check(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

QMat scaled(long long den, std::initializer_list<std::initializer_list<long long>> rows) {
    QMat m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (auto v : row) m(i, j++) = Q(v, den);
        ++i;
    }
    return m;
}

Outcome golden_projections() {
    Outcome o;
    const std::pair<std::pair<std::size_t, std::size_t>, QMat> golden[] = {
        {{3, 6}, scaled(1, {{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 1}})},
        {{4, 6}, scaled(2, {{2, 0, 0, 0}, {1, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 1, 1}, {0, 0, 0, 2}})},
        {{5, 6},
         scaled(5, {{5, 0, 0, 0, 0}, {1, 4, 0, 0, 0}, {0, 2, 3, 0, 0}, {0, 0, 3, 2, 0}, {0, 0, 0, 4, 1}, {0, 0, 0, 0, 5}})},
        {{6, 3}, scaled(2, {{1, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 1, 1}})},
        {{6, 4}, scaled(3, {{2, 1, 0, 0, 0, 0}, {0, 1, 2, 0, 0, 0}, {0, 0, 0, 2, 1, 0}, {0, 0, 0, 0, 1, 2}})},
        {{6, 5},
         scaled(6, {{5, 1, 0, 0, 0, 0}, {0, 4, 2, 0, 0, 0}, {0, 0, 3, 3, 0, 0}, {0, 0, 0, 2, 4, 0}, {0, 0, 0, 0, 1, 5}})},
    };
    for (const auto& [mn, expected] : golden)
        o.check(proj_matrix<Q>(mn.first, mn.second) == expected,
                "Pi " + std::to_string(mn.first) + "->" + std::to_string(mn.second) + " differs");
    return o;
}

Outcome bridge_identity() {
    Outcome o;
    SplitMix64 rng(1001);
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::size_t p = 1; p <= 6; ++p) {
            const Mat psi = bridge_matrix(n, p);
            for (int trial = 0; trial < 20; ++trial) {
                const Mat a = oracle::random_int_matrix(rng, oracle::random_dim(rng, 1, 4), n);
                const Mat b = oracle::random_int_matrix(rng, p, oracle::random_dim(rng, 1, 4));
                o.check(dk_stp(a, b) == a * psi * b, "n=" + std::to_string(n) + " p=" + std::to_string(p));
            }
        }
    return o;
}

Outcome stp_sta_laws() {
    Outcome o;
    SplitMix64 rng(1002);
    auto dim = [&] { return oracle::random_dim(rng, 1, 6); };
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const Mat a = oracle::random_matrix(rng, dim(), dim());
        const Mat b = oracle::random_matrix(rng, dim(), dim());
        const Mat c = oracle::random_matrix(rng, dim(), dim());
        const Mat b2 = oracle::random_matrix(rng, b.rows(), b.cols());
        const Mat a2 = oracle::random_matrix(rng, a.rows(), a.cols());
        worst = std::max(worst, oracle::rel_diff(stp(stp(a, b), c), stp(a, stp(b, c))));
        worst = std::max(worst, oracle::rel_diff(stp(a, b + b2), stp(a, b) + stp(a, b2)));
        worst = std::max(worst, oracle::rel_diff(stp(a + a2, b), stp(a, b) + stp(a2, b)));
        const Vec x = oracle::random_vector(rng, dim()), y = oracle::random_vector(rng, dim()), z = oracle::random_vector(rng, dim());
        worst = std::max(worst, oracle::max_abs_diff(sta(x, y), sta(y, x)));
        worst = std::max(worst, oracle::max_abs_diff(sta(sta(x, y), z), sta(x, sta(y, z))) / 3.0);
    }
    o.check(worst <= 1e-9, "worst relative error " + std::to_string(worst));
    return o;
}

Outcome nominal_dual_path() {
    Outcome o;
    SplitMix64 rng(1003);
    double worst = 0.0;
    for (std::size_t m = 1; m <= 8; ++m)
        for (std::size_t n = 1; n <= 8; ++n)
            for (std::size_t r = 1; r <= 8; ++r) {
                const Vec x = oracle::random_vector(rng, m), y = oracle::random_vector(rng, n);
                worst = std::max(worst, oracle::max_abs_diff(nominal_add(x, y, r), project(sta(x, y), r)));
            }
    o.check(worst <= 1e-12, "worst error " + std::to_string(worst));
    return o;
}

Outcome projection_optimality() {
    Outcome o;
    SplitMix64 rng(1004);
    for (int pair = 0; pair < 50; ++pair) {
        const std::size_t m = oracle::random_dim(rng, 1, 9), n = oracle::random_dim(rng, 1, 9);
        const Vec x = oracle::random_vector(rng, m);
        const Vec p = project(x, n);
        o.check(oracle::max_abs_diff(p, oracle::least_squares_projection(oracle::to_eigen(x), n)) <= 1e-9,
                "least squares mismatch for " + std::to_string(m) + "->" + std::to_string(n));
        const double best = vdist(x, p);
        for (int c = 0; c < 1000; ++c)
            o.check(best <= vdist(x, oracle::random_vector(rng, n, -2.0, 2.0)),
                    "random candidate beats projection for " + std::to_string(m) + "->" + std::to_string(n));
    }
    return o;
}

Outcome diamond_dual_path() {
    Outcome o;
    SplitMix64 rng(1005);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s = oracle::random_dim(rng, 1, 5);
        const HyperVec x = oracle::random_hyper(rng, oracle::random_dims(rng, s, 1, 6));
        const Mat a = oracle::random_matrix(rng, s, s);
        const HyperVec stepwise = diamond(a, x);
        worst = std::max(worst, oracle::max_abs_diff(to_addition_form(stepwise), diamond_vectorized(a, x)));
        worst = std::max(worst, oracle::max_abs_diff(stepwise, oracle::diamond(a, x)));
    }
    o.check(worst <= 1e-12, "worst error " + std::to_string(worst));

    // W in M(2x2), x^1 in R^2, x^2 in R^3, n0 = 3.
    const Mat w = oracle::random_matrix(rng, 2, 2);
    const HyperVec x = oracle::random_hyper(rng, {2, 3});
    const HyperVec q = diamond(w, x);
    const double w11 = w(0, 0), w12 = w(0, 1), w21 = w(1, 0), w22 = w(1, 1);
    const double x11 = x[0][0], x12 = x[0][1], x21 = x[1][0], x22 = x[1][1], x23 = x[1][2];
    const double printed[] = {
        2.0 / 3 * (w11 * x11 + w12 * x21) + 1.0 / 6 * (w11 * (x11 + x12) + 2 * w12 * x22),
        1.0 / 6 * (w11 * (x11 + x12) + 2 * w12 * x22) + 2.0 / 3 * (w11 * x12 + w12 * x23),
        w21 * x11 + w22 * x21,
        0.5 * w21 * (x11 + x12) + w22 * x22,
        w21 * x12 + w22 * x23,
    };
    const Vec got = to_addition_form(q);
    for (std::size_t i = 0; i < 5; ++i)
        o.check(std::abs(got[i] - printed[i]) <= 1e-12, "worked 2x(2,3) instance entry " + std::to_string(i + 1));
    return o;
}

Outcome uniform_reductions() {
    Outcome o;
    SplitMix64 rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t s = oracle::random_dim(rng, 1, 5), d = oracle::random_dim(rng, 1, 6);
        const Mat a = oracle::random_matrix(rng, s, d), b = oracle::random_matrix(rng, s, d), v = oracle::random_matrix(rng, s, d);
        const HyperVec x = HyperVec::from_rows(a), y = HyperVec::from_rows(b), vh = HyperVec::from_rows(v);
        const Mat plain = a * b.transpose();
        worst = std::max(worst, oracle::max_abs_diff(hyper_inner(x, y), plain * (1.0 / d)));
        worst = std::max(worst, oracle::max_abs_diff(hyper_inner_weighted(x, y), plain * (1.0 / std::sqrt(double(d)))));
        const DvAttention dv = dv_attention(x, y, vh);
        const Attention nominal = attention_nominal(a, b, v);
        worst = std::max(worst, oracle::max_abs_diff(dv.weights, nominal.weights));
        worst = std::max(worst, oracle::max_abs_diff(dv.values.to_matrix(), nominal.values));
        const Mat m = oracle::random_matrix(rng, s, s);
        worst = std::max(worst, oracle::max_abs_diff(diamond(m, x).to_matrix(), m * a));
    }
    o.check(worst <= 1e-12, "worst error " + std::to_string(worst));
    return o;
}

Outcome stochastic_closure() {
    Outcome o;
    SplitMix64 rng(1007);
    double worst_sum = 0.0, lowest = 0.0;
    auto inspect = [&](const Mat& c) {
        for (std::size_t j = 0; j < c.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < c.rows(); ++i) {
                sum += c(i, j);
                lowest = std::min(lowest, c(i, j));
            }
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
    };
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = oracle::random_dim(rng, 1, 6), n = oracle::random_dim(rng, 1, 6);
        const std::size_t p = oracle::random_dim(rng, 1, 6), q = oracle::random_dim(rng, 1, 6);
        const Mat a = oracle::random_stochastic(rng, m, n), b = oracle::random_stochastic(rng, p, q);
        inspect(weighted_dk_stp(a, b));
        inspect(a * oracle::random_stochastic(rng, n, 1));
        inspect(softmax_rows(oracle::random_matrix(rng, q, p, -5.0, 5.0)).transpose());
    }
    o.check(worst_sum <= 1e-12, "column sum off by " + std::to_string(worst_sum));
    o.check(lowest >= -1e-15, "negative entry " + std::to_string(lowest));
    return o;
}

Outcome non_identifiability() {
    Outcome o;
    SplitMix64 rng(1008);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t s = oracle::random_dim(rng, 1, 5), n = oracle::random_dim(rng, 1, 5);
        const Mat x = oracle::random_matrix(rng, s, n);
        const Mat wq = oracle::random_matrix(rng, n, n), wk = oracle::random_matrix(rng, n, n), wv = oracle::random_matrix(rng, n, n);
        const Vec u = oracle::random_vector(rng, n, 0.1, 1.0);
        const Mat h = Mat::identity(n) - Mat::column(u) * Mat::row_vector(u) * (2.0 / (Mat::row_vector(u) * Mat::column(u))(0, 0));
        const Mat base = assembled_attention(x, wq, wk, wv);
        worst = std::max(worst, oracle::max_abs_diff(assembled_attention(x, h * wq, h * wk, wv), base));
        for (double lambda : {1e-3, 3.0, 1e3})
            worst = std::max(worst, oracle::max_abs_diff(assembled_attention(x, wq * lambda, wk, wv * (1.0 / lambda)), base));
    }
    o.check(worst <= 1e-9, "worst error " + std::to_string(worst));
    return o;
}

Outcome worked_pipeline() {
    Outcome o;
    const cli::json report = cli::examples_report();
    std::size_t table_items = 0, numeric_items = 0, flagged = 0;
    for (const auto& item : report["items"]) {
        const std::string name = item["name"], status = item["status"];
        if (name.rfind("pipeline (3,4,5,3)", 0) != 0) continue;
        if (status == "fail") o.fail(name);
        if (status == "printed-mismatch") ++flagged;
        if (name.find("mu table") != std::string::npos || name.find("lambda table") != std::string::npos) {
            ++table_items;
            o.check(status == "pass", name);
        }
        if (name.find("projection-padding q") != std::string::npos && name.find("printed eta") == std::string::npos) {
            ++numeric_items;
            o.check(status == "pass", name);
        }
    }
    o.check(table_items == 2, "mu/lambda table items missing");
    o.check(numeric_items == 4, "numeric q items missing");
    o.check(flagged > 0, "printed eta entries were not flagged");
    return o;
}

Outcome cli_determinism() {
    Outcome o;
    const ToolRun ex = run_tool("examples");
    o.check(ex.exit_code == 0, "examples exit code " + std::to_string(ex.exit_code));
    try {
        for (const auto& item : cli::json::parse(ex.out)["items"]) {
            const std::string status = item["status"];
            o.check(status == "pass" || status == "printed-mismatch", "item " + item["name"].get<std::string>() + ": " + status);
        }
    } catch (const std::exception& e) {
        o.fail(std::string("examples report is not valid JSON: ") + e.what());
    }
    const ToolRun a = run_tool("forward --seed 42"), b = run_tool("forward --seed 42");
    o.check(a.exit_code == 0 && b.exit_code == 0, "forward exit code " + std::to_string(a.exit_code));
    o.check(!a.out.empty() && a.out == b.out, "forward --seed 42 output differs between runs");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* what;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "golden projection matrices (exact rationals)", 1.0, golden_projections},
        {2, "bridge identity dk_stp(A,B) = A Psi B", 5.0, bridge_identity},
        {3, "STP associativity/distributivity, STA commutativity/associativity", 5.0, stp_sta_laws},
        {4, "nominal addition dual path", 10.0, nominal_dual_path},
        {5, "projection optimality", 10.0, projection_optimality},
        {6, "diamond stepwise vs vectorized, worked 2x(2,3) instance", 5.0, diamond_dual_path},
        {7, "uniform-dimension reductions", 5.0, uniform_reductions},
        {8, "stochasticity closure", 5.0, stochastic_closure},
        {9, "assembled attention invariances", 5.0, non_identifiability},
        {10, "worked (3,4,5,3) pipeline vs printed coefficient tables", 2.0, worked_pipeline},
        {11, "CLI determinism and report schema", 5.0, cli_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.ok && secs > c.budget_s) o.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(c.budget_s) + " s");
        std::printf("%s criterion %d: %s (%.3f s)%s%s\n", o.ok ? "PASS" : "FAIL", c.id, c.what, secs,
                    o.ok ? "" : ": ", o.detail.c_str());
        if (!o.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
