// Copyright 2026 The fockdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks for the simulator. Prints one line per criterion and
// exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../test_util.hpp"
#include "fockdet/fockdet.hpp"

namespace {

using namespace fockdet;
using namespace fockdet::testing;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

Outcome sg_algebra() {
    double worst = 0.0;
    for (int d : {2, 8, 64}) {
        const FockDimension dim(d);
        const Matrix up = make_operator(OperatorKind::RaiseSG, dim).matrix();
        const Matrix down = make_operator(OperatorKind::LowerSG, dim).matrix();
        Matrix lower_raise = Matrix::Identity(d, d);
        lower_raise(d - 1, d - 1) = 0.0;
        Matrix raise_lower = Matrix::Identity(d, d);
        raise_lower(0, 0) = 0.0;
        worst = std::max(worst, max_abs_diff(Matrix(down * up), lower_raise));
        worst = std::max(worst, max_abs_diff(Matrix(up * down), raise_lower));
    }
    return {worst <= 1e-14, fmt("max entry error %.3g over d in {2, 8, 64}", worst)};
}

Outcome polar_decomposition() {
    const int d = 64;
    const FockDimension dim(d);
    Matrix root_n1 = Matrix::Zero(d, d);
    for (int n = 0; n < d; ++n) root_n1(n, n) = std::sqrt(double(n + 1));
    const Matrix composed = root_n1 * make_operator(OperatorKind::LowerSG, dim).matrix();
    // Reference annihilator from its defining matrix elements <n-1|a|n> = sqrt(n).
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
    const bool exact = composed == a && make_operator(OperatorKind::Annihilate, dim).matrix() == a;
    return {exact, fmt("max entry error %.3g at d = 64", max_abs_diff(composed, a))};
}

// Independent Bayes oracle: posterior proportional to prior times likelihood,
// then relabel n -> n - 1.
std::vector<double> bayes_oracle(const std::vector<double>& prior, const std::vector<double>& likelihood) {
    long double evidence = 0;
    for (std::size_t n = 0; n < prior.size(); ++n) evidence += (long double)prior[n] * likelihood[n];
    std::vector<double> out(prior.size(), 0.0);
    for (std::size_t n = 1; n < prior.size(); ++n) out[n - 1] = double(prior[n] * likelihood[n] / evidence);
    return out;
}

Outcome oracle_equivalence() {
    const std::size_t d = 32;
    std::mt19937_64 rng(1234);
    std::vector<double> discrete_l(d, 1.0), continuous_l(d);
    discrete_l[0] = 0.0;
    for (std::size_t n = 0; n < d; ++n) continuous_l[n] = double(n);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_distribution(rng, d);
        const auto rho = from_distribution(p);
        worst = std::max(worst, max_abs_diff(diagonal_of(subtract_one(rho)), bayes_oracle(p.values(), discrete_l)));
        worst = std::max(worst, max_abs_diff(diagonal_of(one_count(rho)), bayes_oracle(p.values(), continuous_l)));
        worst = std::max(worst, max_abs_diff(discrete_posterior(p).values(), bayes_oracle(p.values(), discrete_l)));
        worst = std::max(worst, max_abs_diff(continuous_posterior(p).values(), bayes_oracle(p.values(), continuous_l)));
    }
    return {worst <= 1e-12, fmt("max deviation %.3g over 1000 Dirichlet states at d = 32", worst)};
}

// Mean photon number after one detection, summed directly over the prior.
double oracle_discrete_mean(const std::vector<double>& p) {
    long double num = 0, den = 0;
    for (std::size_t n = 1; n < p.size(); ++n) {
        num += (long double)(n - 1) * p[n];
        den += p[n];
    }
    return double(num / den);
}

double oracle_continuous_mean(const std::vector<double>& p) {
    long double num = 0, den = 0;
    for (std::size_t n = 1; n < p.size(); ++n) {
        num += (long double)n * (n - 1) * p[n];
        den += (long double)n * p[n];
    }
    return double(num / den);
}

double mean_of(const DensityMatrix& rho) { return raw_moment(diagonal_of(rho), 1); }

Outcome mean_formulas() {
    const int d = 128;
    const FockDimension dim(d);
    double worst = 0.0;
    auto check = [&](const std::vector<double>& oracle_p, const PhotonDistribution& generated) {
        worst = std::max(worst, max_abs_diff(generated.values(), oracle_p));
        const auto rho = from_distribution(generated);
        const auto m = moments(generated);
        const double discrete = mean_of(subtract_one(rho));
        const double continuous = mean_of(one_count(rho));
        worst = std::max(worst, std::abs(predict_discrete_mean(m) - discrete));
        worst = std::max(worst, std::abs(predict_continuous_mean(m) - continuous));
        worst = std::max(worst, std::abs(oracle_discrete_mean(oracle_p) - discrete));
        worst = std::max(worst, std::abs(oracle_continuous_mean(oracle_p) - continuous));
    };
    for (int n = 1; n <= 10; ++n) {
        std::vector<double> p(d, 0.0);
        p[std::size_t(n)] = 1.0;
        check(p, make_state(family::Fock{n}, dim).distribution);
    }
    for (double m : {0.5, 1.0, 2.0, 4.0}) {
        check(thermal_oracle(m, d), make_state(family::Thermal{m}, dim).distribution);
        check(poisson_oracle(m, d), make_state(family::PoissonDiagonal{m}, dim).distribution);
    }
    const auto thermal2 = from_distribution(make_state(family::Thermal{2.0}, dim).distribution);
    const auto poisson2 = from_distribution(make_state(family::PoissonDiagonal{2.0}, dim).distribution);
    const double td = mean_of(subtract_one(thermal2));
    const double tc = mean_of(one_count(thermal2));
    const double pc = mean_of(one_count(poisson2));
    const bool named = std::abs(td - 2.0) <= 1e-8 && std::abs(tc - 4.0) <= 1e-8 && std::abs(pc - 2.0) <= 1e-8;
    return {worst <= 1e-8 && named,
            fmt("max deviation %.3g; thermal(2) discrete %.10f, continuous %.10f", worst, td, tc) +
                fmt("; Poisson(2) continuous %.10f", pc)};
}

Outcome number_shifters() {
    const std::size_t d = 32;
    std::mt19937_64 rng(99);
    double add_worst = 0.0, sub_worst = 0.0, min_gap = 1.0;
    for (int i = 0; i < 100; ++i) {
        const int shift = 1 + i % 5;
        const auto clear = from_distribution(random_distribution_from(rng, d, 0, d - std::size_t(shift)));
        const auto raised = add_photons(clear, shift);
        add_worst = std::max(add_worst, std::abs(raised.matrix().trace().real() - 1.0));

        const auto above = from_distribution(random_distribution_from(rng, d, std::size_t(shift), d));
        sub_worst = std::max(sub_worst, std::abs(subtraction_norm(above, shift) - 1.0));

        const auto mixed = random_distribution(rng, d);
        double below = 0.0;
        for (int n = 0; n < shift; ++n) below += mixed[std::size_t(n)];
        const double gap = 1.0 - subtraction_norm(from_distribution(mixed), shift);
        if (std::abs(gap - below) > 1e-12) min_gap = -1.0;
        min_gap = std::min(min_gap, gap);
    }
    return {add_worst <= 1e-12 && sub_worst <= 1e-12 && min_gap > 1e-12,
            fmt("add trace error %.3g; subtract norm error %.3g on n >= N support; smallest loss otherwise %.3g",
                add_worst, sub_worst, min_gap)};
}

std::string discrete_scenario(const std::string& excitation, std::uint64_t seed) {
    return R"({"model": "discrete", "dim": 3, "initial_state": {"family": "custom", "p": [0.5, 0.3, 0.2]},
               "trials": 1000000, "seed": )" +
           std::to_string(seed) + R"(, "campaign": {"excitation": )" + excitation + "}}";
}

Outcome q_independence() {
    bool ok = true;
    std::string detail;
    struct Case {
        std::string label, excitation;
        std::uint64_t seed;
    };
    for (const auto& [label, excitation, seed] :
         {Case{"q = 0.5", R"({"kind": "constant", "value": 0.5})", 20260101},
          Case{"q = n/(n+3)", R"({"kind": "saturating", "offset": 3})", 20260103}}) {
        const auto r = run_campaign(parse_scenario(discrete_scenario(excitation, seed)));
        double worst = 0.0;
        for (std::size_t n = 0; n < 2; ++n) {
            ok = ok && std::abs(r.posterior[n].target - (n == 0 ? 0.6 : 0.4)) < 1e-15;
            worst = std::max(worst, std::abs(r.posterior[n].z));
        }
        ok = ok && worst < 3.0 && std::abs(r.fraction.z) < 3.0 && std::abs(r.fraction.target - 0.5) < 1e-15;
        detail += (detail.empty() ? "" : "; ") + label +
                  fmt(": posterior (%.4f, %.4f)", r.posterior[0].estimate, r.posterior[1].estimate) +
                  fmt(" max |z| %.2f, fraction %.4f (z %.2f)", worst, r.fraction.estimate, r.fraction.z);
    }
    return {ok, detail};
}

Outcome model_divergence() {
    const auto r = run_campaign(parse_scenario(R"({"model": "continuous", "dim": 128, "coupling": {"lambda": 1.0},
        "initial_state": {"family": "thermal", "mean": 2}, "trials": 1000000, "seed": 20260102,
        "campaign": {"t_max": 0.001}})"));
    const double mean = r.mean.estimate, se = r.mean.stderr_estimate;
    const double from_four = (mean - 4.0) / se;
    const double from_two = (mean - 2.0) / se;
    return {std::abs(from_four) < 3.0 && from_two > 10.0,
            fmt("conditioned mean %.4f +- %.4f", mean, se) +
                fmt(", %.2f sigma from 4.0, %.1f sigma from 2.0", from_four, from_two) +
                fmt(", %.0f detections", double(r.estimate.detections))};
}

Outcome determinism() {
    const std::string text = R"({"model": "discrete", "dim": 3, "initial_state": {"family": "custom", "p": [0.5, 0.3, 0.2]},
        "trials": 100000, "seed": 77, "campaign": {"excitation": {"kind": "saturating", "offset": 3}}})";
    auto render = [&](unsigned threads) {
        std::ostringstream json, csv, records;
        const auto r = run_campaign(parse_scenario(text), threads,
                                    [&](const DetectionRecord& rec, std::uint64_t trial) {
                                        records << to_json_line(rec, trial) << '\n';
                                    });
        write_result(json, r, OutputFormat::Json);
        write_result(csv, r, OutputFormat::Csv);
        return json.str() + csv.str() + records.str();
    };
    const std::string first = render(1);
    const std::string second = render(1);
    const std::string threaded = render(4);
    return {first == second && first == threaded,
            fmt("%.0f bytes compared across repeated and multi-threaded runs", double(first.size()))};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"SG algebra", sg_algebra},
        {"polar decomposition", polar_decomposition},
        {"oracle equivalence", oracle_equivalence},
        {"mean photon formulas", mean_formulas},
        {"number shifter unitarity", number_shifters},
        {"Monte Carlo q-independence", q_independence},
        {"model divergence", model_divergence},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 1;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - 1 - failures, index - 1);
    return failures == 0 ? 0 : 1;
}
