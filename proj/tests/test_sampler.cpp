#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "ebitsim/fock.hpp"
#include "ebitsim/rng.hpp"
#include "ebitsim/sampler.hpp"

using namespace ebitsim;

namespace {

const double kRoot2Inv = 1.0 / std::sqrt(2.0);

double marginal_cdf(double x, double eta, double alpha) {
    double g = std::sqrt(2.0 / M_PI) * std::exp(-2.0 * x * x);
    double big = 0.5 * (1.0 + std::erf(std::sqrt(2.0) * x));
    return big - eta * alpha * alpha * x * g;
}

struct Moments {
    double mean1 = 0, var1 = 0, corr = 0, var_u = 0, var_v = 0;
};

Moments sample_moments(const std::vector<QuadratureSample>& data) {
    double s1 = 0, s11 = 0, s12 = 0, su = 0, suu = 0, sv = 0, svv = 0;
    for (const auto& s : data) {
        double u = (s.x1 + s.x2) * kRoot2Inv;
        double v = (s.x1 - s.x2) * kRoot2Inv;
        s1 += s.x1;
        s11 += s.x1 * s.x1;
        s12 += s.x1 * s.x2;
        su += u;
        suu += u * u;
        sv += v;
        svv += v * v;
    }
    double n = double(data.size());
    Moments m;
    m.mean1 = s1 / n;
    m.var1 = s11 / n - m.mean1 * m.mean1;
    m.corr = s12 / n;
    m.var_u = suu / n - (su / n) * (su / n);
    m.var_v = svv / n - (sv / n) * (sv / n);
    return m;
}

} // namespace

TEST_SUITE("sampler") {

TEST_CASE("joint density matches references and stays normalized") {
    CHECK(joint_pdf(0.4, -0.3, 0.9, 0.605) ==
          doctest::Approx(0.19962290680126760).epsilon(1e-14));
    CHECK(joint_pdf(0.2, 0.6, 1.9, 0.8, 0.6, 0.8) ==
          doctest::Approx(0.24720088544822309).epsilon(1e-14));

    auto gh = gauss_hermite(12);
    for (auto [eta, a, b, chi] :
         {std::tuple{0.605, kRoot2Inv, kRoot2Inv, 0.4},
          std::tuple{0.9, 0.6, 0.8, 2.7}}) {
        double acc = 0;
        for (int i = 0; i < gh.x.size(); ++i)
            for (int j = 0; j < gh.x.size(); ++j)
                acc += gh.w[i] * gh.w[j] *
                       joint_pdf(gh.x[i], gh.x[j], chi, eta, a, b) *
                       std::exp(2 * (gh.x[i] * gh.x[i] +
                                     gh.x[j] * gh.x[j]));
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("phase grid construction and scan validation") {
    auto grid = default_phase_grid(5);
    REQUIRE(grid.size() == 5);
    CHECK(grid[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(grid[1] == doctest::Approx(M_PI / 4));
    CHECK(grid[4] == doctest::Approx(M_PI));
    CHECK(default_phase_grid(1) == std::vector<double>{0.0});
    CHECK_THROWS_AS(default_phase_grid(0), std::invalid_argument);

    ScanConfig sc;
    sc.phase_grid = default_phase_grid(4);
    sc.n_samples = 4000;
    CHECK(validate_scan(sc).empty());
    sc.n_samples = 0;
    CHECK(validate_scan(sc).find("n_samples") != std::string::npos);
    sc.n_samples = 4001;
    CHECK(validate_scan(sc).find("divisible") != std::string::npos);
    sc.n_samples = 4000;
    sc.eta = 1.3;
    CHECK(validate_scan(sc).find("eta") != std::string::npos);
    sc.eta = 0.6;
    sc.alpha = 0.9;
    sc.beta = 0.9;
    CHECK(validate_scan(sc).find("alpha^2 + beta^2") != std::string::npos);
    sc = ScanConfig{};
    sc.phase_grid = {0.0, 3.5};
    CHECK(validate_scan(sc).find("[0, pi]") != std::string::npos);
    sc.phase_grid.clear();
    CHECK(validate_scan(sc).find("empty") != std::string::npos);
    sc.phase_grid = {0.2};
    CHECK_THROWS_AS(run_scan(ScanConfig{.n_samples = 10, .phase_grid = {}}),
                    std::invalid_argument);
}

TEST_CASE("moments match the closed-form law for several seeds") {
    const double eta = 0.605, chi = 0.9;
    const int n = 100000;
    // exact moments: Var(x1) = (1+eta)/4, <x1 x2> = eta cos(chi)/4,
    // Var(u,v) = (1 + eta (1 +- cos chi))/4 in the rotated pair
    const double var1_true = (1 + eta) / 4;
    const double corr_true = eta * std::cos(chi) / 4;
    const double var_u_true = (1 + eta * (1 + std::cos(chi))) / 4;
    const double var_v_true = (1 + eta * (1 - std::cos(chi))) / 4;
    const double mu4 = 3.0 / 16 + 0.75 * eta * 0.5;
    const double m22 = (1 + 2 * eta) / 16;

    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        ScanConfig sc;
        sc.n_samples = n;
        sc.phase_grid = {chi};
        sc.seed = seed;
        auto data = run_scan(sc);
        REQUIRE(int(data.size()) == n);
        auto m = sample_moments(data);

        CAPTURE(seed);
        CHECK(std::abs(m.mean1) <= 5 * std::sqrt(var1_true / n));
        CHECK(std::abs(m.var1 - var1_true) <=
              5 * std::sqrt((mu4 - var1_true * var1_true) / n));
        CHECK(std::abs(m.corr - corr_true) <=
              5 * std::sqrt((m22 - corr_true * corr_true) / n));
        // fourth moment of the rotated quadratures follows the same
        // marginal law with the photon weight eta (1 +- cos chi)/2
        double wu = eta * (1 + std::cos(chi)) / 2;
        double mu4_u = 3.0 / 16 + 0.75 * wu;
        CHECK(std::abs(m.var_u - var_u_true) <=
              5 * std::sqrt((mu4_u - var_u_true * var_u_true) / n));
        double wv = eta * (1 - std::cos(chi)) / 2;
        double mu4_v = 3.0 / 16 + 0.75 * wv;
        CHECK(std::abs(m.var_v - var_v_true) <=
              5 * std::sqrt((mu4_v - var_v_true * var_v_true) / n));
    }
}

TEST_CASE("empirical marginal tracks the analytic distribution") {
    ScanConfig sc;
    sc.n_samples = 200000;
    sc.phase_grid = {1.3};
    sc.seed = 11;
    auto data = run_scan(sc);

    std::vector<double> x1(data.size());
    std::vector<double> xv(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        x1[i] = data[i].x1;
        xv[i] = data[i].x_vac;
    }
    std::sort(x1.begin(), x1.end());
    double d_stat = 0;
    const double n = double(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        double f = marginal_cdf(x1[i], sc.eta, sc.alpha);
        d_stat = std::max(d_stat, std::abs(f - double(i) / n));
        d_stat = std::max(d_stat, std::abs(f - double(i + 1) / n));
    }
    // 95% critical value is 1.358/sqrt(n) = 0.0030; allow double
    CHECK(d_stat <= 0.0061);

    // the calibration quadrature is plain vacuum: variance 1/4,
    // fourth moment 3/16
    double s2 = 0, s4 = 0;
    for (double v : xv) {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    CHECK(std::abs(s2 / n - 0.25) <= 5 * std::sqrt(0.125 / n));
    CHECK(std::abs(s4 / n - 0.1875) <= 5 * std::sqrt(0.6 / n));
}

TEST_CASE("state phase and scan label compose into one effective phase") {
    ScanConfig a;
    a.n_samples = 2000;
    a.phase_grid = {0.7};
    a.seed = 42;
    ScanConfig b = a;
    b.phase_grid = {1.1};
    // same bin stream, same effective phase 1.1 -> identical quadratures
    auto da = run_scan(a, 0.4);
    auto db = run_scan(b, 0.0);
    REQUIRE(da.size() == db.size());
    for (std::size_t i = 0; i < da.size(); ++i) {
        CHECK(da[i].x1 == db[i].x1);
        CHECK(da[i].x2 == db[i].x2);
        CHECK(da[i].x_vac == db[i].x_vac);
        CHECK(da[i].chi == 0.7);  // labels keep the scan variable
        CHECK(db[i].chi == 1.1);
    }
}

TEST_CASE("scans are reproducible, seeded, and honor the vacuum switch") {
    ScanConfig sc;
    sc.n_samples = 4000;
    sc.phase_grid = default_phase_grid(4);
    sc.seed = 7;
    auto first = run_scan(sc);
    auto second = run_scan(sc);
    REQUIRE(first.size() == second.size());
    bool identical = true;
    for (std::size_t i = 0; i < first.size(); ++i)
        identical = identical && first[i].x1 == second[i].x1 &&
                    first[i].x2 == second[i].x2 &&
                    first[i].x_vac == second[i].x_vac &&
                    first[i].chi == second[i].chi;
    CHECK(identical);

    sc.seed = 8;
    auto other = run_scan(sc);
    bool differs = false;
    for (std::size_t i = 0; i < first.size(); ++i)
        differs = differs || first[i].x1 != other[i].x1;
    CHECK(differs);

    // each bin gets exactly n/bins events, in grid order
    std::map<double, int> counts;
    for (const auto& s : first)
        ++counts[s.chi];
    REQUIRE(counts.size() == 4);
    for (auto& [chi, cnt] : counts)
        CHECK(cnt == 1000);

    sc.include_vacuum_bin = false;
    auto dark = run_scan(sc);
    for (const auto& s : dark)
        CHECK(s.x_vac == 0.0);
}

TEST_CASE("rejection path reproduces unbalanced moments") {
    const double eta = 0.9, alpha = 0.6, beta = 0.8, chi = 2.2;
    ScanConfig sc;
    sc.n_samples = 60000;
    sc.phase_grid = {chi};
    sc.eta = eta;
    sc.alpha = alpha;
    sc.beta = beta;
    sc.seed = 17;
    auto data = run_scan(sc);

    double s11 = 0, s22 = 0, s12 = 0;
    for (const auto& s : data) {
        s11 += s.x1 * s.x1;
        s22 += s.x2 * s.x2;
        s12 += s.x1 * s.x2;
    }
    double n = double(data.size());
    double var1_true = 0.25 + eta * alpha * alpha / 2;
    double var2_true = 0.25 + eta * beta * beta / 2;
    double corr_true = eta * alpha * beta * std::cos(chi) / 2;
    double mu4_1 = 3.0 / 16 + 0.75 * eta * alpha * alpha;
    double mu4_2 = 3.0 / 16 + 0.75 * eta * beta * beta;
    double m22 = (1 + 2 * eta) / 16;
    CHECK(std::abs(s11 / n - var1_true) <=
          5 * std::sqrt((mu4_1 - var1_true * var1_true) / n));
    CHECK(std::abs(s22 / n - var2_true) <=
          5 * std::sqrt((mu4_2 - var2_true * var2_true) / n));
    CHECK(std::abs(s12 / n - corr_true) <=
          5 * std::sqrt((m22 - corr_true * corr_true) / n));
}

TEST_CASE("per-bin streams are distinct and stable") {
    Rng a = Rng::for_bin(1, 0);
    Rng b = Rng::for_bin(1, 1);
    Rng a2 = Rng::for_bin(1, 0);
    bool same = true, cross = true;
    for (int i = 0; i < 64; ++i) {
        auto va = a.next_u64();
        same = same && va == a2.next_u64();
        cross = cross && va == b.next_u64();
    }
    CHECK(same);
    CHECK_FALSE(cross);
}

} // TEST_SUITE
