#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "deepmrc/data.hpp"
#include "deepmrc/rng.hpp"

using namespace deepmrc;

namespace {

double column_corr(const Matrix& X, std::size_t a, std::size_t b) {
    const std::size_t n = X.rows();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += X(i, a);
        mb += X(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (X(i, a) - ma) * (X(i, b) - mb);
        saa += (X(i, a) - ma) * (X(i, a) - ma);
        sbb += (X(i, b) - mb) * (X(i, b) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "deepmrc_test_data";
    std::filesystem::create_directories(dir);
    return dir / name;
}

// Straight re-transcriptions of the six systematic components, written
// independently of data.hpp so transcription slips there are caught here.
double ref_m1_sys(std::span<const double> x) {
    double u = 0;
    for (int i = 0; i < 8; ++i) u += 0.5 * x[i];
    for (int i = 8; i < 15; ++i) u -= 0.5 * x[i];
    return u + std::sin(u * u);
}

double ref_m2_inner(std::span<const double> x) {
    double u = 0;
    for (int i = 0; i < 8; ++i) u += 0.5 * x[i];
    for (int i = 8; i < 15; ++i) u -= 0.5 * x[i];
    return 1.0 + u + std::cos(u * u) + std::exp(1.0 - u * u);
}

double ref_m3_sys(std::span<const double> x) {
    return x[0] * x[0] / 2 + x[1] * x[2] + std::pow(x[3] - x[4], 2) / 3 - 1 / (x[5] * x[5] + 1) -
           1 / (x[6] * x[6] + 1) - std::sin(x[7]) + std::sin(x[8] * x[9]) +
           std::exp(1 / (x[10] * x[10] + 1)) + std::exp(std::abs(x[11]) / 2) -
           std::exp(x[12] / 2) + std::tanh(x[13]) - std::tanh(1 / x[14]);
}

double ref_m4_sys(std::span<const double> x) {
    return (x[0] * x[0] + x[1] * x[1]) / 2 + x[2] * x[2] / (2 + x[3] * x[3]) -
           1 / (0.5 + x[4]) + std::sin(x[5] + x[6]) - std::sin(x[7] * x[7]) +
           (x[8] * x[8] + x[9] * x[9]) / 3 + std::exp(x[10] / 2) -
           std::exp(1 / (1 + x[11] * x[11])) + std::tanh(x[12]) + std::abs(x[13] * x[14]);
}

double ref_m5_logt_sys(std::span<const double> x) {
    const double b[15] = {-0.9, 0.8, -0.7, 0.6, -0.5, 0.4, -0.3, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, -0.8, 0.9};
    double u = 0;
    for (int i = 0; i < 15; ++i) u += b[i] * x[i];
    return std::sqrt(std::abs(u)) + std::sin(u) - 1.0;
}

double ref_m6_sys(std::span<const double> x) {
    return (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2 + std::sin(x[3] + x[4]) -
           std::exp((x[5] * x[6] + x[7]) / 3) + std::exp(1 / (x[8] * x[8] + 1)) +
           std::exp(x[9] / 2) + std::tanh(x[10] * x[11]) -
           x[12] / (0.5 + x[13] * x[13] + x[14] * x[14]);
}

}  // namespace

TEST_CASE("ar design is deterministic and independent at rho 0") {
    const Matrix a = gen_ar_gaussian(100, 5, 0.3, 7);
    const Matrix b = gen_ar_gaussian(100, 5, 0.3, 7);
    CHECK(a == b);
    CHECK(gen_ar_gaussian(100, 5, 0.3, 8) != a);

    const int n = 20000;
    const Matrix z = gen_ar_gaussian(n, 6, 0.0, 9);
    for (std::size_t j = 0; j + 1 < 6; ++j)
        CHECK(std::abs(column_corr(z, j, j + 1)) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK_THROWS_AS(gen_ar_gaussian(10, 3, 1.0, 0), ConfigError);
}

TEST_CASE("ar design lag correlations approach 0.3^k") {
    const int n = 20000;
    const Matrix X = gen_ar_gaussian(n, 10, 0.3, 123);
    for (int k = 1; k <= 3; ++k) {
        double avg = 0.0;
        int cnt = 0;
        for (std::size_t j = 0; j + static_cast<std::size_t>(k) < 10; ++j) {
            avg += column_corr(X, j, j + static_cast<std::size_t>(k));
            ++cnt;
        }
        avg /= cnt;
        CHECK(std::abs(avg - std::pow(0.3, k)) < 0.03);
    }
}

TEST_CASE("error generators") {
    const Vec a = gen_error(ErrorKind::Normal, 50, 3);
    CHECK(a == gen_error(ErrorKind::Normal, 50, 3));
    CHECK(a != gen_error(ErrorKind::Normal, 50, 4));

    const int n = 100000;
    const Vec normal = gen_error(ErrorKind::Normal, n, 5);
    double mean = 0, var = 0;
    for (double v : normal) mean += v;
    mean /= n;
    for (double v : normal) var += (v - mean) * (v - mean);
    var /= n;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 0.02);

    const Vec contam = gen_error(ErrorKind::Contaminated, n, 6);
    int big = 0;
    for (double v : contam) big += std::abs(v) > 10.0 ? 1 : 0;
    CHECK(big > 0);  // Cauchy tail mass, about 0.6% of draws
    CHECK(std::abs(static_cast<double>(big) / n - 0.0063) < 0.003);
}

TEST_CASE("chi-squared censoring draw has the right mean") {
    Rng rng(11);
    const int n = 100000;
    for (int dof : {2, 6}) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += rng.chisq(dof);
        mean /= n;
        CHECK(std::abs(mean - dof) / dof < 0.05);
    }
}

TEST_CASE("generated systematic components match independent transcriptions") {
    for (auto model : {SimModel::M1, SimModel::M2, SimModel::M3, SimModel::M4, SimModel::M5, SimModel::M6}) {
        SimSpec spec;
        spec.model = model;
        spec.n = 100;
        spec.p = 20;
        spec.error = default_error_kind(model);
        spec.seed = 42 + static_cast<std::uint64_t>(model);
        const Dataset ds = gen_model(spec);
        const Vec b = detail::model_b(model, spec.p);
        for (std::size_t i = 0; i < 100; ++i) {
            const auto x = ds.X.row(i);
            double expected = 0.0;
            switch (model) {
                case SimModel::M1: expected = ref_m1_sys(x); break;
                case SimModel::M2: expected = ref_m2_inner(x); break;
                case SimModel::M3: expected = ref_m3_sys(x); break;
                case SimModel::M4: expected = ref_m4_sys(x); break;
                case SimModel::M5: expected = ref_m5_logt_sys(x); break;
                case SimModel::M6: expected = ref_m6_sys(x); break;
            }
            CHECK(std::abs(detail::model_systematic(model, x, b) - expected) < 1e-12);
        }
    }
}

TEST_CASE("m1 response decomposes into systematic part plus the error draw") {
    SimSpec spec;
    spec.model = SimModel::M1;
    spec.n = 50;
    spec.p = 15;
    spec.error = ErrorKind::Normal;
    spec.seed = 77;
    const Dataset ds = gen_model(spec);
    // regenerate the error stream from the documented substream seed
    const Vec eps = gen_error(spec.error, spec.n, derive_seed(spec.seed, detail::kErrorSalt));
    for (std::size_t i = 0; i < ds.n(); ++i)
        CHECK(std::abs((ds.y[i] - eps[i]) - ref_m1_sys(ds.X.row(i))) < 1e-12);
}

TEST_CASE("m2 transform is piecewise linear in the displayed form") {
    CHECK(detail::m2_transform(2.5) == 2.5);
    CHECK(detail::m2_transform(-1.5) == -4.5);
    CHECK(detail::m2_transform(0.0) == 0.0);
}

TEST_CASE("m5 censoring fraction is near 20 percent") {
    SimSpec spec;
    spec.model = SimModel::M5;
    spec.n = 5000;
    spec.p = 15;
    spec.seed = 9;
    const Dataset ds = gen_model(spec);
    REQUIRE(ds.delta.has_value());
    double censored = 0;
    for (int d : *ds.delta) censored += d == 0 ? 1 : 0;
    const double frac = censored / static_cast<double>(ds.n());
    CHECK(std::abs(frac - 0.20) < 0.03);
    // truth carries the single index for M5
    REQUIRE(ds.truth.has_value());
    CHECK(ds.truth->important.size() == 15);
}

TEST_CASE("m6 censoring fraction is near 30 percent") {
    SimSpec spec;
    spec.model = SimModel::M6;
    spec.n = 5000;
    spec.p = 15;
    spec.error = ErrorKind::Contaminated;
    spec.seed = 10;
    const Dataset ds = gen_model(spec);
    REQUIRE(ds.delta.has_value());
    double censored = 0;
    for (int d : *ds.delta) censored += d == 0 ? 1 : 0;
    CHECK(std::abs(censored / static_cast<double>(ds.n()) - 0.30) < 0.04);
}

TEST_CASE("generation requires at least fifteen features") {
    SimSpec spec;
    spec.p = 10;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("distinct seeds give distinct datasets") {
    SimSpec a;
    a.seed = 1;
    SimSpec b;
    b.seed = 2;
    CHECK(gen_model(a).y != gen_model(b).y);
    SimSpec c = a;
    CHECK(gen_model(a).y == gen_model(c).y);
}

TEST_CASE("csv round trip") {
    SimSpec spec;
    spec.model = SimModel::M5;
    spec.n = 60;
    spec.p = 15;
    spec.seed = 5;
    const Dataset ds = gen_model(spec);
    const auto path = temp_file("roundtrip.csv");
    save_csv(ds, path.string());
    const Dataset back = load_csv(path.string());

    REQUIRE(back.n() == ds.n());
    REQUIRE(back.p() == ds.p());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.p(); ++j)
            max_diff = std::max(max_diff, std::abs(ds.X(i, j) - back.X(i, j)));
        max_diff = std::max(max_diff, std::abs(ds.y[i] - back.y[i]));
    }
    CHECK(max_diff < 1e-12);
    REQUIRE(back.delta.has_value());
    CHECK(*back.delta == *ds.delta);
    CHECK(back.names == ds.names);
}

TEST_CASE("csv rejects malformed inputs") {
    const auto no_y = temp_file("no_y.csv");
    std::ofstream(no_y) << "x1,x2\n1,2\n";
    CHECK_THROWS_AS(load_csv(no_y.string()), DataError);

    const auto bad_delta = temp_file("bad_delta.csv");
    std::ofstream(bad_delta) << "x1,y,delta\n1,2,2\n";
    CHECK_THROWS_AS(load_csv(bad_delta.string()), DataError);

    const auto non_numeric = temp_file("non_numeric.csv");
    std::ofstream(non_numeric) << "x1,y\n1,abc\n";
    CHECK_THROWS_AS(load_csv(non_numeric.string()), DataError);

    const auto ragged = temp_file("ragged.csv");
    std::ofstream(ragged) << "x1,x2,y\n1,2,3\n4,5\n";
    CHECK_THROWS_AS(load_csv(ragged.string()), DataError);

    const auto missing = temp_file("missing.csv");
    std::ofstream(missing) << "x1,x2,y\n1,,3\n";
    CHECK_THROWS_AS(load_csv(missing.string()), DataError);

    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("split sizes, disjointness and determinism") {
    SimSpec spec;
    spec.n = 10;
    spec.seed = 3;
    const Dataset ds = gen_model(spec);
    const auto parts = split(ds, 0.7, 0.1, 0.2, 99);
    CHECK(parts.train.n() == 7);
    CHECK(parts.valid.n() == 1);
    CHECK(parts.test.n() == 2);

    // partition check via multiset of y values
    Vec all;
    for (const auto* d : {&parts.train, &parts.valid, &parts.test})
        for (double v : d->y) all.push_back(v);
    Vec orig = ds.y;
    std::sort(all.begin(), all.end());
    std::sort(orig.begin(), orig.end());
    CHECK(all == orig);

    const auto parts2 = split(ds, 0.7, 0.1, 0.2, 99);
    CHECK(parts2.train.y == parts.train.y);
    const auto parts3 = split(ds, 0.7, 0.1, 0.2, 100);
    CHECK(parts3.train.y != parts.train.y);

    CHECK_THROWS_AS(split(ds, 0.5, 0.5, 0.0, 1), ConfigError);
    SimSpec tiny;
    tiny.n = 5;
    CHECK_THROWS_AS(split(gen_model(tiny), 0.9, 0.05, 0.05, 1), DataError);
}

TEST_CASE("standardize centers by train statistics only") {
    SimSpec spec;
    spec.n = 200;
    spec.seed = 21;
    Dataset train = gen_model(spec);
    SimSpec spec2 = spec;
    spec2.seed = 22;
    Dataset test = gen_model(spec2);
    // shift the test set so its own mean differs
    for (std::size_t i = 0; i < test.n(); ++i) test.X(i, 0) += 5.0;

    const auto st = Standardizer::fit(train);
    Dataset train_t = train, test_t = test;
    st.apply(train_t);
    st.apply(test_t);

    for (std::size_t j = 0; j < train_t.p(); ++j) {
        double m = 0;
        for (std::size_t i = 0; i < train_t.n(); ++i) m += train_t.X(i, j);
        CHECK(std::abs(m / static_cast<double>(train_t.n())) < 1e-12);
    }
    // test transformed with train statistics keeps its shift
    double m0 = 0;
    for (std::size_t i = 0; i < test_t.n(); ++i) m0 += test_t.X(i, 0);
    CHECK(m0 / static_cast<double>(test_t.n()) > 3.0);

    // constant column: centered, scale 1
    Dataset cst = train;
    for (std::size_t i = 0; i < cst.n(); ++i) cst.X(i, 1) = 4.0;
    const auto st2 = Standardizer::fit(cst);
    CHECK(st2.scale[1] == 1.0);
    Dataset cst_t = cst;
    st2.apply(cst_t);
    for (std::size_t i = 0; i < cst_t.n(); ++i) CHECK(cst_t.X(i, 1) == 0.0);
}
