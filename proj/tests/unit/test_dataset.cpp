#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "tpad/dataset.hpp"
#include "tpad/format.hpp"

using namespace tpad;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("tpad_ds_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("fit_normalizer: two-point column") {
    Matrix x(2, 1);
    x << 1, 3;
    Normalizer norm = fit_normalizer(x);
    CHECK(norm.mean[0] == doctest::Approx(2.0));
    CHECK(norm.scale[0] == doctest::Approx(1.0)); // population std of (1,3)
}

TEST_CASE("fit_normalizer: constant column floors to scale 1") {
    Matrix x(3, 1);
    x << 5, 5, 5;
    Normalizer norm = fit_normalizer(x);
    CHECK(norm.mean[0] == doctest::Approx(5.0));
    CHECK(norm.scale[0] == 1.0);
}

TEST_CASE("fit_normalizer: output has mean 0 and std 1 per column") {
    Rng rng(2);
    Matrix x(200, 3);
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) x(i, j) = rng.gaussian(3.0 * (j + 1), 0.5 * (j + 1));
    }
    Normalizer norm = fit_normalizer(x);
    Matrix xn = apply(norm, x);
    for (Index j = 0; j < 3; ++j) {
        double mean = xn.col(j).mean();
        double std = std::sqrt((xn.col(j).array() - mean).square().sum() / xn.rows());
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std - 1.0) < 1e-9);
    }
}

TEST_CASE("fit_normalizer: rejects fewer than 2 observations") {
    CHECK_THROWS_AS(fit_normalizer(Matrix::Zero(1, 2)), InsufficientDataError);
}

TEST_CASE("normalizer: apply then invert is identity") {
    Rng rng(4);
    Matrix x(50, 4);
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) x(i, j) = rng.gaussian(1.0, 2.0);
    }
    Normalizer norm = fit_normalizer(x);
    Matrix back = invert(norm, apply(norm, x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("normalizer: direct arithmetic and shape checks") {
    Normalizer norm;
    norm.mean = Vector::Constant(1, 2.0);
    norm.scale = Vector::Constant(1, 1.0);
    Matrix x(1, 1);
    x << 3;
    CHECK(apply(norm, x)(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(apply(norm, Matrix::Zero(1, 2)), ShapeError);
    CHECK_THROWS_AS(invert(norm, Matrix::Zero(1, 2)), ShapeError);
}

TEST_CASE("normalizer: test-set normalization uses train statistics") {
    Matrix train(4, 1), test(4, 1);
    train << 0, 1, 2, 3;
    test << 10, 11, 12, 13; // shifted distribution
    Normalizer norm = fit_normalizer(train);
    Matrix test_n = apply(norm, test);
    CHECK(std::abs(test_n.col(0).mean()) > 1.0); // definitely not re-centered
}

TEST_CASE("normalizer: statistics depend only on the training split") {
    Rng rng(8);
    Matrix x(20, 2);
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < 2; ++j) x(i, j) = rng.gaussian(0.0, 1.0);
    }
    Matrix train = x.topRows(10);
    Normalizer a = fit_normalizer(train);
    x.bottomRows(10).setConstant(1e6); // mutate non-train rows
    Normalizer b = fit_normalizer(x.topRows(10));
    CHECK((a.mean.array() == b.mean.array()).all());
    CHECK((a.scale.array() == b.scale.array()).all());
}

TEST_CASE("kfold: exact division and balance rule") {
    Rng rng(1);
    FoldPlan plan = kfold(10, 5, rng);
    std::vector<int> sizes(5, 0);
    for (int f : plan.assignments) ++sizes[static_cast<size_t>(f)];
    for (int s : sizes) CHECK(s == 2);

    Rng rng2(1);
    FoldPlan plan11 = kfold(11, 5, rng2);
    std::vector<int> sizes11(5, 0);
    for (int f : plan11.assignments) ++sizes11[static_cast<size_t>(f)];
    std::multiset<int> got(sizes11.begin(), sizes11.end());
    CHECK(got == std::multiset<int>({3, 2, 2, 2, 2}));
}

TEST_CASE("kfold: folds partition the index set") {
    Rng rng(3);
    FoldPlan plan = kfold(37, 4, rng);
    std::set<Index> all;
    size_t total = 0;
    for (int f = 0; f < 4; ++f) {
        auto val = plan.validation_indices(f);
        total += val.size();
        for (Index i : val) CHECK(all.insert(i).second); // pairwise disjoint
    }
    CHECK(total == 37);
    // train/val complement
    auto train0 = plan.training_indices(0);
    auto val0 = plan.validation_indices(0);
    CHECK(train0.size() + val0.size() == 37);
}

TEST_CASE("kfold: deterministic per seed, invalid k rejected") {
    Rng a(5), b(5);
    CHECK(kfold(20, 3, a).assignments == kfold(20, 3, b).assignments);
    Rng c(5);
    CHECK_THROWS_AS(kfold(3, 4, c), ParamError);
    Rng d(5);
    CHECK_THROWS_AS(kfold(10, 1, d), ParamError);
}

TEST_CASE("load_csv: plain two-column file") {
    TempDir tmp;
    write_file(tmp.file("d.csv"), "a,b\n1,2\n3,4\n");
    Dataset data = load_csv(tmp.file("d.csv"));
    REQUIRE(data.n() == 2);
    REQUIRE(data.m() == 2);
    CHECK(data.x(0, 0) == 1.0);
    CHECK(data.x(1, 1) == 4.0);
    CHECK(data.column_names == std::vector<std::string>({"a", "b"}));
    CHECK(!data.labels);
}

TEST_CASE("load_csv: label column split off") {
    TempDir tmp;
    write_file(tmp.file("d.csv"), "a,y\n1,0\n2,1\n");
    Dataset data = load_csv(tmp.file("d.csv"), "y");
    REQUIRE(data.n() == 2);
    REQUIRE(data.m() == 1);
    REQUIRE(data.labels.has_value());
    CHECK((*data.labels)[0] == 0);
    CHECK((*data.labels)[1] == 1);
}

TEST_CASE("load_csv: errors carry row/column context") {
    TempDir tmp;
    write_file(tmp.file("bad.csv"), "a,b\n1,2\n3,oops\n");
    try {
        load_csv(tmp.file("bad.csv"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("'b'") != std::string::npos);
    }

    write_file(tmp.file("nan.csv"), "a\nnan\n");
    CHECK_THROWS_AS(load_csv(tmp.file("nan.csv")), FormatError);

    write_file(tmp.file("lab.csv"), "a,y\n1,2\n");
    CHECK_THROWS_AS(load_csv(tmp.file("lab.csv"), "y"), FormatError); // label not 0/1
    CHECK_THROWS_AS(load_csv(tmp.file("lab.csv"), "nope"), ConfigError);
    CHECK_THROWS_AS(load_csv(tmp.file("missing.csv")), FormatError);

    write_file(tmp.file("dup.csv"), "a,a\n1,2\n");
    CHECK_THROWS_AS(load_csv(tmp.file("dup.csv")), FormatError);

    write_file(tmp.file("ragged.csv"), "a,b\n1\n");
    CHECK_THROWS_AS(load_csv(tmp.file("ragged.csv")), FormatError);
}

TEST_CASE("csv round-trip: save then load is bit-identical") {
    TempDir tmp;
    Rng rng(6);
    Dataset data;
    data.x.resize(40, 3);
    for (Index i = 0; i < data.x.rows(); ++i) {
        for (Index j = 0; j < 3; ++j) data.x(i, j) = rng.gaussian(0.0, 1e3);
    }
    data.x(0, 0) = 0.1; // classic non-representable value
    data.x(1, 1) = 1.0 / 3.0;
    data.column_names = {"u", "v", "w"};
    std::vector<int> labels;
    for (Index i = 0; i < 40; ++i) labels.push_back(static_cast<int>(i % 2));
    data.labels = labels;

    save_csv(data, tmp.file("rt.csv"));
    Dataset back = load_csv(tmp.file("rt.csv"), "label");
    REQUIRE(back.n() == data.n());
    REQUIRE(back.m() == data.m());
    CHECK((back.x.array() == data.x.array()).all());
    CHECK(*back.labels == *data.labels);
    CHECK(back.column_names == data.column_names);
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(44);
    for (int i = 0; i < 1000; ++i) {
        double v = rng.gaussian(0.0, 1e6);
        CHECK(parse_double(format_double(v)) == v);
    }
}
