#include <doctest.h>

#include <random>

#include "spectensor/kernel.hpp"
#include "spectensor/selection.hpp"

using namespace spectensor;

namespace {

CoeffTensor make_coeffs(int n, int p, int d, int nw) {
    CoeffTensor c;
    c.values = Tensor4(n, p, d, nw);
    std::vector<double> pts(static_cast<size_t>(nw));
    for (int l = 0; l < nw; ++l) pts[static_cast<size_t>(l)] = double(l);
    c.grid = SpectralGrid(pts);
    return c;
}

}  // namespace

TEST_CASE("all-zero coefficients give zero scores") {
    CoeffTensor c = make_coeffs(3, 2, 2, 5);
    CHECK(compute_scores(c, ScoreMode::weighted).isZero(0.0));
    CHECK(compute_scores(c, ScoreMode::frequency).isZero(0.0));
}

TEST_CASE("single large coefficient at paper dimensions") {
    CoeffTensor c = make_coeffs(37, 5, 10, 6);
    c.values(12, 2, 7, 3) = 1850.0;  // pdn = 5 * 10 * 37
    Eigen::VectorXd s = compute_scores(c, ScoreMode::weighted);
    CHECK(s[3] == doctest::Approx(1.0));
    for (int l = 0; l < 6; ++l)
        if (l != 3) CHECK(s[l] == doctest::Approx(0.0));
}

TEST_CASE("frequency scores saturate at 1 and ignore magnitude") {
    CoeffTensor c = make_coeffs(2, 2, 2, 3);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) c.values(k, i, j, 1) = 0.001 * (k + 1);
    Eigen::VectorXd s = compute_scores(c, ScoreMode::frequency);
    CHECK(s[0] == doctest::Approx(0.0));
    CHECK(s[1] == doctest::Approx(1.0));
    CHECK(s[2] == doctest::Approx(0.0));
}

TEST_CASE("scores are invariant under sample permutation") {
    CoeffTensor c = make_coeffs(4, 2, 2, 5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : c.values.data()) v = unif(rng);

    CoeffTensor perm = make_coeffs(4, 2, 2, 5);
    int order[4] = {2, 0, 3, 1};
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 5; ++l)
                    perm.values(k, i, j, l) = c.values(order[k], i, j, l);

    Eigen::VectorXd a = compute_scores(c, ScoreMode::weighted);
    Eigen::VectorXd b = compute_scores(perm, ScoreMode::weighted);
    CHECK((a - b).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("weighted scores scale linearly, frequency scores do not move") {
    CoeffTensor c = make_coeffs(3, 2, 2, 4);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : c.values.data()) v = unif(rng);
    Eigen::VectorXd w1 = compute_scores(c, ScoreMode::weighted);
    Eigen::VectorXd f1 = compute_scores(c, ScoreMode::frequency);
    for (double& v : c.values.data()) v *= 3.5;
    Eigen::VectorXd w2 = compute_scores(c, ScoreMode::weighted);
    Eigen::VectorXd f2 = compute_scores(c, ScoreMode::frequency);
    CHECK((w2 - 3.5 * w1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f2 - f1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("select_top picks the largest scores, ties to the smaller index") {
    SpectralGrid grid({10.0, 20.0, 30.0, 40.0});
    Eigen::VectorXd s(4);
    s << 0.3, 0.9, 0.9, 0.1;

    SelectedSubset two = select_top(s, grid, 2);
    CHECK(two.kept_indices == std::vector<int>{1, 2});

    SelectedSubset one = select_top(s, grid, 1);
    CHECK(one.kept_indices == std::vector<int>{1});  // tie broken toward index 1
    CHECK(one.reduced.size() == 1);
    CHECK(one.reduced[0] == doctest::Approx(20.0));

    SelectedSubset all = select_top(s, grid, 4);
    CHECK(all.kept_indices == std::vector<int>{0, 1, 2, 3});

    CHECK_THROWS_AS(select_top(s, grid, 5), std::invalid_argument);
}

TEST_CASE("select_top is invariant under positive scaling of the scores") {
    SpectralGrid grid = SpectralGrid::uniform(0.0, 9.0, 10);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(10, [&](Eigen::Index) { return unif(rng); });
    SelectedSubset a = select_top(s, grid, 4);
    SelectedSubset b = select_top((17.0 * s).eval(), grid, 4);
    CHECK(a.kept_indices == b.kept_indices);
}

TEST_CASE("restrict_tensor keeps the requested wavenumbers in order") {
    Tensor4 t(2, 1, 1, 4);
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 4; ++l) t(k, 0, 0, l) = 10.0 * k + l;
    Tensor4 r = restrict_tensor(t, {0, 2});
    CHECK(r.num_wavenumbers() == 2);
    CHECK(r(1, 0, 0, 0) == doctest::Approx(10.0));
    CHECK(r(1, 0, 0, 1) == doctest::Approx(12.0));
}

TEST_CASE("transform_xtilde with identity gram is the identity") {
    Tensor4 t(2, 2, 1, 3);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : t.data()) v = unif(rng);
    Tensor4 xt = transform_xtilde(t, Eigen::MatrixXd::Identity(3, 3));
    CHECK(xt.data() == t.data());
}

TEST_CASE("single kept wavenumber at W=1 scales by pi/2") {
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    Eigen::MatrixXd gram = gram_matrix(spec, SpectralGrid({42.0})).entries;
    Tensor4 t(1, 1, 1, 1);
    t(0, 0, 0, 0) = 2.0;
    Tensor4 xt = transform_xtilde(t, gram);
    CHECK(xt(0, 0, 0, 0) == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("transform_xtilde is linear") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd gram(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) gram(r, c) = unif(rng);
    Tensor4 a(2, 1, 2, 3), b(2, 1, 2, 3);
    for (double& v : a.data()) v = unif(rng);
    for (double& v : b.data()) v = unif(rng);

    Tensor4 combo(2, 1, 2, 3);
    for (size_t i = 0; i < combo.size(); ++i)
        combo.data()[i] = 2.0 * a.data()[i] - 0.5 * b.data()[i];

    Tensor4 lhs = transform_xtilde(combo, gram);
    Tensor4 ta = transform_xtilde(a, gram);
    Tensor4 tb = transform_xtilde(b, gram);
    for (size_t i = 0; i < lhs.size(); ++i)
        CHECK(lhs.data()[i] ==
              doctest::Approx(2.0 * ta.data()[i] - 0.5 * tb.data()[i]).epsilon(1e-12));
}
