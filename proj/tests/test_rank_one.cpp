#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spectensor/rank_one.hpp"

using namespace spectensor;

namespace {

Tensor4 random_xtilde(int n, int p, int d, int nw, uint64_t seed) {
    Tensor4 t(n, p, d, nw);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& v : t.data()) v = unif(rng);
    return t;
}

Eigen::MatrixXd toy_gram(int nw, uint64_t seed, double off_scale = 0.3) {
    // diagonally dominant symmetric positive matrix, entries > 0
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    Eigen::MatrixXd g(nw, nw);
    for (int r = 0; r < nw; ++r) {
        g(r, r) = 1.0;
        for (int c = r + 1; c < nw; ++c) g(r, c) = g(c, r) = off_scale * unif(rng);
    }
    return g;
}

RankOneData make_rank_one_data(int n, int p, int d, int nw, uint64_t seed) {
    RankOneData data;
    data.xtilde = random_xtilde(n, p, d, nw, seed);
    data.gram = toy_gram(nw, seed + 1);
    std::mt19937_64 rng(seed + 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    data.y = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
    return data;
}

}  // namespace

TEST_CASE("predict is the trilinear contraction") {
    Tensor4 xt(1, 1, 1, 1);
    xt(0, 0, 0, 0) = 4.0;
    RankOneModel m;
    m.alpha = Eigen::VectorXd::Constant(1, 2.0);
    m.beta = Eigen::VectorXd::Constant(1, 3.0);
    m.gamma = Eigen::VectorXd::Constant(1, 0.5);
    CHECK(predict_sample(m, xt, 0) == doctest::Approx(12.0));

    m.gamma.setZero();
    CHECK(predict_sample(m, xt, 0) == doctest::Approx(0.0));
}

TEST_CASE("predict is invariant under compensating rescaling") {
    Tensor4 xt = random_xtilde(3, 2, 3, 4, 1);
    RankOneModel m;
    m.alpha = Eigen::VectorXd::LinSpaced(2, 0.5, 1.5);
    m.beta = Eigen::VectorXd::LinSpaced(3, 0.2, 1.0);
    m.gamma = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
    Eigen::VectorXd base = predict_all(m, xt);

    RankOneModel scaled = m;
    scaled.alpha *= 2.0;
    scaled.beta *= 5.0;
    scaled.gamma *= 0.1;
    CHECK((predict_all(scaled, xt) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("objective evaluates the five terms") {
    RankOneData data = make_rank_one_data(4, 2, 2, 3, 7);
    RankOneModel zero;
    zero.alpha = Eigen::VectorXd::Zero(2);
    zero.beta = Eigen::VectorXd::Zero(2);
    zero.gamma = Eigen::VectorXd::Zero(3);
    double pure_data = data.y.squaredNorm() / (2.0 * 4);
    CHECK(objective(zero, data, {1.0, 1.0, 1.0, 1.0}) == doctest::Approx(pure_data));

    RankOneModel m;
    m.alpha = Eigen::VectorXd::Constant(2, 0.7);
    m.beta = Eigen::VectorXd::Constant(2, 0.4);
    m.gamma = Eigen::VectorXd::Constant(3, 0.9);  // constant: fused term is 0

    Eigen::VectorXd r = data.y - predict_all(m, data.xtilde);
    double ls = r.squaredNorm() / (2.0 * 4);
    CHECK(objective(m, data, {0, 0, 0, 0}) == doctest::Approx(ls));

    double ka = 0.3, kb = 0.2, kg = 0.6, kG = 11.0;
    double expect = ls + ka / std::sqrt(2.0) * m.alpha.norm() +
                    kb / std::sqrt(2.0) * m.beta.norm() + kg / 3.0 * m.gamma.lpNorm<1>();
    CHECK(objective(m, data, {ka, kb, kg, kG}) == doctest::Approx(expect));

    // non-constant gamma: fused term is the full double sum
    m.gamma << 1.0, -0.5, 0.25;
    double fused = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            fused += data.gram(a, b) * std::abs(m.gamma[a] - m.gamma[b]);
    double base = objective(m, data, {0, 0, 0, 0});
    CHECK(objective(m, data, {0, 0, 0, kG}) == doctest::Approx(base + kG / 9.0 * fused));
}

TEST_CASE("smooth data-term gradient matches finite differences") {
    RankOneData data = make_rank_one_data(5, 2, 2, 4, 31);
    RankOneModel m;
    m.alpha = Eigen::VectorXd::Constant(2, 0.8);
    m.beta = Eigen::VectorXd::Constant(2, 0.6);
    m.gamma = Eigen::VectorXd::LinSpaced(4, -0.5, 1.0);

    // gradient wrt gamma of (1/2n)||y - U gamma||^2 is (1/n) U'(U gamma - y)
    Eigen::MatrixXd U = gamma_design(data.xtilde, m.alpha, m.beta);
    Eigen::VectorXd grad = U.transpose() * (U * m.gamma - data.y) / 5.0;
    double h = 1e-6;
    for (int l = 0; l < 4; ++l) {
        Eigen::VectorXd gp = m.gamma, gm = m.gamma;
        gp[l] += h;
        gm[l] -= h;
        double fp = (data.y - U * gp).squaredNorm() / (2.0 * 5);
        double fm = (data.y - U * gm).squaredNorm() / (2.0 * 5);
        CHECK(grad[l] == doctest::Approx((fp - fm) / (2.0 * h)).epsilon(1e-5));
    }
}

TEST_CASE("design matrices are consistent with predict") {
    Tensor4 xt = random_xtilde(3, 2, 4, 5, 3);
    RankOneModel m;
    m.alpha = Eigen::VectorXd::LinSpaced(2, 0.3, 1.1);
    m.beta = Eigen::VectorXd::LinSpaced(4, 0.1, 0.9);
    m.gamma = Eigen::VectorXd::LinSpaced(5, -0.4, 0.8);
    Eigen::VectorXd pred = predict_all(m, xt);

    CHECK((alpha_design(xt, m.beta, m.gamma) * m.alpha - pred).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((beta_design(xt, m.alpha, m.gamma) * m.beta - pred).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((gamma_design(xt, m.alpha, m.beta) * m.gamma - pred).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nonnegative l2 solve: closed forms and shrinkage to zero") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(8, 3, [&](Eigen::Index, Eigen::Index) {
        return std::abs(gauss(rng));
    });
    Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(8, [&](Eigen::Index) { return gauss(rng); });

    // large penalty drives the block to zero
    Eigen::VectorXd a0 = solve_nonneg_l2(M, y, 1e6, Eigen::VectorXd::Constant(3, 0.5));
    CHECK(a0.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    // p = 1, no penalty: scalar nonnegative least squares
    Eigen::MatrixXd m1 = M.col(0);
    Eigen::VectorXd a1 = solve_nonneg_l2(m1, y, 0.0, Eigen::VectorXd::Constant(1, 0.1));
    double closed = std::max(0.0, m1.col(0).dot(y) / m1.col(0).squaredNorm());
    CHECK(a1[0] == doctest::Approx(closed).epsilon(1e-6));
}

TEST_CASE("nonnegative l2 solve matches the grid-refinement oracle") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(10, 3, [&](Eigen::Index, Eigen::Index) {
            return std::abs(gauss(rng));
        });
        Eigen::VectorXd y =
            Eigen::VectorXd::NullaryExpr(10, [&](Eigen::Index) { return gauss(rng); });
        double c = 0.05;
        Eigen::VectorXd a = solve_nonneg_l2(M, y, c, Eigen::VectorXd::Constant(3, 0.2));

        auto f = [&](const Eigen::VectorXd& v) {
            return (y - M * v).squaredNorm() / (2.0 * 10) + c * v.norm();
        };
        Eigen::VectorXd astar = oracles::grid_refine_minimize(
            f, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 2.0), 9, 18, true);
        CHECK((a - astar).cwiseAbs().maxCoeff() <= 1e-5);
        CHECK(oracles::nonneg_l2_kkt_residual(M, y, c, a) <= 1e-6);
    }
}

TEST_CASE("gamma solve: large l1 penalty gives zero") {
    RankOneData data = make_rank_one_data(6, 1, 1, 4, 51);
    Eigen::MatrixXd U = gamma_design(data.xtilde, Eigen::VectorXd::Ones(1),
                                     Eigen::VectorXd::Ones(1));
    Eigen::VectorXd g = solve_gamma(U, data.y, 1e6, 0.0, data.gram,
                                    Eigen::VectorXd::Zero(4));
    CHECK(g.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("gamma solve with kG=0 matches plain lasso coordinate descent") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        int n = 12, nw = 5;
        Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(
            n, nw, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
        Eigen::VectorXd y =
            Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
        double kg = 0.3;  // effective lasso weight is kg / nw
        Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(nw, nw);

        GammaOptions opts;
        opts.abs_tol = 1e-10;
        opts.rel_tol = 1e-9;
        opts.max_iter = 200000;
        Eigen::VectorXd admm = solve_gamma(U, y, kg, 0.0, gram, Eigen::VectorXd::Zero(nw), opts);
        Eigen::VectorXd cd = oracles::lasso_cd(U, y, kg / nw);
        CHECK((admm - cd).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("gamma solve matches the dense grid oracle and passes the dual check") {
    std::mt19937_64 rng(59);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        int n = 10, nw = 4;
        Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(
            n, nw, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
        Eigen::VectorXd y =
            Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
        Eigen::MatrixXd gram = toy_gram(nw, 100 + static_cast<uint64_t>(trial));
        double kg = 0.2, kG = 0.5;

        GammaOptions opts;
        opts.abs_tol = 1e-9;
        opts.rel_tol = 1e-8;
        Eigen::VectorXd g = solve_gamma(U, y, kg, kG, gram, Eigen::VectorXd::Zero(nw), opts);

        auto f = [&](const Eigen::VectorXd& v) {
            double fused = 0.0;
            for (int a = 0; a < nw; ++a)
                for (int b = 0; b < nw; ++b) fused += gram(a, b) * std::abs(v[a] - v[b]);
            return (y - U * v).squaredNorm() / (2.0 * n) + kg / nw * v.lpNorm<1>() +
                   kG / double(nw * nw) * fused;
        };
        Eigen::VectorXd gstar = oracles::grid_refine_minimize(
            f, Eigen::VectorXd::Constant(nw, -2.0), Eigen::VectorXd::Constant(nw, 2.0), 9, 18);
        CHECK((g - gstar).cwiseAbs().maxCoeff() <= 1e-4);

        Eigen::MatrixXd D = build_penalty_matrix(kg, kG, gram, opts.graph_eps);
        CHECK(oracles::gen_lasso_kkt_residual(U, y, D, g) <= 1e-5);
    }
}

TEST_CASE("huge fused penalty forces a constant gamma") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int n = 15, nw = 5;
    Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(
        n, nw, [&](Eigen::Index, Eigen::Index) { return 1.0 + std::abs(gauss(rng)); });
    Eigen::VectorXd y =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return 2.0 + gauss(rng); });
    Eigen::MatrixXd gram = toy_gram(nw, 71, 0.8);

    Eigen::VectorXd g = solve_gamma(U, y, 1e-4, 1e7, gram, Eigen::VectorXd::Zero(nw));
    double mx = g.cwiseAbs().maxCoeff();
    REQUIRE(mx > 0.0);
    CHECK(g.maxCoeff() - g.minCoeff() <= 1e-4 * mx);

    // the common value solves the 1-variable lasso on the summed design
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(nw);
    Eigen::VectorXd usum = U * ones;
    Eigen::VectorXd scalar = oracles::lasso_cd(usum, y, 1e-4 / nw * nw);  // l1 on nw copies
    CHECK(g.mean() == doctest::Approx(scalar[0]).epsilon(1e-2));
}

TEST_CASE("alternating fit: monotone trajectory on random data") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        RankOneData data = make_rank_one_data(8, 2, 3, 4, 200 + seed);
        FitOptions opts;
        opts.max_outer = 60;
        auto [model, report] = fit_alternating(data, {1e-3, 1e-3, 1e-2, 1e-2}, opts);
        for (size_t i = 1; i < report.trajectory.size(); ++i)
            CHECK(report.trajectory[i] <=
                  report.trajectory[i - 1] + 1e-10 * (1.0 + std::abs(report.trajectory[i - 1])));
        CHECK((model.alpha.array() >= 0.0).all());
        CHECK((model.beta.array() >= 0.0).all());
    }
}

TEST_CASE("noiseless planted data is recovered quickly") {
    int n = 12, p = 2, d = 3, nw = 4;
    Tensor4 xt = random_xtilde(n, p, d, nw, 9);
    RankOneModel planted;
    planted.alpha = Eigen::VectorXd::LinSpaced(p, 0.5, 1.0);
    planted.beta = Eigen::VectorXd::LinSpaced(d, 0.4, 1.2);
    planted.gamma = Eigen::VectorXd::LinSpaced(nw, -1.0, 1.0);

    RankOneData data;
    data.xtilde = xt;
    data.gram = toy_gram(nw, 10);
    data.y = predict_all(planted, xt);

    FitOptions opts;
    opts.max_outer = 50;
    auto [model, report] = fit_alternating(data, {0.0, 0.0, 1e-6, 0.0}, opts);
    Eigen::VectorXd pred = predict_all(model, data.xtilde);
    Eigen::VectorXd err = (pred - data.y).cwiseAbs();
    std::sort(err.data(), err.data() + err.size());
    CHECK(err[err.size() / 2] <= 1e-3);
}

TEST_CASE("p=d=1 reduces to the standalone gamma solve") {
    RankOneData data = make_rank_one_data(10, 1, 1, 5, 301);
    RegParams reg{1e-3, 1e-3, 1e-2, 1e-2};
    auto [model, report] = fit_alternating(data, reg);
    CHECK(model.alpha[0] == doctest::Approx(1.0));
    CHECK(model.beta[0] == doctest::Approx(1.0));

    Eigen::MatrixXd U = gamma_design(data.xtilde, model.alpha, model.beta);
    GammaOptions gopts;
    gopts.abs_tol = 1e-10;
    gopts.rel_tol = 1e-9;
    Eigen::VectorXd gref = solve_gamma(U, data.y, reg.kappa_gamma, reg.kappa_gram, data.gram,
                                       Eigen::VectorXd::Zero(5), gopts);
    RankOneModel ref = model;
    ref.gamma = gref;
    CHECK(std::abs(objective(model, data, reg) - objective(ref, data, reg)) <= 1e-8);
}

TEST_CASE("d=1 runs the two-block path with beta frozen") {
    RankOneData data = make_rank_one_data(10, 3, 1, 4, 307);
    auto [model, report] = fit_alternating(data, {1e-3, 1e-3, 1e-2, 1e-2});
    CHECK(model.beta.size() == 1);
    CHECK(model.beta[0] == doctest::Approx(1.0));
    CHECK(model.alpha.size() == 3);
}

TEST_CASE("dominant regularization reports the zero model") {
    RankOneData data = make_rank_one_data(8, 2, 2, 3, 311);
    auto [model, report] = fit_alternating(data, {1e5, 1e5, 1e5, 0.0});
    CHECK(report.zero_model);
    CHECK(report.converged);
    CHECK(model.alpha.isZero(0.0));
    CHECK(model.beta.isZero(0.0));
    CHECK(model.gamma.isZero(0.0));
}

TEST_CASE("refit from a rescaled init reaches the same objective") {
    RankOneData data = make_rank_one_data(10, 2, 2, 4, 313);
    RegParams reg{1e-3, 1e-3, 1e-2, 1e-3};
    FitOptions a;
    a.tol_outer = 1e-9;
    a.max_outer = 500;
    auto [m1, r1] = fit_alternating(data, reg, a);
    FitOptions b = a;
    b.restarts = 3;
    b.seed = 99;
    auto [m2, r2] = fit_alternating(data, reg, b);
    CHECK(std::abs(r1.final_objective - r2.final_objective) <= 1e-6);
}

TEST_CASE("eval_coefficient_function") {
    KernelSpec spec{KernelFamily::lorentzian, 1.0};
    SpectralGrid grid({0.0, 5.0, 9.0});
    RankOneModel m;
    m.alpha = m.beta = Eigen::VectorXd::Ones(1);
    m.gamma = Eigen::VectorXd::Zero(3);
    CHECK(eval_coefficient_function(m, spec, grid, 3.3) == doctest::Approx(0.0));

    m.gamma = Eigen::VectorXd::Unit(3, 0);
    CHECK(eval_coefficient_function(m, spec, grid, 0.0) == doctest::Approx(1.0));

    m.gamma << 0.5, -1.0, 2.0;
    // far from every kept wavenumber the kernel tail bounds the curve
    double far = eval_coefficient_function(m, spec, grid, 9.0 + 150.0);
    CHECK(std::abs(far) <= 1e-4 * m.gamma.lpNorm<1>());
}
