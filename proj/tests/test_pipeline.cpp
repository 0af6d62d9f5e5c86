#include "dfi/errors.hpp"
#include "dfi/pipeline.hpp"
#include "dfi/seeds.hpp"
#include "dfi/testmodels.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dfi;

namespace {

DataSummarySet small_set()
{
    DataSummarySet set;
    set.id = 1;
    set.coords = {1.0, 2.0, 3.0};
    set.y = {1.0, 2.0, 3.0};
    set.s = {0.1, 0.2, 0.3};
    return set;
}

Predictor identity_predictor()
{
    Predictor p;
    p.inputs = 1;
    p.outputs = 1;
    p.fn = [](std::span<const double> nu, std::span<double> out) { out[0] = nu[0]; };
    return p;
}

InferenceSetup arrhenius_setup(const ParameterSpace& space, int k, long long steps)
{
    InferenceSetup setup;
    setup.prior = default_prior(space);
    setup.start = space.nominal();
    setup.scales = space.sixth_widths();
    setup.sampler.steps = steps;
    setup.sampler.burn_in = steps / 5;
    setup.sampler.subsample = 5;
    setup.k = k;
    setup.epsilon = 0.2;
    setup.master_seed = 77;
    return setup;
}

const std::vector<double> temperatures = {1000, 1071.4285714285713, 1142.857142857143, 1214.2857142857142,
                                          1285.7142857142858, 1357.142857142857, 1428.5714285714284, 1500};

} // namespace

TEST_CASE("synthetic draws")
{
    const auto set = small_set();
    const auto a = draw_synthetic(set, 0.5, 4, 9);
    const auto b = draw_synthetic(set, 0.5, 4, 9);
    CHECK((a.draws.array() == b.draws.array()).all());
    CHECK(a.draws.rows() == 4);
    CHECK(a.draws.cols() == 3);
    CHECK_NOTHROW(a.validate());

    const auto tiny = draw_synthetic(set, 1e-20, 10, 9);
    for (Eigen::Index r = 0; r < 10; ++r) {
        for (Eigen::Index n = 0; n < 3; ++n) CHECK(tiny.draws(r, n) == doctest::Approx(set.y[static_cast<std::size_t>(n)]).epsilon(1e-9));
    }

    const int k = 100'000;
    const auto big = draw_synthetic(set, 1.0, k, 3);
    for (Eigen::Index n = 0; n < 3; ++n) {
        const double s = set.s[static_cast<std::size_t>(n)];
        const double mean = big.draws.col(n).mean();
        const double var = (big.draws.col(n).array() - mean).square().sum() / (k - 1.0);
        CHECK(std::abs(mean - set.y[static_cast<std::size_t>(n)]) <= 3.0 * s / std::sqrt(k));
        CHECK(std::abs(var / (s * s) - 1.0) <= 0.05);
    }

    // candidates share the noise: draws at two betas differ only by the scale of the deviation
    const auto half = draw_synthetic(set, 0.25, 4, 9);
    const auto full = draw_synthetic(set, 1.0, 4, 9);
    CHECK(half.draws(2, 1) - set.y[1] == doctest::Approx(0.5 * (full.draws(2, 1) - set.y[1])));

    CHECK_THROWS_AS(draw_synthetic(set, 0.0, 4, 1), ValidationError);
    CHECK_THROWS_AS(draw_synthetic(set, -1.0, 4, 1), ValidationError);
    CHECK_THROWS_AS(draw_synthetic(set, 1.0, 0, 1), ValidationError);
}

TEST_CASE("pushforward statistic")
{
    Matrix same = Matrix::Constant(5, 2, 4.0);
    CHECK(pushforward_stat(same) == std::vector<double>{0.0, 0.0});
    Matrix two(2, 1);
    two << 0.0, 2.0;
    CHECK(pushforward_stat(two)[0] == doctest::Approx(3.0 * std::sqrt(2.0)));
    CHECK(pushforward_stat(two)[0] == doctest::Approx(4.2426).epsilon(1e-4));
    CHECK_THROWS_AS(pushforward_stat(Matrix::Zero(1, 3)), ValidationError);
    CHECK_THROWS_AS(pushforward_stat(two, "2sigma"), ValidationError);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Matrix z(100'000, 1);
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, 0) = normal(rng);
    CHECK(std::abs(pushforward_stat(z)[0] - 3.0) <= 0.03);
}

TEST_CASE("consistency distance")
{
    const std::vector<double> s = {1.0, 2.0, 2.0};
    CHECK(consistency_distance(s, s) == 0.0);
    CHECK(consistency_distance(s, std::vector<double>{2.0, 4.0, 4.0}) == doctest::Approx(1.0));
    CHECK(consistency_distance(s, std::vector<double>{0.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(consistency_distance(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(consistency_distance(s, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("pushforward through predictors")
{
    Predictor constant;
    constant.inputs = 2;
    constant.outputs = 3;
    constant.fn = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 2.5); };
    Matrix samples(4, 2);
    samples << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK((pushforward(samples, constant).array() == 2.5).all());

    // identity-like model: the pushforward distribution is the posterior mapped through f
    Predictor affine;
    affine.inputs = 1;
    affine.outputs = 1;
    affine.fn = [](std::span<const double> nu, std::span<double> out) { out[0] = 3.0 * nu[0] - 1.0; };
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.5, 0.7);
    Matrix post(5000, 1);
    for (Eigen::Index r = 0; r < post.rows(); ++r) post(r, 0) = normal(rng);
    const Matrix pushed = pushforward(post, affine);
    CHECK(pushforward_stat(pushed)[0] == doctest::Approx(3.0 * pushforward_stat(post)[0]).epsilon(1e-12));

    const Matrix one = Matrix::Constant(1, 2, 0.0);
    const Matrix single = pushforward(one, constant);
    CHECK(single.rows() == 1);
    CHECK_THROWS_AS(pushforward(Matrix::Zero(3, 1), constant), ValidationError);
}

TEST_CASE("beta grid: single value and ties")
{
    DataSummarySet set;
    set.id = 1;
    set.coords = {1.0};
    set.y = {1.0};
    set.s = {0.5};
    InferenceSetup setup;
    setup.prior = GaussianPrior{{0.0}, {1.0}};
    setup.start = {0.0};
    setup.scales = {1.0};
    setup.sampler.steps = 4000;
    setup.sampler.burn_in = 500;
    setup.k = 5;
    setup.epsilon = 0.2;

    const auto single = calibrate_beta(set, std::vector<double>{0.3}, identity_predictor(), setup);
    CHECK(single.report.selected == 0);
    CHECK(single.report.best().beta == 0.3);
    CHECK(single.report.consistent == (single.report.best().rho <= 0.2));
    CHECK(single.collection.beta == 0.3);

    const auto tied = calibrate_beta(set, std::vector<double>{0.4, 0.4}, identity_predictor(), setup);
    CHECK(tied.report.candidates[0].rho == tied.report.candidates[1].rho);
    CHECK(tied.report.selected == 0);

    setup.epsilon = 1e-9;
    CHECK_FALSE(calibrate_beta(set, std::vector<double>{0.3}, identity_predictor(), setup).report.consistent);

    Predictor broken = identity_predictor();
    broken.fn = [](std::span<const double>, std::span<double>) { throw NumericalError("model failed"); };
    CHECK_THROWS_AS(calibrate_beta(set, std::vector<double>{0.3, 1.0}, broken, setup), NumericalError);
    CHECK_THROWS_AS(calibrate_beta(set, std::vector<double>{}, identity_predictor(), setup), ValidationError);
}


TEST_CASE("beta profile on an exact Arrhenius model")
{
    testmodels::ArrheniusTruth truth;
    truth.q = 1.03;
    truth.log10w = 0.15;
    const auto problem = testmodels::make_synthetic_problem(truth, temperatures, 0.05, 1, 2024);
    const auto space = testmodels::arrhenius_space(0.9, 1.1, -0.5, 0.5);
    const auto predictor = testmodels::arrhenius_predictor(temperatures, 0.0);
    auto setup = arrhenius_setup(space, 20, 20'000);
    const auto grid = logspace(0.02, 2.0, 10);
    const auto result = calibrate_beta(problem.sets[0], grid, predictor, setup);
    const auto& c = result.report.candidates;
    REQUIRE(c.size() == grid.size());
    for (const auto& candidate : c) CHECK_FALSE(candidate.failed);
    const auto sel = result.report.selected;
    CHECK(result.report.best().rho <= 0.2);
    CHECK(result.report.consistent);
    // the minimum lies strictly inside the grid and both ends are clearly worse
    CHECK(sel > 0);
    CHECK(sel + 1 < grid.size());
    CHECK(c.front().rho > 2.0 * c[sel].rho);
    CHECK(c.back().rho > 2.0 * c[sel].rho);
    for (const auto& candidate : c) CHECK(candidate.rho >= c[sel].rho);
    CHECK(result.collection.beta == grid[sel]);
    CHECK(result.collection.seed == result.report.data_seed);

    const auto again = calibrate_beta(problem.sets[0], grid, predictor, setup);
    CHECK(format_consistency_csv(again.report) == format_consistency_csv(result.report));
    CHECK(format_synthetic_csv(again.collection) == format_synthetic_csv(result.collection));

    const auto csv = format_consistency_csv(result.report);
    CHECK(csv.rfind("beta,rho,accepted_flag\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(grid.size() + 1));
}

TEST_CASE("joint calibration of two Arrhenius experiments")
{
    testmodels::ArrheniusTruth truth;
    truth.q = 1.03;
    truth.log10w = 0.15;
    const auto problem = testmodels::make_synthetic_problem(truth, temperatures, 0.05, 2, 11);
    const auto space = testmodels::arrhenius_space(0.9, 1.1, -0.5, 0.5);
    const auto predictor = testmodels::arrhenius_predictor(temperatures, 0.0);
    auto setup = arrhenius_setup(space, 20, 20'000);

    std::vector<SyntheticDataCollection> collections;
    for (const auto& set : problem.sets) collections.push_back(draw_synthetic(set, 0.3, setup.k, derive_seed(3, "s", set.id)));
    const std::vector<Predictor> predictors(2, predictor);

    const auto none = joint_calibrate(collections, problem.sets, predictors, WeightMode::none, setup);
    const auto uniform = joint_calibrate(collections, problem.sets, predictors, WeightMode::uniform, setup);
    const auto inverse = joint_calibrate(collections, problem.sets, predictors, WeightMode::inverse_count, setup);
    // equal counts: inverse-count weights are uniform, and uniform weights reproduce the unweighted chain
    CHECK((none.chain.states.array() == uniform.chain.states.array()).all());
    CHECK((inverse.chain.states.array() == uniform.chain.states.array()).all());

    REQUIRE(none.retained.rows() > 100);
    REQUIRE(none.summaries.size() == 2);
    const std::vector<double> truth_nu = {truth.q, truth.log10w};
    for (Eigen::Index j = 0; j < 2; ++j) {
        const auto col = none.retained.col(j);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1.0));
        CHECK(sd > 0.0);
        CHECK(std::abs(none.map.nu[static_cast<std::size_t>(j)] - truth_nu[static_cast<std::size_t>(j)]) <= 3.0 * sd);
    }
    for (const auto& summary : none.summaries) {
        const auto& set = problem.sets[static_cast<std::size_t>(summary.experiment_id - 1)];
        std::size_t covered = 0;
        for (std::size_t n = 0; n < set.size(); ++n) {
            if (std::abs(summary.mean[n] - set.y[n]) <= summary.three_sigma[n] + 3.0 * set.s[n]) ++covered;
        }
        CHECK(static_cast<double>(covered) >= 0.9 * static_cast<double>(set.size()));
        CHECK(summary.samples == static_cast<std::size_t>(none.retained.rows()));
    }

    CHECK_THROWS_AS(joint_calibrate(collections, problem.sets, std::vector<Predictor>(1, predictor), WeightMode::none, setup),
                    ValidationError);
}

TEST_CASE("experiment-specific copies")
{
    std::vector<Parameter> params;
    for (int j = 0; j < 24; ++j) params.push_back({"p" + std::to_string(j), 0.5, 0.0, 1.0, ""});
    const ParameterSpace space(params);
    const auto copies = experiment_specific_copies(space, {"p3", "p7", "p11"}, {1, 2, 3});
    CHECK(copies.space.size() == 24 - 3 + 9);
    CHECK(copies.space.index_of("p3") == std::nullopt);
    REQUIRE(copies.space.index_of("p7@2").has_value());
    CHECK(copies.space[*copies.space.index_of("p7@2")].upper == 1.0);
    REQUIRE(copies.binding.size() == 3);
    CHECK(copies.binding[1][7] == *copies.space.index_of("p7@2"));
    CHECK(copies.binding[0][0] == *copies.space.index_of("p0"));

    std::vector<double> nu(copies.space.size());
    for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = static_cast<double>(i);
    const auto projected = copies.project(2, nu);
    REQUIRE(projected.size() == 24);
    CHECK(projected[11] == nu[*copies.space.index_of("p11@3")]);
    CHECK(projected[5] == nu[*copies.space.index_of("p5")]);

    const auto none = experiment_specific_copies(space, {}, {1, 2});
    CHECK(none.space.names() == space.names());
    CHECK_THROWS_AS(experiment_specific_copies(space, {"missing"}, {1}), ValidationError);
    CHECK_THROWS_AS(experiment_specific_copies(space, {"p1", "p1"}, {1}), ValidationError);
    CHECK_THROWS_AS(experiment_specific_copies(space, {"p1"}, {}), ValidationError);
}

TEST_CASE("surrogate predictor binding")
{
    const ParameterSpace archive_space({{"a", 0.2, -1.0, 1.0, ""}, {"b", 0.4, 0.0, 2.0, ""}});
    // f = c0 + c1 psi_1(xi_a) + c2 psi_1(xi_b), with psi_1(x) = sqrt(3) x
    auto make = [&](double c0, double c1, double c2) {
        return PceSurrogate(archive_space, {MultiIndex{{0, 0}}, MultiIndex{{1, 0}}, MultiIndex{{0, 1}}}, {c0, c1, c2});
    };
    SurrogateArchive archive;
    archive.experiment_id = 4;
    archive.order = 1;
    archive.parameters = archive_space;
    archive.station_coords = {0.0, 1.0};
    archive.surrogates = {make(1.0, 0.5, 0.0), make(3.0, 0.5, 1.0)};

    DataSummarySet set;
    set.id = 4;
    set.coords = {0.5};
    set.y = {1.0};
    set.s = {0.1};

    // `a` is calibrated as the experiment copy, `b` is held at its nominal value
    const ParameterSpace calibration({{"a@4", 0.2, -1.0, 1.0, ""}, {"c", 0.0, 0.0, 1.0, ""}});
    const auto p = surrogate_predictor(archive, set, calibration);
    CHECK(p.inputs == 2);
    CHECK(p.outputs == 1);
    const double xi_b = (0.4 - 1.0) / 1.0;
    const double expected = 2.0 + 0.5 * std::sqrt(3.0) * 0.6 + 0.5 * std::sqrt(3.0) * xi_b;
    CHECK(p(std::vector<double>{0.6, 0.9})[0] == doctest::Approx(expected).epsilon(1e-12));

    const ParameterSpace plain({{"b", 0.4, 0.0, 2.0, ""}, {"a", 0.2, -1.0, 1.0, ""}});
    const auto q = surrogate_predictor(archive, set, plain);
    const double expected_plain = 2.0 + 0.5 * std::sqrt(3.0) * (-0.3) + 0.5 * std::sqrt(3.0) * 0.5;
    CHECK(q(std::vector<double>{1.5, -0.3})[0] == doctest::Approx(expected_plain).epsilon(1e-12));

    set.coords = {1.5};
    CHECK_THROWS_AS(surrogate_predictor(archive, set, plain), ValidationError);
}
