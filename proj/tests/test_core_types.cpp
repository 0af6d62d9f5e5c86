#include "dfi/core_types.hpp"
#include "dfi/errors.hpp"
#include "dfi/io.hpp"
#include "dfi/seeds.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

using namespace dfi;

namespace {

std::string bounds_text(int rows)
{
    std::string text = "name,nominal,lower,upper,unit\n";
    for (int i = 0; i < rows; ++i) {
        text += "p" + std::to_string(i) + "," + std::to_string(i) + ".5," + std::to_string(i) + "," + std::to_string(i + 1) + ",eV\n";
    }
    return text;
}

std::string error_of(auto&& fn)
{
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("bounds row parses into an entry")
{
    const auto space = parse_parameter_space("name,nominal,lower,upper,unit\nQ_vU01_vO00, 4.8, 4.2, 5.4, eV\n", "b.csv");
    REQUIRE(space.size() == 1);
    CHECK(space[0].name == "Q_vU01_vO00");
    CHECK(space[0].nominal == 4.8);
    CHECK(space[0].lower == 4.2);
    CHECK(space[0].upper == 5.4);
    CHECK(space[0].unit == "eV");
}

TEST_CASE("bounds errors carry the row number")
{
    const std::string degenerate = "name,nominal,lower,upper,unit\na,0.5,0,1,-\nb,1,1,1,-\n";
    const auto msg = error_of([&] { parse_parameter_space(degenerate, "b.csv"); });
    CHECK(msg.find("degenerate bounds") != std::string::npos);
    CHECK(msg.find("row 3") != std::string::npos);

    const std::string duplicate = "name,nominal,lower,upper,unit\na,0.5,0,1,-\na,0.5,0,1,-\n";
    CHECK(error_of([&] { parse_parameter_space(duplicate, "b.csv"); }).find("row 3") != std::string::npos);

    const std::string malformed = "name,nominal,lower,upper,unit\na,zero,0,1,-\n";
    CHECK_THROWS_AS(parse_parameter_space(malformed, "b.csv"), ValidationError);

    const std::string outside = "name,nominal,lower,upper,unit\na,2,0,1,-\n";
    CHECK_THROWS_AS(parse_parameter_space(outside, "b.csv"), ValidationError);
}

TEST_CASE("thirty-row bounds file gives a thirty-dimensional space")
{
    CHECK(parse_parameter_space(bounds_text(30), "b.csv").size() == 30);
}

TEST_CASE("bounds file round trip")
{
    const auto dir = test::scratch_dir("bounds");
    const auto space = parse_parameter_space(bounds_text(5), "b.csv");
    write_parameter_space(dir / "b.csv", space);
    const auto again = load_parameter_space(dir / "b.csv");
    CHECK(again == space);
    CHECK(format_parameter_space(again) == format_parameter_space(space));
}

TEST_CASE("reference mapping is affine and invertible")
{
    const ParameterSpace space({{"a", 1.0, -2.0, 4.0, ""}, {"b", 0.0, 0.0, 1.0, ""}});
    const std::vector<double> nu = {-2.0, 1.0};
    const auto xi = space.to_reference(nu);
    CHECK(xi[0] == -1.0);
    CHECK(xi[1] == 1.0);
    const auto mid = space.to_reference(space.midpoint());
    CHECK(mid[0] == doctest::Approx(0.0));
    CHECK(mid[1] == doctest::Approx(0.0));
    const auto back = space.from_reference(space.to_reference(std::vector<double>{0.3, 0.7}));
    CHECK(back[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(back[1] == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("checksum tracks names and bounds")
{
    const ParameterSpace a({{"x", 0.5, 0.0, 1.0, ""}});
    const ParameterSpace b({{"x", 0.5, 0.0, 2.0, ""}});
    const ParameterSpace c({{"y", 0.5, 0.0, 1.0, ""}});
    CHECK(a.checksum() != b.checksum());
    CHECK(a.checksum() != c.checksum());
    CHECK(a.checksum() == ParameterSpace({{"x", 0.7, 0.0, 1.0, "K"}}).checksum());
}

TEST_CASE("default prior from bounds")
{
    const ParameterSpace space({{"a", 0.0, -3.0, 3.0, ""}, {"b", 3.0, 0.0, 6.0, ""}});
    const auto prior = default_prior(space);
    CHECK(prior.mean[0] == 0.0);
    CHECK(prior.sd[0] == 1.0);
    CHECK(prior.mean[1] == 3.0);
    CHECK(prior.sd[1] == 1.0);
    // mass inside the bounds is the +-3 sigma mass of a Gaussian
    for (std::size_t j = 0; j < 2; ++j) {
        const auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - prior.mean[j]) / (prior.sd[j] * std::sqrt(2.0))); };
        const double mass = cdf(space[j].upper) - cdf(space[j].lower);
        CHECK(mass == doctest::Approx(0.9973002039).epsilon(1e-9));
        CHECK(mass >= 0.9973 - 1e-6);
    }
}

TEST_CASE("data summary files and manifest")
{
    const auto dir = test::scratch_dir("summary");
    io::write_text(dir / "sub" / "one.csv", "station,coord1,y,s\n1,1000,2.0,0.1\n2,1100,3.0,0.2\n");
    io::write_text(dir / "sub" / "two.csv", "station,coord1,coord2,y,s\n1,1500,-3,0.01,0.001\n");
    io::write_text(dir / "manifest.csv", "id,label,path,dim\n1,first,sub/one.csv,1\n2,second,sub/two.csv,2\n");
    const auto sets = load_experiments(dir / "manifest.csv");
    REQUIRE(sets.size() == 2);
    CHECK(sets[0].size() == 2);
    CHECK(sets[0].coord(1)[0] == 1100.0);
    CHECK(sets[1].coord_dim == 2);
    CHECK(sets[1].coord(0)[1] == -3.0);
    CHECK(sets[1].label == "second");

    io::write_text(dir / "bad.csv", "station,coord1,y,s\n1,1000,2.0,0\n");
    CHECK_THROWS_AS(load_data_summary(dir / "bad.csv", 3, "bad", 1), ValidationError);

    const auto text = format_data_summary(sets[0]);
    io::write_text(dir / "again.csv", text);
    const auto again = load_data_summary(dir / "again.csv", 1, "first", 1);
    CHECK(again.y == sets[0].y);
    CHECK(again.s == sets[0].s);
    CHECK(again.coords == sets[0].coords);
}

TEST_CASE("log10 transform matches the first-order error propagation")
{
    DataSummarySet set;
    set.coords = {1.0, 2.0};
    set.y = {100.0, 0.5};
    set.s = {5.0, 0.01};
    const auto log_set = to_log10(set);
    CHECK(log_set.y[0] == doctest::Approx(2.0));
    // numerical derivative of log10 at y
    for (std::size_t n = 0; n < 2; ++n) {
        const double h = 1e-6 * set.y[n];
        const double slope = (std::log10(set.y[n] + h) - std::log10(set.y[n] - h)) / (2.0 * h);
        CHECK(log_set.s[n] == doctest::Approx(slope * set.s[n]).epsilon(1e-8));
    }
    set.y[1] = -1.0;
    CHECK_THROWS_AS(to_log10(set), ValidationError);
}

TEST_CASE("config parsing, validation and round trip")
{
    const auto config = parse_config("# comment\nmcmc.steps = 2000\nmcmc.burn_in = 100\nbeta.grid = logspace(0.1, 10, 3)\n"
                                     "synthetic.K.4 = 7\nlikelihood.weights = inverse-count\ninput.note = ignored\n",
                                     "c.cfg");
    CHECK(config.mcmc_steps == 2000);
    REQUIRE(config.beta_grid.size() == 3);
    CHECK(config.beta_grid[1] == doctest::Approx(1.0));
    CHECK(config.k_for(4) == 7);
    CHECK(config.k_for(1) == 100);
    CHECK(config.weights == WeightMode::inverse_count);

    const auto again = parse_config(config.format(), "again");
    CHECK(again.format() == config.format());
    CHECK(again.beta_grid == config.beta_grid);

    const auto msg = error_of([] { parse_config("mcmc.steps = 10\nbogus.key = 1\n", "c.cfg"); });
    CHECK(msg.find("unknown config key") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);

    CHECK_THROWS_AS(parse_config("beta.grid = 1, 0.5\n", "c"), ValidationError);
    CHECK_THROWS_AS(parse_config("consistency.epsilon = 0\n", "c"), ValidationError);
    CHECK_THROWS_AS(parse_config("mcmc.steps = 100\nmcmc.burn_in = 100\n", "c"), ValidationError);

    CalibrationConfig defaults;
    CHECK(defaults.beta_grid.size() == 20);
    CHECK(defaults.beta_grid.front() == doctest::Approx(0.01));
    CHECK(defaults.beta_grid.back() == doctest::Approx(100.0));
    CHECK(defaults.pce_order == 2);
    CHECK(defaults.data_space == DataSpace::linear);
}

TEST_CASE("bundled configs validate")
{
    const auto published = load_config(std::filesystem::path(DFI_SOURCE_DIR) / "configs" / "paper.cfg");
    CHECK(published.mcmc_steps == 1'000'000);
    CHECK(published.synthetic_k == 100);
    CHECK(published.jump == 0.5);
    CHECK(published.burn_in == 100'000);
    CHECK(published.subsample == 5);
    CHECK(published.beta_grid.size() == 20);
    CHECK_NOTHROW(load_config(std::filesystem::path(DFI_SOURCE_DIR) / "configs" / "demo.cfg"));
}

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.125}) {
        CHECK(io::parse_double(io::format_double(v), "v") == v);
    }
    CHECK(std::isnan(io::parse_double(io::format_double(std::numeric_limits<double>::quiet_NaN()), "v")));
    CHECK(io::parse_double(io::format_double(-std::numeric_limits<double>::infinity()), "v") < 0.0);
    CHECK_THROWS_AS(io::parse_double("1.5x", "v"), ValidationError);
}

TEST_CASE("seed derivation is stable and separates stages")
{
    CHECK(derive_seed(1, "synthetic", 3) == derive_seed(1, "synthetic", 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t master : {1, 2}) {
        for (const char* stage : {"synthetic", "beta-chain", "joint-chain"}) {
            for (std::uint64_t i = 0; i < 5; ++i) seen.insert(derive_seed(master, stage, i));
        }
    }
    CHECK(seen.size() == 30);
}

TEST_CASE("synthetic collection shape validation")
{
    SyntheticDataCollection c;
    c.k = 2;
    c.beta = 1.0;
    c.s = {1.0, 1.0, 1.0};
    c.draws = Matrix::Zero(2, 3);
    CHECK_NOTHROW(c.validate());
    c.beta = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.beta = 1.0;
    c.draws = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(c.validate(), ValidationError);
}
