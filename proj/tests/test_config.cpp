#include <doctest.h>

#include "perihom/config.hpp"
#include "perihom/errors.hpp"

#include <fstream>
#include <sstream>

using namespace perihom;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("defaults round-trip through serialization") {
    const RunConfig def;
    const auto text = serialize_config(def);
    const auto parsed = parse_config_text(text);
    CHECK(parsed == def);
    CHECK(serialize_config(parsed) == text);
}

TEST_CASE("minimal config applies defaults and matches the golden echo") {
    const auto cfg = parse_config_text("[sweep]\nepsilons = \"1/4 1/8 1/16\"\n");
    CHECK(cfg.inv_epsilons == std::vector<int>{4, 8, 16});
    CHECK(cfg.tau == 0.5);
    CHECK(cfg.micro_resolution == 12);
    const auto golden = read_file(std::string(PERIHOM_TEST_DATA_DIR) + "/minimal_echo.golden");
    CHECK(serialize_config(cfg) == golden);
}

TEST_CASE("unknown keys and sections are rejected") {
    CHECK_THROWS_AS(parse_config_text("[physics]\nfoo = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[nonsense]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("a = 1\n"), ConfigError);
}

TEST_CASE("the mollifier constraint rejects tiny delta at coarse epsilon") {
    RunConfig c;
    c.delta = 0.05;
    c.inv_epsilons = {4};
    CHECK_THROWS_WITH_AS(static_cast<void>(validate_config(c)),
                         doctest::Contains("standing assumption"), ConfigError);
}

TEST_CASE("exponent admissibility follows the scaling discussion") {
    RunConfig c;
    c.alpha = 0.5;
    CHECK_THROWS_WITH_AS(static_cast<void>(validate_config(c)),
                         doctest::Contains("not meaningful"), ConfigError);
    c.alpha = 1.0;
    c.beta = 0.5;
    CHECK_THROWS_AS(static_cast<void>(validate_config(c)), ConfigError);

    c.beta = 0.0; // legacy scaling allowed with a warning
    const auto w0 = validate_config(c);
    CHECK(!w0.empty());
    c.beta = 1.0;
    c.alpha = 2.0;
    const auto w1 = validate_config(c);
    CHECK(!w1.empty());
}

TEST_CASE("sweep epsilons must invert to integers") {
    CHECK_THROWS_AS(parse_config_text("[sweep]\nepsilons = \"0.3\"\n"), ConfigError);
    CHECK_NOTHROW(parse_config_text("[sweep]\nepsilons = \"0.25 0.125\"\n"));
    CHECK_THROWS_AS(parse_config_text("[sweep]\nepsilons = \"\"\n"), ConfigError);
}

TEST_CASE("config hash tracks content") {
    RunConfig a, b;
    CHECK(config_hash_hex(a) == config_hash_hex(b));
    b.tau = 0.75;
    CHECK(config_hash_hex(a) != config_hash_hex(b));
}

TEST_CASE("auto time step honors the finest grid and the cadence") {
    RunConfig c;
    CHECK(resolved_dt(c) == doctest::Approx(1e-3).epsilon(1e-14));
    c.inv_epsilons = {4};
    c.micro_resolution = 6;
    // h = 1/24 > 1e-3, so dt stays at the cap
    CHECK(resolved_dt(c) == doctest::Approx(1e-3).epsilon(1e-14));
    c.dt = 2.5e-3;
    CHECK(resolved_dt(c) == 2.5e-3);
}

TEST_CASE("materialized problems carry the defaults") {
    RunConfig c;
    c.micro_resolution = 6;
    c.inv_epsilons = {4};
    const auto geom = make_geometry(c);
    const auto grid = build_perforated_grid(geom, 0.25, {1, 1});
    const auto p = make_micro_problem(c, grid, 1e-3);
    CHECK(p.tau == 0.5);
    CHECK(p.a == 0.0);
    CHECK(p.u0.values.size() == static_cast<std::size_t>(grid.n_nodes));
    // the initial recipe keeps theta0 = Theta0(x, x/ε) in [0, u0]
    for (std::size_t i = 0; i < p.theta0.values.size(); ++i) {
        CHECK(p.theta0.values[i] >= 0.0);
        CHECK(p.theta0.values[i] <= p.u0.values[i] + 1e-12);
    }
}

TEST_CASE("hole fraction strings stay exact") {
    const auto cfg = parse_config_text("[geometry]\nhole = \"1/3 2/3\"\n"
                                       "[sweep]\nepsilons = \"1/4 1/8 1/16\"\n");
    CHECK(cfg.hole_lo == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
    CHECK_NOTHROW(make_geometry(cfg));
}
