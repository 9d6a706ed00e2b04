#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include "vsq/config.hpp"
#include "vsq/csv.hpp"

using namespace vsq;
using nlohmann::json;

namespace {

json base_config() {
    return json::parse(R"({
      "model": {
        "kernel": {"m": 2, "components": [{"kind": "fractional", "H": 0.3}, {"kind": "gamma", "H": 0.4, "lambda": 1.5}]},
        "b": [0.1, 0.2],
        "beta": [[-1.0, 0.5], [0.0, -2.0]],
        "sigma": [0.3, 0.4],
        "x0": [1.0, 0.0]
      },
      "grid": {"step": 0.01, "horizon": 2.0},
      "seed": 12345
    })");
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("model round trip") {
    const RunConfig c = parse_config(base_config());
    CHECK(c.model.m() == 2);
    CHECK(c.model.kernel[0].kind() == KernelKind::Fractional);
    CHECK(c.model.kernel[1].lambda() == 1.5);
    CHECK(c.model.beta(0, 1) == 0.5);
    CHECK(c.model.beta(1, 0) == 0.0);
    CHECK(c.grid->n_steps == 200);
    CHECK(c.seed == 12345);
    CHECK(c.output == "out");
    const ModelParams back = model_from_json(model_to_json(c.model));
    CHECK(back.beta == c.model.beta);
    CHECK(back.b == c.model.b);
    CHECK(kernel_to_json(back.kernel) == kernel_to_json(c.model.kernel));
}

TEST_CASE("blocks") {
    json j = base_config();
    j["cf"] = json::parse(R"({"t": 1.0, "forcing": {"atoms": [{"time": 0.5, "weight": [-1, [0, 2]]}]}})");
    j["simulation"] = json::parse(R"({"paths": 50, "scheme": "resolvent", "record_stride": 2})");
    j["limit"] = json::parse(R"({"u": [[-1, -2]], "riccati_grid": {"step": 0.1, "horizon": 10}})");
    j["density"] = json::parse(R"({"time": 1.0, "shifts": [0.1]})");
    const RunConfig c = parse_config(j);
    REQUIRE(c.cf);
    CHECK(c.cf->forcing.atoms.size() == 1);
    CHECK(c.cf->forcing.atoms[0].weight(1) == cplx(0.0, 2.0));
    CHECK(c.simulation->paths == 50);
    CHECK(c.simulation->scheme == Scheme::Resolvent);
    CHECK(c.limit->riccati_grid->n_steps == 100);
    CHECK_FALSE(c.limit->resolvent_grid.has_value());
    CHECK(c.density->shifts.size() == 1);
    CHECK_FALSE(c.acov.has_value());
}

TEST_CASE("validation errors name the offending key") {
    auto fails_with = [](json j, const char* needle) {
        CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains(needle), std::invalid_argument);
    };
    json j = base_config();
    j["extra"] = 1;
    fails_with(j, "unknown key 'extra'");

    j = base_config();
    j["model"]["sigma"] = json::array({0.3});
    fails_with(j, "model.sigma");

    j = base_config();
    j["model"]["beta"][1][0] = -0.1;
    fails_with(j, "model");

    j = base_config();
    j["model"]["kernel"]["components"][0]["H"] = 0.8;
    fails_with(j, "components[0]");

    j = base_config();
    j["grid"]["horizon"] = 2.005;
    fails_with(j, "whole number of steps");

    j = base_config();
    j["riccati"] = json::parse(R"({"forcing": {"atoms": [{"time": 0, "weight": [0.5, 0]}]}})");
    fails_with(j, "riccati.forcing");

    j = base_config();
    j["simulation"] = json::parse(R"({"scheme": "euler"})");
    fails_with(j, "simulation.scheme");

    j = base_config();
    j["seed"] = -3;
    fails_with(j, "seed");

    j = base_config();
    j["model"]["kernel"]["components"][0]["lambda"] = 1.0;
    fails_with(j, "fractional kernel takes no lambda");
}

TEST_CASE("complex scalars") {
    CHECK(complex_from_json(json(1.5), "x") == cplx(1.5, 0.0));
    CHECK(complex_from_json(json::array({1.0, -2.0}), "x") == cplx(1.0, -2.0));
    CHECK_THROWS_AS(complex_from_json(json("a"), "x"), std::invalid_argument);
    CHECK_THROWS_AS(complex_vector_from_json(json::array({1.0}), 2, "x"), std::invalid_argument);
}

TEST_CASE("csv output is round-trip exact") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    const auto path = (std::filesystem::temp_directory_path() / "vsq_test.csv").string();
    {
        CsvWriter w(path, {"t", "v"});
        w.row({0.5, 1.0 / 3.0});
        w.close();
    }
    std::ifstream is(path);
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    CHECK(text == "t,v\n0.5,0.33333333333333331\n");
    CHECK(std::stod("0.33333333333333331") == 1.0 / 3.0);
    std::filesystem::remove(path);
}

}
