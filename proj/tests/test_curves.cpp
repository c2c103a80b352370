#include "compfade/curves.hpp"
#include "compfade/errors.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace compfade;
using namespace compfade::curves;

TEST_CASE("grid parsing") {
    const auto g = parse_grid("0.01:4:200");
    CHECK(g.min == 0.01);
    CHECK(g.max == 4.0);
    CHECK(g.points == 200);
    const auto xs = make_grid(g);
    CHECK(xs.size() == 200);
    CHECK(xs.front() == 0.01);
    CHECK(xs.back() == 4.0);
    for (const char* bad : {"1:0:5", "0:1:1", "0:1", "a:b:c", "0:1:5:7", "0:1:-3", "-1:1:3"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_grid(bad), DomainError);
    }
}

TEST_CASE("table checks") {
    CurveTable t;
    t.x = {0.0, 1.0, 2.0};
    t.values = {0.0, 0.5};
    CHECK_THROWS_AS(check_table(t), DomainError);
    t.values.push_back(0.1);
    CHECK_NOTHROW(check_table(t));
    t.x[2] = 1.0;
    CHECK_THROWS_AS(check_table(t), DomainError);
}

TEST_CASE("pdf tables") {
    const Model shadow = GammaShadowParams(1.0, 2.0);
    const std::vector<double> xs{0.0, 1.0, 2.0};
    const auto t = pdf_table(shadow, xs);
    CHECK(t.values[0] == 0.5);
    CHECK(t.values[1] == doctest::Approx(0.5 * std::exp(-0.5)));
    CHECK(t.atoms.empty());

    const Model extreme = CompositeModel{ExtremeParams(2.0, 1.1), GammaShadowParams(1.2, 0.8)};
    const auto e = pdf_table(extreme, xs);
    REQUIRE(e.atoms.size() == 1);
    CHECK(e.atoms[0].mass == doctest::Approx(std::exp(-2.2)));
    CHECK(e.values[0] == 0.0);

    const Model fig1 = CompositeModel{AkmParams(1.5, 1.0, 2.1), GammaShadowParams(1.1, 0.9)};
    const auto grid = make_grid({0.01, 4.0, 200});
    const auto f = pdf_table(fig1, grid);
    CHECK(f.values.size() == 200);
    for (double v : f.values) CHECK(v >= 0.0);
    EvalOptions oracle_opts;
    oracle_opts.oracle = true;
    const auto o = pdf_table(fig1, grid, oracle_opts);
    for (std::size_t i = 0; i < grid.size(); i += 20) {
        CHECK(std::fabs(f.values[i] - o.values[i]) <= 1e-4 * o.values[i]);
    }
    CHECK(f.metadata["path"] == "series");
    CHECK(o.metadata["path"] == "mixture-quadrature");
}

TEST_CASE("cdf tables") {
    const std::vector<double> xs{0.0, 0.5, 1.0, 2.0, 6.0, 40.0};
    const Model rayleigh = MultipathModel{AkmParams(2.0, 0.0, 1.0), RmsScale(1.0)};
    const auto r = cdf_table(rayleigh, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(r.values[i] == doctest::Approx(1.0 - std::exp(-xs[i] * xs[i])));

    const CompositeModel cm{ExtremeParams(1.7, 0.9), GammaShadowParams(2.0, 0.5)};
    const auto c = cdf_table(Model{cm}, xs);
    CHECK(c.values[0] == doctest::Approx(std::exp(-1.8)));
    for (std::size_t i = 1; i < xs.size(); ++i) {
        CHECK(c.values[i] >= c.values[i - 1]);
        const double direct =
            std::exp(-1.8) + oracle::tanh_sinh([&](double x) { return composite::mixture_pdf_continuous(cm, x); }, 0.0,
                                               xs[i], 1e-11);
        CHECK(std::fabs(c.values[i] - direct) <= 1e-7);
    }
    CHECK(c.values.back() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("csv round trip") {
    const Model m = CompositeModel{ExtremeParams(2.0, 1.1), GammaShadowParams(1.2, 0.8)};
    const auto t = pdf_table(m, make_grid({0.01, 3.0, 17}));
    std::stringstream ss;
    write_csv(t, ss);
    const std::string text = ss.str();
    CHECK(text.rfind("x,value\n", 0) == 0);
    CHECK(text.find("#atom,0,") != std::string::npos);
    const auto back = read_csv(ss);
    CHECK(back.x == t.x);
    CHECK(back.values == t.values);
    REQUIRE(back.atoms.size() == 1);
    CHECK(back.atoms[0].mass == t.atoms[0].mass);
}

TEST_CASE("json round trip") {
    const Model m = CompositeModel{AkmParams(1.5, 1.0, 2.1), GammaShadowParams(1.1, 0.9)};
    const auto t = pdf_table(m, make_grid({0.01, 4.0, 11}));
    const auto j = to_json(t);
    const auto back = from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.x == t.x);
    CHECK(back.values == t.values);
    CHECK(back.model_descriptor == t.model_descriptor);
    CHECK(back.metadata == t.metadata);
    CHECK(t.metadata["version"] == kToolVersion);
}

TEST_CASE("mode counting") {
    CHECK(count_modes(std::vector<double>{0, 1, 2, 1, 0}) == 1);
    CHECK(count_modes(std::vector<double>{0, 2, 2, 1}) == 1);
    CHECK(count_modes(std::vector<double>{0, 2, 1, 3, 0}) == 2);
    CHECK(count_modes(std::vector<double>{3, 2, 1}) == 1);
    CHECK(count_modes(std::vector<double>{1, 2, 3}) == 1);
    CHECK(count_modes(std::vector<double>{2, 1, 3}) == 2);
}

TEST_CASE("figure specifications") {
    for (int id = 1; id <= 4; ++id) {
        const auto spec = figure_spec(id);
        CHECK(spec.grid.min == 0.01);
        CHECK(spec.grid.max == 4.0);
        CHECK(spec.grid.points == 200);
        CHECK(spec.members.size() == spec.sweep_values.size());
    }
    const auto two = figure_spec(2);
    CHECK(two.sweep_parameter == "mu");
    CHECK(two.sweep_values == std::vector<double>{0.5, 1.0, 2.0, 4.0});
    for (const auto& member : two.members) {
        const auto& cm = std::get<CompositeModel>(member.model);
        const auto& p = std::get<AkmParams>(cm.multipath);
        CHECK(p.alpha() == 2.0);
        CHECK(p.kappa() == 4.0);
        CHECK(cm.shadow.b() == 1.8);
        CHECK(cm.shadow.omega() == 0.7);
    }
    CHECK(figure_spec(1).sweep_values == std::vector<double>{1.0, 1.5, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(figure_spec(0), DomainError);
    CHECK_THROWS_AS(figure_spec(5), DomainError);
}

TEST_CASE("figure 4 curves are normalized, non-negative and unimodal") {
    const auto curves = figure_curves(4);
    CHECK(curves.size() == 5);
    for (const auto& c : curves) {
        CHECK(std::fabs(c.metadata["total_mass"].get<double>() - 1.0) <= 1e-6);
        CHECK(c.metadata["nonnegative"].get<bool>());
        CHECK(c.metadata["modes"].get<int>() == 1);
        REQUIRE(c.atoms.size() == 1);
        CHECK(c.atoms[0].mass == doctest::Approx(std::exp(-2.2)));
        CHECK_NOTHROW(check_table(c));
    }
}

TEST_CASE("total mass of models") {
    CHECK(std::fabs(model_total_mass(Model{CompositeModel{AmParams(2.4, 1.3), GammaShadowParams(2.0, 0.7)}}) - 1.0) <=
          1e-8);
    CHECK(std::fabs(model_total_mass(Model{MultipathModel{ExtremeParams(1.3, 0.6), RmsScale(2.0)}}) - 1.0) <= 1e-8);
}
