#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "restarts/io.hpp"

using namespace restarts;
using nlohmann::json;

namespace {

std::string key_of(const char* text) {
    try {
        io::parse_distribution(std::string_view(text));
    } catch (const io::SpecError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("distribution text round trip") {
    const auto d = io::parse_distribution(std::string_view("family=gp sigma=1 k=0.5"));
    CHECK(io::to_text(d) == "family=gp sigma=1 k=0.5 scale=1 loc=0");
    const auto w = io::parse_distribution(std::string_view("family=weibull a=7 k=0.5 scale=2 loc=1.5"));
    CHECK(io::to_text(w) == "family=weibull a=7 k=0.5 scale=2 loc=1.5");
    CHECK(io::to_text(io::parse_distribution(io::to_text(w))) == io::to_text(w));
    const auto ln = io::parse_distribution(std::string_view("family=lognormal sigma=2"));
    CHECK(io::to_text(ln) == "family=lognormal mu=0 sigma=2 scale=1 loc=0");
    CHECK(io::to_text(io::parse_distribution(std::string_view("family=gp sigma=1 k=-1"))) ==
          "family=gp sigma=1 k=-1 scale=1 loc=0");
}

TEST_CASE("distribution JSON round trip") {
    const auto d = io::parse_distribution(std::string_view("family=lognormal mu=0.25 sigma=1.5 scale=3 loc=2"));
    const json j = io::to_json(d);
    CHECK(j["family"] == "lognormal");
    CHECK(j["scale"] == 3.0);
    CHECK(io::to_text(io::distribution_from_json(j)) == io::to_text(d));
    CHECK(io::to_text(io::parse_distribution(std::string_view(j.dump()))) == io::to_text(d));
    const std::vector<std::string> one = {R"({"family":"gp","sigma":2,"k":0.5})"};
    CHECK(io::to_text(io::parse_distribution(one)) == "family=gp sigma=2 k=0.5 scale=1 loc=0");
}

TEST_CASE("malformed distributions name the offending key") {
    CHECK(key_of("family=gp sigma=1") == "k");
    CHECK(key_of("family=gp sigma=1 k=0.5 beta=2") == "beta");
    CHECK(key_of("family=gp sigma=1 k=0.5 k=0.7") == "k");
    CHECK(key_of("family=cauchy x=1") == "family");
    CHECK(key_of("sigma=1 k=2") == "family");
    CHECK(key_of("family=lognormal sigma=abc") == "sigma");
    CHECK(key_of("family=lognormal sigma=-1") == "sigma");
    CHECK(key_of("family=weibull a=1 k=0") == "k");
    CHECK(key_of("family=weibull a=1 k=1 scale=0") == "scale");
    CHECK(key_of("family=weibull a=1 k=1 loc=-2") == "loc");
    CHECK(key_of("family=weibull a=1 k=inf") == "k");
    CHECK(key_of("family=gp sigma") == "sigma");
    CHECK(key_of(R"({"family":"gp","sigma":1,"k":"x"})") == "k");
    CHECK(key_of(R"({"family":"gp","sigma":1})") == "k");
    CHECK_THROWS_AS(io::parse_distribution(std::string_view("{not json")), io::SpecError);
}

TEST_CASE("number formatting") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(1e-300) == "1e-300");
    CHECK(io::format_number(INFINITY) == "inf");
    CHECK(io::format_number(NAN) == "nan");
    CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(io::to_json(ExtendedNonNegReal::infinity()) == "inf");
    CHECK(io::to_json(ExtendedNonNegReal(2.5)) == 2.5);
}

TEST_CASE("region CSV and JSON") {
    const auto scan = region_scan_lognormal({2.0, 2.0, 1}, {0.5, 0.5, 1});
    std::ostringstream csv;
    io::write_region_csv(csv, scan);
    CHECK(csv.str() == "sigma,p,useful\n2,0.5,true\n");
    const json j = io::to_json(scan);
    CHECK(j["useful"][0][0] == true);
    CHECK(j["smallest_useful_sigma"] == 2.0);
}

TEST_CASE("curve CSV encodes infinity") {
    const auto d = Distribution::generalized_pareto(1.0, 1.5);
    const std::vector<double> grid = {0.5};
    const auto curve = restarted_mean_curve(d, grid);
    std::ostringstream csv;
    io::write_curve_csv(csv, curve, mean(d));
    const std::string text = csv.str();
    CHECK(text.rfind("p,expected_runtime,mean\n0.5,", 0) == 0);
    CHECK(text.substr(text.size() - 5) == ",inf\n");
    CHECK(io::to_json(curve, mean(d))["mean"] == "inf");
}

TEST_CASE("policy parsing") {
    const auto d = Distribution::generalized_pareto(1.0, 0.5);
    CHECK(std::holds_alternative<NoRestart>(io::parse_policy("none", d).policy));
    CHECK(io::parse_policy("none", d).analytic->value() == 2.0);
    const auto fixed = io::parse_policy("fixed:0.5", d);
    CHECK(std::get<FixedCutoff>(fixed.policy).t == 0.5);
    CHECK(fixed.analytic->value() ==
          doctest::Approx(expected_runtime_restarted(d, cdf(d, 0.5)).value()).epsilon(1e-12));
    const auto fq = io::parse_policy("fixed-q:0.25", d);
    CHECK(std::get<FixedCutoff>(fq.policy).t == doctest::Approx(quantile(d, 0.25)).epsilon(1e-15));
    CHECK(std::get<Luby>(io::parse_policy("luby:2", d).policy).base == 2.0);
    CHECK(std::get<Luby>(io::parse_policy("luby-q:0.1", d).policy).base == quantile(d, 0.1));
    CHECK_FALSE(io::parse_policy("luby:2", d).analytic.has_value());

    CHECK_THROWS_AS(io::parse_policy("fixed", d), io::SpecError);
    CHECK_THROWS_AS(io::parse_policy("fixed:-1", d), io::SpecError);
    CHECK_THROWS_AS(io::parse_policy("fixed-q:1.5", d), io::SpecError);
    CHECK_THROWS_AS(io::parse_policy("none:3", d), io::SpecError);
    CHECK_THROWS_AS(io::parse_policy("sometimes", d), io::SpecError);
    CHECK_THROWS_AS(io::parse_policy("optimal", d), io::SpecError);  // boundary optimum
    CHECK_THROWS_AS(io::parse_policy("optimal", Distribution::weibull(1, 2)), NoImprovementError);

    const auto ln = Distribution::lognormal(0.0, 2.0);
    const auto opt = io::parse_policy("optimal", ln);
    CHECK(std::get<FixedCutoff>(opt.policy).t == optimal_restart(ln).t_star);
}

TEST_CASE("simulation report") {
    const auto d = Distribution::generalized_pareto(1.0, 0.0);
    const std::vector<io::ResolvedPolicy> policies = {io::parse_policy("none", d),
                                                      io::parse_policy("fixed:0.5", d)};
    SimulationConfig cfg;
    cfg.seed = 17;
    cfg.replications = 1000;
    const std::vector<Policy> raw = {policies[0].policy, policies[1].policy};
    const auto results = compare_policies(d, raw, cfg);
    const json report = io::simulation_report(d, cfg, policies, results);
    CHECK(report["metadata"]["seed"] == 17);
    CHECK(report["metadata"]["generator"] == "xoshiro256**/splitmix64");
    CHECK(report["metadata"]["replications"] == 1000);
    CHECK(report["results"].size() == 2);
    CHECK(report["results"][1]["policy"] == "fixed:0.5");
    CHECK(json::parse(report.dump()) == report);

    std::ostringstream csv;
    io::write_simulation_csv(csv, policies, results);
    CHECK(csv.str().rfind(
              "policy,empirical_mean,std_error,total_restarts,censored_count,replications,analytic\n",
              0) == 0);
}
