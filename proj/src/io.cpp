#include "restarts/io.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace restarts::io {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_number(std::string_view key, std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(value)) {
        throw SpecError(std::string(key),
                        fmt::format("value '{}' for key '{}' is not a finite number", text, key));
    }
    return value;
}

// Validates keys against the family and builds the distribution. Values are
// already numeric.
Distribution build(const std::string& family, std::map<std::string, double> values) {
    auto take = [&](const std::string& key, std::optional<double> fallback) {
        if (auto it = values.find(key); it != values.end()) {
            const double v = it->second;
            values.erase(it);
            return v;
        }
        if (!fallback) {
            throw SpecError(key, fmt::format("family '{}' requires key '{}'", family, key));
        }
        return *fallback;
    };

    auto positive = [&](const std::string& key, std::optional<double> fallback) {
        const double v = take(key, fallback);
        if (!(v > 0.0)) throw SpecError(key, fmt::format("key '{}' must be > 0, got {}", key, v));
        return v;
    };

    Family fam;
    if (family == "lognormal") {
        const double mu = take("mu", 0.0);
        fam = LogNormalParams{mu, positive("sigma", std::nullopt)};
    } else if (family == "gp") {
        const double sigma = positive("sigma", std::nullopt);
        fam = GeneralizedParetoParams{sigma, take("k", std::nullopt)};
    } else if (family == "weibull") {
        const double a = positive("a", std::nullopt);
        fam = WeibullParams{a, positive("k", std::nullopt)};
    } else {
        throw SpecError("family", fmt::format("unknown family '{}' (expected lognormal, gp or weibull)",
                                              family));
    }
    const double scale = positive("scale", 1.0);
    const double loc = take("loc", 0.0);
    if (!(loc >= 0.0)) throw SpecError("loc", fmt::format("key 'loc' must be >= 0, got {}", loc));
    if (!values.empty()) {
        const auto& key = values.begin()->first;
        throw SpecError(key, fmt::format("unknown key '{}' for family '{}'", key, family));
    }
    try {
        return Distribution(fam, scale, loc);
    } catch (const std::invalid_argument& e) {
        throw SpecError("", e.what());
    }
}

json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return v;
}

std::string csv_value(const std::optional<ExtendedNonNegReal>& v) {
    return v ? to_string(*v) : std::string();
}

}  // namespace

SpecError::SpecError(std::string key, const std::string& message)
    : std::invalid_argument(message), key_(std::move(key)) {}

Distribution parse_distribution(std::span<const std::string> tokens) {
    if (tokens.size() == 1 && !tokens[0].empty() && tokens[0].front() == '{') {
        json j;
        try {
            j = json::parse(tokens[0]);
        } catch (const json::parse_error& e) {
            throw SpecError("", fmt::format("invalid JSON distribution: {}", e.what()));
        }
        return distribution_from_json(j);
    }

    std::optional<std::string> family;
    std::map<std::string, double> values;
    for (const auto& token : tokens) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw SpecError(token, fmt::format("expected key=value, got '{}'", token));
        }
        std::string key = token.substr(0, eq);
        const std::string_view value = std::string_view(token).substr(eq + 1);
        if (key == "family") {
            if (family) throw SpecError(key, "key 'family' given twice");
            family = std::string(value);
            continue;
        }
        if (values.contains(key)) {
            throw SpecError(key, fmt::format("key '{}' given twice", key));
        }
        values.emplace(key, parse_number(key, value));
    }
    if (!family) throw SpecError("family", "missing key 'family'");
    return build(*family, std::move(values));
}

Distribution parse_distribution(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\n");
    if (first != std::string_view::npos && text[first] == '{') {
        const std::vector<std::string> one{std::string(text.substr(first))};
        return parse_distribution(one);
    }
    std::vector<std::string> tokens;
    std::istringstream in{std::string(text)};
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    return parse_distribution(tokens);
}

Distribution distribution_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("", "JSON distribution must be an object");
    auto fam_it = j.find("family");
    if (fam_it == j.end() || !fam_it->is_string()) {
        throw SpecError("family", "missing string key 'family'");
    }
    std::map<std::string, double> values;
    for (const auto& [key, value] : j.items()) {
        if (key == "family") continue;
        if (value.is_number()) {
            values.emplace(key, value.get<double>());
        } else if (value.is_string()) {
            values.emplace(key, parse_number(key, value.get<std::string>()));
        } else {
            throw SpecError(key, fmt::format("key '{}' must be a number", key));
        }
    }
    return build(fam_it->get<std::string>(), std::move(values));
}

std::string to_text(const Distribution& d) {
    const std::string params = std::visit(
        overloaded{[](const LogNormalParams& f) {
                       return fmt::format("family=lognormal mu={} sigma={}", f.mu, f.sigma);
                   },
                   [](const GeneralizedParetoParams& f) {
                       return fmt::format("family=gp sigma={} k={}", f.sigma, f.k);
                   },
                   [](const WeibullParams& f) {
                       return fmt::format("family=weibull a={} k={}", f.a, f.k);
                   }},
        d.family());
    return fmt::format("{} scale={} loc={}", params, d.scale(), d.location());
}

json to_json(const Distribution& d) {
    json j = std::visit(overloaded{[](const LogNormalParams& f) {
                                       return json{{"family", "lognormal"}, {"mu", f.mu}, {"sigma", f.sigma}};
                                   },
                                   [](const GeneralizedParetoParams& f) {
                                       return json{{"family", "gp"}, {"sigma", f.sigma}, {"k", f.k}};
                                   },
                                   [](const WeibullParams& f) {
                                       return json{{"family", "weibull"}, {"a", f.a}, {"k", f.k}};
                                   }},
                        d.family());
    j["scale"] = d.scale();
    j["loc"] = d.location();
    return j;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

json to_json(const ExtendedNonNegReal& v) {
    if (!v.is_finite()) return "inf";
    return v.value();
}

json to_json(const UsefulnessVerdict& v) {
    json intervals = json::array();
    for (const auto& iv : v.useful_intervals) intervals.push_back({iv.lo, iv.hi});
    return {{"status", std::string(to_string(v.status))},
            {"witness_p", v.witness_p ? json(*v.witness_p) : json(nullptr)},
            {"useful_intervals", intervals}};
}

json to_json(const OptimalRestart& r) {
    double speedup = r.unrestarted_mean.value() / r.expected_runtime.value();
    return {{"p_star", r.p_star},
            {"q_star", r.q_star},
            {"t_star", r.t_star},
            {"expected_runtime", to_json(r.expected_runtime)},
            {"unrestarted_mean", to_json(r.unrestarted_mean)},
            {"speedup", number_or_null(speedup)},
            {"boundary_case", r.boundary_case}};
}

json to_json(const RegionScan& scan) {
    json rows = json::array();
    for (std::size_t i = 0; i < scan.shape_values.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < scan.p_values.size(); ++j) row.push_back(scan.at(i, j));
        rows.push_back(std::move(row));
    }
    const auto smallest = scan.smallest_useful_shape();
    return {{"sigma", scan.shape_values},
            {"p", scan.p_values},
            {"useful", std::move(rows)},
            {"smallest_useful_sigma", smallest ? json(*smallest) : json(nullptr)}};
}

json to_json(std::span<const CurvePoint> curve, const ExtendedNonNegReal& mean) {
    json points = json::array();
    for (const auto& pt : curve) {
        points.push_back({{"p", pt.p}, {"expected_runtime", to_json(pt.expected_runtime)}});
    }
    return {{"mean", to_json(mean)}, {"points", std::move(points)}};
}

json to_json(const SimulationResult& r) {
    return {{"empirical_mean", number_or_null(r.empirical_mean)},
            {"std_error", r.std_error},
            {"total_restarts", r.total_restarts},
            {"censored_count", r.censored_count},
            {"replications", r.replications}};
}

void write_region_csv(std::ostream& out, const RegionScan& scan) {
    out << "sigma,p,useful\n";
    for (std::size_t i = 0; i < scan.shape_values.size(); ++i) {
        for (std::size_t j = 0; j < scan.p_values.size(); ++j) {
            out << format_number(scan.shape_values[i]) << ',' << format_number(scan.p_values[j])
                << ',' << (scan.at(i, j) ? "true" : "false") << '\n';
        }
    }
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve,
                     const ExtendedNonNegReal& mean) {
    out << "p,expected_runtime,mean\n";
    const std::string m = to_string(mean);
    for (const auto& pt : curve) {
        out << format_number(pt.p) << ',' << to_string(pt.expected_runtime) << ',' << m << '\n';
    }
}

ResolvedPolicy parse_policy(std::string_view text, const Distribution& d) {
    const std::string label(text);
    const auto colon = text.find(':');
    const std::string_view kind = text.substr(0, colon);
    const bool has_arg = colon != std::string_view::npos;
    const std::string_view arg = has_arg ? text.substr(colon + 1) : std::string_view{};

    auto level_arg = [&]() {
        const double p = parse_number("policy", arg);
        if (!(p > 0.0 && p < 1.0)) {
            throw SpecError("policy", fmt::format("policy level {} outside (0, 1)", p));
        }
        return p;
    };
    auto positive_arg = [&]() {
        const double v = parse_number("policy", arg);
        if (!(v > 0.0)) throw SpecError("policy", fmt::format("policy value {} must be > 0", v));
        return v;
    };
    auto no_arg = [&]() {
        if (has_arg) throw SpecError("policy", fmt::format("policy '{}' takes no argument", kind));
    };
    auto need_arg = [&]() {
        if (!has_arg) throw SpecError("policy", fmt::format("policy '{}' needs ':<value>'", kind));
    };

    if (kind == "none") {
        no_arg();
        return {label, NoRestart{}, mean(d)};
    }
    if (kind == "fixed") {
        need_arg();
        const double t = positive_arg();
        std::optional<ExtendedNonNegReal> analytic;
        if (t > d.location()) {
            const double p = cdf(d, t);
            analytic = p >= 1.0 ? mean(d) : expected_runtime_restarted(d, p);
        }
        return {label, FixedCutoff{t}, analytic};
    }
    if (kind == "fixed-q") {
        need_arg();
        const double p = level_arg();
        return {label, FixedCutoff{quantile(d, p)}, expected_runtime_restarted(d, p)};
    }
    if (kind == "luby") {
        need_arg();
        return {label, Luby{positive_arg()}, std::nullopt};
    }
    if (kind == "luby-q") {
        need_arg();
        const double base = quantile(d, level_arg());
        if (!(base > 0.0)) throw SpecError("policy", "Luby base Q(p) must be > 0");
        return {label, Luby{base}, std::nullopt};
    }
    if (kind == "optimal") {
        no_arg();
        const OptimalRestart opt = optimal_restart(d);
        if (opt.boundary_case) {
            throw SpecError("policy",
                            "the optimal restart is the p -> 0 limit, which no positive cut-off "
                            "realises; use fixed-q:<small p> instead");
        }
        return {label, FixedCutoff{opt.t_star}, opt.expected_runtime};
    }
    throw SpecError("policy", fmt::format(
                                  "unknown policy '{}' (expected none, fixed:<t>, fixed-q:<p>, "
                                  "luby:<base>, luby-q:<p> or optimal)",
                                  text));
}

void write_simulation_csv(std::ostream& out, std::span<const ResolvedPolicy> policies,
                          std::span<const SimulationResult> results) {
    out << "policy,empirical_mean,std_error,total_restarts,censored_count,replications,analytic\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << policies[i].label << ',' << format_number(r.empirical_mean) << ','
            << format_number(r.std_error) << ',' << r.total_restarts << ',' << r.censored_count
            << ',' << r.replications << ',' << csv_value(policies[i].analytic) << '\n';
    }
}

json simulation_report(const Distribution& d, const SimulationConfig& cfg,
                       std::span<const ResolvedPolicy> policies,
                       std::span<const SimulationResult> results) {
    json rows = json::array();
    std::uint64_t censored = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        json row = to_json(results[i]);
        row["policy"] = policies[i].label;
        row["analytic"] = policies[i].analytic ? to_json(*policies[i].analytic) : json(nullptr);
        censored += results[i].censored_count;
        rows.push_back(std::move(row));
    }
    json meta = {{"seed", cfg.seed},
                 {"generator", std::string(kGeneratorName)},
                 {"replications", cfg.replications},
                 {"max_total_time", results.empty() ? json(nullptr) : json(results[0].max_total_time)},
                 {"censored_total", censored}};
    return {{"metadata", std::move(meta)}, {"distribution", to_json(d)}, {"results", std::move(rows)}};
}

}  // namespace restarts::io
