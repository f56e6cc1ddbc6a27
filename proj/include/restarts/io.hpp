#ifndef RESTARTS_IO_HPP
#define RESTARTS_IO_HPP

#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "restarts/analysis.hpp"
#include "restarts/distributions.hpp"
#include "restarts/simulation.hpp"

namespace restarts::io {

/// Malformed distribution or policy text. key() names the offending key
/// (empty when the problem is not tied to one).
class SpecError : public std::invalid_argument {
public:
    SpecError(std::string key, const std::string& message);
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Parses `family=<lognormal|gp|weibull> key=value ...`.
///   lognormal: mu (default 0), sigma
///   gp:        sigma, k
///   weibull:   a, k
/// plus optional scale= (default 1) and loc= (default 0). Unknown, repeated
/// or missing keys raise SpecError. A single token starting with '{' is
/// read as the JSON form with the same keys.
Distribution parse_distribution(std::span<const std::string> tokens);
Distribution parse_distribution(std::string_view text);
Distribution distribution_from_json(const nlohmann::json& j);

/// Canonical flat text, e.g. `family=gp sigma=1 k=0.5 scale=1 loc=0`.
std::string to_text(const Distribution& d);
nlohmann::json to_json(const Distribution& d);

/// Shortest round-trip decimal; "inf" for +∞, "nan" for NaN.
std::string format_number(double v);

/// Numbers stay numbers; +∞ becomes the string "inf".
nlohmann::json to_json(const ExtendedNonNegReal& v);

nlohmann::json to_json(const UsefulnessVerdict& v);
nlohmann::json to_json(const OptimalRestart& r);
nlohmann::json to_json(const RegionScan& scan);
nlohmann::json to_json(std::span<const CurvePoint> curve, const ExtendedNonNegReal& mean);
nlohmann::json to_json(const SimulationResult& r);

/// Header `sigma,p,useful`, one row per cell, values `true`/`false`.
void write_region_csv(std::ostream& out, const RegionScan& scan);

/// Header `p,expected_runtime,mean`; the last column repeats E[X].
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve,
                     const ExtendedNonNegReal& mean);

/// A simulation policy together with how it was requested and, when the
/// cut-off corresponds to a known level, the analytic expected runtime.
struct ResolvedPolicy {
    std::string label;
    Policy policy;
    std::optional<ExtendedNonNegReal> analytic;
};

/// `none`, `fixed:<t>`, `fixed-q:<p>` (cut-off Q(p)), `luby:<base>`,
/// `luby-q:<p>` (base Q(p)) or `optimal` (cut-off from optimal_restart).
/// Throws SpecError for malformed text, NoImprovementError when `optimal`
/// is requested but restarts cannot help.
ResolvedPolicy parse_policy(std::string_view text, const Distribution& d);

/// Header `policy,empirical_mean,std_error,total_restarts,censored_count,replications,analytic`.
void write_simulation_csv(std::ostream& out, std::span<const ResolvedPolicy> policies,
                          std::span<const SimulationResult> results);

/// Full report: metadata (seed, generator, replications, budget), the
/// distribution and one entry per policy.
nlohmann::json simulation_report(const Distribution& d, const SimulationConfig& cfg,
                                 std::span<const ResolvedPolicy> policies,
                                 std::span<const SimulationResult> results);

}  // namespace restarts::io

#endif  // RESTARTS_IO_HPP
