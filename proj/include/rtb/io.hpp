#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include <json.hpp>

#include "rtb/action.hpp"
#include "rtb/oracle.hpp"
#include "rtb/saddle.hpp"

namespace rtb {

inline constexpr const char* kVersion = "rtbounce 1.0.0";

using Json = nlohmann::ordered_json;

Json to_json(cplx z);  // {"re": .., "im": ..}
Json to_json(const IntegratorConfig& c);
Json to_json(const Trajectory& tr, bool with_points = false);
Json to_json(const SaddleSolution& s);
Json to_json(const ActionBreakdown& a);
Json to_json(const SeriesCoefficients& s);
Json to_json(const DecayFit& f);
Json to_json(const GridSpec& g);
Json to_json(const RateSweep& r);

// t, Re z, Im z, Re v, Im v
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
// t, P, j at each probe, j at -y
void write_oracle_csv(std::ostream& os, const OracleRun& run);

// Flat key=value text; "[section]" prefixes following keys with "section.".
// '#' and ';' start comments. Later keys override earlier ones.
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config(std::istream& is);
ConfigMap load_config(const std::string& path);

}  // namespace rtb
