#pragma once

// Built-in spray families and construction of sprays from definition files.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spraylab/exprdsl.hpp"
#include "spraylab/finsler.hpp"
#include "spraylab/projective.hpp"
#include "spraylab/spray_core.hpp"

namespace spraylab {

struct FamilyParam {
    std::string name;
    std::string default_value;
    std::string description;
};

struct FamilyInfo {
    std::string name;
    std::string summary;
    std::vector<FamilyParam> params;
};

// Registry in listing order.
const std::vector<FamilyInfo>& families();

using Params = std::map<std::string, std::string>;

// Raises InputError on unknown families or keys, ParseError on bad expressions.
SprayChart make_family(const std::string& name, const Params& params = {});

// Spray with coefficients given by expressions G^1..G^n.
SprayChart expression_spray(std::vector<Expr> G, Box domain, std::string label, SprayInfo info = {});

SprayChart spray_from_definition(const SprayDefinition& def, const std::string& fallback_label);

// Randers data behind a chart whose metric is a Randers metric.
std::optional<RandersData> randers_data(const SprayChart& G);

// The volume form sqrt(det a) of the Riemannian or Randers metric behind G, if any.
std::optional<VolumeForm> metric_volume(const SprayChart& G);

}  // namespace spraylab
