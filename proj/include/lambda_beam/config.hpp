#pragma once

// Plain-text `key = value` configuration with [atom], [vapor], [drive],
// [beam], [grid] and [run] sections.
//
// Numeric values may carry a unit suffix:
//   Hz2pi  value is multiplied by 2*pi (cyclic -> angular)
//   G31    value is multiplied by the configured Gamma31 (rates only)
// Anything else is SI. Keys absent from the file keep their
// default_rb87_d1() value; unknown sections or keys are errors.

#include "lambda_beam/params.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lambda_beam {

struct IniEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct IniDocument {
    std::map<std::string, std::vector<IniEntry>> sections;

    const std::vector<IniEntry>* section(const std::string& name) const;
};

IniDocument parse_ini(std::string_view text);

/// Splits "1.4 G31" into the number and its suffix and applies the suffix.
/// `gamma31` is only consulted for the G31 suffix; `allow_g31` is false for
/// non-rate quantities.
double parse_quantity(std::string_view text, double gamma31, bool allow_g31,
                      std::string_view field);

/// Builds a validated parameter set. Sections listed in `extra_sections` are
/// tolerated (left for the caller to interpret).
ParameterSet parameters_from(const IniDocument& doc,
                             std::span<const std::string> extra_sections = {});

ParameterSet parse_config(std::string_view text);
ParameterSet load_config(const std::filesystem::path& path);

/// Serializes every field in SI with 17 significant digits, plus the derived
/// Gamma3, Gamma4, delta and z_R for cross-checking on reload.
std::string serialize_config(const ParameterSet& params);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace lambda_beam
