#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace scalar_att::csv {

/// Shortest decimal representation that parses back to the same double.
std::string format(double x);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Strict parse of a whole field; returns false on trailing junk or empty input.
bool parse(std::string_view field, double& out);

}  // namespace scalar_att::csv
