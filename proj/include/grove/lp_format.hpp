#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "grove/model.hpp"

namespace grove {

/// Writes the model in CPLEX LP text (Minimize / Subject To / Bounds / General /
/// Binary / End). Row names carry the constraint tags. Throws IoError.
void write_lp(const MilpModel& model, std::ostream& out, const std::string& title = "grove");
void export_model(const MilpModel& model, const std::filesystem::path& path, const std::string& title = "grove");

/// Reads the subset of LP text produced by write_lp. Row tags are recovered from the
/// row-name prefix before the interval suffix. Throws ParseError with the line number.
MilpModel read_lp(std::istream& in);
MilpModel import_model(const std::filesystem::path& path);

}  // namespace grove
