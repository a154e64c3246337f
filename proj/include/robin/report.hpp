#pragma once

#include <string>

#include <json.hpp>

#include "robin/bounds.hpp"
#include "robin/eigensolve.hpp"

namespace robin::report {

/// Shortest text that parses back to the same double; "nan"/"inf" otherwise.
std::string format_number(double x);

nlohmann::json to_json(const bounds::BoundsReport& r);
nlohmann::json to_json(const EigenResult& r, bool with_field);

/// Header and row for the verification table.
std::string verify_csv_header();
std::string verify_csv_row(const bounds::BoundsReport& r);

/// Writes `text` to `path` through a temporary file and a rename, so an
/// existing file is never left half-written.
void write_atomic(const std::string& path, const std::string& text);

}  // namespace robin::report
