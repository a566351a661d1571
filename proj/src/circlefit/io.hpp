#pragma once

#include <map>
#include <string>

#include "circlefit/geometry.hpp"

namespace circlefit {

// Round-trip-safe decimal rendering (17 significant digits).
std::string fmt_g17(double v);

// Dataset text format: one "x y" pair per line, '#' starts a comment,
// blank lines ignored. Non-finite values and malformed lines are rejected.
DataSet parse_dataset(const std::string& text);
DataSet load_dataset(const std::string& path);
std::string format_dataset(const DataSet& data);

// Writes via a temporary file in the same directory plus rename, so readers
// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);
void save_dataset(const DataSet& data, const std::string& path);

std::string read_file(const std::string& path);

// key=value lines, '#' comments; later keys override earlier ones.
std::map<std::string, std::string> parse_config(const std::string& text);

}  // namespace circlefit
